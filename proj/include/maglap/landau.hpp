#pragma once

#include "maglap/numerics.hpp"
#include "maglap/operators.hpp"
#include "maglap/parallel.hpp"

#include <vector>

namespace maglap {

/// Tensor eigenmode of the fiber operator -d^2/dx^2 + (b x - xi2)^2 for a
/// field b in the open quarter sector Arg b in (0, pi/2): an oscillator
/// eigenfunction of index k in the complex-shifted variable sqrt(b)(x - xi2/b)
/// times an oscillator eigenfunction of index l in xi2 / sqrt(cos(Arg b)).
/// The second factor supplies the cross-variable damping that makes the
/// product square integrable; the eigenvalue b(2k+1) does not see l at all,
/// so each level is infinitely degenerate.
struct LandauMode {
    int k = 0;  // oscillator index along the fiber variable
    int l = 0;  // oscillator index along xi2
    complexd b{1, 0};
    double theta = 0;       // Arg b
    double cos_theta = 1;   // cos(Arg b)
    complexd root_b{1, 0};  // principal square root of b

    complexd eigenvalue() const { return b * static_cast<double>(2 * k + 1); }

    complexd eval(double x, double xi2) const;

    /// First and second x-derivatives through the raising/lowering identities
    /// for oscillator eigenfunctions; no differencing involved.
    complexd dx(double x, double xi2) const;
    complexd dxx(double x, double xi2) const;
};

/// Checked constructor. Rejects negative indices, Arg b outside the open
/// interval (0, pi/2), and moduli |b| <= sin^2(Arg b), where the Gaussian
/// envelope of the mode loses positive definiteness and the mode stops
/// being square integrable.
LandauMode make_landau_mode(int k, int l, complexd b);

struct EigenPairReport {
    complexd eigenvalue;
    double residual = 0;  // ||(fiber - eigenvalue) h|| / ||h||
    double norm = 0;      // L2 norm of the mode
};

/// Relative L2 residual of the eigenvalue relation over a tensor quadrature
/// region shaped to the mode: the xi2 range and the x window around the
/// sweeping Gaussian center xi2/(|b| cos theta) are sized so the discarded
/// tail sits below 1e-28 of the peak. Derivatives enter through the ladder
/// identities. The norm is gated by recomputing at 3/2 the order; a relative
/// drift above 1e-8 raises accuracy_error. Requires k, l <= 10.
EigenPairReport landau_eigen_residual(const LandauMode& mode, int order = 160);

/// Residual of the conjugate relation: the complex-conjugated mode fed to the
/// fiber operator at conj(b), against the eigenvalue conj(b)(2k+1). The
/// second derivative comes from Richardson differences of eval, so this also
/// exercises the mode values themselves rather than the ladder algebra.
EigenPairReport landau_adjoint_residual(const LandauMode& mode, int order = 96);

/// Largest relative gap between the ladder derivatives (dx, dxx) and
/// Richardson differences of eval over a scattered point cloud.
double landau_fd_gap(const LandauMode& mode, int npoints = 60, unsigned seed = 4242);

struct ProjectionStep {
    int cap = 0;               // span of all h_kl with k, l <= cap
    double rel_residual = 0;   // ||f - projection|| / ||f||
    double gram_condition = 0;
};

struct ProjectionReport {
    std::vector<ProjectionStep> steps;
    bool conditioning_truncated = false;
    int effective_cap = -1;  // last cap whose Gram matrix was usable
};

/// Projects f onto the nested spans {h_kl : k, l <= cap} for cap = 0..max_cap
/// by a Gram solve over unit-normalized modes, regularized at the 1e-12
/// relative level (spectral components of the normalized Gram below that
/// cutoff are dropped), and reports the relative L2 residual per cap. The modes are total, so the residuals
/// must not increase; a rise beyond 1e-9 raises accuracy_error. Caps whose
/// Gram condition number exceeds 1e12 are dropped and the report is marked
/// truncated. max_cap is limited to 12: beyond that the Gram matrix is
/// numerically singular at double precision no matter the regularization.
/// f is sampled over the quadrature region of the largest mode, so it should
/// be supported near the origin, well inside that region.
ProjectionReport projection_completeness_demo(const Fn2& f, int max_cap, complexd b,
                                              Exec exec = Exec::Parallel, int order = 120);

/// Moment matrices of the fiber operator over span{h_kl : k, l <= cap},
/// row-major dim x dim with dim = (cap+1)^2: gram(i,j) = <h_i, h_j>,
/// first_moment(i,j) = <h_i, A h_j>, second_moment(i,j) = <A h_i, A h_j>.
/// From these, min_residual(lambda) evaluates the best least-squares
/// eigen-residual min ||(A - lambda) f|| / ||f|| over nonzero f in the span
/// without touching the quadrature again. It vanishes (to quadrature and
/// conditioning accuracy) exactly when lambda is one of b(2k+1), k <= cap.
struct SpanProbe {
    int cap = 0;
    complexd b;
    int dim = 0;
    std::vector<complexd> gram;
    std::vector<complexd> first_moment;
    std::vector<complexd> second_moment;

    double min_residual(complexd lambda) const;
};

/// Builds the probe by tensor quadrature; cap is limited to 8 to keep the
/// Gram matrix invertible in double precision.
SpanProbe make_span_probe(int cap, complexd b, int order = 120);

/// Smallest eigenvalue of the diagonally normalized Gram matrix of the modes
/// {h_kl : l = 0..lmax} at a single k. Strictly positive output means the
/// family stays linearly independent across the degenerate direction.
double fixed_k_gram_min_eig(int k, int lmax, complexd b, int order = 120);

}  // namespace maglap
