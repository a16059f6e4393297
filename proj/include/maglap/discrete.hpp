#pragma once

#include "maglap/numerics.hpp"
#include "maglap/parallel.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace maglap {

enum class MatrixKind { FiberFd, RotatedHermite, FirstOrderFd, General };

// Matrix truncation of one of the model operators, held as a list of sparse
// blocks.  FiberFd and RotatedHermite consist of a single block (tridiagonal
// and pentadiagonal respectively); FirstOrderFd carries one block per xi2
// grid row, because that operator differentiates in xi1 only and the rows
// never couple.  General wraps an externally supplied matrix.
struct OperatorMatrix {
    MatrixKind kind = MatrixKind::General;
    std::vector<Eigen::SparseMatrix<complexd>> blocks;

    complexd b{};      // field value (FiberFd, RotatedHermite)
    double xi2 = 0.0;  // fiber offset (FiberFd)
    double L = 0.0;    // window half-width (FD kinds)
    double h = 0.0;    // grid spacing (FD kinds)

    // FD grid coordinates: the interior nodes -L + (j+1) h for FiberFd, the
    // endpoint-inclusive line -L + j h for FirstOrderFd (where the same
    // vector serves as both the xi1 and the xi2 axis).
    std::vector<double> points;

    int block_size() const;
    int block_count() const { return static_cast<int>(blocks.size()); }
    Eigen::MatrixXcd dense_block(int r = 0) const;

    // Matrix-vector action across all blocks.  For FirstOrderFd, v holds
    // grid samples row-major: v[r * N + j] sits at
    // (xi1, xi2) = (points[j], points[r]).
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
};

// Second-order centered finite differences for -d^2/dx^2 + (b x - xi2)^2 on
// [-L, L] with Dirichlet ends: h = 2L/(N+1), interior nodes x_j = -L + (j+1)h,
// off-diagonal -1/h^2, diagonal 2/h^2 + (b x_j - xi2)^2.
// Requires N >= 16 and L > 0.
OperatorMatrix fiber_matrix_fd(complexd b, double xi2, double L, int N);

// The oscillator with complex frequency, -d^2/dy^2 + b^2 y^2, in the basis of
// the N lowest real oscillator eigenfunctions.  Writing the operator as
// (-d^2/dy^2 + y^2) + (b^2 - 1) y^2 and using the ladder form
// y = (a + a^*)/sqrt(2), the exact matrix is
//
//   diag(2k+1) + (b^2 - 1) Y2,   Y2[k][k]   = (2k+1)/2,
//                                Y2[k][k+2] = Y2[k+2][k] = sqrt((k+1)(k+2))/2,
//
// pentadiagonal and complex symmetric: entry(j,k) = entry(k,j) for every b.
// Requires N >= 16.
OperatorMatrix rotated_oscillator_hermite(complexd b, int N);

// Finite differences for 2 (i xi1 + xi2) d/dxi1 + xi1^2 + xi2^2 + i on the
// square [-L, L]^2 with N points per direction including the endpoints,
// h = 2L/(N-1).  The xi1 derivative uses the centered stencil at interior
// columns and the one-sided three-point stencils (error O(h^2)) at the two
// boundary columns.  One block per xi2 row.  Requires N >= 32 and L > 0.
OperatorMatrix first_order_matrix_imag(double L, int N);

// Wraps a caller-supplied dense matrix as a single-block General operator.
OperatorMatrix general_matrix(const Eigen::MatrixXcd& entries);

// Smallest singular value of (M - lambda I), minimized over blocks.  Blocks
// of size <= 1500 use a dense SVD.  Larger blocks run inverse iteration with
// the shifted block and its adjoint factored sparsely once, iterating
// z <- (A^H A)^{-1} z through the two triangular solves (the normal-equations
// matrix itself is never formed, which would square the condition number and
// erase small singular values).  The Rayleigh estimate ||A z_k|| decreases
// monotonically toward sigma_min; iteration stops when its relative step
// falls below 1e-10, or when the trailing 100 steps move it by less than
// 1e-5 in total.  The second exit fires only when the bottom of the singular
// spectrum is a near-degenerate cluster, where the slow per-step mixing
// bounds the unresolved remainder by the same small width.  500 steps without
// either exit, or a failed factorization, raise accuracy_error.
double sigma_min(const OperatorMatrix& M, complexd lambda);

// Rectangular lambda grid, at most 512 points per side.  A side with a
// single point collapses to its lower bound.
struct LambdaGrid {
    double re_lo = 0.0, re_hi = 0.0;
    double im_lo = 0.0, im_hi = 0.0;
    int re_pts = 1, im_pts = 1;

    double re_step() const { return re_pts > 1 ? (re_hi - re_lo) / (re_pts - 1) : 0.0; }
    double im_step() const { return im_pts > 1 ? (im_hi - im_lo) / (im_pts - 1) : 0.0; }
    complexd at(int i_im, int j_re) const {
        return {re_lo + j_re * re_step(), im_lo + i_im * im_step()};
    }
};

// sigma_min(M - lambda) sampled over a grid; values(i, j) belongs to
// grid.at(i, j).  Points where sigma_min fails to converge are stored as NaN
// and counted in missing.
struct SigmaMinMap {
    LambdaGrid grid;
    Eigen::MatrixXd values;
    int missing = 0;
};

SigmaMinMap pseudospectrum_map(const OperatorMatrix& M, const LambdaGrid& grid,
                               Exec mode = Exec::Parallel);

struct FillingEntry {
    int n = 0;
    double L = 0.0;   // window half-width used for this n
    int N = 0;        // fine-grid size
    double h = 0.0;   // fine-grid spacing
    double sigma = 0.0;         // sigma_min on the fine grid
    double sigma_coarse = 0.0;  // same quantity at spacing 2h
    bool resolved = false;      // fine and coarse agree within 25%
};

struct FillingScan {
    std::vector<FillingEntry> entries;
    // sigma strictly falls across consecutive entries, except between pairs
    // that both sit at the smallness floor (10^-6 of the first entry), where
    // the values are solve-roundoff residue and carry no order
    bool strictly_decreasing = false;
    double overall_drop = 0.0;  // first sigma / last sigma
};

// sigma_min(fiber(xi2 = n) - lambda) for each n in ns, on windows that grow
// with n: L_n = (t + 3d)(n+1) with t = 1/cos(Arg b), which keeps the ray
// x ~ t n where mass concentrates inside the box with margin ~ 2 d n.  The
// grid size N is chosen so h <= target_h (and at least 1601 points, keeping
// every solve on the sparse path).  Each entry is recomputed at spacing 2h;
// the pair must agree within 25% (resolved) unless both values have already
// fallen 10^6 below the first entry, where the grids only certify smallness.
// A disagreement beyond a factor of 8 above that floor means the window or
// resolution cannot carry the claim and raises accuracy_error.
//
// Requires Arg b in [0, pi/2) -- real b > 0 is the self-adjoint control,
// where sigma stabilizes at dist(lambda, spectrum) instead of falling --
// plus |b| > 0, d > 0, and a strictly increasing, nonempty ns.
FillingScan filling_scan(complexd b, complexd lambda, const std::vector<int>& ns,
                         double d = 0.4, double target_h = 0.01,
                         Exec mode = Exec::Parallel);

}  // namespace maglap
