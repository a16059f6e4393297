#include "maglap/landau.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

namespace maglap {

namespace {

constexpr double kHalfPi = 1.5707963267948966;
constexpr double kPiQuarterInv = 0.7511255444649425;  // pi^{-1/4}
constexpr int kChunks = 16;
constexpr double kCondLimit = 1e12;

// Polynomial halves of the oscillator eigenfunctions, psi_k = p_k e^{-z^2/2}.
// The Gaussian factor is applied once per point, after the k-recurrence, so
// intermediate values stay polynomially bounded even where e^{-z^2/2} alone
// would overflow.
void scaled_osc_fill(int kmax, complexd z, complexd* p) {
    p[0] = kPiQuarterInv;
    if (kmax == 0) return;
    p[1] = std::sqrt(2.0) * z * p[0];
    for (int k = 1; k < kmax; ++k) {
        p[k + 1] = std::sqrt(2.0 / (k + 1.0)) * z * p[k] -
                   std::sqrt(k / (k + 1.0)) * p[k - 1];
    }
}

// Ladder combinations on the polynomial halves. The coefficients are the
// ones for the functions themselves; the shared Gaussian cancels out.
complexd ladder_d1(const complexd* p, int k) {
    complexd out = -std::sqrt((k + 1.0) / 2.0) * p[k + 1];
    if (k >= 1) out += std::sqrt(k / 2.0) * p[k - 1];
    return out;
}

complexd ladder_d2(const complexd* p, int k) {
    complexd out = -0.5 * (2.0 * k + 1.0) * p[k] +
                   0.5 * std::sqrt((k + 1.0) * (k + 2.0)) * p[k + 2];
    if (k >= 2) out += 0.5 * std::sqrt(double(k) * (k - 1.0)) * p[k - 2];
    return out;
}

// Quadrature region for modes up to (kmax, lmax): xi2 spans the Gaussian
// envelope e^{-gamma xi2^2} left after minimizing the exponent over x, and
// the x nodes sit in a window of half-width x_pad around the sweeping center
// xi2 / (|b| cos theta). Eight envelope widths plus the oscillator turning
// radius put the discarded tail below 1e-28 of the peak.
struct SweepBox {
    double xi_half = 0;
    double x_pad = 0;
    double center_rate = 0;
};

SweepBox sweep_box(int kmax, int lmax, complexd b) {
    const double beta = std::abs(b);
    const double theta = std::arg(b);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double gamma = (beta - st * st) / (beta * ct);
    SweepBox box;
    box.xi_half = (8.0 + std::sqrt(2.0 * lmax + 3.0)) / std::sqrt(gamma);
    box.x_pad = (8.0 + std::sqrt(2.0 * kmax + 3.0)) / std::sqrt(beta * ct);
    box.center_rate = 1.0 / (beta * ct);
    return box;
}

struct TensorNodes {
    SweepBox box;
    QuadratureRule xi;    // order nodes across [-xi_half, xi_half]
    QuadratureRule unit;  // order nodes on [-1, 1], scaled per row
    double x_at(int row, int col) const {
        return box.center_rate * xi.nodes[row] + box.x_pad * unit.nodes[col];
    }
    double weight(int row, int col) const {
        return xi.weights[row] * unit.weights[col] * box.x_pad;
    }
};

TensorNodes make_nodes(int kmax, int lmax, complexd b, int order) {
    TensorNodes nodes;
    nodes.box = sweep_box(kmax, lmax, b);
    nodes.xi = gauss_legendre(order, -nodes.box.xi_half, nodes.box.xi_half);
    nodes.unit = gauss_legendre(order, -1.0, 1.0);
    return nodes;
}

std::pair<int, int> chunk_range(int rows, int c) {
    return {rows * c / kChunks, rows * (c + 1) / kChunks};
}

// Pairs (k, l) with max(k, l) <= cap, grouped so that the pairs of every
// smaller cap form a prefix; nested spans then map to leading blocks of the
// moment matrices.
std::vector<std::pair<int, int>> block_ordered_pairs(int cap) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve((cap + 1) * (cap + 1));
    for (int m = 0; m <= cap; ++m) {
        for (int k = 0; k < m; ++k) pairs.emplace_back(k, m);
        for (int l = 0; l <= m; ++l) pairs.emplace_back(m, l);
    }
    return pairs;
}

struct PassSums {
    double res2 = 0;
    double norm2 = 0;
};

// One tensor-quadrature sweep of the eigenvalue defect and the squared norm.
// Everything is accumulated per xi2 row and merged in row order, so the
// result does not depend on the number of threads.
PassSums ladder_residual_pass(const LandauMode& m, int order) {
    const auto nodes = make_nodes(m.k, m.l, m.b, order);
    const complexd mu = m.eigenvalue();
    const double root_ct = std::sqrt(m.cos_theta);
    const int rows = order;

    std::vector<double> row_res(rows, 0.0), row_norm(rows, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        const double xi2 = nodes.xi.nodes[i];
        const double w = xi2 / root_ct;
        complexd pw[16];
        scaled_osc_fill(m.l, complexd(w, 0.0), pw);
        const double plw2 = std::norm(pw[m.l]);
        double acc_r = 0.0, acc_n = 0.0;
        for (int j = 0; j < order; ++j) {
            const double x = nodes.x_at(i, j);
            const complexd z = m.root_b * (x - xi2 / m.b);
            complexd pz[16];
            scaled_osc_fill(m.k + 2, z, pz);
            const complexd q = m.b * x - xi2;
            const complexd inner =
                -m.b * ladder_d2(pz, m.k) + (q * q - mu) * pz[m.k];
            const double damp = std::exp(-((z * z).real() + w * w));
            const double wt = nodes.weight(i, j);
            acc_r += wt * std::norm(inner) * plw2 * damp;
            acc_n += wt * std::norm(pz[m.k]) * plw2 * damp;
        }
        row_res[i] = acc_r;
        row_norm[i] = acc_n;
    }

    PassSums out;
    for (int i = 0; i < rows; ++i) {
        out.res2 += row_res[i];
        out.norm2 += row_norm[i];
    }
    return out;
}

void require_small_indices(const LandauMode& m, const char* what) {
    if (m.k > 10 || m.l > 10) {
        std::ostringstream msg;
        msg << what << ": index pair (" << m.k << ", " << m.l
            << ") is outside the supported range k, l <= 10";
        throw std::domain_error(msg.str());
    }
}

void validate_field(complexd b) { (void)make_landau_mode(0, 0, b); }

// Shared accumulation of Gram-type moments over the tensor grid. For each
// node the callback receives the basis values (and, when wanted, the values
// under the fiber operator) and the quadrature weight. Work is split into
// fixed chunks of xi2 rows merged in chunk order, which keeps the sums
// identical between serial and parallel execution.
struct MomentJob {
    bool with_operator = false;
    const std::vector<std::pair<int, int>>* pairs = nullptr;
    const TensorNodes* nodes = nullptr;
    complexd b;
    double cos_theta = 0;
    complexd root_b;
    int order = 0;
};

template <typename PerNode>
void sweep_basis(const MomentJob& job, Exec exec, PerNode&& per_node) {
    const auto& pairs = *job.pairs;
    const int n = static_cast<int>(pairs.size());
    int kneed = 0, lneed = 0;
    for (const auto& [k, l] : pairs) {
        kneed = std::max(kneed, k);
        lneed = std::max(lneed, l);
    }
    const int rows = job.order;
    const double root_ct = std::sqrt(job.cos_theta);

#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (int c = 0; c < kChunks; ++c) {
        const auto [lo, hi] = chunk_range(rows, c);
        std::vector<complexd> vals(n), op_vals(job.with_operator ? n : 0);
        for (int i = lo; i < hi; ++i) {
            const double xi2 = job.nodes->xi.nodes[i];
            const double w = xi2 / root_ct;
            complexd pw[16];
            scaled_osc_fill(lneed, complexd(w, 0.0), pw);
            for (int j = 0; j < job.order; ++j) {
                const double x = job.nodes->x_at(i, j);
                const complexd z = job.root_b * (x - xi2 / job.b);
                complexd pz[16];
                scaled_osc_fill(kneed + 2, z, pz);
                const complexd damp = std::exp(-0.5 * (z * z + w * w));
                const complexd q = job.b * x - xi2;
                for (int t = 0; t < n; ++t) {
                    const auto& [k, l] = pairs[t];
                    vals[t] = pz[k] * pw[l] * damp;
                    if (job.with_operator) {
                        op_vals[t] =
                            (-job.b * ladder_d2(pz, k) + q * q * pz[k]) * pw[l] * damp;
                    }
                }
                per_node(c, i * job.order + j, x, xi2, job.nodes->weight(i, j),
                         vals.data(), op_vals.data());
            }
        }
    }
}

MomentJob make_job(const std::vector<std::pair<int, int>>& pairs,
                   const TensorNodes& nodes, complexd b, bool with_operator,
                   int order) {
    MomentJob job;
    job.pairs = &pairs;
    job.nodes = &nodes;
    job.b = b;
    job.cos_theta = std::cos(std::arg(b));
    job.root_b = std::sqrt(b);
    job.with_operator = with_operator;
    job.order = order;
    return job;
}

Eigen::MatrixXcd hermitized_block(const std::vector<complexd>& flat, int n, int m) {
    Eigen::MatrixXcd out(m, m);
    for (int i = 0; i < m; ++i) {
        out(i, i) = complexd(flat[i * n + i].real(), 0.0);
        for (int j = i + 1; j < m; ++j) {
            out(i, j) = flat[i * n + j];
            out(j, i) = std::conj(flat[i * n + j]);
        }
    }
    return out;
}

}  // namespace

complexd LandauMode::eval(double x, double xi2) const {
    std::vector<complexd> pz(k + 1), pw(l + 1);
    const complexd z = root_b * (x - xi2 / b);
    const double w = xi2 / std::sqrt(cos_theta);
    scaled_osc_fill(k, z, pz.data());
    scaled_osc_fill(l, complexd(w, 0.0), pw.data());
    return pz[k] * pw[l] * std::exp(-0.5 * (z * z + w * w));
}

complexd LandauMode::dx(double x, double xi2) const {
    std::vector<complexd> pz(k + 2), pw(l + 1);
    const complexd z = root_b * (x - xi2 / b);
    const double w = xi2 / std::sqrt(cos_theta);
    scaled_osc_fill(k + 1, z, pz.data());
    scaled_osc_fill(l, complexd(w, 0.0), pw.data());
    return root_b * ladder_d1(pz.data(), k) * pw[l] *
           std::exp(-0.5 * (z * z + w * w));
}

complexd LandauMode::dxx(double x, double xi2) const {
    std::vector<complexd> pz(k + 3), pw(l + 1);
    const complexd z = root_b * (x - xi2 / b);
    const double w = xi2 / std::sqrt(cos_theta);
    scaled_osc_fill(k + 2, z, pz.data());
    scaled_osc_fill(l, complexd(w, 0.0), pw.data());
    return b * ladder_d2(pz.data(), k) * pw[l] *
           std::exp(-0.5 * (z * z + w * w));
}

LandauMode make_landau_mode(int k, int l, complexd b) {
    if (k < 0 || l < 0) {
        std::ostringstream msg;
        msg << "landau mode: negative index (" << k << ", " << l << ")";
        throw std::domain_error(msg.str());
    }
    const double theta = std::arg(b);
    if (!(theta > 0.0) || !(theta < kHalfPi)) {
        std::ostringstream msg;
        msg << "landau mode: Arg b = " << theta
            << " outside the open sector (0, pi/2)";
        throw std::domain_error(msg.str());
    }
    const double beta = std::abs(b);
    const double st = std::sin(theta);
    if (!(beta > st * st)) {
        std::ostringstream msg;
        msg << "landau mode: |b| = " << beta << " at Arg b = " << theta
            << " is at most sin^2(Arg b); the Gaussian envelope is not integrable";
        throw std::domain_error(msg.str());
    }
    LandauMode m;
    m.k = k;
    m.l = l;
    m.b = b;
    m.theta = theta;
    m.cos_theta = std::cos(theta);
    m.root_b = std::sqrt(b);
    return m;
}

EigenPairReport landau_eigen_residual(const LandauMode& mode, int order) {
    require_small_indices(mode, "landau eigen residual");
    if (order < 4)
        throw std::domain_error("landau eigen residual: order below 4");
    const PassSums coarse = ladder_residual_pass(mode, order);
    const PassSums fine = ladder_residual_pass(mode, (3 * order) / 2);
    const double drift = std::abs(coarse.norm2 - fine.norm2) / fine.norm2;
    if (!(drift < 1e-8)) {
        std::ostringstream msg;
        msg << "landau eigen residual: quadrature norm drift " << drift
            << " between orders " << order << " and " << (3 * order) / 2;
        throw accuracy_error(msg.str());
    }
    EigenPairReport rep;
    rep.eigenvalue = mode.eigenvalue();
    rep.norm = std::sqrt(fine.norm2);
    rep.residual = std::sqrt(fine.res2 / fine.norm2);
    return rep;
}

EigenPairReport landau_adjoint_residual(const LandauMode& mode, int order) {
    require_small_indices(mode, "landau adjoint residual");
    if (order < 4)
        throw std::domain_error("landau adjoint residual: order below 4");
    const auto nodes = make_nodes(mode.k, mode.l, mode.b, order);
    const complexd bbar = std::conj(mode.b);
    const complexd mu = bbar * double(2 * mode.k + 1);
    const int rows = order;

    std::vector<double> row_res(rows, 0.0), row_norm(rows, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        const double xi2 = nodes.xi.nodes[i];
        TestFunction1D conj_slice;
        conj_slice.value = [&mode, xi2](double t) {
            return std::conj(mode.eval(t, xi2));
        };
        double acc_r = 0.0, acc_n = 0.0;
        for (int j = 0; j < order; ++j) {
            const double x = nodes.x_at(i, j);
            const complexd v = conj_slice.value(x);
            const complexd r = apply_fiber(bbar, xi2, conj_slice, x, 2e-4) - mu * v;
            const double wt = nodes.weight(i, j);
            acc_r += wt * std::norm(r);
            acc_n += wt * std::norm(v);
        }
        row_res[i] = acc_r;
        row_norm[i] = acc_n;
    }

    double res2 = 0.0, norm2 = 0.0;
    for (int i = 0; i < rows; ++i) {
        res2 += row_res[i];
        norm2 += row_norm[i];
    }
    EigenPairReport rep;
    rep.eigenvalue = mu;
    rep.norm = std::sqrt(norm2);
    rep.residual = std::sqrt(res2 / norm2);
    return rep;
}

double landau_fd_gap(const LandauMode& mode, int npoints, unsigned seed) {
    if (npoints < 1)
        throw std::domain_error("landau fd gap: need at least one sample point");
    const auto box = sweep_box(mode.k, mode.l, mode.b);
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> xi_pick(-2.0, 2.0);
    std::uniform_real_distribution<double> off_pick(-3.0, 3.0);

    double worst = 0.0, scale = 1.0;
    for (int i = 0; i < npoints; ++i) {
        const double xi2 = xi_pick(gen);
        const double x = box.center_rate * xi2 + off_pick(gen);
        auto slice = [&mode, xi2](double t) { return mode.eval(t, xi2); };
        const complexd d1 = mode.dx(x, xi2);
        const complexd d2 = mode.dxx(x, xi2);
        worst = std::max(worst, std::abs(d1 - fd_d1(slice, x)));
        worst = std::max(worst, std::abs(d2 - fd_d2(slice, x)));
        scale = std::max({scale, std::abs(d1), std::abs(d2)});
    }
    return worst / scale;
}

ProjectionReport projection_completeness_demo(const Fn2& f, int max_cap, complexd b,
                                              Exec exec, int order) {
    if (!f)
        throw std::invalid_argument("projection demo: empty test function");
    if (max_cap < 0 || max_cap > 12) {
        std::ostringstream msg;
        msg << "projection demo: cap " << max_cap
            << " outside [0, 12]; larger Gram matrices are singular at double precision";
        throw std::domain_error(msg.str());
    }
    validate_field(b);

    const auto pairs = block_ordered_pairs(max_cap);
    const int n = static_cast<int>(pairs.size());
    const auto nodes = make_nodes(max_cap, max_cap, b, order);
    const auto job = make_job(pairs, nodes, b, false, order);

    // moment pass: Gram upper triangle, <h_i, f>, ||f||^2, f cached per node
    std::vector<std::vector<complexd>> gram_c(kChunks,
                                              std::vector<complexd>(n * n, 0.0));
    std::vector<std::vector<complexd>> beta_c(kChunks, std::vector<complexd>(n, 0.0));
    std::vector<double> f2_c(kChunks, 0.0);
    std::vector<complexd> fvals(order * order);
    sweep_basis(job, exec,
                [&](int c, int node, double x, double xi2, double wt,
                    const complexd* v, const complexd*) {
                    const complexd fv = f(x, xi2);
                    fvals[node] = fv;
                    f2_c[c] += wt * std::norm(fv);
                    auto& G = gram_c[c];
                    auto& beta = beta_c[c];
                    for (int i = 0; i < n; ++i) {
                        const complexd vi = std::conj(v[i]);
                        beta[i] += wt * vi * fv;
                        for (int j = i; j < n; ++j) G[i * n + j] += wt * vi * v[j];
                    }
                });

    std::vector<complexd> gram(n * n, 0.0), beta(n, 0.0);
    double f2 = 0.0;
    for (int c = 0; c < kChunks; ++c) {
        for (int i = 0; i < n * n; ++i) gram[i] += gram_c[c][i];
        for (int i = 0; i < n; ++i) beta[i] += beta_c[c][i];
        f2 += f2_c[c];
    }
    if (!(f2 > 0.0))
        throw std::invalid_argument(
            "projection demo: test function vanishes on the quadrature region");

    ProjectionReport report;
    for (int cap = 0; cap <= max_cap; ++cap) {
        const int m = (cap + 1) * (cap + 1);
        const Eigen::MatrixXcd G = hermitized_block(gram, n, m);

        // work with unit-norm modes: the raw Gram mixes mode norms spanning
        // many orders of magnitude, which inflates its condition number for
        // no structural reason
        const Eigen::VectorXd scale = G.diagonal().real().cwiseSqrt();
        Eigen::MatrixXcd N = G;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) N(i, j) /= scale(i) * scale(j);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(N);
        const double lmin = es.eigenvalues()(0);
        const double lmax = es.eigenvalues()(m - 1);
        const double cond = lmin > 0.0 ? lmax / lmin
                                       : std::numeric_limits<double>::infinity();
        if (!(cond < kCondLimit)) {
            report.conditioning_truncated = true;
            break;
        }

        // regularized solve at the 1e-12 relative level: spectral components
        // of the normalized Gram below the cutoff are dropped rather than
        // shifted, so a function lying exactly in the span keeps a residual
        // at the quadrature floor instead of inheriting the shift
        Eigen::VectorXcd rhs(m);
        for (int i = 0; i < m; ++i) rhs(i) = beta[i] / scale(i);
        const double cutoff = 1e-12 * lmax;
        Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(m);
        for (int i = 0; i < m; ++i) {
            if (es.eigenvalues()(i) <= cutoff) continue;
            const Eigen::VectorXcd v = es.eigenvectors().col(i);
            coef += v * (v.dot(rhs) / es.eigenvalues()(i));
        }
        for (int i = 0; i < m; ++i) coef(i) /= scale(i);

        // residual pass against the cached f values
        std::vector<double> res_c(kChunks, 0.0);
        sweep_basis(job, exec,
                    [&](int c, int node, double, double, double wt,
                        const complexd* v, const complexd*) {
                        complexd p = 0.0;
                        for (int i = 0; i < m; ++i) p += coef(i) * v[i];
                        res_c[c] += wt * std::norm(fvals[node] - p);
                    });
        double res2 = 0.0;
        for (int c = 0; c < kChunks; ++c) res2 += res_c[c];

        ProjectionStep step;
        step.cap = cap;
        step.rel_residual = std::sqrt(res2 / f2);
        step.gram_condition = cond;
        if (!report.steps.empty() &&
            step.rel_residual > report.steps.back().rel_residual + 1e-9) {
            std::ostringstream msg;
            msg << "projection demo: residual rose from "
                << report.steps.back().rel_residual << " (cap " << cap - 1
                << ") to " << step.rel_residual << " (cap " << cap << ")";
            throw accuracy_error(msg.str());
        }
        report.steps.push_back(step);
        report.effective_cap = cap;
    }
    return report;
}

double SpanProbe::min_residual(complexd lambda) const {
    using Eigen::MatrixXcd;
    MatrixXcd G(dim, dim), S(dim, dim), T(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            G(i, j) = gram[i * dim + j];
            S(i, j) = first_moment[i * dim + j];
            T(i, j) = second_moment[i * dim + j];
        }
    }
    MatrixXcd W = T - lambda * S.adjoint() - std::conj(lambda) * S +
                  std::norm(lambda) * G;
    W = 0.5 * (W + W.adjoint()).eval();
    MatrixXcd Gh = 0.5 * (G + G.adjoint()).eval();

    // congruence by the inverse mode norms; leaves the pencil eigenvalues
    // alone and keeps the Cholesky factor of the right side well scaled
    const Eigen::VectorXd scale = Gh.diagonal().real().cwiseSqrt();
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            const double s = scale(i) * scale(j);
            W(i, j) /= s;
            Gh(i, j) /= s;
        }
    }
    Gh += 1e-13 * MatrixXcd::Identity(dim, dim);

    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> ges(
        W, Gh, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw accuracy_error("span probe: generalized eigensolver failed");
    return std::sqrt(std::max(0.0, ges.eigenvalues()(0)));
}

SpanProbe make_span_probe(int cap, complexd b, int order) {
    if (cap < 0 || cap > 8) {
        std::ostringstream msg;
        msg << "span probe: cap " << cap << " outside [0, 8]";
        throw std::domain_error(msg.str());
    }
    validate_field(b);

    const auto pairs = block_ordered_pairs(cap);
    const int n = static_cast<int>(pairs.size());
    const auto nodes = make_nodes(cap, cap, b, order);
    const auto job = make_job(pairs, nodes, b, true, order);

    std::vector<std::vector<complexd>> g_c(kChunks, std::vector<complexd>(n * n, 0.0));
    std::vector<std::vector<complexd>> s_c(kChunks, std::vector<complexd>(n * n, 0.0));
    std::vector<std::vector<complexd>> t_c(kChunks, std::vector<complexd>(n * n, 0.0));
    sweep_basis(job, Exec::Parallel,
                [&](int c, int, double, double, double wt, const complexd* v,
                    const complexd* av) {
                    auto& G = g_c[c];
                    auto& S = s_c[c];
                    auto& T = t_c[c];
                    for (int i = 0; i < n; ++i) {
                        const complexd vi = std::conj(v[i]);
                        const complexd avi = std::conj(av[i]);
                        for (int j = 0; j < n; ++j) {
                            G[i * n + j] += wt * vi * v[j];
                            S[i * n + j] += wt * vi * av[j];
                            T[i * n + j] += wt * avi * av[j];
                        }
                    }
                });

    SpanProbe probe;
    probe.cap = cap;
    probe.b = b;
    probe.dim = n;
    probe.gram.assign(n * n, 0.0);
    probe.first_moment.assign(n * n, 0.0);
    probe.second_moment.assign(n * n, 0.0);
    for (int c = 0; c < kChunks; ++c) {
        for (int i = 0; i < n * n; ++i) {
            probe.gram[i] += g_c[c][i];
            probe.first_moment[i] += s_c[c][i];
            probe.second_moment[i] += t_c[c][i];
        }
    }
    return probe;
}

double fixed_k_gram_min_eig(int k, int lmax, complexd b, int order) {
    if (k < 0 || k > 12 || lmax < 0 || lmax > 12) {
        std::ostringstream msg;
        msg << "fixed-k gram: indices (" << k << ", lmax " << lmax
            << ") outside [0, 12]";
        throw std::domain_error(msg.str());
    }
    validate_field(b);

    std::vector<std::pair<int, int>> pairs;
    for (int l = 0; l <= lmax; ++l) pairs.emplace_back(k, l);
    const int n = lmax + 1;
    const auto nodes = make_nodes(k, lmax, b, order);
    const auto job = make_job(pairs, nodes, b, false, order);

    std::vector<std::vector<complexd>> g_c(kChunks, std::vector<complexd>(n * n, 0.0));
    sweep_basis(job, Exec::Parallel,
                [&](int c, int, double, double, double wt, const complexd* v,
                    const complexd*) {
                    auto& G = g_c[c];
                    for (int i = 0; i < n; ++i) {
                        const complexd vi = std::conj(v[i]);
                        for (int j = i; j < n; ++j) G[i * n + j] += wt * vi * v[j];
                    }
                });
    std::vector<complexd> gram(n * n, 0.0);
    for (int c = 0; c < kChunks; ++c)
        for (int i = 0; i < n * n; ++i) gram[i] += g_c[c][i];

    Eigen::MatrixXcd G = hermitized_block(gram, n, n);
    Eigen::VectorXd d = G.diagonal().real().cwiseSqrt();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) /= d(i) * d(j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace maglap
