#include "maglap/quasimode_complex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "maglap/operators.hpp"

namespace maglap {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TensorRule {
    std::vector<QuadratureRule> t_pieces;
    QuadratureRule xi;
};

TensorRule make_rule(const ComplexQuasimodeConfig& cfg, int n, int order) {
    const double c = cfg.t_theta, d = cfg.d;
    TensorRule r{{gauss_legendre(order, c - 2 * d, c - d),
                  gauss_legendre(order, c - d, c + d),
                  gauss_legendre(order, c + d, c + 2 * d)},
                 gauss_legendre(order, n - 1.0, n + 1.0)};
    return r;
}

// Bracket G with (H_fiber - lambda) Psi_n = G * u on the xi2 window.  The
// cutoff rides on t = x / xi2, so each x-derivative of phi costs 1/xi2.
complexd residual_bracket(const ComplexQuasimodeConfig& cfg, complexd coeff,
                          double t, double x, double xi2) {
    const double phi = cfg.profile.value(t);
    const double phi1 = cfg.profile.d1(t);
    const double phi2 = cfg.profile.d2(t);
    if (phi == 0.0 && phi1 == 0.0 && phi2 == 0.0) return {0.0, 0.0};
    const complexd Z = zeta(cfg.b, x, xi2);
    complexd g = phi * coeff / (Z * Z);
    if (phi1 != 0.0) {
        const complexd dlog = std::sqrt(2.0 * cfg.b) * (-0.5 * Z + cfg.mu / Z);
        g -= 2.0 * (phi1 / xi2) * dlog;
    }
    if (phi2 != 0.0) g -= phi2 / (xi2 * xi2);
    return g;
}

struct LogPair {
    double log_norm_sq;
    double log_residual_sq;
};

LogPair accumulate(const ComplexQuasimodeConfig& cfg, int n, int order) {
    const complexd coeff = residual_coefficient(cfg.lambda, cfg.b);
    const TensorRule rule = make_rule(cfg, n, order);
    std::vector<double> norm_terms, res_terms;
    norm_terms.reserve(3 * order * order);
    res_terms.reserve(3 * order * order);

    for (const auto& piece : rule.t_pieces) {
        for (size_t i = 0; i < piece.nodes.size(); ++i) {
            const double t = piece.nodes[i];
            const double wt = piece.weights[i];
            const double phi = cfg.profile.value(t);
            for (size_t j = 0; j < rule.xi.nodes.size(); ++j) {
                const double xi2 = rule.xi.nodes[j];
                const double x = t * xi2;
                // x = t xi2 turns dx dxi2 into xi2 dt dxi2.
                const double log_w =
                    std::log(wt) + std::log(rule.xi.weights[j]) + std::log(xi2);
                const double log_u_sq = log_mode_sq(cfg, x, xi2);
                if (phi > 0.0) {
                    norm_terms.push_back(log_w + 2.0 * std::log(phi) +
                                         log_u_sq);
                }
                const complexd g = residual_bracket(cfg, coeff, t, x, xi2);
                const double ga = std::abs(g);
                if (ga > 0.0) {
                    res_terms.push_back(log_w + 2.0 * std::log(ga) + log_u_sq);
                }
            }
        }
    }
    return {log_sum_exp(norm_terms), log_sum_exp(res_terms)};
}

}  // namespace

ComplexQuasimodeConfig make_complex_config(double theta, double d,
                                           complexd lambda, int quad_order,
                                           int n_lo, int n_hi) {
    if (!(theta > 0.0) || !(theta < kPi / 2)) {
        std::ostringstream os;
        os << "theta = " << theta << " outside (0, pi/2)";
        throw std::domain_error(os.str());
    }
    const double bound = std::tan(theta);
    if (!(d > 0.0) || !(d < bound)) {
        std::ostringstream os;
        os << "d = " << d << " outside (0, tan(theta) = " << bound << ")";
        throw std::domain_error(os.str());
    }
    if (quad_order < 8) {
        throw std::domain_error("quadrature order below 8");
    }
    if (n_lo < 2 || n_hi < n_lo) {
        std::ostringstream os;
        os << "n-range [" << n_lo << ", " << n_hi
           << "] invalid; need 2 <= n_lo <= n_hi";
        throw std::domain_error(os.str());
    }

    ComplexQuasimodeConfig cfg;
    cfg.theta = theta;
    cfg.d = d;
    cfg.lambda = lambda;
    cfg.quad_order = quad_order;
    cfg.n_lo = n_lo;
    cfg.n_hi = n_hi;
    cfg.b = std::polar(1.0, theta);
    cfg.mu = lambda / (2.0 * cfg.b) - 0.5;
    const double ct = std::cos(theta), st = std::sin(theta);
    cfg.t_theta = 1.0 / ct;
    cfg.p_max = st * st / ct;
    cfg.kappa = ct * (st * st / (ct * ct) - d * d);
    cfg.profile = CutoffProfile::bump(cfg.t_theta, d);

    const double kappa_alt = growth_exponent(cfg, cfg.t_theta + d);
    if (std::abs(cfg.kappa - kappa_alt) >
        1e-12 * std::max(1.0, std::abs(cfg.kappa))) {
        throw std::logic_error("kappa cross-check failed");
    }

    // Arg Z along the ray x = t xi2 does not depend on xi2 > 0; it is
    // largest at the left edge of the support.  If it reaches pi there, the
    // power factor's branch cut enters the support and the mode stops being
    // smooth where the family lives.
    const double worst_arg =
        std::arg(zeta(cfg.b, cfg.t_theta - 2 * d, 1.0));
    if (worst_arg > kPi - 1e-6) {
        throw std::domain_error(
            "support reaches the branch cut of the power factor; "
            "reduce d or theta");
    }
    return cfg;
}

double growth_exponent(const ComplexQuasimodeConfig& cfg, double t) {
    const double ct = std::cos(cfg.theta);
    return -ct * t * t + 2.0 * t - ct;
}

complexd zeta(complexd b, double x, double xi2) {
    return std::sqrt(2.0 * b) * (x - xi2 / b);
}

complexd local_mode_general(complexd b, complexd lambda, double x,
                            double xi2) {
    const complexd Z = zeta(b, x, xi2);
    const complexd mu = lambda / (2.0 * b) - 0.5;
    return std::exp(-Z * Z / 4.0) * principal_power(Z, mu);
}

complexd local_mode(const ComplexQuasimodeConfig& cfg, double x, double xi2) {
    const complexd Z = zeta(cfg.b, x, xi2);
    return std::exp(-Z * Z / 4.0) * principal_power(Z, cfg.mu);
}

complexd local_mode_dx(const ComplexQuasimodeConfig& cfg, double x,
                       double xi2) {
    const complexd Z = zeta(cfg.b, x, xi2);
    return std::sqrt(2.0 * cfg.b) * (-0.5 * Z + cfg.mu / Z) *
           local_mode(cfg, x, xi2);
}

double log_mode_sq(const ComplexQuasimodeConfig& cfg, double x, double xi2) {
    const complexd Z = zeta(cfg.b, x, xi2);
    return -0.5 * (Z * Z).real() - 2.0 * std::arg(Z) * cfg.mu.imag() +
           2.0 * cfg.mu.real() * std::log(std::abs(Z));
}

complexd quasimode(const ComplexQuasimodeConfig& cfg, int n, double x,
                   double xi2) {
    if (xi2 < n - 1.0 || xi2 > n + 1.0) return {0.0, 0.0};
    const double phi = cfg.profile.value(x / xi2);
    if (phi == 0.0) return {0.0, 0.0};
    return phi * local_mode(cfg, x, xi2);
}

complexd residual_value(const ComplexQuasimodeConfig& cfg, int n, double x,
                        double xi2) {
    if (xi2 < n - 1.0 || xi2 > n + 1.0) return {0.0, 0.0};
    const double t = x / xi2;
    const complexd coeff = residual_coefficient(cfg.lambda, cfg.b);
    const complexd g = residual_bracket(cfg, coeff, t, x, xi2);
    if (g == complexd(0.0, 0.0)) return {0.0, 0.0};
    return g * local_mode(cfg, x, xi2);
}

QuasimodeReport norm_and_residual(const ComplexQuasimodeConfig& cfg, int n,
                                  double gate_tol) {
    if (n < 2) throw std::domain_error("quasimode index must be at least 2");

    const LogPair coarse = accumulate(cfg, n, cfg.quad_order);
    const LogPair fine = accumulate(cfg, n, 2 * cfg.quad_order);
    if (std::abs(fine.log_norm_sq - coarse.log_norm_sq) > gate_tol ||
        std::abs(fine.log_residual_sq - coarse.log_residual_sq) > gate_tol) {
        std::ostringstream os;
        os << "quadrature for n = " << n << " not converged at order "
           << cfg.quad_order << ": norm drift "
           << std::abs(fine.log_norm_sq - coarse.log_norm_sq)
           << ", residual drift "
           << std::abs(fine.log_residual_sq - coarse.log_residual_sq);
        throw accuracy_error(os.str());
    }

    QuasimodeReport rep;
    rep.n = n;
    rep.log_norm_sq = fine.log_norm_sq;
    rep.log_residual_sq = fine.log_residual_sq;
    rep.log_ratio = fine.log_residual_sq - fine.log_norm_sq;
    const double re_ratio = (cfg.lambda / cfg.b).real();
    rep.log_norm_model =
        cfg.p_max * (n - 1.0) * (n - 1.0) + (re_ratio - 1.0) * std::log(n);
    return rep;
}

std::vector<QuasimodeReport> reports_for_range(const ComplexQuasimodeConfig& cfg,
                                               Exec mode, double gate_tol) {
    const int count = cfg.n_hi - cfg.n_lo + 1;
    std::vector<QuasimodeReport> out(count);
    if (mode == Exec::Serial) {
        for (int i = 0; i < count; ++i) {
            out[i] = norm_and_residual(cfg, cfg.n_lo + i, gate_tol);
        }
        return out;
    }

    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
        try {
            out[i] = norm_and_residual(cfg, cfg.n_lo + i, gate_tol);
        } catch (...) {
#pragma omp critical
            {
                if (!err) err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

double residual_fd_gap(const ComplexQuasimodeConfig& cfg, int n, double h) {
    const double c = cfg.t_theta, d = cfg.d;
    const double t_samples[] = {c - 1.7 * d, c - 1.3 * d, c - 0.8 * d,
                                c - 0.3 * d, c,           c + 0.4 * d,
                                c + 0.9 * d, c + 1.4 * d, c + 1.8 * d};
    const double xi_offsets[] = {-0.6, -0.2, 0.3, 0.7};
    const complexd coeff = residual_coefficient(cfg.lambda, cfg.b);

    // Psi_n carries exponents of order n^2, so differencing raw values would
    // amplify their evaluation noise by 1/h^2.  Instead the stencil is
    // applied to Psi_n / u(x_0), with the log of that ratio assembled from
    // the step delta = Z(s) - Z(x_0) so no large quantity is ever formed or
    // cancelled; the overall log scale is reattached only for the comparison.
    double best_diff = -1e300, best_ref = -1e300;
    for (double off : xi_offsets) {
        const double xi2 = n + off;
        for (double t : t_samples) {
            const double x = t * xi2;
            const complexd Z0 = zeta(cfg.b, x, xi2);
            const complexd root = std::sqrt(2.0 * cfg.b);
            auto hat = [&](double s) {
                const double phi = cfg.profile.value(s / xi2);
                if (phi == 0.0) return complexd(0.0, 0.0);
                const complexd delta = root * (s - x);
                const complexd dlog = -(2.0 * Z0 * delta + delta * delta) / 4.0 +
                                      cfg.mu * std::log(1.0 + delta / Z0);
                return phi * std::exp(dlog);
            };
            const complexd d2 =
                (2.0 * hat(x - 3 * h) - 27.0 * hat(x - 2 * h) +
                 270.0 * hat(x - h) - 490.0 * hat(x) + 270.0 * hat(x + h) -
                 27.0 * hat(x + 2 * h) + 2.0 * hat(x + 3 * h)) /
                (180.0 * h * h);
            const complexd bx = cfg.b * x - xi2;
            const complexd fd = -d2 + (bx * bx - cfg.lambda) * hat(x);
            const complexd an = residual_bracket(cfg, coeff, t, x, xi2);
            const double log_scale = 0.5 * log_mode_sq(cfg, x, xi2);
            const double diff = std::abs(fd - an);
            if (diff > 0.0) {
                best_diff = std::max(best_diff, std::log(diff) + log_scale);
            }
            const double ref = std::abs(an);
            if (ref > 0.0) {
                best_ref = std::max(best_ref, std::log(ref) + log_scale);
            }
        }
    }
    if (best_ref == -1e300) {
        throw std::logic_error("residual vanished on samples");
    }
    if (best_diff == -1e300) return 0.0;
    return std::exp(best_diff - best_ref);
}

WeylRateReport weyl_rate(const ComplexQuasimodeConfig& cfg, double slack,
                         Exec mode) {
    if (cfg.n_hi - cfg.n_lo + 1 < 5) {
        throw std::domain_error("rate fit needs at least 5 points in n-range");
    }

    WeylRateReport rep;
    rep.reports = reports_for_range(cfg, mode);
    rep.slack = slack;
    rep.rate_bound = cfg.kappa - cfg.p_max;

    std::vector<double> xs, ys, gaps;
    for (const auto& r : rep.reports) {
        if (!std::isfinite(r.log_ratio)) {
            throw std::logic_error("nonpositive residual ratio in rate fit");
        }
        xs.push_back(double(r.n) * r.n);
        ys.push_back(r.log_ratio);
        gaps.push_back(r.log_norm_sq - r.log_norm_model);
    }
    const LineFit fit = fit_line(xs, ys);
    rep.fitted_rate = fit.slope;
    rep.fitted_intercept = fit.intercept;
    rep.norm_model_log_constant =
        std::accumulate(gaps.begin(), gaps.end(), 0.0) / gaps.size();

    const double ct = std::cos(cfg.theta), tt = std::tan(cfg.theta);
    rep.laplace_log_prefactor =
        0.5 * std::log(kPi / ct) -
        2.0 * std::arg(zeta(cfg.b, cfg.t_theta, 1.0)) * cfg.mu.imag() +
        cfg.mu.real() * std::log(2.0 * tt * tt);

    if (rep.fitted_rate > rep.rate_bound + slack) {
        std::ostringstream os;
        os << "fitted decay rate " << rep.fitted_rate
           << " misses the bound " << rep.rate_bound << " + slack " << slack;
        throw accuracy_error(os.str());
    }
    return rep;
}

}  // namespace maglap
