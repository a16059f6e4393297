#include "maglap/quasimode_imag.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <vector>

#include "maglap/operators.hpp"

namespace maglap {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTailCut = 40.0;  // e-folds kept past the ramp before the
                                   // analytic remainder takes over

// |u|^2 expressed in t = xi1 xi2; the 1/xi2 jacobian is applied by the caller.
double density_t(complexd lambda, double t, double xi2) {
    const double x1 = t / xi2;
    const double r2 = x1 * x1 + xi2 * xi2;
    return std::exp(-t + std::atan2(-xi2, x1) * lambda.real() +
                    0.5 * (lambda.imag() - 1.0) * std::log(r2));
}

struct StripIntegrals {
    double norm = 0.0;
    double residual = 0.0;
    double tail_bound = 0.0;
};

// Tensor quadrature over xi2 in [1/n, 2/n] and t in [t_lo, 2 t_lo + kTailCut]
// with t_lo = n^alpha xi2^2: a ramp piece where the cutoff rises and a
// plateau piece that carries the rest of the e^{-t} mass.  Everything is
// moderate in size here, so the sums run in linear space.
StripIntegrals integrate_strip(const ImagQuasimodeConfig& cfg, int n, int order) {
    const double na = std::pow(double(n), cfg.alpha);
    const double p = 0.5 * (cfg.lambda.imag() - 1.0);
    const double arg_cap = std::exp(0.5 * kPi * std::abs(cfg.lambda.real()));

    StripIntegrals out;
    const auto outer = gauss_legendre(order, 1.0 / n, 2.0 / n);
    for (size_t j = 0; j < outer.nodes.size(); ++j) {
        const double xi2 = outer.nodes[j];
        const double wj = outer.weights[j] / xi2;
        const double t_lo = na * xi2 * xi2;

        double inner_norm = 0.0, inner_res = 0.0;
        const auto ramp = gauss_legendre(order, t_lo, 2.0 * t_lo);
        const double res_amp = 4.0 / (na * na);
        for (size_t i = 0; i < ramp.nodes.size(); ++i) {
            const double t = ramp.nodes[i];
            const double s = t / t_lo;
            const double w2 = ramp.weights[i] * density_t(cfg.lambda, t, xi2);
            const double phi = cfg.ramp.value(s);
            const double dphi = cfg.ramp.d1(s);
            inner_norm += w2 * phi * phi;
            const double x1_over_xi2 = t / (xi2 * xi2);
            inner_res += w2 * res_amp * (1.0 + x1_over_xi2 * x1_over_xi2) * dphi * dphi;
        }
        const double t_end = 2.0 * t_lo + kTailCut;
        const auto plateau = gauss_legendre(2 * order, 2.0 * t_lo, t_end);
        for (size_t i = 0; i < plateau.nodes.size(); ++i) {
            inner_norm += plateau.weights[i] *
                          density_t(cfg.lambda, plateau.nodes[i], xi2);
        }

        double tail;
        if (p <= 0.0) {
            const double ratio = t_end / xi2;
            tail = std::pow(ratio * ratio + xi2 * xi2, p) * arg_cap * std::exp(-t_end);
        } else {
            tail = arg_cap * std::pow(2.0, p) * std::pow(xi2, -2.0 * p) *
                   upper_incomplete_gamma(2.0 * p + 1.0, t_end);
        }

        out.norm += wj * inner_norm;
        out.residual += wj * inner_res;
        out.tail_bound += wj * tail;
    }
    return out;
}

std::vector<int> sample_range(const ImagQuasimodeConfig& cfg) {
    std::vector<int> ns;
    for (int n = cfg.n_lo; n <= cfg.n_hi; ++n) ns.push_back(n);
    return ns;
}

}  // namespace

ImagQuasimodeConfig make_imag_config(complexd lambda, double alpha, int n_lo,
                                     int n_hi, int quad_order) {
    if (!(alpha > 1.0) || !(alpha < 2.0)) {
        std::ostringstream msg;
        msg << "make_imag_config: alpha = " << alpha
            << " outside the open interval (1, 2)";
        throw std::domain_error(msg.str());
    }
    if (n_lo < 2 || n_hi < n_lo)
        throw std::domain_error("make_imag_config: need 2 <= n_lo <= n_hi");
    if (quad_order < 8)
        throw std::domain_error("make_imag_config: quadrature order below 8");

    ImagQuasimodeConfig cfg;
    cfg.conjugated_from_input = lambda.imag() < 0.0;
    cfg.lambda = cfg.conjugated_from_input ? std::conj(lambda) : lambda;
    cfg.alpha = alpha;
    cfg.n_lo = n_lo;
    cfg.n_hi = n_hi;
    cfg.quad_order = quad_order;
    return cfg;
}

complexd imag_mode(complexd lambda, double xi1, double xi2) {
    if (xi1 == 0.0 && xi2 == 0.0)
        throw std::domain_error("imag_mode: branch point at the origin");
    const complexd expo(-0.5 * xi1 * xi2, 0.25 * xi1 * xi1);
    const complexd power = -(1.0 + complexd(0.0, 1.0) * lambda) / 2.0;
    return std::exp(expo) * principal_power(complexd(xi1, -xi2), power);
}

double log_imag_mode_sq(complexd lambda, double xi1, double xi2) {
    return -xi1 * xi2 + std::atan2(-xi2, xi1) * lambda.real() +
           0.5 * (lambda.imag() - 1.0) * std::log(xi1 * xi1 + xi2 * xi2);
}

complexd imag_quasimode(const ImagQuasimodeConfig& cfg, int n, double xi1,
                        double xi2) {
    const double w = n * xi2;
    if (w < 1.0 || w > 2.0) return {0.0, 0.0};
    const double s = xi1 / (std::pow(double(n), cfg.alpha) * xi2);
    const double phi = cfg.ramp.value(s);
    if (phi == 0.0) return {0.0, 0.0};
    return phi * imag_mode(cfg.lambda, xi1, xi2);
}

complexd imag_residual_value(const ImagQuasimodeConfig& cfg, int n, double xi1,
                             double xi2) {
    const double w = n * xi2;
    if (w < 1.0 || w > 2.0) return {0.0, 0.0};
    const double na = std::pow(double(n), cfg.alpha);
    const double dphi = cfg.ramp.d1(xi1 / (na * xi2));
    if (dphi == 0.0) return {0.0, 0.0};
    return 2.0 / na * complexd(1.0, xi1 / xi2) * dphi *
           imag_mode(cfg.lambda, xi1, xi2);
}

double imag_kernel_fd_gap(complexd lambda, int npoints, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> pick1(-4.0, 4.0);
    std::uniform_real_distribution<double> pick2(0.2, 3.0);

    TestFunction g;
    g.value = [lambda](double x1, double x2) { return imag_mode(lambda, x1, x2); };

    double worst = 0.0;
    for (int i = 0; i < npoints; ++i) {
        const double xi1 = pick1(gen);
        const double xi2 = pick2(gen);
        const complexd u = imag_mode(lambda, xi1, xi2);
        const complexd r = apply_first_order_imag(g, xi1, xi2) - lambda * u;
        worst = std::max(worst, std::abs(r) / std::max(1.0, std::abs(u)));
    }
    return worst;
}

double imag_norm_lower_constant(complexd lambda) {
    return std::exp(-0.5 * kPi * std::abs(lambda.real())) *
           std::min(1.0, std::pow(2.0, 0.5 * (lambda.imag() - 1.0)));
}

double imag_norm_lower_model(const ImagQuasimodeConfig& cfg, int n) {
    const double na = std::pow(double(n), cfg.alpha);
    const double a = cfg.lambda.imag();
    const auto rule = gauss_legendre(cfg.quad_order, 1.0 / n, 2.0 / n);
    double total = 0.0;
    for (size_t j = 0; j < rule.nodes.size(); ++j) {
        const double xi2 = rule.nodes[j];
        total += rule.weights[j] * std::pow(xi2, -a) *
                 upper_incomplete_gamma(a, 2.0 * na * xi2 * xi2);
    }
    return total;
}

ImagReport imag_norm_and_residual(const ImagQuasimodeConfig& cfg, int n,
                                  double gate_tol) {
    if (n < 2) throw std::domain_error("imag_norm_and_residual: need n >= 2");

    const StripIntegrals coarse = integrate_strip(cfg, n, cfg.quad_order);
    const StripIntegrals fine = integrate_strip(cfg, n, 2 * cfg.quad_order);
    const double norm_drift = std::abs(fine.norm - coarse.norm) / fine.norm;
    const double res_drift = std::abs(fine.residual - coarse.residual) / fine.residual;
    if (!(norm_drift < gate_tol) || !(res_drift < gate_tol)) {
        std::ostringstream msg;
        msg << "imag_norm_and_residual: quadrature drift under order doubling at n = "
            << n << " (norm " << norm_drift << ", residual " << res_drift << ")";
        throw accuracy_error(msg.str());
    }
    if (!(fine.tail_bound < 1e-12 * fine.norm)) {
        std::ostringstream msg;
        msg << "imag_norm_and_residual: analytic tail bound " << fine.tail_bound
            << " is not negligible against the norm " << fine.norm;
        throw accuracy_error(msg.str());
    }

    ImagReport rep;
    rep.n = n;
    rep.norm_sq = fine.norm;
    rep.residual_sq = fine.residual;
    rep.ratio = fine.residual / fine.norm;
    rep.model = imag_norm_lower_model(cfg, n);
    return rep;
}

std::vector<ImagReport> imag_reports(const ImagQuasimodeConfig& cfg, Exec mode,
                                     double gate_tol) {
    const std::vector<int> ns = sample_range(cfg);
    std::vector<ImagReport> out(ns.size());

    if (mode == Exec::Serial) {
        for (size_t i = 0; i < ns.size(); ++i)
            out[i] = imag_norm_and_residual(cfg, ns[i], gate_tol);
        return out;
    }

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < long(ns.size()); ++i) {
        try {
            out[i] = imag_norm_and_residual(cfg, ns[i], gate_tol);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

double imag_residual_fd_gap(const ImagQuasimodeConfig& cfg, int n) {
    const double na = std::pow(double(n), cfg.alpha);

    TestFunction g;
    g.value = [&cfg, n](double x1, double x2) {
        return imag_quasimode(cfg, n, x1, x2);
    };

    const double s_samples[] = {1.1, 1.3, 1.5, 1.7, 1.9, 2.4};
    const double w_samples[] = {1.2, 1.5, 1.8};
    double max_diff = 0.0, max_scale = 0.0;
    for (double w : w_samples) {
        const double xi2 = w / n;
        for (double s : s_samples) {
            const double xi1 = s * na * xi2;
            const complexd an = imag_residual_value(cfg, n, xi1, xi2);
            const complexd fd = apply_first_order_imag(g, xi1, xi2, 2e-4) -
                                cfg.lambda * imag_quasimode(cfg, n, xi1, xi2);
            max_diff = std::max(max_diff, std::abs(fd - an));
            max_scale = std::max(max_scale, std::abs(an));
        }
    }
    return max_diff / max_scale;
}

ImagScanReport imag_decay_scan(const ImagQuasimodeConfig& cfg, Exec mode,
                               double gate_tol) {
    ImagScanReport scan;
    scan.reports = imag_reports(cfg, mode, gate_tol);

    const size_t m = scan.reports.size();
    std::vector<double> ns(m), norms(m), residuals(m), ratios(m), models(m),
        ratio_model(m);
    double floor_ratio = 1e300, min_over = 1e300, max_over = 0.0;
    const double c_lambda = imag_norm_lower_constant(cfg.lambda);
    for (size_t i = 0; i < m; ++i) {
        const ImagReport& r = scan.reports[i];
        ns[i] = r.n;
        norms[i] = r.norm_sq;
        residuals[i] = r.residual_sq;
        ratios[i] = r.ratio;
        models[i] = r.model;
        ratio_model[i] = cfg.lambda.imag() > 0.0
                             ? std::pow(double(r.n), (cfg.alpha - 2.0) * cfg.lambda.imag())
                             : 1.0 / std::log(double(r.n));
        const double over = r.norm_sq / r.model;
        min_over = std::min(min_over, over);
        max_over = std::max(max_over, over);
        floor_ratio = std::min(floor_ratio, over / c_lambda);
    }

    scan.residual_slope = fit_loglog_slope(ns, residuals).slope;
    scan.norm_slope = fit_loglog_slope(ns, norms).slope;
    scan.model_norm_slope = fit_loglog_slope(ns, models).slope;
    scan.ratio_slope = fit_loglog_slope(ns, ratios).slope;
    scan.model_ratio_slope = fit_loglog_slope(ns, ratio_model).slope;
    scan.norm_model_spread = max_over / min_over;
    scan.norm_model_floor = floor_ratio;
    return scan;
}

std::vector<DivergenceEntry> nonintegrability_demo(complexd lambda, double xi2,
                                                   const std::vector<double>& radii,
                                                   int quad_order) {
    if (!(xi2 > 0.0))
        throw std::domain_error("nonintegrability_demo: needs xi2 > 0");
    if (radii.empty())
        throw std::domain_error("nonintegrability_demo: empty radius list");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || (i > 0 && radii[i] <= radii[i - 1]))
            throw std::domain_error(
                "nonintegrability_demo: radii must be positive and increasing");
    }
    if (quad_order < 8)
        throw std::domain_error("nonintegrability_demo: quadrature order below 8");

    std::vector<DivergenceEntry> table;
    table.reserve(radii.size());
    for (double R : radii) {
        // Piecewise rule on [-R, 0]; the integrand spans e^{R xi2} in
        // magnitude, so the accumulation happens on log values.
        const int pieces = std::max(3, int(std::ceil(R * xi2 / 8.0)) + 1);
        std::vector<double> terms;
        terms.reserve(size_t(pieces) * size_t(quad_order));
        for (int p = 0; p < pieces; ++p) {
            const double a = -R + R * double(p) / pieces;
            const double b = -R + R * double(p + 1) / pieces;
            const auto rule = gauss_legendre(quad_order, a, b);
            for (size_t i = 0; i < rule.nodes.size(); ++i) {
                terms.push_back(std::log(rule.weights[i]) +
                                log_imag_mode_sq(lambda, rule.nodes[i], xi2));
            }
        }
        DivergenceEntry entry;
        entry.R = R;
        entry.log_integral = log_sum_exp(terms);
        if (!table.empty()) {
            entry.log_ratio = entry.log_integral - table.back().log_integral;
            entry.target_ratio = (R - table.back().R) * xi2;
        }
        table.push_back(entry);
    }
    return table;
}

}  // namespace maglap
