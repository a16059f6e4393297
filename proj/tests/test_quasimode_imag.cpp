#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "maglap/numerics.hpp"
#include "maglap/quasimode_imag.hpp"

using maglap::complexd;

namespace {

// Density of |u|^2 written out from scratch, used by the brute-force
// quadrature oracle below.
double mode_density(complexd lambda, double xi1, double xi2) {
    double r2 = xi1 * xi1 + xi2 * xi2;
    return std::exp(-xi1 * xi2 + std::atan2(-xi2, xi1) * lambda.real()) *
           std::pow(r2, 0.5 * (lambda.imag() - 1.0));
}

// Composite Gauss-Legendre in the raw xi1 variable, independent of the
// library's t-substitution route.
double brute_xi1_integral(complexd lambda, double lo, double hi, int pieces,
                          int order, bool ramp_only,
                          const maglap::ImagQuasimodeConfig& cfg, int n,
                          double xi2) {
    double total = 0.0;
    for (int p = 0; p < pieces; ++p) {
        double a = lo + (hi - lo) * p / pieces;
        double b = lo + (hi - lo) * (p + 1) / pieces;
        auto rule = maglap::gauss_legendre(order, a, b);
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            double xi1 = rule.nodes[i];
            double s = xi1 / (std::pow(n, cfg.alpha) * xi2);
            double w;
            if (ramp_only) {
                double phi1 = cfg.ramp.d1(s);
                double amp = 4.0 * std::pow(n, -2.0 * cfg.alpha) *
                             (1.0 + xi1 * xi1 / (xi2 * xi2)) * phi1 * phi1;
                w = amp * mode_density(lambda, xi1, xi2);
            } else {
                double phi = cfg.ramp.value(s);
                w = phi * phi * mode_density(lambda, xi1, xi2);
            }
            total += rule.weights[i] * w;
        }
    }
    return total;
}

}  // namespace

TEST_CASE("mode value pins the principal branch") {
    complexd u = maglap::imag_mode(complexd(0.0, 0.0), 0.0, 1.0);
    CHECK(u.real() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(u.imag() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK_THROWS_AS(maglap::imag_mode(complexd(0.0, 0.0), 0.0, 0.0),
                    std::domain_error);
}

TEST_CASE("mode modulus identity at random points") {
    std::mt19937 gen(90210);
    std::uniform_real_distribution<double> x1(-5.0, 5.0);
    std::uniform_real_distribution<double> x2(0.05, 4.0);
    std::uniform_real_distribution<double> lam(-2.0, 2.0);
    for (int i = 0; i < 60; ++i) {
        complexd lambda(lam(gen), lam(gen));
        double xi1 = x1(gen), xi2 = x2(gen);
        double direct = std::norm(maglap::imag_mode(lambda, xi1, xi2));
        double expected = mode_density(lambda, xi1, xi2);
        CHECK(direct == doctest::Approx(expected).epsilon(1e-10));
        CHECK(std::exp(maglap::log_imag_mode_sq(lambda, xi1, xi2)) ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("mode is an exact kernel element along every fiber") {
    for (complexd lambda : {complexd(0.0, 0.0), complexd(0.0, 1.0),
                            complexd(1.0, 1.0), complexd(2.0, 1.0)}) {
        CHECK(maglap::imag_kernel_fd_gap(lambda) < 1e-6);
    }
}

TEST_CASE("config validation and conjugation reduction") {
    CHECK_THROWS_AS(maglap::make_imag_config(complexd(0, 1), 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(maglap::make_imag_config(complexd(0, 1), 2.0),
                    std::domain_error);
    CHECK_THROWS_AS(maglap::make_imag_config(complexd(0, 1), 0.5),
                    std::domain_error);
    CHECK_THROWS_AS(maglap::make_imag_config(complexd(0, 1), 1.5, 1, 50),
                    std::domain_error);
    CHECK_THROWS_AS(maglap::make_imag_config(complexd(0, 1), 1.5, 10, 9),
                    std::domain_error);
    CHECK_THROWS_AS(maglap::make_imag_config(complexd(0, 1), 1.5, 10, 50, 4),
                    std::domain_error);

    auto reduced = maglap::make_imag_config(complexd(1.0, -2.0));
    CHECK(reduced.lambda == complexd(1.0, 2.0));
    CHECK(reduced.conjugated_from_input);

    auto plain = maglap::make_imag_config(complexd(1.0, 2.0));
    CHECK(!plain.conjugated_from_input);
    auto a = maglap::imag_norm_and_residual(reduced, 12);
    auto b = maglap::imag_norm_and_residual(plain, 12);
    CHECK(a.norm_sq == b.norm_sq);
    CHECK(a.residual_sq == b.residual_sq);
}

TEST_CASE("family indicator, plateau, and support escape") {
    auto cfg = maglap::make_imag_config(complexd(0.0, 1.0));
    const int n = 10;
    const double na = std::pow(n, cfg.alpha);

    CHECK(maglap::imag_quasimode(cfg, n, 5.0, 3.0 / n) == complexd(0, 0));
    CHECK(maglap::imag_quasimode(cfg, n, 5.0, 0.5 / n) == complexd(0, 0));

    double xi2 = 1.5 / n;
    double xi1 = 3.0 * na * xi2;
    CHECK(maglap::imag_quasimode(cfg, n, xi1, xi2) ==
          maglap::imag_mode(cfg.lambda, xi1, xi2));

    double min_nonzero = 1e300;
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 200; ++j) {
            double x = 0.5 + (4.0 * na * 2.0 / n) * i / 199.0;
            double y = 0.5 / n + (3.0 / n) * j / 199.0;
            if (std::abs(maglap::imag_quasimode(cfg, n, x, y)) > 0.0) {
                CHECK(y >= 1.0 / n);
                CHECK(y <= 2.0 / n);
                CHECK(x / (na * y) >= 1.0);
                min_nonzero = std::min(min_nonzero, x);
            }
        }
    }
    CHECK(min_nonzero >= std::pow(n, cfg.alpha - 1.0));
}

TEST_CASE("norms against a brute-force quadrature in raw coordinates") {
    for (complexd lambda : {complexd(0.0, 1.0), complexd(0.5, 1.5)}) {
        auto cfg = maglap::make_imag_config(lambda);
        const int n = 10;
        auto rep = maglap::imag_norm_and_residual(cfg, n);

        auto outer = maglap::gauss_legendre(80, 1.0 / n, 2.0 / n);
        double norm = 0.0, res = 0.0;
        for (size_t j = 0; j < outer.nodes.size(); ++j) {
            double xi2 = outer.nodes[j];
            double lo = std::pow(n, cfg.alpha) * xi2;
            double hi = (2.0 * lo * xi2 + 40.0) / xi2;
            double ramp_part = brute_xi1_integral(lambda, lo, 2.0 * lo, 4, 48,
                                                  false, cfg, n, xi2);
            double rest = brute_xi1_integral(lambda, 2.0 * lo, hi, 16, 48,
                                             false, cfg, n, xi2);
            norm += outer.weights[j] * (ramp_part + rest);
            res += outer.weights[j] * brute_xi1_integral(lambda, lo, 2.0 * lo,
                                                         4, 48, true, cfg, n,
                                                         xi2);
        }
        CHECK(rep.norm_sq == doctest::Approx(norm).epsilon(1e-8));
        CHECK(rep.residual_sq == doctest::Approx(res).epsilon(1e-8));
        CHECK(rep.ratio ==
              doctest::Approx(rep.residual_sq / rep.norm_sq).epsilon(1e-12));
        CHECK(rep.model ==
              doctest::Approx(maglap::imag_norm_lower_model(cfg, n))
                  .epsilon(1e-12));
    }
}

TEST_CASE("analytic residual matches the operator applied by differences") {
    auto cfg = maglap::make_imag_config(complexd(0.0, 1.0));
    CHECK(maglap::imag_residual_fd_gap(cfg, 10) < 1e-5);
    CHECK(maglap::imag_residual_fd_gap(cfg, 25) < 1e-5);

    auto real_cfg = maglap::make_imag_config(complexd(0.0, 0.0));
    CHECK(maglap::imag_residual_fd_gap(real_cfg, 10) < 1e-5);
}

TEST_CASE("quadrature stability under refinement") {
    auto cfg = maglap::make_imag_config(complexd(0.0, 1.0));
    auto fine = maglap::make_imag_config(complexd(0.0, 1.0), 1.5, 10, 50, 128);
    auto a = maglap::imag_norm_and_residual(cfg, 17);
    auto b = maglap::imag_norm_and_residual(fine, 17);
    CHECK(std::abs(a.norm_sq - b.norm_sq) < 2e-6 * b.norm_sq);
    CHECK(std::abs(a.residual_sq - b.residual_sq) < 2e-6 * b.residual_sq);
}

TEST_CASE("incomplete gamma limit behind the norm lower bound") {
    for (double a : {1.0, 1.7}) {
        double prev = 0.0;
        for (int n : {10, 100, 1000, 10000}) {
            double x = 4.5 * std::pow(n, 1.5 - 2.0);
            double g = maglap::upper_incomplete_gamma(a, x);
            CHECK(g > prev);
            CHECK(g < std::tgamma(a));
            prev = g;
        }
        CHECK(prev > 0.9 * std::tgamma(a));
    }
}

TEST_CASE("decay scan for the reference configuration") {
    auto cfg = maglap::make_imag_config(complexd(0.0, 1.0));
    auto scan = maglap::imag_decay_scan(cfg);

    REQUIRE(scan.reports.size() == 41);
    CHECK(scan.model_ratio_slope ==
          doctest::Approx((cfg.alpha - 2.0) * 1.0).epsilon(1e-9));
    CHECK(std::abs(scan.ratio_slope - scan.model_ratio_slope) < 0.25);
    CHECK(std::abs(scan.norm_slope - scan.model_norm_slope) < 0.15);
    CHECK(scan.norm_model_floor >= 1.0);
    CHECK(scan.norm_model_spread < 2.0);

    const auto& first = scan.reports.front();
    const auto& last = scan.reports.back();
    for (size_t i = 1; i < scan.reports.size(); ++i) {
        CHECK(scan.reports[i].ratio < scan.reports[i - 1].ratio);
    }
    double collapse = last.ratio / first.ratio;
    double model_collapse = std::pow(5.0, (cfg.alpha - 2.0) * 1.0);
    CHECK(std::abs(collapse - model_collapse) < 0.15 * model_collapse);

    auto serial = maglap::imag_reports(cfg, maglap::Exec::Serial);
    auto parallel = maglap::imag_reports(cfg, maglap::Exec::Parallel);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].norm_sq == parallel[i].norm_sq);
        CHECK(serial[i].residual_sq == parallel[i].residual_sq);
    }
}

TEST_CASE("real lambda follows the logarithmic norm law") {
    auto cfg = maglap::make_imag_config(complexd(0.0, 0.0), 1.5, 10, 100);
    auto scan = maglap::imag_decay_scan(cfg);

    CHECK(scan.norm_model_floor >= 1.0);
    CHECK(scan.norm_model_spread < 2.0);
    CHECK(std::abs(scan.ratio_slope - scan.model_ratio_slope) < 0.25);
    for (const auto& r : scan.reports) {
        CHECK(r.norm_sq > 0.0);
        CHECK(std::isfinite(r.norm_sq * r.n / std::log(double(r.n))));
    }
    for (size_t i = 1; i < scan.reports.size(); ++i) {
        CHECK(scan.reports[i].ratio < scan.reports[i - 1].ratio);
    }
}

TEST_CASE("ratio decay law across parameter sets") {
    struct Case {
        complexd lambda;
        double alpha;
    };
    for (const Case& c : {Case{complexd(0.0, 1.0), 1.5},
                          Case{complexd(2.0, 1.0), 1.25},
                          Case{complexd(0.0, 0.0), 1.5}}) {
        auto cfg = maglap::make_imag_config(c.lambda, c.alpha);
        auto scan = maglap::imag_decay_scan(cfg);
        CHECK(std::abs(scan.ratio_slope - scan.model_ratio_slope) < 0.25);
        CHECK(scan.norm_model_floor >= 1.0);
    }
}

TEST_CASE("truncated norms diverge at the fiber rate") {
    auto table = maglap::nonintegrability_demo(complexd(0.0, 0.0), 1.0,
                                               {5.0, 10.0, 15.0});
    REQUIRE(table.size() == 3);
    CHECK(table[0].log_ratio == 0.0);
    for (size_t i = 1; i < table.size(); ++i) {
        CHECK(table[i].log_integral > table[i - 1].log_integral);
        CHECK(table[i].target_ratio == doctest::Approx(5.0));
        // The power factor |xi|^{-1} costs about log(R_j/R_{j-1}) per step
        // (log 2 and log 1.5 here), so the increments sit below the pure
        // exponential 5.0 and climb back toward it as R grows.
        CHECK(std::abs(table[i].log_ratio - 5.0) < 1.0);
    }
    CHECK(table[2].log_ratio > table[1].log_ratio);

    // At larger radii the power-factor cost fades relative to the target.
    auto far = maglap::nonintegrability_demo(complexd(0.0, 0.0), 1.0,
                                             {10.0, 20.0, 30.0});
    for (size_t i = 1; i < far.size(); ++i) {
        CHECK(std::abs(far[i].log_ratio - 10.0) < 0.1 * 10.0);
    }

    // Power factor drops out entirely at lambda = i, so the increments hit
    // the exponential law almost exactly.
    auto pure = maglap::nonintegrability_demo(complexd(0.0, 1.0), 1.0,
                                              {5.0, 10.0});
    CHECK(std::abs(pure[1].log_ratio - 5.0) < 0.05);

    auto half = maglap::nonintegrability_demo(complexd(0.0, 0.0), 0.5,
                                              {5.0, 10.0, 15.0});
    for (size_t i = 1; i < half.size(); ++i) {
        CHECK(half[i].target_ratio == doctest::Approx(2.5));
        CHECK(std::abs(half[i].log_ratio - 2.5) < 1.0);
    }
    CHECK(half[2].log_ratio > half[1].log_ratio);

    CHECK_THROWS_AS(maglap::nonintegrability_demo(complexd(0, 0), -1.0, {5.0}),
                    std::domain_error);
    CHECK_THROWS_AS(
        maglap::nonintegrability_demo(complexd(0, 0), 1.0, {5.0, 4.0}),
        std::domain_error);
}

TEST_CASE("no fiber admits a square-integrable kernel element") {
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            complexd lambda(-2.0 + i, -2.0 + j);
            auto table = maglap::nonintegrability_demo(lambda, 1.0,
                                                       {20.0, 40.0, 60.0});
            for (size_t k = 1; k < table.size(); ++k) {
                CHECK(table[k].log_integral > table[k - 1].log_integral);
                CHECK(std::abs(table[k].log_ratio - table[k].target_ratio) <
                      0.25 * table[k].target_ratio);
            }
        }
    }
}
