#pragma once

#include <cmath>
#include <vector>

#include "maglap/cutoff.hpp"
#include "maglap/numerics.hpp"
#include "maglap/parallel.hpp"

namespace maglap {

// Parameters for the quasimode family attached to a field on the unit circle,
// b = e^{i theta} with 0 < theta < pi/2.  The mode concentrates along the ray
// x = t_theta * xi2 where the growth exponent p(t) of |u|^2 is maximal, and is
// localized in t by a plateau cutoff of half-width d.  Derived constants are
// fixed at construction:
//
//   t_theta = 1 / cos(theta)
//   p_max   = p(t_theta) = sin(theta)^2 / cos(theta)
//   kappa   = p(t_theta + d) = cos(theta) * (tan(theta)^2 - d^2)
//
// so kappa - p_max = -cos(theta) d^2 < 0 is the decay rate per n^2 that the
// residual-to-norm ratio of the family has to beat.
struct ComplexQuasimodeConfig {
    double theta = 0.0;
    double d = 0.0;
    complexd lambda{0.0, 0.0};
    int quad_order = 96;
    int n_lo = 4;
    int n_hi = 12;

    complexd b{0.0, 0.0};
    complexd mu{0.0, 0.0};  // lambda/(2b) - 1/2, the power carried by Z
    double t_theta = 0.0;
    double p_max = 0.0;
    double kappa = 0.0;
    CutoffProfile profile = CutoffProfile::bump(1.0, 0.5);
};

// Validates and derives.  Throws std::domain_error for theta outside
// (0, pi/2), for d outside (0, tan(theta)) (the message names the tan(theta)
// bound), for quad_order < 8, or for an n-range that is empty or dips
// below 2.
ComplexQuasimodeConfig make_complex_config(double theta, double d,
                                           complexd lambda,
                                           int quad_order = 96, int n_lo = 4,
                                           int n_hi = 12);

// Exponent p(t) governing |u(t xi2, xi2)|^2 ~ e^{p(t) xi2^2}:
//   p(t) = -cos(theta) t^2 + 2 t - cos(theta).
double growth_exponent(const ComplexQuasimodeConfig& cfg, double t);

// Complexified, rescaled distance to the fiber well: Z = sqrt(2b) (x - xi2/b).
complexd zeta(complexd b, double x, double xi2);

// The local mode u = e^{-Z^2/4} Z^mu, principal branch for the power.
// Throws std::domain_error at Z = 0 unless Re(mu) > 0 (branch point).
complexd local_mode_general(complexd b, complexd lambda, double x, double xi2);
complexd local_mode(const ComplexQuasimodeConfig& cfg, double x, double xi2);

// x-derivative of u, via u' = sqrt(2b) (-Z/2 + mu/Z) u.
complexd local_mode_dx(const ComplexQuasimodeConfig& cfg, double x, double xi2);

// log |u(x, xi2)|^2 evaluated without forming u, safe far beyond the
// overflow range of double:
//   log|u|^2 = -Re(Z^2)/2 - 2 Arg(Z) Im(mu) + 2 Re(mu) log|Z|.
double log_mode_sq(const ComplexQuasimodeConfig& cfg, double x, double xi2);

// Family member Psi_n(x, xi2) = 1_[n-1, n+1](xi2) phi(x/xi2) u(x, xi2), with
// phi the plateau bump of cfg.profile applied to the ray slope t = x/xi2.
complexd quasimode(const ComplexQuasimodeConfig& cfg, int n, double x,
                   double xi2);

// Value of (H_fiber(xi2) - lambda) Psi_n from the closed form: every
// derivative lands on the cutoff or on the power factor, leaving a bracket
// times u.  Zero off the support of Psi_n.
complexd residual_value(const ComplexQuasimodeConfig& cfg, int n, double x,
                        double xi2);

// Squared L^2 norms of Psi_n and of its residual over the strip
// xi2 in [n-1, n+1], held in log space, plus the lower-bound growth model
// log(n^{Re(lambda/b)-1} e^{p_max (n-1)^2}) for comparison.
struct QuasimodeReport {
    int n = 0;
    double log_norm_sq = 0.0;
    double log_residual_sq = 0.0;
    double log_ratio = 0.0;      // log_residual_sq - log_norm_sq
    double log_norm_model = 0.0;

    double norm_sq() const { return std::exp(log_norm_sq); }
    double residual_sq() const { return std::exp(log_residual_sq); }
    double ratio() const { return std::exp(log_ratio); }
    double laplace_reference() const { return std::exp(log_norm_model); }
};

// Tensor Gauss-Legendre quadrature after the substitution x = t xi2,
// piecewise in t over the three smooth segments of the bump, accumulated by
// log-sum-exp.  The order is doubled once and the refined values kept; if
// either log quantity moves by more than gate_tol between the two rules the
// result is deemed unconverged and accuracy_error is thrown.
QuasimodeReport norm_and_residual(const ComplexQuasimodeConfig& cfg, int n,
                                  double gate_tol = 1e-6);

std::vector<QuasimodeReport> reports_for_range(const ComplexQuasimodeConfig& cfg,
                                               Exec mode = Exec::Parallel,
                                               double gate_tol = 1e-6);

// Largest relative gap between residual_value and a finite-difference
// application of (H_fiber - lambda) to Psi_n over a sample grid inside the
// support.  The stencil runs on exponent-reduced values and the scales are
// recombined in log space, so the check stays meaningful at any n.
double residual_fd_gap(const ComplexQuasimodeConfig& cfg, int n,
                       double h = 4e-4);

// Decay-rate summary over the configured n-range: fits log_ratio against
// {1, n^2} and checks the fitted n^2 coefficient against
// kappa - p_max + slack.  Throws accuracy_error when the fitted rate misses
// that bound, std::domain_error when the range has fewer than 5 points.
struct WeylRateReport {
    std::vector<QuasimodeReport> reports;
    double fitted_rate = 0.0;       // n^2 coefficient of the log-ratio fit
    double fitted_intercept = 0.0;
    double rate_bound = 0.0;        // kappa - p_max
    double slack = 0.0;
    // Least-squares constant aligning log_norm_model with the measured
    // log_norm_sq, and the stationary-phase prefactor
    // log(sqrt(pi/cos theta) q(t_theta)) it can be eyeballed against
    // (reported, never enforced: the model is a lower bound, not an
    // asymptotic equality).
    double norm_model_log_constant = 0.0;
    double laplace_log_prefactor = 0.0;
};

WeylRateReport weyl_rate(const ComplexQuasimodeConfig& cfg, double slack = 0.1,
                         Exec mode = Exec::Parallel);

}  // namespace maglap
