#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace maglap {

using complexd = std::complex<double>;

/// Raised when an adaptive computation cannot reach its accuracy target
/// (quadrature doubling gate, iteration cap, tail bound).
class accuracy_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = -1.0;
    double hi = 1.0;
    int order() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule on [lo, hi]. Nodes found by Newton iteration
/// on the Legendre recurrence, converged to 1e-15.
QuadratureRule gauss_legendre(int n, double lo, double hi);

/// Normalized oscillator eigenfunctions psi_0..psi_kmax at z, all at once:
/// psi_k(z) = (2^k k! sqrt(pi))^{-1/2} H_k(z) e^{-z^2/2}, entire in z.
/// Evaluated by the normalized three-term recurrence
///   psi_{k+1} = sqrt(2/(k+1)) z psi_k - sqrt(k/(k+1)) psi_{k-1},
/// which keeps magnitudes near the function scale instead of the huge
/// H_k / tiny c_k intermediate scales. When the e^{-z^2/2} prefactor
/// overflows, the returned values carry IEEE infinities and *overflow
/// (if given) is set.
std::vector<complexd> hermite_sequence(int kmax, complexd z, bool* overflow = nullptr);

complexd hermite_function(int k, complexd z, bool* overflow = nullptr);

/// Upper incomplete gamma Gamma(a, x) for a >= 0, x >= 0.
/// Series for x <= a+1, Lentz continued fraction for x > a+1; the a = 0
/// column is the exponential integral E1. Throws std::domain_error for
/// (a, x) = (0, 0), where the integral diverges.
double upper_incomplete_gamma(double a, double x);

/// z^c = exp(c Log z) on the principal branch, Arg z in (-pi, pi].
/// z = 0 returns 0 when Re c > 0 and throws std::domain_error otherwise.
complexd principal_power(complexd z, complexd c);

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double residual_norm = 0;  // l2 norm of fit residuals
};

/// Least-squares line through (x_i, y_i).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares slope of log y against log x. Requires at least 3 points
/// and strictly positive data.
LineFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// log(sum_i exp(t_i)), stable for widely spread magnitudes; -inf entries
/// contribute nothing and an all-(-inf) input returns -inf.
double log_sum_exp(const std::vector<double>& terms);

}  // namespace maglap
