#include "maglap/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maglap {

QuadratureRule gauss_legendre(int n, double lo, double hi) {
    if (n < 1) throw std::domain_error("gauss_legendre: order must be positive");
    if (!(lo < hi)) throw std::domain_error("gauss_legendre: empty interval");

    QuadratureRule rule;
    rule.lo = lo;
    rule.hi = hi;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        // one clean evaluation of P_n' at the converged node
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        double w = 2.0 / ((1.0 - t * t) * dp * dp);

        const double mid = 0.5 * (lo + hi), rad = 0.5 * (hi - lo);
        rule.nodes[i] = mid - rad * t;  // cos is decreasing: i = 0 gives t near +1
        rule.nodes[n - 1 - i] = mid + rad * t;
        rule.weights[i] = rule.weights[n - 1 - i] = w * rad;
    }
    if (n % 2 == 1) rule.nodes[half - 1] = 0.5 * (lo + hi);
    std::sort(rule.nodes.begin(), rule.nodes.end());
    return rule;
}

std::vector<complexd> hermite_sequence(int kmax, complexd z, bool* overflow) {
    if (kmax < 0) throw std::domain_error("hermite_sequence: negative index");
    std::vector<complexd> psi(kmax + 1);
    const double pi_quarter = 0.7511255444649425;  // pi^{-1/4}
    psi[0] = pi_quarter * std::exp(-z * z / 2.0);
    if (overflow) *overflow = !std::isfinite(psi[0].real()) || !std::isfinite(psi[0].imag());
    if (kmax == 0) return psi;
    psi[1] = std::sqrt(2.0) * z * psi[0];
    for (int k = 1; k < kmax; ++k) {
        psi[k + 1] = std::sqrt(2.0 / (k + 1.0)) * z * psi[k]
                   - std::sqrt(k / (k + 1.0)) * psi[k - 1];
    }
    return psi;
}

complexd hermite_function(int k, complexd z, bool* overflow) {
    return hermite_sequence(k, z, overflow)[k];
}

namespace {

// E1 by alternating series, x <= 1
double exp_integral_series(double x) {
    const double euler = 0.5772156649015329;
    double sum = -euler - std::log(x);
    double term = 1.0;
    for (int k = 1; k < 80; ++k) {
        term *= -x / k;
        sum -= term / k;
        if (std::abs(term / k) < 1e-17 * std::abs(sum)) return sum;
    }
    throw accuracy_error("upper_incomplete_gamma: E1 series failed to converge");
}

// Lentz continued fraction for Gamma(a, x), x > a + 1 (also fine for a = 0)
double gamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) {
            return h * std::exp(-x + a * std::log(x));
        }
    }
    throw accuracy_error("upper_incomplete_gamma: continued fraction failed to converge");
}

// lower gamma by series, x < a + 1, a > 0; returns gamma(a, x)
double lower_gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) {
            return sum * std::exp(-x + a * std::log(x));
        }
    }
    throw accuracy_error("upper_incomplete_gamma: series failed to converge");
}

}  // namespace

double upper_incomplete_gamma(double a, double x) {
    if (a < 0 || x < 0) throw std::domain_error("upper_incomplete_gamma: needs a >= 0, x >= 0");
    if (a == 0.0) {
        if (x == 0.0)
            throw std::domain_error("upper_incomplete_gamma: Gamma(0, 0) diverges");
        return x <= 1.0 ? exp_integral_series(x) : gamma_cf(0.0, x);
    }
    if (x == 0.0) return std::tgamma(a);
    if (x > a + 1.0) return gamma_cf(a, x);
    return std::tgamma(a) - lower_gamma_series(a, x);
}

complexd principal_power(complexd z, complexd c) {
    if (z == complexd(0, 0)) {
        if (c.real() > 0) return {0, 0};
        throw std::domain_error("principal_power: 0^c needs Re c > 0");
    }
    return std::exp(c * std::log(z));
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t m = x.size();
    if (m != y.size() || m < 2) throw std::domain_error("fit_line: need >= 2 paired points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = m * sxx - sx * sx;
    if (std::abs(det) < 1e-14 * m * sxx)
        throw std::domain_error("fit_line: abscissae are degenerate");
    LineFit f;
    f.slope = (m * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / m;
    double ss = 0;
    for (size_t i = 0; i < m; ++i) {
        double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual_norm = std::sqrt(ss);
    return f;
}

LineFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::domain_error("fit_loglog_slope: need >= 3 paired points");
    std::vector<double> lx(x.size()), ly(y.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0 || y[i] <= 0)
            throw std::domain_error("fit_loglog_slope: data must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

double log_sum_exp(const std::vector<double>& terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;  // empty or all -inf
    double s = 0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

}  // namespace maglap
