#include "maglap/operators.hpp"

#include <cmath>

namespace maglap {

namespace {
const complexd I(0, 1);
}

complexd fd_d1(const Fn1& f, double x, double h) {
    const double s = h * std::max(1.0, std::abs(x));
    auto diff = [&](double t) { return (f(x + t) - f(x - t)) / (2.0 * t); };
    return (4.0 * diff(s / 2) - diff(s)) / 3.0;
}

complexd fd_d2(const Fn1& f, double x, double h) {
    const double s = h * std::max(1.0, std::abs(x));
    const complexd fx = f(x);
    auto diff = [&](double t) { return (f(x + t) - 2.0 * fx + f(x - t)) / (t * t); };
    return (4.0 * diff(s / 2) - diff(s)) / 3.0;
}

complexd apply_planar(complexd b, const TestFunction& psi, double x1, double x2, double h) {
    if (!psi.value) throw std::invalid_argument("apply_planar: test function has no value closure");
    const complexd v = psi.value(x1, x2);
    auto along1 = [&](double t) { return psi.value(t, x2); };
    auto along2 = [&](double t) { return psi.value(x1, t); };
    const complexd p11 = psi.d11 ? psi.d11(x1, x2) : fd_d2(along1, x1, h);
    const complexd p22 = psi.d22 ? psi.d22(x1, x2) : fd_d2(along2, x2, h);
    const complexd p2 = psi.d2 ? psi.d2(x1, x2) : fd_d1(along2, x2, h);
    return -p11 - p22 + 2.0 * I * b * x1 * p2 + b * b * x1 * x1 * v;
}

complexd apply_fiber(complexd b, double xi2, const TestFunction1D& f, double x, double h) {
    if (!f.value) throw std::invalid_argument("apply_fiber: test function has no value closure");
    const complexd v = f.value(x);
    const complexd fxx = f.d2 ? f.d2(x) : fd_d2(f.value, x, h);
    const complexd w = b * x - xi2;
    return -fxx + w * w * v;
}

complexd apply_first_order_imag(const TestFunction& g, double xi1, double xi2, double h) {
    if (!g.value) throw std::invalid_argument("apply_first_order_imag: no value closure");
    auto along1 = [&](double t) { return g.value(t, xi2); };
    const complexd g1 = g.d1 ? g.d1(xi1, xi2) : fd_d1(along1, xi1, h);
    return 2.0 * (I * xi1 + xi2) * g1 + (xi1 * xi1 + xi2 * xi2 + I) * g.value(xi1, xi2);
}

complexd residual_coefficient(complexd lambda, complexd b, CoefficientVariant variant) {
    if (b == complexd(0, 0))
        throw std::domain_error("residual_coefficient: b must be nonzero");
    if (variant == CoefficientVariant::Derived)
        return -lambda * lambda / (2.0 * b) + 2.0 * lambda - 1.5 * b;
    return -lambda * lambda / 2.0 + 2.0 * lambda - 1.5 * b;
}

namespace {

TestFunction scaled_by(const TestFunction& psi, double s) {
    TestFunction r;
    r.value = [&psi, s](double y1, double y2) { return s * psi.value(s * y1, s * y2); };
    if (psi.d1) r.d1 = [&psi, s](double y1, double y2) { return s * s * psi.d1(s * y1, s * y2); };
    if (psi.d2) r.d2 = [&psi, s](double y1, double y2) { return s * s * psi.d2(s * y1, s * y2); };
    if (psi.d11)
        r.d11 = [&psi, s](double y1, double y2) { return s * s * s * psi.d11(s * y1, s * y2); };
    if (psi.d22)
        r.d22 = [&psi, s](double y1, double y2) { return s * s * s * psi.d22(s * y1, s * y2); };
    return r;
}

TestFunction reflected(const TestFunction& psi) {
    TestFunction r;
    r.value = [&psi](double y1, double y2) { return psi.value(-y1, y2); };
    if (psi.d1) r.d1 = [&psi](double y1, double y2) { return -psi.d1(-y1, y2); };
    if (psi.d2) r.d2 = [&psi](double y1, double y2) { return psi.d2(-y1, y2); };
    if (psi.d11) r.d11 = [&psi](double y1, double y2) { return psi.d11(-y1, y2); };
    if (psi.d22) r.d22 = [&psi](double y1, double y2) { return psi.d22(-y1, y2); };
    return r;
}

TestFunction conj_reflected(const TestFunction& psi) {
    TestFunction r;
    r.value = [&psi](double y1, double y2) { return std::conj(psi.value(-y1, y2)); };
    if (psi.d1) r.d1 = [&psi](double y1, double y2) { return -std::conj(psi.d1(-y1, y2)); };
    if (psi.d2) r.d2 = [&psi](double y1, double y2) { return std::conj(psi.d2(-y1, y2)); };
    if (psi.d11) r.d11 = [&psi](double y1, double y2) { return std::conj(psi.d11(-y1, y2)); };
    if (psi.d22) r.d22 = [&psi](double y1, double y2) { return std::conj(psi.d22(-y1, y2)); };
    return r;
}

TestFunction conjugated(const TestFunction& psi) {
    TestFunction r;
    r.value = [&psi](double y1, double y2) { return std::conj(psi.value(y1, y2)); };
    if (psi.d1) r.d1 = [&psi](double y1, double y2) { return std::conj(psi.d1(y1, y2)); };
    if (psi.d2) r.d2 = [&psi](double y1, double y2) { return std::conj(psi.d2(y1, y2)); };
    if (psi.d11) r.d11 = [&psi](double y1, double y2) { return std::conj(psi.d11(y1, y2)); };
    if (psi.d22) r.d22 = [&psi](double y1, double y2) { return std::conj(psi.d22(y1, y2)); };
    return r;
}

}  // namespace

double symmetry_residual(SymmetryRelation rel, complexd b, const TestFunction& psi,
                         const std::vector<std::pair<double, double>>& samples, double h) {
    double worst = 0;
    switch (rel) {
        case SymmetryRelation::Scaling: {
            if (b == complexd(0, 0))
                throw std::domain_error("symmetry_residual: scaling needs b != 0");
            const double s = std::sqrt(std::abs(b));
            const TestFunction v = scaled_by(psi, s);
            const complexd bu = b / std::abs(b);
            for (auto [x1, x2] : samples) {
                complexd lhs = apply_planar(b, v, x1 / s, x2 / s, h) / s;
                complexd rhs = std::abs(b) * apply_planar(bu, psi, x1, x2, h);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            return worst;
        }
        case SymmetryRelation::Reflection: {
            const TestFunction v = reflected(psi);
            for (auto [x1, x2] : samples) {
                complexd lhs = apply_planar(b, v, -x1, x2, h);
                complexd rhs = apply_planar(-b, psi, x1, x2, h);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            return worst;
        }
        case SymmetryRelation::Conjugation: {
            const TestFunction v = conj_reflected(psi);
            for (auto [x1, x2] : samples) {
                complexd lhs = std::conj(apply_planar(b, v, -x1, x2, h));
                complexd rhs = apply_planar(std::conj(b), psi, x1, x2, h);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            return worst;
        }
        case SymmetryRelation::TimeReversalAtI: {
            if (std::abs(b - I) > 1e-12)
                throw std::domain_error("symmetry_residual: time reversal requires b = i");
            const TestFunction v = conjugated(psi);
            for (auto [x1, x2] : samples) {
                complexd lhs = std::conj(apply_planar(I, psi, x1, x2, h));
                complexd rhs = apply_planar(I, v, x1, x2, h);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            return worst;
        }
    }
    throw std::logic_error("symmetry_residual: unknown relation");
}

}  // namespace maglap
