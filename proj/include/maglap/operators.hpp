#pragma once

#include "maglap/numerics.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace maglap {

using Fn1 = std::function<complexd(double)>;
using Fn2 = std::function<complexd(double, double)>;

// Sampled function of two variables with optional analytic partials.
// Operator application uses the closures when present and Richardson
// finite differences otherwise.
struct TestFunction {
    Fn2 value;
    Fn2 d1{}, d2{};    // first partials
    Fn2 d11{}, d22{};  // pure second partials
};

struct TestFunction1D {
    Fn1 value;
    Fn1 d1{}, d2{};
};

// Richardson-extrapolated central differences with step h * max(1, |x|).
complexd fd_d1(const Fn1& f, double x, double h = 1e-3);
complexd fd_d2(const Fn1& f, double x, double h = 1e-3);

// (-Laplacian + 2 i b x1 d2 + b^2 x1^2) psi at (x1, x2)
complexd apply_planar(complexd b, const TestFunction& psi, double x1, double x2,
                      double h = 1e-3);

// (-f'' + (b x - xi2)^2 f) at x
complexd apply_fiber(complexd b, double xi2, const TestFunction1D& f, double x,
                     double h = 1e-3);

// (2 (i xi1 + xi2) d/dxi1 + xi1^2 + xi2^2 + i) g at (xi1, xi2)
complexd apply_first_order_imag(const TestFunction& g, double xi1, double xi2,
                                double h = 1e-3);

enum class CoefficientVariant {
    Derived,  // -lambda^2/(2b) + 2 lambda - 3b/2
    Printed,  // -lambda^2/2   + 2 lambda - 3b/2; kept for comparison, wrong unless b = 1
};

// Multiplier in the exact fiber identity (fiber - lambda) u = (coef / Z^2) u
// for the shifted Gaussian-power mode; see quasimode_complex.hpp for u and Z.
complexd residual_coefficient(complexd lambda, complexd b,
                              CoefficientVariant variant = CoefficientVariant::Derived);

enum class SymmetryRelation {
    Scaling,         // V^{-1} L_b V = |b| L_{b/|b|},  V psi = |b|^{1/2} psi(|b|^{1/2} .)
    Reflection,      // S L_b S = L_{-b},              S psi = psi(-x1, x2)
    Conjugation,     // C L_b C = L_{conj b},          C psi = conj(psi(-x1, x2))
    TimeReversalAtI  // conj(L_i psi) = L_i conj(psi); only b = i qualifies
};

// Max pointwise error of the intertwining relation over the sample points.
double symmetry_residual(SymmetryRelation rel, complexd b, const TestFunction& psi,
                         const std::vector<std::pair<double, double>>& samples,
                         double h = 1e-3);

}  // namespace maglap
