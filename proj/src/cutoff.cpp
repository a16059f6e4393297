#include "maglap/cutoff.hpp"

#include <cmath>

namespace maglap {

namespace {

double h_(double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; }
double hp_(double s) { return s > 0 ? h_(s) / (s * s) : 0.0; }
double hpp_(double s) { return s > 0 ? h_(s) * (1.0 - 2.0 * s) / (s * s * s * s) : 0.0; }

// w, w', w'' of the smoothstep on [0, 1]
void smoothstep(double s, double& v, double& d1, double& d2) {
    if (s <= 0) { v = d1 = d2 = 0; return; }
    if (s >= 1) { v = 1; d1 = d2 = 0; return; }
    const double A = h_(s), B = h_(1 - s);
    const double Ap = hp_(s), Bp = hp_(1 - s);
    const double D = A + B;
    const double N = Ap * B + A * Bp;
    v = A / D;
    d1 = N / (D * D);
    // N' collapses to A''B - A B'' because the mixed terms cancel
    const double Nprime = hpp_(s) * B - A * hpp_(1 - s);
    const double Dprime = Ap - Bp;
    d2 = Nprime / (D * D) - 2.0 * N * Dprime / (D * D * D);
}

}  // namespace

CutoffProfile CutoffProfile::bump(double center, double half_width) {
    if (!(half_width > 0)) throw std::domain_error("CutoffProfile::bump: half_width must be positive");
    CutoffProfile p;
    p.kind_ = Kind::Bump;
    p.ramp_ = half_width;
    p.plateau_lo_ = center - half_width;
    p.plateau_hi_ = center + half_width;
    p.support_lo_ = center - 2 * half_width;
    p.support_hi_ = center + 2 * half_width;
    return p;
}

CutoffProfile CutoffProfile::step_up(double ramp_lo, double ramp_hi) {
    if (!(ramp_lo < ramp_hi)) throw std::domain_error("CutoffProfile::step_up: needs ramp_lo < ramp_hi");
    CutoffProfile p;
    p.kind_ = Kind::StepUp;
    p.ramp_ = ramp_hi - ramp_lo;
    p.support_lo_ = ramp_lo;   // zero below this
    p.plateau_lo_ = ramp_hi;   // one above this
    p.plateau_hi_ = p.support_hi_ = INFINITY;
    return p;
}

double CutoffProfile::value(double t) const {
    double v, u1, u2;
    if (kind_ == Kind::StepUp) {
        smoothstep((t - support_lo_) / ramp_, v, u1, u2);
        return v;
    }
    if (t <= support_lo_ || t >= support_hi_) return 0.0;
    if (t >= plateau_lo_ && t <= plateau_hi_) return 1.0;
    if (t < plateau_lo_) {
        smoothstep((t - support_lo_) / ramp_, v, u1, u2);
    } else {
        smoothstep((support_hi_ - t) / ramp_, v, u1, u2);
    }
    return v;
}

double CutoffProfile::d1(double t) const {
    double v, u1, u2;
    if (kind_ == Kind::StepUp) {
        smoothstep((t - support_lo_) / ramp_, v, u1, u2);
        return u1 / ramp_;
    }
    if (t <= support_lo_ || t >= support_hi_) return 0.0;
    if (t >= plateau_lo_ && t <= plateau_hi_) return 0.0;
    if (t < plateau_lo_) {
        smoothstep((t - support_lo_) / ramp_, v, u1, u2);
        return u1 / ramp_;
    }
    smoothstep((support_hi_ - t) / ramp_, v, u1, u2);
    return -u1 / ramp_;
}

double CutoffProfile::d2(double t) const {
    double v, u1, u2;
    if (kind_ == Kind::StepUp) {
        smoothstep((t - support_lo_) / ramp_, v, u1, u2);
        return u2 / (ramp_ * ramp_);
    }
    if (t <= support_lo_ || t >= support_hi_) return 0.0;
    if (t >= plateau_lo_ && t <= plateau_hi_) return 0.0;
    if (t < plateau_lo_) {
        smoothstep((t - support_lo_) / ramp_, v, u1, u2);
    } else {
        smoothstep((support_hi_ - t) / ramp_, v, u1, u2);
    }
    return u2 / (ramp_ * ramp_);
}

}  // namespace maglap
