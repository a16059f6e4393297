#pragma once

#include <stdexcept>

namespace maglap {

// Smooth cutoff built from the standard C-infinity smoothstep
//   w(s) = h(s) / (h(s) + h(1-s)),  h(s) = e^{-1/s} (s > 0),
// with first and second derivatives available in closed form. Two shapes:
// a plateau bump (1 on [plateau_lo, plateau_hi], 0 outside the support)
// and a rising step (0 left of the ramp, 1 right of it).
class CutoffProfile {
public:
    static CutoffProfile bump(double center, double half_width);
    static CutoffProfile step_up(double ramp_lo, double ramp_hi);

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;

    double plateau_lo() const { return plateau_lo_; }
    double plateau_hi() const { return plateau_hi_; }
    double support_lo() const { return support_lo_; }
    double support_hi() const { return support_hi_; }

private:
    enum class Kind { Bump, StepUp };
    Kind kind_ = Kind::Bump;
    double plateau_lo_ = 0, plateau_hi_ = 0;
    double support_lo_ = 0, support_hi_ = 0;
    double ramp_ = 1;  // ramp width
};

}  // namespace maglap
