#pragma once

#include "maglap/numerics.hpp"

#include <string>

namespace maglap {

enum class FieldClass { Zero, RealNonzero, ImaginaryNonzero, Generic };

// A field strength b with its polar data and the chain of symmetry maps
// (scaling to |b| = 1, x1-reflection sending b to -b, conjugation sending
// b to conj b) that brings Arg b into [0, pi/2].
struct FieldParameter {
    complexd b{};
    double modulus = 0;
    double theta = 0;  // Arg b in (-pi, pi]
    FieldClass kind = FieldClass::Zero;

    complexd reduced_unit{1, 0};  // e^{i reduced_theta}
    double reduced_theta = 0;     // in [0, pi/2]
    bool used_scaling = false;
    bool used_reflection = false;
    bool used_conjugation = false;
};

FieldParameter make_field(complexd b);

enum class ContinuousPart {
    HalfLine,    // [0, inf)
    WholePlane,  // all of C (minus the point set when points exist)
    Empty,       // nothing outside the point set
};

enum class PointPart { Empty, LandauSet };

struct SpectrumClassification {
    ContinuousPart continuous;
    PointPart points;
    std::string note;
};

// The four-way classification by the field parameter:
// b = 0 half-line, no points; b real nonzero points only;
// b imaginary nonzero plane, no points; otherwise plane plus points.
SpectrumClassification classify_spectrum(complexd b);

struct LandauLevels {
    std::vector<complexd> values;  // s(2k+1)b for k = 0..kmax, s = sign(Re b)
    bool empty_reason_real_part_zero = false;
};

LandauLevels landau_levels(complexd b, int kmax);

}  // namespace maglap
