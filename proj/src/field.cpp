#include "maglap/field.hpp"

#include <cmath>

namespace maglap {

FieldParameter make_field(complexd b) {
    FieldParameter f;
    f.b = b;
    f.modulus = std::abs(b);
    f.theta = std::arg(b);
    if (f.modulus == 0.0) {
        f.kind = FieldClass::Zero;
        return f;
    }
    if (b.imag() == 0.0) {
        f.kind = FieldClass::RealNonzero;
    } else if (b.real() == 0.0) {
        f.kind = FieldClass::ImaginaryNonzero;
    } else {
        f.kind = FieldClass::Generic;
    }

    f.used_scaling = (f.modulus != 1.0);
    double th = f.theta;
    if (!(th > -M_PI / 2 && th <= M_PI / 2)) {
        th += (th > 0) ? -M_PI : M_PI;  // reflection: b -> -b
        f.used_reflection = true;
    }
    if (th < 0) {
        th = -th;  // conjugation: b -> conj b
        f.used_conjugation = true;
    }
    f.reduced_theta = th;
    f.reduced_unit = std::polar(1.0, th);
    return f;
}

SpectrumClassification classify_spectrum(complexd b) {
    switch (make_field(b).kind) {
        case FieldClass::Zero:
            return {ContinuousPart::HalfLine, PointPart::Empty,
                    "free case: [0, infinity), no eigenvalues"};
        case FieldClass::RealNonzero:
            return {ContinuousPart::Empty, PointPart::LandauSet,
                    "real field: the level ladder exhausts the spectrum"};
        case FieldClass::ImaginaryNonzero:
            return {ContinuousPart::WholePlane, PointPart::Empty,
                    "imaginary field: the whole plane, empty point spectrum"};
        default:
            return {ContinuousPart::WholePlane, PointPart::LandauSet,
                    "generic field: level ladder embedded in a filled plane"};
    }
}

LandauLevels landau_levels(complexd b, int kmax) {
    if (kmax < 0) throw std::domain_error("landau_levels: kmax must be >= 0");
    LandauLevels l;
    if (b.real() == 0.0) {
        l.empty_reason_real_part_zero = true;
        return l;
    }
    const double sign = b.real() > 0 ? 1.0 : -1.0;
    l.values.reserve(kmax + 1);
    for (int k = 0; k <= kmax; ++k) l.values.push_back(sign * (2.0 * k + 1.0) * b);
    return l;
}

}  // namespace maglap
