#pragma once

// Extended-precision scalar for experiments whose tolerances exceed what
// double resolves (forward images at |w| ~ e^75 compared in absolute terms).
// The exponent range matches IEEE double, so overflow and depth selection
// behave exactly as in double precision; only the significand is longer.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <rayforge/scalar.hpp>

namespace rayforge {

namespace mp = boost::multiprecision;

using HighPrecisionBackend =
    mp::backends::cpp_bin_float<168, mp::backends::digit_base_2, void, std::int16_t, -1022, 1023>;

/// ~50 significant decimal digits, double exponent range.
using HighPrecision = mp::number<HighPrecisionBackend, mp::et_off>;
using HighPrecisionComplex = mp::number<mp::complex_adaptor<HighPrecisionBackend>, mp::et_off>;

template <>
struct complex_traits<HighPrecision> {
    using type = HighPrecisionComplex;
};

inline std::complex<double> to_double(const HighPrecisionComplex& z)
{
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

}  // namespace rayforge
