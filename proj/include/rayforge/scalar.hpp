#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Core>

namespace rayforge {

// Bring the standard overloads into scope so that unqualified calls resolve
// for builtin scalars, while ADL picks up multiprecision overloads.
using std::abs;
using std::acos;
using std::arg;
using std::atan2;
using std::cos;
using std::exp;
using std::expm1;
using std::floor;
using std::isfinite;
using std::log;
using std::log1p;
using std::pow;
using std::sin;
using std::sqrt;

/// Complex type paired with a real scalar. Multiprecision scalars specialize
/// this in <rayforge/multiprecision.hpp>.
template <class Real>
struct complex_traits {
    using type = std::complex<Real>;
};

template <class Real>
using Complex = typename complex_traits<Real>::type;

template <class Real>
using CoeffVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <class Real>
using ComplexMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <class Real>
const Real& pi()
{
    static const Real value = acos(Real(-1));
    return value;
}

template <class Real>
const Real& two_pi()
{
    static const Real value = Real(2) * pi<Real>();
    return value;
}

template <class Real>
Real epsilon()
{
    return std::numeric_limits<Real>::epsilon();
}

/// Largest x with exp(x) finite.
template <class Real>
const Real& log_max()
{
    static const Real value = log(std::numeric_limits<Real>::max());
    return value;
}

/// Relative Newton step tolerance; 1e-14 in double precision.
template <class Real>
Real newton_tolerance()
{
    return Real(45) * epsilon<Real>();
}

/// Relative residual accepted after a root solve; 1e-12 in double precision.
template <class Real>
Real residual_tolerance()
{
    return Real(4500) * epsilon<Real>();
}

template <class Real>
Complex<Real> make_complex(const Real& re, const Real& im)
{
    return Complex<Real>(re, im);
}

template <class Real>
Complex<Real> polar_form(const Real& modulus, const Real& angle)
{
    return Complex<Real>(modulus * cos(angle), modulus * sin(angle));
}

/// i * x for real x.
template <class Real>
Complex<Real> imag_unit_times(const Real& x)
{
    return Complex<Real>(Real(0), x);
}

/// Reduce an angle to (-pi, pi].
template <class Real>
Real principal_angle(Real a)
{
    const Real& tp = two_pi<Real>();
    if (a > pi<Real>() || a <= -pi<Real>()) {
        a -= tp * floor((a + pi<Real>()) / tp);
        if (a <= -pi<Real>()) a += tp;
        if (a > pi<Real>()) a -= tp;
    }
    return a;
}

template <class Real>
double to_double(const Real& x)
{
    return static_cast<double>(x);
}

template <class Real>
std::complex<double> to_double(const std::complex<Real>& z)
{
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

/// A complex number stored as (log|w|, arg w); used where |w| leaves the
/// floating range.
template <class Real>
struct LogComplex {
    Real log_modulus;
    Real argument;

    bool representable() const { return log_modulus < log_max<Real>() - Real(1); }

    Complex<Real> value() const { return polar_form(exp(log_modulus), argument); }

    static LogComplex from(const Complex<Real>& w) { return {log(abs(w)), arg(w)}; }
};

}  // namespace rayforge
