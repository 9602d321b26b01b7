#pragma once

#include <algorithm>
#include <string>

#include <rayforge/address.hpp>
#include <rayforge/error.hpp>
#include <rayforge/scalar.hpp>

namespace rayforge {

/// F(t) = exp(d t) - 1, the model growth of potentials under one iterate.
template <class Real>
Real growth(int degree, const Real& t)
{
    return expm1(Real(degree) * t);
}

/// F^{-1}(y) = log(1 + y) / d.
template <class Real>
Real growth_inverse(int degree, const Real& y)
{
    return log1p(y) / Real(degree);
}

/// F^n(t). Throws Overflow when an iterate leaves the floating range.
template <class Real>
Real growth_iterate(int degree, Real t, int n)
{
    if (degree < 1) throw Error(ErrorCode::InvalidArgument, "degree must be >= 1");
    if (t < Real(0)) throw Error(ErrorCode::InvalidArgument, "potential must be >= 0");
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "iterate count must be >= 0");
    for (int k = 0; k < n; ++k) {
        if (Real(degree) * t >= log_max<Real>())
            throw Error(ErrorCode::Overflow,
                        "F^" + std::to_string(k + 1) + "(t) exceeds the floating range; reduce the depth");
        t = growth(degree, t);
    }
    return t;
}

/// log((F^H)'(t)) = sum_{j<H} [log d + d F^j(t)]. Finite as long as F^{H-1}(t) is.
template <class Real>
Real log_growth_iterate_derivative(int degree, const Real& t, int H)
{
    Real sum(0);
    Real x = t;
    const Real log_d = log(Real(degree));
    for (int j = 0; j < H; ++j) {
        sum += log_d + Real(degree) * x;
        if (j + 1 < H) x = growth_iterate(degree, x, 1);
    }
    return sum;
}

/// (F^H)'(t) = prod_{j<H} F'(F^j(t)) with F'(x) = d exp(d x). Throws Overflow.
template <class Real>
Real growth_iterate_derivative(int degree, const Real& t, int H)
{
    const Real log_value = log_growth_iterate_derivative(degree, t, H);
    if (log_value >= log_max<Real>())
        throw Error(ErrorCode::Overflow, "(F^" + std::to_string(H) + ")'(t) exceeds the floating range");
    return exp(log_value);
}

/// Infimum of potentials t with s_n / F^n(t) -> 0. Every eventually periodic
/// address is bounded, so the infimum is 0.
inline double min_potential(const ExternalAddress&) { return 0.0; }

/// sup_{n >= 1} |s_n| / F^n(t). Since F^n(t) increases with n, the supremum is
/// attained among the first occurrences of each entry, i.e. for
/// n < preperiod + period + 1.
template <class Real>
Real potential_growth_ratio(const ExternalAddress& s, int degree, const Real& t)
{
    if (!(t > Real(0))) throw Error(ErrorCode::InvalidArgument, "potential must be > 0");
    Real best(0);
    Real f = t;
    const std::size_t horizon = s.preperiod() + s.period() + 1;
    for (std::size_t n = 1; n <= horizon; ++n) {
        if (Real(degree) * f >= log_max<Real>()) break;
        f = growth(degree, f);
        best = std::max(best, Real(static_cast<double>(std::abs(s.entry(n)))) / f);
    }
    return best;
}

/// Addresses s' with |s'_i - s_i|^{2d} < K F^i(t) for every i > 0.
template <class Real>
struct Wedge {
    ExternalAddress center;
    Real t;
    Real K;
    int degree = 1;
};

template <class Real>
bool wedge_contains(const Wedge<Real>& w, const ExternalAddress& s)
{
    if (!(w.t > Real(0)) || !(w.K > Real(0)))
        throw Error(ErrorCode::InvalidArgument, "wedge needs t > 0 and K > 0");
    // Entry differences are eventually periodic with this preperiod and period.
    const std::size_t pre = std::max(s.preperiod(), w.center.preperiod());
    const std::size_t a = s.period(), b = w.center.period();
    std::size_t g = a, h = b;
    while (h != 0) {
        const std::size_t r = g % h;
        g = h;
        h = r;
    }
    const std::size_t lcm = a / g * b;
    const auto diff = [&](std::size_t i) {
        return Real(static_cast<double>(std::abs(s.entry(i) - w.center.entry(i))));
    };
    const int two_d = 2 * w.degree;
    Real worst(0);
    for (std::size_t i = 1; i <= pre + lcm; ++i) worst = std::max(worst, pow(diff(i), two_d));
    if (worst == Real(0)) return true;

    Real f = w.t;
    for (std::size_t i = 1;; ++i) {
        if (Real(w.degree) * f >= log_max<Real>()) return true;
        f = growth(w.degree, f);
        if (w.K * f > worst) return true;  // every later term is dominated as well
        if (!(pow(diff(i), two_d) < w.K * f)) return false;
    }
}

}  // namespace rayforge
