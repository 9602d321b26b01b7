#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <rayforge/address.hpp>
#include <rayforge/error.hpp>
#include <rayforge/polynomial.hpp>
#include <rayforge/scalar.hpp>

namespace rayforge {

/// g = p o exp with p(w) = w^d + c_{d-1} w^{d-1} + ... + c_0 monic.
template <class Real>
class EntireMap {
public:
    using Scalar = Real;
    using C = Complex<Real>;

    /// `coeffs` holds c_0 .. c_{d-1}; its length is the degree.
    explicit EntireMap(CoeffVector<Real> coeffs) : coeffs_(std::move(coeffs))
    {
        if (coeffs_.size() < 1) throw Error(ErrorCode::InvalidArgument, "degree must be >= 1");
    }

    EntireMap(std::initializer_list<C> coeffs) : EntireMap(CoeffVector<Real>(to_vector(coeffs))) {}

    /// e^z + kappa.
    static EntireMap exponential(const C& kappa = C(0)) { return EntireMap({kappa}); }

    int degree() const { return static_cast<int>(coeffs_.size()); }
    const CoeffVector<Real>& coeffs() const { return coeffs_; }

    /// Full coefficient vector of p including the leading 1.
    CoeffVector<Real> monic() const
    {
        CoeffVector<Real> a(coeffs_.size() + 1);
        a.head(coeffs_.size()) = coeffs_;
        a[coeffs_.size()] = C(1);
        return a;
    }

    C p(const C& w) const { return horner<Real>(monic(), w); }

    C dp(const C& w) const
    {
        const Eigen::Index d = coeffs_.size();
        C acc(Real(static_cast<double>(d)));
        for (Eigen::Index k = d - 1; k >= 1; --k) acc = acc * w + coeffs_[k] * Real(static_cast<double>(k));
        return acc;
    }

    template <class Other>
    EntireMap<Other> cast() const
    {
        CoeffVector<Other> out(coeffs_.size());
        for (Eigen::Index k = 0; k < coeffs_.size(); ++k)
            out[k] = Complex<Other>(Other(coeffs_[k].real()), Other(coeffs_[k].imag()));
        return EntireMap<Other>(std::move(out));
    }

private:
    static CoeffVector<Real> to_vector(std::initializer_list<C> list)
    {
        CoeffVector<Real> v(static_cast<Eigen::Index>(list.size()));
        Eigen::Index k = 0;
        for (const auto& c : list) v[k++] = c;
        return v;
    }

    CoeffVector<Real> coeffs_;
};

/// g(z) = p(e^z). Throws Overflow when |g(z)| leaves the floating range.
template <class Real>
Complex<Real> evaluate(const EntireMap<Real>& g, const Complex<Real>& z)
{
    const Complex<Real> value = g.p(exp(z));
    if (!isfinite(value.real()) || !isfinite(value.imag()))
        throw Error(ErrorCode::Overflow, "|g(z)| exceeds the floating range; use the log form");
    return value;
}

/// g'(z) = p'(e^z) e^z.
template <class Real>
Complex<Real> derivative(const EntireMap<Real>& g, const Complex<Real>& z)
{
    const Complex<Real> w = exp(z);
    const Complex<Real> value = g.dp(w) * w;
    if (!isfinite(value.real()) || !isfinite(value.imag()))
        throw Error(ErrorCode::Overflow, "|g'(z)| exceeds the floating range");
    return value;
}

/// (log|g(z)|, arg g(z)). For large Re z the leading term e^{dz} is factored
/// out, so no intermediate leaves the floating range.
template <class Real>
LogComplex<Real> evaluate_log(const EntireMap<Real>& g, const Complex<Real>& z)
{
    using C = Complex<Real>;
    const int d = g.degree();
    if (Real(d) * z.real() < log_max<Real>() - Real(8)) return LogComplex<Real>::from(evaluate(g, z));
    // p(e^z) = e^{dz} (1 + sum_k c_k e^{-(d-k) z}).
    const C inv = exp(-z);
    C correction(1);
    C power(1);
    for (int k = d - 1; k >= 0; --k) {
        power *= inv;
        correction += g.coeffs()[k] * power;
    }
    return {Real(d) * z.real() + log(abs(correction)), principal_angle(Real(d) * z.imag() + arg(correction))};
}

/// R_min(g) = 4 (1 + sum |c_k|)^2. Above it the d roots of p(w) = target sit in
/// disjoint sectors around the roots of w^d = target.
template <class Real>
Real branch_threshold(const EntireMap<Real>& g)
{
    Real total(1);
    for (Eigen::Index k = 0; k < g.coeffs().size(); ++k) total += abs(g.coeffs()[k]);
    return Real(4) * total * total;
}

template <class Real>
struct SingularValues {
    /// Asymptotic value p(0) first, then the distinct critical values.
    std::vector<Complex<Real>> values;
    /// critical_points[k] is a root of p' with p(critical_points[k]) == values[k + 1].
    std::vector<Complex<Real>> critical_points;

    std::size_t size() const { return values.size(); }
};

/// Nonzero critical points of p (roots of p' other than an exact root at 0).
/// Throws DegenerateMap if one lies within eps of 0.
template <class Real>
std::vector<Complex<Real>> critical_points(const EntireMap<Real>& g, const Real& eps)
{
    using C = Complex<Real>;
    const int d = g.degree();
    if (d == 1) return {};
    // p'(w) = sum_{k=1}^{d} k c_k w^{k-1} with c_d = 1; strip exact factors of w.
    CoeffVector<Real> a = g.monic();
    CoeffVector<Real> deriv(d);
    for (int k = 1; k <= d; ++k) deriv[k - 1] = a[k] * Real(k);
    Eigen::Index zeros = 0;
    while (zeros < deriv.size() - 1 && deriv[zeros] == C(0)) ++zeros;
    const CoeffVector<Real> reduced = deriv.tail(deriv.size() - zeros);
    std::vector<C> roots = polynomial_roots<Real>(reduced);
    for (const auto& r : roots)
        if (abs(r) < eps)
            throw Error(ErrorCode::DegenerateMap,
                        "a critical point of p lies within eps of 0; the asymptotic and a critical value collide");
    return roots;
}

/// {p(0)} together with the critical values p(w), p'(w) = 0, w != 0,
/// deduplicated within eps (relative to 1 + |v|).
template <class Real>
SingularValues<Real> singular_values(const EntireMap<Real>& g, const Real& eps = Real(1e-9))
{
    SingularValues<Real> out;
    out.values.push_back(g.coeffs()[0]);
    for (const auto& w : critical_points(g, eps)) {
        const Complex<Real> v = g.p(w);
        const bool seen = std::any_of(out.values.begin(), out.values.end(), [&](const Complex<Real>& u) {
            return abs(u - v) <= eps * (Real(1) + abs(v));
        });
        if (seen) continue;
        out.values.push_back(v);
        out.critical_points.push_back(w);
    }
    return out;
}

namespace detail {

template <class Real>
Entry floor_mod(Entry s, int d, Entry& quotient)
{
    Entry r = s % d;
    if (r < 0) r += d;
    quotient = (s - r) / d;
    return r;
}

/// Newton on p(w) = target from `start`; returns the converged root.
template <class Real>
Complex<Real> newton_root(const EntireMap<Real>& g, const Complex<Real>& target, Complex<Real> w,
                          int budget = 100)
{
    const Real tol = newton_tolerance<Real>();
    for (int iter = 0; iter < budget; ++iter) {
        const Complex<Real> slope = g.dp(w);
        if (slope == Complex<Real>(0)) break;
        const Complex<Real> step = (g.p(w) - target) / slope;
        w -= step;
        if (abs(step) <= tol * abs(w)) {
            if (abs(g.p(w) - target) <= residual_tolerance<Real>() * abs(target)) return w;
            break;
        }
    }
    // Near the round-off floor Newton may stall slightly above the step tolerance.
    if (abs(g.p(w) - target) <= residual_tolerance<Real>() * abs(target)) return w;
    throw Error(ErrorCode::NoConvergence, "Newton on p(w) = target did not converge; target near a critical value?");
}

}  // namespace detail

/// Preimage of `w` under g in branch `s`.
///
/// With r = s mod d and n = (s - r) / d, the root of p(w') = w is continued from
/// |w|^{1/d} exp(i (arg w + 2 pi r) / d) and z = log|w'| + i arg w' + 2 pi i n,
/// so that |Im z - 2 pi s / d| < pi / d.
template <class Real>
Complex<Real> inverse_branch(const EntireMap<Real>& g, const Complex<Real>& w, Entry s)
{
    using C = Complex<Real>;
    const int d = g.degree();
    const Real modulus = abs(w);
    if (modulus < branch_threshold(g))
        throw Error(ErrorCode::BelowThreshold, "|w| is below R_min(g); root sectors are not separated");
    Entry sheet = 0;
    const Entry r = detail::floor_mod<Real>(s, d, sheet);
    const Real start_angle = (arg(w) + two_pi<Real>() * Real(static_cast<double>(r))) / Real(d);
    const C start = polar_form(pow(modulus, Real(1) / Real(d)), start_angle);
    const C root = detail::newton_root(g, w, start);
    const Real angle = start_angle + arg(root / start);
    return C(log(abs(root)), angle + two_pi<Real>() * Real(static_cast<double>(sheet)));
}

/// Same as above for a target given in log form. Beyond the floating range the
/// correction to log(w)/d is O(|w|^{-1/d}), far below the working precision.
template <class Real>
Complex<Real> inverse_branch(const EntireMap<Real>& g, const LogComplex<Real>& w, Entry s)
{
    if (w.log_modulus < log_max<Real>() / Real(2)) return inverse_branch(g, w.value(), s);
    const int d = g.degree();
    Entry sheet = 0;
    const Entry r = detail::floor_mod<Real>(s, d, sheet);
    const Real angle = (principal_angle(w.argument) + two_pi<Real>() * Real(static_cast<double>(r))) / Real(d);
    return Complex<Real>(w.log_modulus / Real(d), angle + two_pi<Real>() * Real(static_cast<double>(sheet)));
}

}  // namespace rayforge
