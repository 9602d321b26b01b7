#pragma once

#include <vector>

#include <rayforge/error.hpp>
#include <rayforge/scalar.hpp>

namespace rayforge {

/// Evaluates sum_k a_k x^k (a_0 first) by Horner's rule.
template <class Real>
Complex<Real> horner(const CoeffVector<Real>& a, const Complex<Real>& x)
{
    Complex<Real> acc(0);
    for (Eigen::Index k = a.size(); k-- > 0;) acc = acc * x + a[k];
    return acc;
}

/// Roots of the polynomial sum_k a_k x^k, a_0 first, leading coefficient a_n
/// nonzero. Aberth-Ehrlich simultaneous iteration followed by Newton polishing.
template <class Real>
std::vector<Complex<Real>> polynomial_roots(const CoeffVector<Real>& a)
{
    using C = Complex<Real>;
    const Eigen::Index n = a.size() - 1;
    if (n < 0 || abs(a[n]) == Real(0))
        throw Error(ErrorCode::InvalidArgument, "polynomial needs a nonzero leading coefficient");
    if (n == 0) return {};
    if (n == 1) return {C(-a[0] / a[1])};

    CoeffVector<Real> monic = a / a[n];
    CoeffVector<Real> deriv(n);
    for (Eigen::Index k = 1; k <= n; ++k) deriv[k - 1] = monic[k] * Real(static_cast<double>(k));

    // Cauchy bound on the root moduli seeds a circle of starting points.
    Real radius(0);
    for (Eigen::Index k = 0; k < n; ++k) radius = std::max(radius, abs(monic[k]));
    radius = Real(1) + radius;
    std::vector<C> z(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        const Real angle = two_pi<Real>() * Real(static_cast<double>(k)) / Real(static_cast<double>(n)) + Real(0.4);
        z[static_cast<std::size_t>(k)] = polar_form(radius * Real(0.5), angle);
    }

    const Real tol = newton_tolerance<Real>();
    for (int iter = 0; iter < 500; ++iter) {
        Real largest_step(0);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const C p = horner<Real>(monic, z[i]);
            const C dp = horner<Real>(deriv, z[i]);
            if (p == C(0)) continue;
            const C ratio = p / dp;
            C repulsion(0);
            for (std::size_t j = 0; j < z.size(); ++j)
                if (j != i) repulsion += C(1) / (z[i] - z[j]);
            const C step = ratio / (C(1) - ratio * repulsion);
            z[i] -= step;
            largest_step = std::max(largest_step, abs(step) / (Real(1) + abs(z[i])));
        }
        if (largest_step < tol) break;
    }
    for (auto& root : z) {
        for (int iter = 0; iter < 5; ++iter) {
            const C dp = horner<Real>(deriv, root);
            if (dp == C(0)) break;
            root -= horner<Real>(monic, root) / dp;
        }
    }
    return z;
}

}  // namespace rayforge
