#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include <rayforge/address.hpp>
#include <rayforge/entire_map.hpp>
#include <rayforge/error.hpp>
#include <rayforge/growth.hpp>
#include <rayforge/scalar.hpp>

namespace rayforge {

/// A point on the dynamic ray of `address` at potential `potential`.
template <class Real>
struct RaySample {
    ExternalAddress address;
    Real potential;
    Complex<Real> position;
    int depth = 0;
    /// A posteriori bound on the change of `position` if recomputed one level deeper.
    Real err_bound;
    int degree = 1;
};

template <class Real>
struct RayOptions {
    Real tol = Real(1e-10);
    /// R_big: seeds are placed at potentials of at least this size.
    Real big_radius = Real(1e6);
    int max_depth = 64;
    /// Forces at least this many pullback steps.
    int min_depth = 0;
};

namespace detail {

/// log|g'(z)|, valid where g'(z) itself overflows.
template <class Real>
Real log_abs_derivative(const EntireMap<Real>& g, const Complex<Real>& z)
{
    const int d = g.degree();
    if (Real(d) * z.real() < log_max<Real>() - Real(8)) return log(abs(derivative(g, z)));
    return log(Real(d)) + Real(d) * z.real();
}

/// Seed F^k(t) + 2 pi i s_k / d, either as a plain complex or in log form.
template <class Real>
struct Seed {
    std::optional<Complex<Real>> value;
    LogComplex<Real> log_value;

    Complex<Real> pull_back(const EntireMap<Real>& g, Entry branch) const
    {
        return value ? inverse_branch(g, *value, branch) : inverse_branch(g, log_value, branch);
    }
};

template <class Real>
Seed<Real> make_seed(int d, const Real& potential, Entry entry)
{
    const Real offset = two_pi<Real>() * Real(static_cast<double>(entry)) / Real(d);
    return {Complex<Real>(potential, offset), {}};
}

/// Seed at potential F(previous) when that potential overflows.
template <class Real>
Seed<Real> make_log_seed(int d, const Real& previous, Entry entry)
{
    const Real dx = Real(d) * previous;
    const Real log_potential = dx + log1p(-exp(-dx));
    const Real offset = two_pi<Real>() * Real(static_cast<double>(entry)) / Real(d);
    return {std::nullopt, {log_potential, offset * exp(-log_potential)}};
}

template <class Real>
struct RayTrace {
    RaySample<Real> sample;
    /// Image point g(position) as seen from the chain, when the chain has length >= 1.
    std::optional<Complex<Real>> image;
};

template <class Real>
RayTrace<Real> trace_ray(const EntireMap<Real>& g, const ExternalAddress& s, const Real& t,
                         const RayOptions<Real>& opts)
{
    const int d = g.degree();
    if (!(t > Real(0))) throw Error(ErrorCode::InvalidArgument, "ray potential must be > 0");
    if (!(opts.tol > Real(0))) throw Error(ErrorCode::InvalidArgument, "ray tolerance must be > 0");
    const Real threshold = std::max(opts.big_radius, branch_threshold(g));

    // Depth selection along the ladder t, F(t), F^2(t), ...
    std::vector<Real> ladder{t};
    std::optional<Seed<Real>> top;
    int depth = 0;
    for (;;) {
        const Real& f = ladder.back();
        if (depth >= opts.min_depth && f >= threshold && exp(-f / Real(2)) < opts.tol) {
            top = make_seed(d, f, s.entry(static_cast<std::size_t>(depth)));
            break;
        }
        if (depth >= opts.max_depth)
            throw Error(ErrorCode::DepthOverflow, "no seed depth within the budget; potential too small");
        if (Real(d) * f >= log_max<Real>() - Real(1)) {
            ++depth;
            if (depth < opts.min_depth)
                throw Error(ErrorCode::DepthOverflow, "requested depth exceeds the representable range");
            top = make_log_seed(d, f, s.entry(static_cast<std::size_t>(depth)));
            break;
        }
        ladder.push_back(growth(d, f));
        ++depth;
    }

    // Pull back z_j = inverse_branch(g, z_{j+1}, s_j) for j = depth-1 .. 0.
    Complex<Real> z = top->value ? *top->value : Complex<Real>(0);
    std::optional<Complex<Real>> image;
    Real log_contraction(0);
    for (int j = depth - 1; j >= 0; --j) {
        const Entry branch = s.entry(static_cast<std::size_t>(j));
        if (j == 0 && (j < depth - 1 || top->value)) image = z;
        z = j == depth - 1 ? top->pull_back(g, branch) : inverse_branch(g, z, branch);
        log_contraction -= log_abs_derivative(g, z);
    }

    // Displacement of the seed under one more pullback level.
    Real displacement(0);
    if (top->value) {
        const Real& f = ladder.back();
        const Entry next_entry = s.entry(static_cast<std::size_t>(depth + 1));
        const Seed<Real> deeper = Real(d) * f >= log_max<Real>() - Real(1)
                                      ? make_log_seed(d, f, next_entry)
                                      : make_seed(d, growth(d, f), next_entry);
        if (!deeper.value || abs(*deeper.value) >= branch_threshold(g))
            displacement = abs(deeper.pull_back(g, s.entry(static_cast<std::size_t>(depth))) - *top->value);
    }

    const Real rounding = Real(16) * epsilon<Real>() * (Real(1) + abs(z)) * Real(depth + 1);
    const Real propagated = displacement == Real(0) ? Real(0) : Real(2) * displacement * exp(log_contraction);

    RayTrace<Real> out{{s, t, z, depth, propagated + rounding, d}, image};
    return out;
}

}  // namespace detail

/// R_s(t): seeds F^k(t) + 2 pi i s_k / d at the smallest depth k where
/// F^k(t) >= max(R_big, R_min(g)) and e^{-F^k(t)/2} < tol, then pulls back
/// along the entries s_{k-1}, ..., s_0.
template <class Real>
RaySample<Real> ray_point(const EntireMap<Real>& g, const ExternalAddress& s, const Real& t,
                          const RayOptions<Real>& opts = {})
{
    return detail::trace_ray(g, s, t, opts).sample;
}

/// `n` samples at geometrically spaced potentials in [t_lo, t_hi]. Adjacent
/// samples never differ by a branch jump (|Im step| < pi/d); if one is
/// detected, the last pullback is redone on the neighbouring preimage nearest
/// to the previous sample.
template <class Real>
std::vector<RaySample<Real>> ray_sample(const EntireMap<Real>& g, const ExternalAddress& s, const Real& t_lo,
                                        const Real& t_hi, int n, const RayOptions<Real>& opts = {})
{
    if (!(t_lo > Real(0)) || !(t_lo < t_hi))
        throw Error(ErrorCode::InvalidArgument, "ray_sample needs 0 < t_lo < t_hi");
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "ray_sample needs at least 2 samples");
    std::vector<detail::RayTrace<Real>> traces;
    traces.reserve(static_cast<std::size_t>(n));
    const Real ratio = t_hi / t_lo;
    for (int i = 0; i < n; ++i) {
        const Real t = i == n - 1 ? t_hi : t_lo * pow(ratio, Real(i) / Real(n - 1));
        traces.push_back(detail::trace_ray(g, s, t, opts));
    }

    const Real gap = pi<Real>() / Real(g.degree());
    std::vector<RaySample<Real>> out;
    out.reserve(traces.size());
    for (auto& trace : traces) {
        auto& sample = trace.sample;
        if (!out.empty() && trace.image) {
            const Complex<Real>& previous = out.back().position;
            if (abs(sample.position.imag() - previous.imag()) >= gap) {
                const Entry s0 = s.entry(0);
                for (Entry alt : {s0 - 1, s0 + 1}) {
                    const Complex<Real> candidate = inverse_branch(g, *trace.image, alt);
                    if (abs(candidate - previous) < abs(sample.position - previous)) sample.position = candidate;
                }
            }
        }
        out.push_back(sample);
    }
    return out;
}

/// |position - t - 2 pi i s_0 / d| e^{t/2}: the witness for the O(e^{-t/2})
/// term of the ray asymptotics.
template <class Real>
Real asymptotic_residual(const RaySample<Real>& sample)
{
    const Complex<Real> center(sample.potential,
                               two_pi<Real>() * Real(static_cast<double>(sample.address.entry(0))) /
                                   Real(sample.degree));
    const Real deviation = abs(sample.position - center);
    if (deviation == Real(0)) return Real(0);
    return exp(log(deviation) + sample.potential / Real(2));
}

}  // namespace rayforge
