#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/QR>

#include <rayforge/address.hpp>
#include <rayforge/entire_map.hpp>
#include <rayforge/error.hpp>
#include <rayforge/escape_spec.hpp>
#include <rayforge/growth.hpp>
#include <rayforge/rays.hpp>
#include <rayforge/scalar.hpp>

namespace rayforge {

template <class Real>
struct SolveOptions {
    Real tol = Real(1e-9);
    int max_iterations = 200;
    /// Forward-orbit certificate depth J_check.
    int certificate_depth = 3;
    Real big_radius = Real(1e6);
    Real eps_sv = Real(1e-9);
    /// Inner Newton budget per outer iteration.
    int newton_iterations = 60;
};

/// |g^j(v_i) - R_{sigma^j s_i}(F^j(T_i))| for one (i, j).
template <class Real>
struct OrbitCheck {
    int orbit = 0;
    int step = 0;
    Real error;
};

template <class Real>
struct SolveResult {
    EntireMap<Real> map;
    /// Singular values in spec order: asymptotic value first.
    std::vector<Complex<Real>> singular_values;
    std::vector<Complex<Real>> targets;
    std::vector<Real> residuals;
    int iterations = 0;
    std::vector<OrbitCheck<Real>> certificate;
    /// Certificate steps skipped because F^j(T_i) leaves the floating range.
    int certificate_truncated = 0;

    Real max_residual() const
    {
        Real out(0);
        for (const auto& r : residuals) out = std::max(out, r);
        return out;
    }
};

/// Starting maps with m distinct singular values: e^z for d = 1, and
/// w^d, w^2 - 2w, w^3 - 3w^2, w^3 - 3w otherwise.
template <class Real>
EntireMap<Real> default_init(int d, int m)
{
    using C = Complex<Real>;
    if (d < 1 || d > 3 || m < 1 || m > d)
        throw Error(ErrorCode::InvalidArgument, "default initial maps exist for d <= 3 and 1 <= m <= d");
    CoeffVector<Real> c = CoeffVector<Real>::Zero(d);
    if (m == 2 && d == 2) c[1] = C(-2);
    if (m == 2 && d == 3) c[2] = C(-3);
    if (m == 3) c[1] = C(-3);
    return EntireMap<Real>(c);
}

namespace detail {

/// Singular values of g ordered to follow `previous` critical points: the
/// asymptotic value first, then critical values matched by minimal total
/// displacement of the critical points.
template <class Real>
struct Labelled {
    std::vector<Complex<Real>> values;
    std::vector<Complex<Real>> critical_points;
};

template <class Real>
Labelled<Real> labelled_singular_values(const EntireMap<Real>& g, const std::vector<Complex<Real>>& previous,
                                        const Real& eps_sv)
{
    const SingularValues<Real> sv = singular_values(g, eps_sv);
    if (sv.critical_points.size() != previous.size())
        throw Error(ErrorCode::SingularJacobian, "singular values merged or split during the iteration");
    std::vector<std::size_t> order(previous.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> best = order;
    Real best_cost = std::numeric_limits<Real>::infinity();
    do {
        Real cost(0);
        for (std::size_t k = 0; k < order.size(); ++k) cost += abs(sv.critical_points[order[k]] - previous[k]);
        if (cost < best_cost) {
            best_cost = cost;
            best = order;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    Labelled<Real> out;
    out.values.push_back(sv.values[0]);
    for (std::size_t k = 0; k < best.size(); ++k) {
        out.values.push_back(sv.values[best[k] + 1]);
        out.critical_points.push_back(sv.critical_points[best[k]]);
    }
    return out;
}

template <class Real, class Vec>
Real max_distance(const Vec& a, const Vec& b)
{
    Real out(0);
    for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, abs(a[k] - b[k]));
    return out;
}

template <class Real>
Real coefficient_distance(const EntireMap<Real>& a, const EntireMap<Real>& b)
{
    return (a.coeffs() - b.coeffs()).template lpNorm<Eigen::Infinity>();
}

/// Damped Newton for the non-leading coefficients: singular values = targets.
/// Row 0 of the Jacobian is d c_0 / d c_j; row k is d p(w_k) / d c_j = w_k^j
/// since p'(w_k) = 0. Steps are minimum-norm when m < d.
template <class Real>
EntireMap<Real> match_singular_values(const EntireMap<Real>& start, std::vector<Complex<Real>> critical,
                                      const std::vector<Complex<Real>>& targets, const SolveOptions<Real>& opts)
{
    using C = Complex<Real>;
    using Matrix = ComplexMatrix<Real>;
    using Vector = CoeffVector<Real>;
    const int d = start.degree();
    const auto m = static_cast<Eigen::Index>(targets.size());

    EntireMap<Real> g = start;
    Labelled<Real> current = labelled_singular_values(g, critical, opts.eps_sv);
    Real scale(1);
    for (const auto& w : targets) scale = std::max(scale, abs(w));
    const Real floor_tol = Real(100) * epsilon<Real>() * scale;
    const Real stop = std::min(opts.tol * Real(1e-2), opts.tol);

    for (int iter = 0; iter < opts.newton_iterations; ++iter) {
        Vector F(m);
        for (Eigen::Index k = 0; k < m; ++k) F[k] = current.values[static_cast<std::size_t>(k)] - targets[static_cast<std::size_t>(k)];
        const Real norm = F.template lpNorm<Eigen::Infinity>();
        if (norm <= std::max(stop, floor_tol)) return g;

        Matrix J = Matrix::Zero(m, d);
        J(0, 0) = C(1);
        for (Eigen::Index k = 1; k < m; ++k) {
            C power(1);
            for (int j = 0; j < d; ++j) {
                J(k, j) = power;
                power *= current.critical_points[static_cast<std::size_t>(k - 1)];
            }
        }
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(J);
        cod.setThreshold(Real(1e3) * epsilon<Real>());
        if (cod.rank() < m)
            throw Error(ErrorCode::SingularJacobian,
                        "singular values cannot be moved independently (coinciding critical points?)");
        const Vector step = cod.solve(Vector(-F));

        Real lambda(1);
        bool accepted = false;
        for (int halving = 0; halving < 40 && !accepted; ++halving, lambda /= Real(2)) {
            const EntireMap<Real> trial(Vector(g.coeffs() + lambda * step));
            Labelled<Real> labelled;
            try {
                labelled = labelled_singular_values(trial, current.critical_points, opts.eps_sv);
            } catch (const Error& err) {
                if (err.code() == ErrorCode::DegenerateMap || err.code() == ErrorCode::SingularJacobian) continue;
                throw;
            }
            Real trial_norm(0);
            for (Eigen::Index k = 0; k < m; ++k)
                trial_norm = std::max(trial_norm, abs(labelled.values[static_cast<std::size_t>(k)] - targets[static_cast<std::size_t>(k)]));
            if (trial_norm < norm) {
                g = trial;
                current = std::move(labelled);
                accepted = true;
            }
        }
        if (!accepted) {
            if (norm <= Real(1e3) * floor_tol) return g;
            throw Error(ErrorCode::NonConvergence, "damped Newton stalled on the singular-value system");
        }
    }
    throw Error(ErrorCode::NonConvergence, "Newton budget exhausted on the singular-value system");
}

template <class Real>
std::vector<Complex<Real>> ray_targets(const EntireMap<Real>& g, const EscapeSpec<Real>& spec,
                                       const SolveOptions<Real>& opts)
{
    RayOptions<Real> ray;
    ray.tol = opts.tol / Real(10);
    ray.big_radius = opts.big_radius;
    std::vector<Complex<Real>> out;
    for (std::size_t i = 0; i < spec.size(); ++i)
        out.push_back(ray_point(g, spec.addresses[i], spec.potentials[i], ray).position);
    return out;
}

}  // namespace detail

/// Forward-orbit certificate: g^j(v_i) against the ray point at F^j(T_i).
template <class Real>
void certify(SolveResult<Real>& result, const EscapeSpec<Real>& spec, const SolveOptions<Real>& opts)
{
    RayOptions<Real> ray;
    ray.tol = opts.tol / Real(10);
    ray.big_radius = opts.big_radius;
    result.certificate.clear();
    result.certificate_truncated = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        Complex<Real> z = result.singular_values[i];
        Real t = spec.potentials[i];
        for (int j = 0; j <= opts.certificate_depth; ++j) {
            if (j > 0) {
                if (Real(spec.degree) * t >= log_max<Real>() || Real(spec.degree) * z.real() >= log_max<Real>() - Real(8)) {
                    result.certificate_truncated += opts.certificate_depth + 1 - j;
                    break;
                }
                t = growth(spec.degree, t);
                z = evaluate(result.map, z);
            }
            const auto target = ray_point(result.map, shift(spec.addresses[i], static_cast<std::size_t>(j)), t, ray);
            result.certificate.push_back({static_cast<int>(i), j, abs(z - target.position)});
        }
    }
}

/// Coefficient-space fixed-point iteration: targets w_i = R_{s_i}(T_i) for the
/// current map, then the singular values of the next map are moved onto them.
template <class Real>
SolveResult<Real> solve(const EscapeSpec<Real>& spec, const EntireMap<Real>& g_init, const SolveOptions<Real>& opts = {})
{
    validate(spec);
    if (g_init.degree() != spec.degree)
        throw Error(ErrorCode::InvalidArgument, "initial map degree differs from the spec degree");
    if (!(opts.tol > Real(0)) || opts.max_iterations < 1)
        throw Error(ErrorCode::InvalidArgument, "solve needs tol > 0 and an iteration budget >= 1");
    if (spec.size() > static_cast<std::size_t>(spec.degree))
        throw Error(ErrorCode::InvalidArgument, "a degree-" + std::to_string(spec.degree) +
                                                    " map has at most " + std::to_string(spec.degree) +
                                                    " singular values");
    const SingularValues<Real> sv0 = singular_values(g_init, opts.eps_sv);
    if (sv0.size() != spec.size())
        throw Error(ErrorCode::InvalidArgument, "initial map has " + std::to_string(sv0.size()) +
                                                    " singular values but the spec prescribes " +
                                                    std::to_string(spec.size()));

    EntireMap<Real> g = g_init;
    std::vector<Complex<Real>> critical = sv0.critical_points;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const auto targets = detail::ray_targets(g, spec, opts);
        const EntireMap<Real> next = detail::match_singular_values(g, critical, targets, opts);
        const auto labelled = detail::labelled_singular_values(next, critical, opts.eps_sv);
        const Real change = detail::coefficient_distance(next, g);
        const Real mismatch = detail::max_distance<Real>(labelled.values, targets);
        g = next;
        critical = labelled.critical_points;
        if (change < opts.tol && mismatch < opts.tol) {
            SolveResult<Real> result{g, labelled.values, {}, {}, iter, {}, 0};
            result.targets = detail::ray_targets(g, spec, opts);
            for (std::size_t i = 0; i < spec.size(); ++i)
                result.residuals.push_back(abs(result.singular_values[i] - result.targets[i]));
            certify(result, spec, opts);
            return result;
        }
    }
    throw Error(ErrorCode::NonConvergence, "fixed-point iteration did not settle within " +
                                               std::to_string(opts.max_iterations) + " iterations");
}

/// Parameter-ray continuation: each tuple of potentials is solved from the
/// previous solution.
template <class Real>
std::vector<SolveResult<Real>> trace(const EscapeSpec<Real>& spec0, const std::vector<std::vector<Real>>& path,
                                     const EntireMap<Real>& g_init, const SolveOptions<Real>& opts = {})
{
    std::vector<SolveResult<Real>> out;
    EntireMap<Real> g = g_init;
    for (std::size_t step = 0; step < path.size(); ++step) {
        EscapeSpec<Real> spec = spec0;
        if (path[step].size() != spec.size())
            throw Error(ErrorCode::InvalidArgument, "path tuple " + std::to_string(step) + " has the wrong length");
        spec.potentials = path[step];
        try {
            out.push_back(solve(spec, g, opts));
        } catch (const Error& err) {
            const bool diverged = err.code() == ErrorCode::NonConvergence || err.code() == ErrorCode::SingularJacobian;
            if (step == 0 || !diverged) throw;
            throw Error(ErrorCode::StepTooLarge, "warm-started solve failed at path step " + std::to_string(step) +
                                                     "; refine the path (" + err.what() + ")");
        }
        g = out.back().map;
    }
    return out;
}

enum class ProbeMode { Address, Potential, Both };

template <class Real>
struct ProbeReport {
    ProbeMode mode = ProbeMode::Address;
    /// |coeffs(G(alpha_n)) - coeffs(G(alpha))|, n = 1..n_steps.
    std::vector<Real> distances;
    /// Non-increasing up to `noise_floor`.
    bool monotone = true;
    bool pass = false;
    Real tol;
};

template <class Real>
struct ProbeOptions {
    SolveOptions<Real> solve;
    /// Final distance threshold for the verdict.
    Real tol = Real(1e-6);
    /// Increases below this size are treated as round-off.
    Real noise_floor = Real(1e-12);
};

/// Constant tails for address truncations: the smallest nonnegative integers,
/// pairwise distinct so that the approximants stay non-overlapping.
inline std::vector<Entry> default_tails(std::size_t m)
{
    std::vector<Entry> out(m);
    std::iota(out.begin(), out.end(), Entry(0));
    return out;
}

/// alpha_n: addresses s_i cut after n entries and continued by a constant
/// tail (address mode), potentials T_i + 1/n (potential mode), or both.
template <class Real>
EscapeSpec<Real> approximant(const EscapeSpec<Real>& spec, ProbeMode mode, int n, const std::vector<Entry>& tails)
{
    EscapeSpec<Real> out = spec;
    if (mode != ProbeMode::Potential)
        for (std::size_t i = 0; i < spec.size(); ++i)
            out.addresses[i] = truncate(spec.addresses[i], static_cast<std::size_t>(n), {tails[i]});
    if (mode != ProbeMode::Address)
        for (auto& T : out.potentials) T += Real(1) / Real(n);
    return out;
}

template <class Real>
ProbeReport<Real> continuity_probe(const EscapeSpec<Real>& spec, ProbeMode mode, int n_steps,
                                   const EntireMap<Real>& g_init, const ProbeOptions<Real>& opts = {},
                                   std::vector<Entry> tails = {}, int first_n = 1)
{
    if (n_steps < first_n) throw Error(ErrorCode::InvalidArgument, "continuity probe needs n_steps >= first n");
    if (tails.empty()) tails = default_tails(spec.size());
    if (tails.size() != spec.size()) throw Error(ErrorCode::InvalidArgument, "one tail entry per address is required");
    const SolveResult<Real> center = solve(spec, g_init, opts.solve);
    ProbeReport<Real> report;
    report.mode = mode;
    report.tol = opts.tol;
    for (int n = first_n; n <= n_steps; ++n) {
        const SolveResult<Real> approx = solve(approximant(spec, mode, n, tails), center.map, opts.solve);
        const Real dist = detail::coefficient_distance(approx.map, center.map);
        if (!report.distances.empty() && dist > report.distances.back() + opts.noise_floor) report.monotone = false;
        report.distances.push_back(dist);
    }
    report.pass = report.distances.back() < opts.tol;
    return report;
}

}  // namespace rayforge
