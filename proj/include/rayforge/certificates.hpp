#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <rayforge/clusters.hpp>
#include <rayforge/entire_map.hpp>
#include <rayforge/error.hpp>
#include <rayforge/growth.hpp>
#include <rayforge/scalar.hpp>

namespace rayforge {

/// Images phi(a_ij) of the marked points, keyed by (i, j).
template <class Real>
using Positions = std::map<PointIndex, Complex<Real>>;

template <class Real>
Positions<Real> identity_positions(const MarkedGrid<Real>& grid)
{
    Positions<Real> out;
    for (int i = 0; i < grid.orbits(); ++i)
        for (int j = 0; j <= grid.depth; ++j)
            if (const auto& pos = grid.at({i, j}).position) out.emplace(PointIndex{i, j}, *pos);
    return out;
}

/// One measured quantity against its bound. `relation` is "<" when the
/// measurement must stay below the bound and ">" when it must exceed it.
struct Witness {
    PointIndex first{-1, -1};
    std::optional<PointIndex> second;
    double measured = 0;
    double bound = 0;
    std::string relation = "<";
    bool ok = true;
    std::string note;
};

struct CertificateReport {
    std::string name;
    bool pass = true;
    std::vector<Witness> witnesses;
    std::vector<std::pair<std::string, double>> config;

    void add(Witness w)
    {
        pass = pass && w.ok;
        witnesses.push_back(std::move(w));
    }
};

namespace detail {

template <class Map>
const typename Map::mapped_type& position_of(const Map& positions, const PointIndex& p)
{
    const auto it = positions.find(p);
    if (it == positions.end())
        throw Error(ErrorCode::MissingPoint, "no position given for point (" + std::to_string(p.first + 1) + ", " +
                                                 std::to_string(p.second) + ")");
    return it->second;
}

template <class Real>
double as_double(const Real& x)
{
    return to_double(x);
}

}  // namespace detail

/// Inside points stay inside: |phi(a_ij)| < rho for j <= N_i.
template <class Real>
CertificateReport check_inside_disk(const MarkedGrid<Real>& grid, const Positions<Real>& positions)
{
    CertificateReport report{"inside_disk", true, {}, {{"rho", detail::as_double(grid.rho)}}};
    for (int i = 0; i < grid.orbits(); ++i) {
        for (int j = 0; j <= grid.inside_count[static_cast<std::size_t>(i)]; ++j) {
            const Real r = abs(detail::position_of(positions, {i, j}));
            report.add({{i, j}, std::nullopt, detail::as_double(r), detail::as_double(grid.rho), "<", r < grid.rho, {}});
        }
    }
    return report;
}

/// Outside points stay near their rays: |phi(a_ij) - a_ij| < 1/j for N_i < j <= J, wherever a_ij is
/// representable. The bound is infinite at j = 0, which is skipped.
template <class Real>
CertificateReport check_asymptotics_outside(const MarkedGrid<Real>& grid, const Positions<Real>& positions)
{
    CertificateReport report{"asymptotics_outside", true, {}, {{"depth", double(grid.depth)}}};
    for (int i = 0; i < grid.orbits(); ++i) {
        for (int j = std::max(1, grid.inside_count[static_cast<std::size_t>(i)] + 1); j <= grid.depth; ++j) {
            const auto& pt = grid.at({i, j});
            if (!pt.position) continue;
            const Real deviation = abs(detail::position_of(positions, {i, j}) - *pt.position);
            const Real bound = Real(1) / Real(j);
            report.add({{i, j}, std::nullopt, detail::as_double(deviation), detail::as_double(bound), "<",
                        deviation < bound, {}});
        }
    }
    return report;
}

/// Search grid over a quotient disk: the center plus radial fractions
/// k / (radial + 1), k = 1..radial, at angles 2 pi m / angular. Refining both
/// counts by integer factors (radial + 1 and angular) keeps every coarse node.
struct RigidityOptions {
    int radial = 33;
    int angular = 33;
};

/// Rigidity factorization for a single same-cluster pair, without the j > N_i filter.
/// measured = min over the search grid of max(|log|omega/delta||, |Arg omega/delta|),
/// bound = bound of A_{t,H-1}.
template <class Real>
Witness rigidity_witness(const MarkedGrid<Real>& grid, const Positions<Real>& positions, const PointIndex& a,
                         const PointIndex& b, const RigidityOptions& opts = {})
{
    const int d = grid.degree();
    const int H = H_index(grid, a, b);
    const auto& pa = grid.at(a);
    if (!pa.potential.finite())
        throw Error(ErrorCode::Overflow, "rigidity needs a representable common potential");
    const Real t = pa.potential.value;
    const PointIndex a_next{a.first, a.second + H};
    const PointIndex b_next{b.first, b.second + H};
    const Entry ds = grid.at(b_next).first_entry - grid.at(a_next).first_entry;
    if (ds == 0) throw Error(ErrorCode::SameEntry, "separated successors share their first entry");
    const QuotientDisk<Real> disk = quotient_disk(grid, a_next, b_next);
    const SectorSet<Real> sector = make_sector_set(d, t, H - 1);

    Witness w{a, b, std::numeric_limits<double>::infinity(), detail::as_double(sector.bound), "<", false, {}};
    w.note = "H=" + std::to_string(H);
    const Complex<Real> difference = detail::position_of(positions, b) - detail::position_of(positions, a);
    const Real log_scale = log_growth_iterate_derivative(d, t, H);
    if (difference == Complex<Real>(0) || log_scale >= log_max<Real>()) {
        w.note += "; displacement below the working precision";
        return w;
    }
    // omega = difference * d (F^H)'(t) / (2 pi i ds).
    const Complex<Real> omega = difference * Real(d) * exp(log_scale) / imag_unit_times(two_pi<Real>() * Real(static_cast<double>(ds)));

    Real best = std::numeric_limits<Real>::infinity();
    const auto consider = [&](const Complex<Real>& delta) {
        if (delta == Complex<Real>(0)) return;
        best = std::min(best, sector_slack(sector, omega / delta) + sector.bound);
    };
    consider(disk.center);
    for (int k = 1; k <= opts.radial; ++k) {
        const Real r = disk.radius * Real(k) / Real(opts.radial + 1);
        for (int m = 0; m < opts.angular; ++m)
            consider(disk.center + polar_form(r, two_pi<Real>() * Real(m) / Real(opts.angular)));
    }
    w.measured = detail::as_double(best);
    w.ok = best < sector.bound;
    return w;
}

/// Rigidity factorization over every same-cluster pair with j > N_i and l > N_k.
template <class Real>
CertificateReport check_cluster_rigidity(const MarkedGrid<Real>& grid, const Positions<Real>& positions,
                                         const RigidityOptions& opts = {})
{
    CertificateReport report{"cluster_rigidity", true, {}, {{"radial", opts.radial}, {"angular", opts.angular}}};
    for (const auto& cluster : grid.clusters) {
        for (std::size_t x = 0; x < cluster.members.size(); ++x) {
            for (std::size_t y = x + 1; y < cluster.members.size(); ++y) {
                const PointIndex& a = cluster.members[x];
                const PointIndex& b = cluster.members[y];
                if (a.second <= grid.inside_count[static_cast<std::size_t>(a.first)]) continue;
                if (b.second <= grid.inside_count[static_cast<std::size_t>(b.first)]) continue;
                report.add(rigidity_witness(grid, positions, a, b, opts));
            }
        }
    }
    return report;
}

/// Single-pair form used where the grid-level check has no eligible pair.
template <class Real>
CertificateReport check_pair_rigidity(const MarkedGrid<Real>& grid, const Positions<Real>& positions,
                                      const PointIndex& a, const PointIndex& b, const RigidityOptions& opts = {})
{
    CertificateReport report{"pair_rigidity", true, {}, {{"radial", opts.radial}, {"angular", opts.angular}}};
    report.add(rigidity_witness(grid, positions, a, b, opts));
    return report;
}

/// alpha = (post_2 - post_1) F'(t) / (pre_2 - pre_1) must lie in A_{t,0}.
template <class Real>
CertificateReport check_negligible_rotation(int degree, const Real& t, const std::pair<Complex<Real>, Complex<Real>>& pre,
                                            const std::pair<Complex<Real>, Complex<Real>>& post)
{
    const Complex<Real> pre_diff = pre.second - pre.first;
    if (pre_diff == Complex<Real>(0)) throw Error(ErrorCode::DegeneratePair, "the pre-pair points coincide");
    const SectorSet<Real> sector = make_sector_set(degree, t, 0);
    CertificateReport report{"negligible_rotation", true, {}, {{"t", detail::as_double(t)}, {"d", double(degree)}}};
    const Complex<Real> post_diff = post.second - post.first;
    Witness w{{-1, -1}, std::nullopt, std::numeric_limits<double>::infinity(), detail::as_double(sector.bound), "<",
              false, {}};
    if (post_diff == Complex<Real>(0)) {
        w.note = "post-pair points coincide";
    } else {
        const Complex<Real> alpha = post_diff / pre_diff * exp(log(Real(degree)) + Real(degree) * t);
        const Real slack = sector_slack(sector, alpha);
        w.measured = detail::as_double(slack + sector.bound);
        w.ok = slack < Real(0);
    }
    report.add(w);
    return report;
}

template <class Real>
struct ExpansivityOptions {
    int steps = 16;
    /// Defaults to 10 (1 + |coeffs(g1) - coeffs(g0)|).
    std::optional<Real> c_exp;
    /// Defaults to 1 / (2d).
    std::optional<Real> c_log;
};

template <class Real>
struct ExpansivityResult {
    Complex<Real> start;
    Complex<Real> end;
    Real deviation;
    Real min_real_part;
    CertificateReport report;
};

/// z_0 = inverse_branch(g0, w, s), continued along g_u = (1-u) g0 + u g1 in
/// `steps` steps by Newton from the previous preimage.
template <class Real>
ExpansivityResult<Real> expansivity(const EntireMap<Real>& g0, const EntireMap<Real>& g1, const Complex<Real>& w,
                                    Entry s, const Real& rho, const ExpansivityOptions<Real>& opts = {})
{
    const int d = g0.degree();
    if (g1.degree() != d) throw Error(ErrorCode::InvalidArgument, "expansivity path needs equal degrees");
    if (opts.steps < 1) throw Error(ErrorCode::InvalidArgument, "expansivity needs at least one step");
    for (const auto* g : {&g0, &g1})
        for (const auto& v : singular_values(*g).values)
            if (!(abs(v) < rho))
                throw Error(ErrorCode::InvalidArgument, "a singular value lies outside D_rho");
    const Real modulus = abs(w);
    if (modulus < branch_threshold(g0) || modulus < branch_threshold(g1))
        throw Error(ErrorCode::BelowThreshold, "|w| is below R_min of an endpoint map");

    const Real segment = (g1.coeffs() - g0.coeffs()).norm();
    const Real c_exp = opts.c_exp ? *opts.c_exp : Real(10) * (Real(1) + segment);
    const Real c_log = opts.c_log ? *opts.c_log : Real(1) / Real(2 * d);

    const Complex<Real> z0 = inverse_branch(g0, w, s);
    Complex<Real> z = z0;
    Real min_re = z.real();
    for (int k = 1; k <= opts.steps; ++k) {
        const Real u = Real(k) / Real(opts.steps);
        const EntireMap<Real> gu(CoeffVector<Real>((Real(1) - u) * g0.coeffs() + u * g1.coeffs()));
        const Complex<Real> start = exp(z);
        const Complex<Real> root = detail::newton_root(gu, w, start);
        const Complex<Real> next(log(abs(root)), z.imag() + arg(root / start));
        if (abs(next - z) > pi<Real>() / Real(d))
            throw Error(ErrorCode::ContinuationJump, "continuation step " + std::to_string(k) + " moved by more than pi/d");
        z = next;
        min_re = std::min(min_re, z.real());
    }

    const Real deviation = abs(z - z0);
    CertificateReport report{"expansivity",
                             true,
                             {},
                             {{"C_exp", detail::as_double(c_exp)},
                              {"C", detail::as_double(c_log)},
                              {"steps", double(opts.steps)},
                              {"abs_w", detail::as_double(modulus)}}};
    report.add({{-1, -1}, std::nullopt, detail::as_double(deviation), detail::as_double(c_exp / modulus), "<=",
                deviation <= c_exp / modulus, "|z1 - z0|"});
    const Real floor_re = c_log * log(modulus);
    report.add({{-1, -1}, std::nullopt, detail::as_double(min_re), detail::as_double(floor_re), ">", min_re > floor_re,
                "min Re z_u"});
    return {z0, z, deviation, min_re, std::move(report)};
}

template <class Real>
CertificateReport check_expansivity(const EntireMap<Real>& g0, const EntireMap<Real>& g1, const Complex<Real>& w,
                                    Entry s, const Real& rho, const ExpansivityOptions<Real>& opts = {})
{
    return expansivity(g0, g1, w, s, rho, opts).report;
}

/// User-supplied constants for the separation, homotopy-length and
/// clusters-inside checks. Each check runs only when its constants are present.
template <class Real>
struct OptionalConstants {
    std::optional<Real> beta;
    std::optional<Real> A;
    std::optional<Real> C;
    std::optional<Real> M_rho;
};

/// Separation: |phi(a_kl) - phi(a_ij)| > beta / M_rho^n for distinct
/// inside points, n = min(N_i + 1 - j, N_k + 1 - l).
template <class Real>
std::optional<CertificateReport> check_separation(const MarkedGrid<Real>& grid, const Positions<Real>& positions,
                                                  const OptionalConstants<Real>& k)
{
    if (!k.beta || !k.M_rho) return std::nullopt;
    CertificateReport report{"separation", true, {}, {{"beta", detail::as_double(*k.beta)}, {"M_rho", detail::as_double(*k.M_rho)}}};
    std::vector<PointIndex> inside;
    for (int i = 0; i < grid.orbits(); ++i)
        for (int j = 0; j <= grid.inside_count[static_cast<std::size_t>(i)]; ++j) inside.push_back({i, j});
    for (std::size_t x = 0; x < inside.size(); ++x) {
        for (std::size_t y = x + 1; y < inside.size(); ++y) {
            const auto& [i, j] = inside[x];
            const auto& [kk, l] = inside[y];
            const int n = std::min(grid.inside_count[static_cast<std::size_t>(i)] + 1 - j,
                                   grid.inside_count[static_cast<std::size_t>(kk)] + 1 - l);
            const Real gap = abs(detail::position_of(positions, inside[y]) - detail::position_of(positions, inside[x]));
            const Real bound = *k.beta / pow(*k.M_rho, Real(n));
            report.add({inside[x], inside[y], detail::as_double(gap), detail::as_double(bound), ">", gap > bound, {}});
        }
    }
    return report;
}

/// Bounded homotopy: |W_ij| < A^{N_i+1-j} ((N_i+1)!/j!)^4 C for j <= N_i, with the
/// homotopy word lengths |W_ij| supplied by the caller.
template <class Real>
std::optional<CertificateReport> check_bounded_homotopy(const MarkedGrid<Real>& grid,
                                                        const std::map<PointIndex, double>& word_lengths,
                                                        const OptionalConstants<Real>& k)
{
    if (!k.A || !k.C) return std::nullopt;
    CertificateReport report{"bounded_homotopy", true, {}, {{"A", detail::as_double(*k.A)}, {"C", detail::as_double(*k.C)}}};
    for (int i = 0; i < grid.orbits(); ++i) {
        const int N = grid.inside_count[static_cast<std::size_t>(i)];
        for (int j = 0; j <= N; ++j) {
            const auto it = word_lengths.find({i, j});
            if (it == word_lengths.end())
                throw Error(ErrorCode::MissingPoint, "no homotopy word length for point (" + std::to_string(i + 1) +
                                                         ", " + std::to_string(j) + ")");
            Real factorial_ratio(1);
            for (int q = j + 1; q <= N + 1; ++q) factorial_ratio *= Real(q);
            const Real bound = pow(*k.A, Real(N + 1 - j)) * pow(factorial_ratio, Real(4)) * *k.C;
            const Real length(it->second);
            report.add({{i, j}, std::nullopt, it->second, detail::as_double(bound), "<", length < bound, {}});
        }
    }
    return report;
}

/// Clusters inside, for every orbit k whose first outside point shares a
/// cluster with the first outside point of orbit 1.
template <class Real>
std::optional<CertificateReport> check_clusters_inside(const MarkedGrid<Real>& grid, const Positions<Real>& positions,
                                                       const OptionalConstants<Real>& k)
{
    if (!k.beta || !k.M_rho) return std::nullopt;
    CertificateReport report{"clusters_inside", true, {}, {{"beta", detail::as_double(*k.beta)}, {"M_rho", detail::as_double(*k.M_rho)}}};
    const int d = grid.degree();
    int N = -1;
    for (int n : grid.inside_count) N = std::max(N, n);
    const PointIndex first{0, grid.inside_count[0] + 1};
    if (first.second > grid.depth) return report;
    for (int orbit = 1; orbit < grid.orbits(); ++orbit) {
        const PointIndex other{orbit, grid.inside_count[static_cast<std::size_t>(orbit)] + 1};
        if (other.second > grid.depth || !same_cluster(grid, other, first)) continue;
        const std::optional<int> L = L_index(grid, other, first);
        for (int n = 0; n <= std::min(first.second, other.second); ++n) {
            const PointIndex a{orbit, other.second - n};
            const PointIndex b{0, first.second - n};
            const Real gap = abs(detail::position_of(positions, a) - detail::position_of(positions, b));
            if (!L || n < *L) {
                const Real bound = Real(4) * *k.beta * pow(*k.M_rho, Real(2 * d * N * n));
                report.add({a, b, detail::as_double(gap), detail::as_double(bound), "<", gap < bound, "n < L"});
            } else {
                const Real bound = pow(Real(1) / *k.M_rho, Real(2 * d * d * d * d * N + n - *L));
                report.add({a, b, detail::as_double(gap), detail::as_double(bound), ">", gap > bound, "n >= L"});
            }
        }
    }
    return report;
}

}  // namespace rayforge
