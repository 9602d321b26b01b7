#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <rayforge/address.hpp>
#include <rayforge/entire_map.hpp>
#include <rayforge/error.hpp>
#include <rayforge/escape_spec.hpp>
#include <rayforge/growth.hpp>
#include <rayforge/rays.hpp>
#include <rayforge/scalar.hpp>

namespace rayforge {

/// (orbit i, step j), both 0-based.
using PointIndex = std::pair<int, int>;

/// F^overflow(value): `value` is finite and `overflow` counts the iterates of F
/// that could not be carried out in floating point.
template <class Real>
struct Potential {
    Real value;
    int overflow = 0;

    bool finite() const { return overflow == 0; }
};

/// Equality within eps relative; potentials that overflowed a different number
/// of times are never equal.
template <class Real>
bool same_potential(const Potential<Real>& a, const Potential<Real>& b, const Real& eps)
{
    if (a.overflow != b.overflow) return false;
    return abs(a.value - b.value) <= eps * std::max(abs(a.value), abs(b.value));
}

template <class Real>
bool operator<(const Potential<Real>& a, const Potential<Real>& b)
{
    if (a.overflow != b.overflow) return a.overflow < b.overflow;
    return a.value < b.value;
}

/// T, F(T), ..., F^J(T); iterates past the floating range are kept symbolically.
template <class Real>
std::vector<Potential<Real>> potential_ladder(int degree, const Real& T, int J)
{
    std::vector<Potential<Real>> out{{T, 0}};
    for (int j = 1; j <= J; ++j) {
        Potential<Real> next = out.back();
        if (next.overflow > 0 || Real(degree) * next.value >= log_max<Real>())
            ++next.overflow;
        else
            next.value = growth(degree, next.value);
        out.push_back(next);
    }
    return out;
}

template <class Real>
struct GridPoint {
    Potential<Real> potential;
    /// Entry 0 of sigma^j s_i.
    Entry first_entry = 0;
    /// Absent when the potential is symbolic.
    std::optional<Complex<Real>> position;
    Real residual = std::numeric_limits<Real>::quiet_NaN();
    Real err_bound = Real(0);
    int cluster = -1;
};

template <class Real>
struct Cluster {
    Potential<Real> potential;
    Entry entry = 0;
    /// Sorted by (i, j); the first member is the representative.
    std::vector<PointIndex> members;

    bool nontrivial() const { return members.size() > 1; }
};

template <class Real>
struct MarkedGrid {
    EscapeSpec<Real> spec;
    int depth = 0;
    int rho_index = 1;
    Real rho;
    Real eps_pot;
    /// points[i][j] for j = 0..depth.
    std::vector<std::vector<GridPoint<Real>>> points;
    /// Sorted distinct potentials.
    std::vector<Potential<Real>> potential_set;
    /// N_i: the largest j with t_ij < rho, or -1.
    std::vector<int> inside_count;
    std::vector<Cluster<Real>> clusters;

    int degree() const { return spec.degree; }
    int orbits() const { return static_cast<int>(points.size()); }

    const GridPoint<Real>& at(const PointIndex& p) const
    {
        if (p.first < 0 || p.first >= orbits() || p.second < 0 || p.second > depth)
            throw Error(ErrorCode::IndexError, "grid index (" + std::to_string(p.first + 1) + ", " +
                                                   std::to_string(p.second) + ") is outside the grid");
        return points[static_cast<std::size_t>(p.first)][static_cast<std::size_t>(p.second)];
    }

    Entry entry(const PointIndex& p) const
    {
        return spec.addresses.at(static_cast<std::size_t>(p.first)).entry(static_cast<std::size_t>(p.second));
    }
};

template <class Real>
struct GridOptions {
    RayOptions<Real> ray;
    Real eps_pot = Real(1e-9);
};

/// rho_i = (P_i + P_{i+1}) / 2 with the 1-based index i into the sorted set P.
template <class Real>
Real midpoint_radius(const std::vector<Potential<Real>>& P, int rho_index)
{
    if (rho_index < 1 || static_cast<std::size_t>(rho_index) >= P.size())
        throw Error(ErrorCode::InvalidArgument, "rho index " + std::to_string(rho_index) + " needs at least " +
                                                    std::to_string(rho_index + 1) + " distinct potentials, have " +
                                                    std::to_string(P.size()));
    const auto& lo = P[static_cast<std::size_t>(rho_index - 1)];
    const auto& hi = P[static_cast<std::size_t>(rho_index)];
    if (!lo.finite() || !hi.finite())
        throw Error(ErrorCode::DepthOverflow, "midpoint rho_" + std::to_string(rho_index) +
                                                  " involves a potential beyond the floating range");
    return lo.value / Real(2) + hi.value / Real(2);
}

/// Partition into clusters Cl(t, s): equal potential and equal first entry.
template <class Real>
std::vector<Cluster<Real>> cluster_decompose(const MarkedGrid<Real>& grid)
{
    std::vector<Cluster<Real>> out;
    for (int i = 0; i < grid.orbits(); ++i) {
        for (int j = 0; j <= grid.depth; ++j) {
            const auto& pt = grid.at({i, j});
            auto it = std::find_if(out.begin(), out.end(), [&](const Cluster<Real>& c) {
                return c.entry == pt.first_entry && same_potential(c.potential, pt.potential, grid.eps_pot);
            });
            if (it == out.end()) {
                out.push_back({pt.potential, pt.first_entry, {{i, j}}});
            } else {
                it->members.push_back({i, j});
            }
        }
    }
    return out;
}

/// Marked points a_ij = R_{sigma^j s_i}(F^j(T_i)), j = 0..J, with the
/// cluster labels and the cutoff rho = rho_{rho_index}.
template <class Real>
MarkedGrid<Real> build_grid(const EntireMap<Real>& g, const EscapeSpec<Real>& spec, int J, int rho_index,
                            const GridOptions<Real>& opts = {})
{
    validate(spec);
    if (spec.degree != g.degree())
        throw Error(ErrorCode::InvalidArgument, "spec degree " + std::to_string(spec.degree) +
                                                    " differs from the map degree " + std::to_string(g.degree()));
    if (J < 0) throw Error(ErrorCode::InvalidArgument, "grid depth J must be >= 0");
    if (!(opts.eps_pot > Real(0))) throw Error(ErrorCode::InvalidArgument, "eps_pot must be > 0");

    MarkedGrid<Real> grid;
    grid.spec = spec;
    grid.depth = J;
    grid.rho_index = rho_index;
    grid.eps_pot = opts.eps_pot;
    const int d = spec.degree;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto ladder = potential_ladder(d, spec.potentials[i], J);
        std::vector<GridPoint<Real>> row;
        for (int j = 0; j <= J; ++j) {
            GridPoint<Real> pt;
            pt.potential = ladder[static_cast<std::size_t>(j)];
            pt.first_entry = spec.addresses[i].entry(static_cast<std::size_t>(j));
            if (pt.potential.finite()) {
                const auto sample =
                    ray_point(g, shift(spec.addresses[i], static_cast<std::size_t>(j)), pt.potential.value, opts.ray);
                pt.position = sample.position;
                pt.residual = asymptotic_residual(sample);
                pt.err_bound = sample.err_bound;
            }
            row.push_back(pt);
            bool known = false;
            for (const auto& p : grid.potential_set) known = known || same_potential(p, pt.potential, opts.eps_pot);
            if (!known) grid.potential_set.push_back(pt.potential);
        }
        grid.points.push_back(std::move(row));
    }
    std::sort(grid.potential_set.begin(), grid.potential_set.end());
    grid.rho = midpoint_radius(grid.potential_set, rho_index);

    for (const auto& row : grid.points) {
        int n = -1;
        for (const auto& pt : row)
            if (pt.potential.finite() && pt.potential.value < grid.rho) ++n;
        grid.inside_count.push_back(n);
    }
    grid.clusters = cluster_decompose(grid);
    for (std::size_t c = 0; c < grid.clusters.size(); ++c)
        for (const auto& [i, j] : grid.clusters[c].members)
            grid.points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].cluster = static_cast<int>(c);
    return grid;
}

template <class Real>
bool same_cluster(const MarkedGrid<Real>& grid, const PointIndex& a, const PointIndex& b)
{
    return grid.at(a).cluster == grid.at(b).cluster;
}

/// Least h >= 1 with a_{i(j+h)} and a_{k(l+h)} in different clusters.
template <class Real>
int H_index(const MarkedGrid<Real>& grid, const PointIndex& a, const PointIndex& b)
{
    if (!same_cluster(grid, a, b)) throw Error(ErrorCode::InvalidArgument, "H index needs a same-cluster pair");
    for (int h = 1;; ++h) {
        if (a.second + h > grid.depth || b.second + h > grid.depth)
            throw Error(ErrorCode::DepthExhausted, "pair is still clustered at grid depth " +
                                                       std::to_string(grid.depth) + "; increase J");
        if (!same_cluster(grid, {a.first, a.second + h}, {b.first, b.second + h})) return h;
    }
}

/// Least L >= 1 with a_{i(j-L)} and a_{k(l-L)} in different clusters, or
/// nullopt (L = infinity) when a predecessor runs out first.
template <class Real>
std::optional<int> L_index(const MarkedGrid<Real>& grid, const PointIndex& a, const PointIndex& b)
{
    if (!same_cluster(grid, a, b)) throw Error(ErrorCode::InvalidArgument, "L index needs a same-cluster pair");
    for (int h = 1; a.second - h >= 0 && b.second - h >= 0; ++h)
        if (!same_cluster(grid, {a.first, a.second - h}, {b.first, b.second - h})) return h;
    return std::nullopt;
}

/// Annular sector A_{x,n}: |log|alpha|| < bound and |Arg alpha| < bound with
/// bound = sum_{j=0}^{n} exp(-F^j(x) / 3).
template <class Real>
struct SectorSet {
    Real x;
    int n = 0;
    Real bound;
};

template <class Real>
SectorSet<Real> make_sector_set(int degree, const Real& x, int n)
{
    if (!(x > Real(0)) || n < 0) throw Error(ErrorCode::InvalidArgument, "sector set needs x > 0 and n >= 0");
    Real bound(0);
    Real f = x;
    for (int j = 0; j <= n; ++j) {
        bound += exp(-f / Real(3));
        if (Real(degree) * f >= log_max<Real>()) break;  // remaining terms underflow
        f = growth(degree, f);
    }
    return {x, n, bound};
}

/// max(|log|alpha||, |Arg alpha|) - bound; negative inside the sector.
template <class Real>
Real sector_slack(const SectorSet<Real>& A, const Complex<Real>& alpha)
{
    if (alpha == Complex<Real>(0)) throw Error(ErrorCode::ZeroInput, "alpha = 0 is not in any sector set");
    return std::max(abs(log(abs(alpha))), abs(arg(alpha))) - A.bound;
}

template <class Real>
bool sector_contains(const SectorSet<Real>& A, const Complex<Real>& alpha)
{
    return sector_slack(A, alpha) < Real(0);
}

template <class Real>
struct ProductLawReport {
    int samples = 0;
    int violations = 0;
    /// Largest observed slack of the product in A_{x,k-1}; negative when all pass.
    Real worst_slack;
};

/// Samples alpha_i in A_{F^{i-1}(x),0}, i = 1..k, and tests the product
/// against A_{x,k-1}.
template <class Real>
ProductLawReport<Real> sector_product_law(int degree, const Real& x, int k, int samples,
                                          std::uint64_t seed = 20240917)
{
    if (k < 1 || samples < 0) throw Error(ErrorCode::InvalidArgument, "product law needs k >= 1 and samples >= 0");
    const SectorSet<Real> target = make_sector_set(degree, x, k - 1);
    std::vector<Real> bounds;
    Real f = x;
    for (int i = 0; i < k; ++i) {
        bounds.push_back(make_sector_set(degree, f, 0).bound);
        if (Real(degree) * f < log_max<Real>()) f = growth(degree, f);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto inside = [&](const Real& b) {
        // Deep factors have bounds below the smallest positive number; they are 1.
        if (b == Real(0)) return Real(0);
        for (;;) {
            const Real v = b * Real(unit(rng));
            if (abs(v) < b) return v;
        }
    };
    ProductLawReport<Real> report{samples, 0, -std::numeric_limits<Real>::infinity()};
    for (int s = 0; s < samples; ++s) {
        Complex<Real> product(1);
        for (const Real& b : bounds) product *= polar_form(exp(inside(b)), inside(b));
        const Real slack = sector_slack(target, product);
        report.worst_slack = std::max(report.worst_slack, slack);
        if (!(slack < Real(0))) ++report.violations;
    }
    return report;
}

/// D_ij^kl = { d (w - z) / (2 pi i (s_kl - s_ij)) : |w - a_kl| < 1/l, |z - a_ij| < 1/j }.
template <class Real>
struct QuotientDisk {
    Complex<Real> center;
    Real radius;

    bool contains(const Complex<Real>& delta) const { return abs(delta - center) < radius; }
};

/// Direct form: `difference` is a_kl - a_ij.
template <class Real>
QuotientDisk<Real> quotient_disk(int degree, const Complex<Real>& difference, Entry s_ij, Entry s_kl, int j, int l)
{
    if (j < 1 || l < 1)
        throw Error(ErrorCode::IndexError, "quotient disk needs j, l >= 1 (radii 1/j and 1/l)");
    if (s_ij == s_kl) throw Error(ErrorCode::SameEntry, "quotient disk needs distinct first entries");
    const Real ds = Real(static_cast<double>(s_kl - s_ij));
    const Complex<Real> denom = imag_unit_times(two_pi<Real>() * ds);
    const Real radius = Real(degree) * (Real(1) / Real(j) + Real(1) / Real(l)) / (two_pi<Real>() * abs(ds));
    return {Real(degree) * difference / denom, radius};
}

/// a_kl - a_ij. Points at a symbolic potential are compared through their
/// leading term t + 2 pi i s / d, which is exact to every representable digit.
template <class Real>
Complex<Real> point_difference(const MarkedGrid<Real>& grid, const PointIndex& a, const PointIndex& b)
{
    const auto& pa = grid.at(a);
    const auto& pb = grid.at(b);
    if (pa.position && pb.position) return *pb.position - *pa.position;
    if (!pa.position && !pb.position && same_potential(pa.potential, pb.potential, grid.eps_pot))
        return imag_unit_times(two_pi<Real>() * Real(static_cast<double>(pb.first_entry - pa.first_entry)) /
                               Real(grid.degree()));
    throw Error(ErrorCode::MissingPoint, "point difference needs positions or a common symbolic potential");
}

template <class Real>
QuotientDisk<Real> quotient_disk(const MarkedGrid<Real>& grid, const PointIndex& ij, const PointIndex& kl)
{
    if (ij.second < 1 || kl.second < 1)
        throw Error(ErrorCode::IndexError, "quotient disk needs j, l >= 1 (radii 1/j and 1/l)");
    const Entry s_ij = grid.at(ij).first_entry;
    const Entry s_kl = grid.at(kl).first_entry;
    if (s_ij == s_kl) throw Error(ErrorCode::SameEntry, "quotient disk needs distinct first entries");
    return quotient_disk<Real>(grid.degree(), point_difference(grid, ij, kl), s_ij, s_kl, ij.second, kl.second);
}

}  // namespace rayforge
