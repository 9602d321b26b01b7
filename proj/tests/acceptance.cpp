// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <rayforge/certificates.hpp>
#include <rayforge/clusters.hpp>
#include <rayforge/multiprecision.hpp>
#include <rayforge/solver.hpp>

#include "oracles.hpp"

using namespace rayforge;
using C = std::complex<double>;
using HP = HighPrecision;
using HC = Complex<HP>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

ExternalAddress random_address(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> len(0, 2), cyc(1, 2), entry(-2, 2);
    std::vector<Entry> prefix(static_cast<std::size_t>(len(rng))), cycle(static_cast<std::size_t>(cyc(rng)));
    for (auto& e : prefix) e = entry(rng);
    for (auto& e : cycle) e = entry(rng);
    return {prefix, cycle};
}

Outcome functional_equation()
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(-1.0, 1.0), potential(10.0, 25.0);
    RayOptions<HP> opts;
    opts.tol = HP(1e-45);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const int d = 1 + k % 3;
        CoeffVector<HP> c(d);
        for (int q = 0; q < d; ++q) c[q] = HC(HP(unit(rng)), HP(unit(rng)));
        const EntireMap<HP> g(c);
        const ExternalAddress s = random_address(rng);
        const HP t(potential(rng));
        const HC z = ray_point(g, s, t, opts).position;
        const HC image = ray_point(g, shift(s), growth(d, t), opts).position;
        worst = std::max(worst, static_cast<double>(abs(evaluate(g, z) - image)));
    }
    return {worst < 1e-7, "max |g(R_s(t)) - R_shift(s)(F(t))| = " + fmt(worst) + " (< 1e-7), 20 random maps d=1..3, t in [10,25], 168-bit"};
}

Outcome asymptotics()
{
    const auto g = EntireMap<HP>::exponential();
    RayOptions<HP> opts;
    opts.tol = HP(1e-45);
    const double bound = 1.0;
    bool ok = true;
    std::ostringstream detail;
    for (const char* text : {"| 0", "3 | 0"}) {
        const ExternalAddress s = parse_address(text);
        detail << "(" << text << "):";
        double previous = 0;
        for (int t : {10, 15, 20, 25, 30}) {
            const double r = static_cast<double>(asymptotic_residual(ray_point(g, s, HP(t), opts)));
            detail << " " << fmt(r);
            ok = ok && r < bound;
            if (t > 15) ok = ok && r <= previous;
            previous = r;
        }
        detail << "; ";
    }
    detail << "common bound " << bound << ", non-increasing for t >= 15";
    return {ok, detail.str()};
}

Outcome pseudo_multiplicativity()
{
    int violations = 0;
    double worst = -1e300;
    for (int d : {1, 2, 3})
        for (double x : {3.0, 5.0})
            for (int k : {2, 3, 5}) {
                const auto report = sector_product_law(d, x, k, 10000);
                violations += report.violations;
                worst = std::max(worst, report.worst_slack);
            }
    return {violations == 0, std::to_string(violations) + " violations in 18 x 10^4 products (d=1..3, x in {3,5}, k in {2,3,5}), worst slack " + fmt(worst)};
}

Outcome negligible_rotation()
{
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> potential(12.0, 20.0);
    std::uniform_int_distribution<int> entry(-3, 3);
    const auto g = EntireMap<double>::exponential();
    int passed = 0;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double t = potential(rng);
        const Entry s0 = entry(rng);
        Entry a1 = entry(rng), b1 = entry(rng);
        while (b1 == a1) b1 = entry(rng);
        // Clustered at t (equal first entry), separated one step later.
        const ExternalAddress a({s0, a1}, {entry(rng)});
        const ExternalAddress b({s0, b1}, {entry(rng)});
        const C pre_a = ray_point(g, shift(a), growth(1, t)).position;
        const C pre_b = ray_point(g, shift(b), growth(1, t)).position;
        const C post_a = inverse_branch(g, pre_a, s0);
        const C post_b = inverse_branch(g, pre_b, s0);
        const auto report = check_negligible_rotation(1, t, {pre_a, pre_b}, {post_a, post_b});
        if (report.pass) ++passed;
        worst = std::max(worst, report.witnesses[0].measured / report.witnesses[0].bound);
    }
    return {passed == 100, std::to_string(passed) + "/100 pullback pairs with alpha in A_{t,0}, t in [12,20]; worst measured/bound " + fmt(worst)};
}

double expansivity_slope(const EntireMap<double>& g0, const EntireMap<double>& g1, Entry s, double theta, std::string& log)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double L : {10.0, 15.0, 20.0}) {
        const C w = std::polar(std::exp(L), theta);
        const auto r = expansivity(g0, g1, w, s, 10.0);
        const double y = std::log(r.deviation);
        sx += L;
        sy += y;
        sxx += L * L;
        sxy += L * y;
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    log += " " + fmt(slope);
    return slope;
}

Outcome expansivity_rate()
{
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> unit(-1.0, 1.0), angle(-3.0, 3.0);
    std::uniform_int_distribution<int> entry(-2, 2);
    const auto random_c = [&] { return C(unit(rng), unit(rng)); };
    std::string slopes;
    bool ok = true;
    const auto record = [&](const EntireMap<double>& g0, const EntireMap<double>& g1) {
        const double slope = expansivity_slope(g0, g1, entry(rng), angle(rng), slopes);
        ok = ok && slope >= -1.3 && slope <= -0.7;
    };
    for (int k = 0; k < 3; ++k) record(EntireMap<double>({random_c()}), EntireMap<double>({random_c()}));
    // Higher degree segments move the asymptotic value only; see the README.
    const C c1 = random_c();
    record(EntireMap<double>({random_c(), c1}), EntireMap<double>({random_c(), c1}));
    const C e1 = random_c(), e2 = random_c();
    record(EntireMap<double>({random_c(), e1, e2}), EntireMap<double>({random_c(), e1, e2}));

    // Diagnostic only: moving a higher coefficient gives |w|^{-1/d}.
    std::string other;
    expansivity_slope(EntireMap<double>({C(0.3), C(-0.5)}), EntireMap<double>({C(0.3), C(0.5)}), 0, 0.7, other);
    return {ok, "slopes" + slopes + " in [-1.3,-0.7] (3 segments d=1, 1 each d=2,3); d=2 c1-segment slope" + other + " (not scored)"};
}

Outcome realization()
{
    const EscapeSpec<double> real_spec{1, {parse_address("| 0")}, {20.0}};
    const auto real = solve(real_spec, EntireMap<double>::exponential());
    const double kappa_oracle = static_cast<double>(oracle::bisect_kappa(20.0L, 19.0L, 21.0L));
    const C kappa = real.map.coeffs()[0];
    const double oracle_gap = std::abs(kappa - C(kappa_oracle));
    const bool real_ok = real.max_residual() < 1e-9 && oracle_gap < 1e-6;

    // The periodic orbit is compared in absolute terms at |g(v)| ~ 5e8, so it
    // runs with a 168-bit significand.
    const EscapeSpec<HP> periodic{1, {parse_address("| 1")}, {HP(20)}};
    SolveOptions<HP> opts;
    opts.tol = HP(1e-30);
    const auto result = solve(periodic, EntireMap<HP>::exponential(), opts);
    double worst = 0;
    int last_step = -1;
    for (const auto& check : result.certificate) {
        if (check.step > 3) continue;
        worst = std::max(worst, static_cast<double>(check.error));
        last_step = std::max(last_step, check.step);
    }
    const bool periodic_ok = last_step >= 1 && worst < 1e-6;
    std::ostringstream detail;
    detail << "(|0): residual " << fmt(real.max_residual()) << ", |kappa - oracle| = " << fmt(oracle_gap)
           << "; (|1): " << result.iterations << " iterations, certificate j=0.." << last_step << " max error "
           << fmt(worst) << " (< 1e-6), j=" << last_step + 1 << "..3 beyond the floating range ("
           << result.certificate_truncated << " steps)";
    return {real_ok && periodic_ok, detail.str()};
}

double max_jump(const std::vector<SolveResult<double>>& results)
{
    double out = 0;
    for (std::size_t k = 1; k < results.size(); ++k)
        out = std::max(out, std::abs(results[k].map.coeffs()[0] - results[k - 1].map.coeffs()[0]));
    return out;
}

Outcome continuity_in_potential()
{
    const EscapeSpec<double> spec{1, {parse_address("| 0")}, {25.0}};
    std::vector<std::vector<double>> coarse, fine;
    for (int k = 0; k < 16; ++k) coarse.push_back({25.0 - k});
    for (int k = 0; k < 31; ++k) fine.push_back({25.0 - 0.5 * k});
    try {
        const double a = max_jump(trace(spec, coarse, EntireMap<double>::exponential()));
        const double b = max_jump(trace(spec, fine, EntireMap<double>::exponential()));
        const double ratio = b / a;
        return {ratio >= 0.3 && ratio <= 0.7, "max jump " + fmt(a) + " (dT=1) vs " + fmt(b) + " (dT=1/2): ratio " + fmt(ratio) + " in [0.3,0.7]"};
    } catch (const Error& e) {
        return {false, e.what()};
    }
}

Outcome continuity_in_address()
{
    const EscapeSpec<double> spec{1, {parse_address("| 1")}, {8.0}};
    const auto report = continuity_probe(spec, ProbeMode::Address, 8, EntireMap<double>::exponential());
    bool below = true;
    std::string list;
    for (std::size_t k = 0; k < report.distances.size(); ++k) {
        list += " " + fmt(report.distances[k]);
        if (k >= 1) below = below && report.distances[k] < 1e-6;
    }
    return {report.monotone && below, "distances n=1..8:" + list + "; n=2..8 below 1e-6, non-increasing up to 1e-12"};
}

Outcome uniqueness()
{
    const EscapeSpec<double> spec{1, {parse_address("| 0")}, {20.0}};
    const C kappa = solve(spec, EntireMap<double>::exponential()).map.coeffs()[0];
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int same = 0, failed = 0, distinct = 0;
    for (int k = 0; k < 20; ++k) {
        const EntireMap<double> init({kappa + C(unit(rng), unit(rng))});
        try {
            const auto r = solve(spec, init);
            if (std::abs(r.map.coeffs()[0] - kappa) < 1e-6)
                ++same;
            else if (r.max_residual() < 1e-9)
                ++distinct;
            else
                ++failed;
        } catch (const Error&) {
            ++failed;
        }
    }
    return {distinct == 0, std::to_string(same) + " reproduce kappa within 1e-6, " + std::to_string(failed) + " fail, " + std::to_string(distinct) + " distinct certified solutions"};
}

Outcome cluster_machinery()
{
    // s2 = (0 1 | 2) replaces the overlapping (0 1 | 0); see the README.
    const auto g = EntireMap<double>::exponential();
    const EscapeSpec<double> spec{1, {parse_address("| 0"), parse_address("0 1 | 2")}, {20.0, 20.0}};
    const auto grid = build_grid(g, spec, 2, 1);
    bool ok = same_cluster(grid, {0, 0}, {1, 0}) && !same_cluster(grid, {0, 1}, {1, 1});
    std::size_t covered = 0;
    for (const auto& cl : grid.clusters) covered += cl.members.size();
    ok = ok && covered == 6;
    const int H = H_index(grid, {0, 0}, {1, 0});
    ok = ok && H == 1;

    const double residual = std::max(grid.at({0, 0}).residual, grid.at({1, 0}).residual);
    const double gap = std::abs(*grid.at({1, 0}).position - *grid.at({0, 0}).position);
    const double proximity = 2 * residual * std::exp(-10.0);
    ok = ok && gap <= proximity;

    const auto positions = identity_positions(grid);
    const auto rigidity = check_cluster_rigidity(grid, positions);
    // At T = 20 both j = 0 points lie inside D_rho, so the grid-level check has
    // no eligible pair; the (a_10, a_20) factorization is checked directly.
    const auto pair = check_pair_rigidity(grid, positions, {0, 0}, {1, 0});
    ok = ok && rigidity.pass && pair.pass;
    return {ok, "H(a_10,a_20) = " + std::to_string(H) + ", proximity " + fmt(gap) + " <= " + fmt(proximity) +
                    ", grid rigidity " + (rigidity.pass ? "pass" : "fail") + " (" + std::to_string(rigidity.witnesses.size()) +
                    " eligible pairs), pair rigidity " + fmt(pair.witnesses[0].measured) + " < " + fmt(pair.witnesses[0].bound)};
}

}  // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "functional equation", 10, functional_equation},
        {2, "ray asymptotics", 5, asymptotics},
        {3, "pseudo-multiplicativity", 5, pseudo_multiplicativity},
        {4, "negligible rotation", 30, negligible_rotation},
        {5, "expansivity", 10, expansivity_rate},
        {6, "realization", 60, realization},
        {7, "continuity in T", 120, continuity_in_potential},
        {8, "continuity in address", 120, continuity_in_address},
        {9, "uniqueness probe", 120, uniqueness},
        {10, "cluster machinery", 30, cluster_machinery},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.budget_seconds;
        const bool pass = out.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s %2d %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    out.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
