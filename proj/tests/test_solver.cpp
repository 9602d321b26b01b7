#include <doctest.h>

#include <random>

#include <rayforge/solver.hpp>

#include "oracles.hpp"

using namespace rayforge;
using C = std::complex<double>;

namespace {

const double kPi = std::acos(-1.0);

ExternalAddress A(const char* text) { return parse_address(text); }

EscapeSpec<double> single(const char* s, double T, int d = 1) { return {d, {A(s)}, {T}}; }

}  // namespace

TEST_CASE("default initial maps")
{
    CHECK(singular_values(default_init<double>(1, 1)).size() == 1);
    CHECK(singular_values(default_init<double>(2, 1)).size() == 1);
    CHECK(singular_values(default_init<double>(2, 2)).size() == 2);
    CHECK(singular_values(default_init<double>(3, 2)).size() == 2);
    CHECK(singular_values(default_init<double>(3, 3)).size() == 3);
    CHECK_THROWS_AS(default_init<double>(2, 3), Error);
}

TEST_CASE("real exponential spec")
{
    const auto result = solve(single("| 0", 20.0), EntireMap<double>::exponential());
    const C kappa = result.map.coeffs()[0];
    CHECK(std::abs(kappa.imag()) < 1e-12);
    CHECK(std::abs(kappa.real() - 20) < 0.1);
    CHECK(result.max_residual() < 1e-9);
    const double expected = static_cast<double>(oracle::bisect_kappa(20.0L, 19.0L, 21.0L));
    CHECK(std::abs(kappa.real() - expected) < 1e-9);

    // Fixed-point property and idempotence.
    const auto again = solve(single("| 0", 20.0), result.map);
    CHECK(again.iterations == 1);
    CHECK(std::abs(again.map.coeffs()[0] - kappa) < 1e-9);
}

TEST_CASE("bisection oracle along a potential range")
{
    for (double T : {10.0, 14.0, 25.0}) {
        const auto result = solve(single("| 0", T), EntireMap<double>::exponential());
        const double expected = static_cast<double>(oracle::bisect_kappa(T, T - 1, T + 1));
        CHECK(std::abs(result.map.coeffs()[0] - C(expected)) < 1e-9);
    }
}

TEST_CASE("periodic spec in double precision")
{
    const auto result = solve(single("| 1", 20.0), EntireMap<double>::exponential());
    const C kappa = result.map.coeffs()[0];
    CHECK(std::abs(kappa - C(20, 2 * kPi)) < std::exp(-10.0));
    CHECK(result.max_residual() < 1e-9);
    REQUIRE_FALSE(result.certificate.empty());
    CHECK(result.certificate[0].error < 1e-9);
}

TEST_CASE("overlapping specs are rejected")
{
    const EscapeSpec<double> spec{2, {A("| 0"), A("0 1 | 0")}, {20.0, 20.0}};
    try {
        solve(spec, default_init<double>(2, 2));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OverlapError);
    }
}

TEST_CASE("higher degree specs")
{
    // d = 2 with both singular values prescribed.
    const EscapeSpec<double> two{2, {A("| 0"), A("| 1")}, {12.0, 13.0}};
    const auto r2 = solve(two, default_init<double>(2, 2));
    CHECK(r2.max_residual() < 1e-9);
    CHECK(std::abs(r2.singular_values[0] - r2.targets[0]) < 1e-9);

    // d = 3 with one prescribed asymptotic value.
    const auto r3 = solve(single("2 | 0 1", 15.0, 3), default_init<double>(3, 1));
    CHECK(r3.max_residual() < 1e-9);
    CHECK(std::abs(r3.map.coeffs()[1]) < 1e-12);
    CHECK(std::abs(r3.map.coeffs()[2]) < 1e-12);

    // d = 3 with all three singular values prescribed.
    const EscapeSpec<double> three{3, {A("| 0"), A("| 1"), A("| -1")}, {10.0, 11.0, 12.0}};
    const auto r33 = solve(three, default_init<double>(3, 3));
    CHECK(r33.max_residual() < 1e-9);

    CHECK_THROWS_AS(solve(two, default_init<double>(2, 1)), Error);
}

TEST_CASE("budget exhaustion")
{
    SolveOptions<double> opts;
    opts.max_iterations = 1;
    try {
        solve(single("| 0", 20.0), EntireMap<double>::exponential(), opts);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonConvergence);
    }
}

TEST_CASE("trace")
{
    const auto spec = single("| 0", 25.0);
    std::vector<std::vector<double>> path;
    for (int k = 0; k < 16; ++k) path.push_back({25.0 - k});
    const auto results = trace(spec, path, EntireMap<double>::exponential());
    REQUIRE(results.size() == 16);
    for (std::size_t k = 1; k < results.size(); ++k) {
        CHECK(results[k].map.coeffs()[0].real() < results[k - 1].map.coeffs()[0].real());
        CHECK(std::abs(results[k].map.coeffs()[0].imag()) < 1e-12);
    }
    const double expected = static_cast<double>(oracle::bisect_kappa(10.0L, 9.0L, 11.0L));
    CHECK(std::abs(results.back().map.coeffs()[0] - C(expected)) < 1e-9);

    const auto constant = trace(spec, {{20.0}, {20.0}, {20.0}}, EntireMap<double>::exponential());
    CHECK(constant[1].map.coeffs()[0] == constant[2].map.coeffs()[0]);
    CHECK(std::abs(constant[0].map.coeffs()[0] - constant[1].map.coeffs()[0]) < 1e-9);
}

TEST_CASE("continuity probes")
{
    const auto center = solve(single("| 0", 20.0), EntireMap<double>::exponential());
    const auto trivial = continuity_probe(single("| 0", 20.0), ProbeMode::Address, 4, center.map);
    for (double dist : trivial.distances) CHECK(dist == 0.0);
    CHECK(trivial.pass);

    const auto ones = continuity_probe(single("| 1", 8.0), ProbeMode::Address, 5, EntireMap<double>::exponential());
    CHECK(ones.monotone);
    CHECK(ones.pass);
    CHECK(ones.distances.front() > ones.distances.back());

    const auto potential = continuity_probe(single("| 0", 20.0), ProbeMode::Potential, 8, center.map);
    CHECK(potential.monotone);
    // Distances ~ kappa'(T) / n with kappa'(T) close to 1.
    for (std::size_t k = 0; k < potential.distances.size(); ++k) {
        const double n = static_cast<double>(k + 1);
        CHECK(potential.distances[k] * n > 0.1);
        CHECK(potential.distances[k] * n < 10.0);
    }
}
