#include <doctest.h>

#include <rayforge/multiprecision.hpp>
#include <rayforge/solver.hpp>

using namespace rayforge;
using HP = HighPrecision;
using HC = Complex<HP>;

TEST_CASE("extended precision agrees with double")
{
    const auto g = EntireMap<HP>::exponential(HC(HP(0.25), HP(-0.5)));
    const auto s = parse_address("1 | 0 -1");
    RayOptions<HP> opts;
    opts.tol = HP(1e-45);
    const auto high = ray_point(g, s, HP(12), opts);
    const auto low = ray_point(EntireMap<double>::exponential({0.25, -0.5}), s, 12.0);
    CHECK(std::abs(to_double(high.position) - low.position) < 1e-12);
    CHECK(high.err_bound < HP(1e-40));
}

TEST_CASE("functional equation at 1e-7 absolute where double cannot")
{
    const auto g = EntireMap<HP>(CoeffVector<HP>::Constant(3, HC(HP(0.5), HP(0.25))));
    const auto s = parse_address("| 1");
    RayOptions<HP> opts;
    opts.tol = HP(1e-45);
    const HP t(25);
    const HC z = ray_point(g, s, t, opts).position;
    const HC image = ray_point(g, shift(s), growth(3, t), opts).position;
    // |image| ~ e^75, so double carries an absolute error near 1e16.
    CHECK(abs(image) > HP(1e32));
    CHECK(abs(evaluate(g, z) - image) < HP(1e-7));
}

TEST_CASE("periodic solve certificate")
{
    const EscapeSpec<HP> spec{1, {parse_address("| 1")}, {HP(20)}};
    SolveOptions<HP> opts;
    opts.tol = HP(1e-30);
    const auto result = solve(spec, EntireMap<HP>::exponential(), opts);
    CHECK(result.max_residual() < HP(1e-30));
    REQUIRE(result.certificate.size() == 2);
    CHECK(result.certificate[1].step == 1);
    CHECK(result.certificate[1].error < HP(1e-20));
    CHECK(result.certificate_truncated == 2);
}
