#include <doctest.h>

#include <sstream>

#include <rayforge/io.hpp>

using namespace rayforge;
using C = std::complex<double>;

TEST_CASE("complex parsing")
{
    CHECK(io::parse_complex("2+0i") == C(2, 0));
    CHECK(io::parse_complex("-1.5e-3-2i") == C(-1.5e-3, -2));
    CHECK(io::parse_complex("3") == C(3, 0));
    CHECK(io::parse_complex("2i") == C(0, 2));
    CHECK(io::parse_complex("-.5+.25i") == C(-0.5, 0.25));
    CHECK_THROWS_AS(io::parse_complex("2+i"), Error);
    CHECK_THROWS_AS(io::parse_complex(""), Error);
}

TEST_CASE("map shorthand and JSON")
{
    const auto g = io::parse_map_shorthand("d=1,k=2+0i");
    CHECK(g.degree() == 1);
    CHECK(g.coeffs()[0] == C(2, 0));
    const auto h = io::parse_map_shorthand("d=3,c1=-3,c0=1+2i");
    CHECK(h.degree() == 3);
    CHECK(h.coeffs()[0] == C(1, 2));
    CHECK(h.coeffs()[1] == C(-3, 0));
    CHECK(h.coeffs()[2] == C(0, 0));
    CHECK_THROWS_AS(io::parse_map_shorthand("k=1"), Error);
    CHECK_THROWS_AS(io::parse_map_shorthand("d=1,c1=1"), Error);
    CHECK_THROWS_AS(io::parse_map_shorthand("d=1,q=1"), Error);

    const auto j = io::to_json(h);
    CHECK(j.dump() == R"({"d":3,"coeffs":[[1.0,2.0],[-3.0,0.0],[0.0,0.0]]})");
    const auto back = io::map_from_json(j);
    CHECK(back.coeffs() == h.coeffs());
    CHECK_THROWS_AS(io::map_from_json(io::Json::parse(R"({"d":2,"coeffs":[[0,0]]})")), Error);
}

TEST_CASE("addresses and specs")
{
    const auto s = parse_address("1 0 | 0");
    CHECK(io::to_json(s).dump() == R"({"prefix":[1],"cycle":[0]})");
    CHECK(io::address_from_json(io::to_json(s)) == s);
    CHECK(io::address_from_json(io::Json("1 0 | 0")) == s);
    CHECK_THROWS_AS(io::address_from_json(io::Json(3)), Error);

    const EscapeSpec<double> spec{2, {parse_address("| 0"), parse_address("1 | 2")}, {12.5, 13.0}};
    const auto back = io::spec_from_json(io::to_json(spec));
    CHECK(back.degree == 2);
    CHECK(back.addresses == spec.addresses);
    CHECK(back.potentials == spec.potentials);
    CHECK_THROWS_AS(io::spec_from_json(io::Json::parse(R"({"d":1})")), Error);
}

TEST_CASE("run config round trip")
{
    io::RunConfig c;
    c.tol = 3e-11;
    c.grid_depth = 4;
    c.beta = 0.25;
    c.output = "out.csv";
    const auto j = io::to_json(c);
    const auto back = io::config_from_json(j);
    CHECK(io::to_json(back).dump() == j.dump());
    CHECK(back.beta == 0.25);
    CHECK_FALSE(back.A.has_value());

    // Partial files override only their keys.
    const auto partial = io::config_from_json(io::Json::parse(R"({"eps_pot": 1e-6})"), back);
    CHECK(partial.eps_pot == 1e-6);
    CHECK(partial.tol == 3e-11);

    CHECK_THROWS_AS(io::config_from_json(io::Json::parse(R"({"tolerance": 1})")), Error);
    io::RunConfig bad;
    bad.tol = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.max_iterations = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_NOTHROW(io::RunConfig{}.validate());

    io::RunConfig with_c;
    with_c.c_exp = 4.0;
    CHECK(with_c.expansivity_options().c_exp == 4.0);
    CHECK(with_c.solve_options().max_iterations == 200);
}

TEST_CASE("ray CSV")
{
    const auto g = EntireMap<double>::exponential();
    const auto samples = ray_sample(g, parse_address("| 0"), 10.0, 20.0, 3);
    std::ostringstream out;
    io::write_ray_csv(out, samples);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,re,im,depth,err_bound");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("grid dump and reports")
{
    const auto g = EntireMap<double>::exponential();
    const EscapeSpec<double> spec{1, {parse_address("| 0"), parse_address("0 1 | 2")}, {20.0, 20.0}};
    const auto grid = build_grid(g, spec, 2, 1);
    const auto dump = io::to_json(grid, g);
    REQUIRE(dump.at("points").size() == 6);
    const auto& symbolic = dump.at("points").at(2);
    CHECK(symbolic.at("i") == 1);
    CHECK(symbolic.at("j") == 2);
    CHECK(symbolic.at("overflow") == 1);
    CHECK(symbolic.at("re").is_null());

    // A dump is itself a valid grid request.
    const auto request = io::grid_request_from_json(dump);
    CHECK(request.depth == 2);
    CHECK(request.spec.addresses == spec.addresses);

    const auto positions = identity_positions(grid);
    io::Json listed = io::Json::array();
    for (const auto& [p, z] : positions)
        listed.push_back({{"i", p.first + 1}, {"j", p.second}, {"re", z.real()}, {"im", z.imag()}});
    CHECK(io::positions_from_json(listed) == positions);

    const auto report = io::to_json(check_inside_disk(grid, positions));
    CHECK(report.at("name") == "inside_disk");
    CHECK(report.at("verdict") == "pass");
    CHECK(report.at("witnesses").at(0).at("first") == io::Json::array({1, 0}));
}

TEST_CASE("trace CSV and paths")
{
    const auto path = io::path_from_json(io::Json::parse(R"({"potentials": [[20], [19]]})"));
    REQUIRE(path.size() == 2);
    const EscapeSpec<double> spec{1, {parse_address("| 0")}, {20.0}};
    const auto results = trace(spec, path, EntireMap<double>::exponential());
    std::ostringstream out;
    io::write_trace_csv(out, path, results);
    CHECK(out.str().rfind("step,T_1,coeff_re_0,coeff_im_0,residual\n0,20,", 0) == 0);
    CHECK_THROWS_AS(io::path_from_json(io::Json::array()), Error);
}
