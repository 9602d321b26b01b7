#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <rayforge/certificates.hpp>
#include <rayforge/clusters.hpp>
#include <rayforge/entire_map.hpp>
#include <rayforge/escape_spec.hpp>
#include <rayforge/rays.hpp>
#include <rayforge/solver.hpp>

namespace rayforge::io {

using Json = nlohmann::ordered_json;

/// Tolerances, budgets and constants shared by every subcommand.
struct RunConfig {
    double tol = 1e-9;
    double ray_tol = 1e-10;
    double eps_pot = 1e-9;
    double eps_sv = 1e-9;
    int grid_depth = 2;
    int rho_index = 1;
    int max_iterations = 200;
    int newton_iterations = 60;
    int certificate_depth = 3;
    double big_radius = 1e6;
    int rigidity_radial = 33;
    int rigidity_angular = 33;
    int expansivity_steps = 16;
    /// Unset means 10 (1 + segment length) and 1/(2d).
    std::optional<double> c_exp;
    std::optional<double> c_log;
    std::optional<double> beta;
    std::optional<double> A;
    std::optional<double> C;
    std::optional<double> M_rho;
    /// Empty writes to stdout.
    std::string output;

    void validate() const;
    RayOptions<double> ray_options() const;
    SolveOptions<double> solve_options() const;
    GridOptions<double> grid_options() const;
    ExpansivityOptions<double> expansivity_options() const;
    OptionalConstants<double> optional_constants() const;
};

Json to_json(const RunConfig& config);
/// Keys absent from `j` keep the values already in `base`.
RunConfig config_from_json(const Json& j, RunConfig base = {});

Json to_json(const ExternalAddress& s);
/// Accepts the text form "1 0 | 0" or {"prefix": [...], "cycle": [...]}.
ExternalAddress address_from_json(const Json& j);

/// "2+0i", "-1.5e-3-2i", "3", "2i".
std::complex<double> parse_complex(const std::string& text);
Json to_json(const EntireMap<double>& g);
EntireMap<double> map_from_json(const Json& j);
/// "d=1,k=2+0i" (p = w + k) or "d=2,c0=...,c1=..." with missing coefficients 0.
EntireMap<double> parse_map_shorthand(const std::string& text);

Json to_json(const EscapeSpec<double>& spec);
EscapeSpec<double> spec_from_json(const Json& j);

Json to_json(const SolveResult<double>& result);
Json to_json(const CertificateReport& report);
/// Per-point {i, j, t, s_first, re, im, cluster}, 1-based orbit i. Symbolic
/// points carry "overflow" and null coordinates.
Json to_json(const MarkedGrid<double>& grid, const EntireMap<double>& g);

/// Grid request: {"map", "spec", "J", "rho_index"}; grid dumps qualify.
struct GridRequest {
    EntireMap<double> map;
    EscapeSpec<double> spec;
    std::optional<int> depth;
    std::optional<int> rho_index;
};
GridRequest grid_request_from_json(const Json& j);

/// [{"i", "j", "re", "im"}] with 1-based i.
Positions<double> positions_from_json(const Json& j);

/// [[T_1, ..., T_m], ...] or {"potentials": [[...], ...]}.
std::vector<std::vector<double>> path_from_json(const Json& j);

void write_ray_csv(std::ostream& out, const std::vector<RaySample<double>>& samples);
void write_trace_csv(std::ostream& out, const std::vector<std::vector<double>>& path,
                     const std::vector<SolveResult<double>>& results);

/// Throws ParseError naming the file on unreadable or malformed input.
Json read_json_file(const std::string& path);

}  // namespace rayforge::io
