#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <rayforge/io.hpp>

using namespace rayforge;
using io::Json;

namespace {

constexpr int kPass = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flag overrides; unset flags leave the config file values alone.
struct Overrides {
    std::optional<double> tol, ray_tol, eps_pot, eps_sv, big_radius, c_exp, c_log, beta, A, C, M_rho;
    std::optional<int> grid_depth, rho_index, max_iterations, certificate_depth;
    std::optional<std::string> output;
};

io::RunConfig effective_config(const std::string& config_path, const Overrides& o)
{
    io::RunConfig c;
    if (const char* env = std::getenv("RAYFORGE_CONFIG"); env && *env) c = io::config_from_json(io::read_json_file(env), c);
    if (!config_path.empty()) c = io::config_from_json(io::read_json_file(config_path), c);
    const auto apply = [](auto& target, const auto& value) {
        if (value) target = *value;
    };
    apply(c.tol, o.tol);
    apply(c.ray_tol, o.ray_tol);
    apply(c.eps_pot, o.eps_pot);
    apply(c.eps_sv, o.eps_sv);
    apply(c.big_radius, o.big_radius);
    apply(c.grid_depth, o.grid_depth);
    apply(c.rho_index, o.rho_index);
    apply(c.max_iterations, o.max_iterations);
    apply(c.certificate_depth, o.certificate_depth);
    apply(c.output, o.output);
    if (o.c_exp) c.c_exp = o.c_exp;
    if (o.c_log) c.c_log = o.c_log;
    if (o.beta) c.beta = o.beta;
    if (o.A) c.A = o.A;
    if (o.C) c.C = o.C;
    if (o.M_rho) c.M_rho = o.M_rho;
    try {
        c.validate();
    } catch (const Error& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    return c;
}

/// Writes to the configured output file, or stdout.
void emit(const io::RunConfig& config, const std::string& text)
{
    if (config.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(config.output);
    if (!out) throw UsageError("cannot write output file '" + config.output + "'");
    out << text;
}

EntireMap<double> load_map(const std::string& text)
{
    if (text.find('=') != std::string::npos) return io::parse_map_shorthand(text);
    return io::map_from_json(io::read_json_file(text));
}

struct Range {
    double lo, hi;
    int n;
};

Range parse_range(const std::string& text)
{
    const auto a = text.find(':');
    const auto b = text.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw UsageError("--t must be lo:hi:n, got '" + text + "'");
    Range r{};
    try {
        std::size_t used = 0;
        r.lo = std::stod(text.substr(0, a));
        r.hi = std::stod(text.substr(a + 1, b - a - 1));
        const std::string n = text.substr(b + 1);
        r.n = std::stoi(n, &used);
        if (used != n.size()) throw std::invalid_argument(n);
    } catch (const std::exception&) {
        throw UsageError("--t must be lo:hi:n with numbers, got '" + text + "'");
    }
    if (!(r.lo > 0)) throw UsageError("--t needs t_lo > 0");
    if (!(r.lo < r.hi)) throw UsageError("--t needs t_lo < t_hi");
    if (r.n < 2) throw UsageError("--t needs n >= 2 samples");
    return r;
}

int cmd_ray(const io::RunConfig& config, const std::string& map_text, const std::string& addr_text,
            const std::string& range_text)
{
    const Range range = parse_range(range_text);
    const EntireMap<double> g = load_map(map_text);
    const ExternalAddress s = parse_address(addr_text);
    const auto opts = config.ray_options();
    const auto samples = ray_sample(g, s, range.lo, range.hi, range.n, opts);

    std::ostringstream csv;
    io::write_ray_csv(csv, samples);
    emit(config, csv.str());

    // Summary goes to stderr so the CSV stays byte-identical.
    double worst_asymptotic = 0, worst_functional = 0;
    int functional_samples = 0;
    const ExternalAddress next = shift(s);
    for (const auto& sample : samples) {
        worst_asymptotic = std::max(worst_asymptotic, asymptotic_residual(sample));
        if (g.degree() * sample.potential >= log_max<double>()) continue;
        const double Ft = growth(g.degree(), sample.potential);
        const auto image = ray_point(g, next, Ft, opts);
        const auto lhs = evaluate(g, sample.position);
        worst_functional = std::max(worst_functional, std::abs(lhs - image.position) / std::abs(image.position));
        ++functional_samples;
    }
    std::cerr << "max asymptotic_residual " << worst_asymptotic << "\n"
              << "max relative functional-equation residual " << worst_functional << " over "
              << functional_samples << " samples\n";
    return kPass;
}

int cmd_solve(const io::RunConfig& config, const std::string& spec_path, const std::string& init_path)
{
    const auto spec = io::spec_from_json(io::read_json_file(spec_path));
    validate(spec);
    const auto init = init_path.empty() ? default_init<double>(spec.degree, static_cast<int>(spec.size()))
                                        : load_map(init_path);
    const auto result = solve(spec, init, config.solve_options());
    emit(config, io::to_json(result).dump(2) + "\n");
    return kPass;
}

int cmd_trace(const io::RunConfig& config, const std::string& spec_path, const std::string& path_path,
              const std::string& init_path)
{
    const auto spec = io::spec_from_json(io::read_json_file(spec_path));
    validate(spec);
    const auto path = io::path_from_json(io::read_json_file(path_path));
    for (const auto& row : path)
        if (row.size() != spec.size())
            throw UsageError("every path row needs " + std::to_string(spec.size()) + " potentials");
    const auto init = init_path.empty() ? default_init<double>(spec.degree, static_cast<int>(spec.size()))
                                        : load_map(init_path);
    const auto results = trace(spec, path, init, config.solve_options());
    std::ostringstream csv;
    io::write_trace_csv(csv, path, results);
    emit(config, csv.str());
    return kPass;
}

std::string index_text(const PointIndex& p) { return "(" + std::to_string(p.first + 1) + "," + std::to_string(p.second) + ")"; }

std::string cluster_table(const MarkedGrid<double>& grid)
{
    std::ostringstream out;
    out << std::setprecision(17);
    out << "rho_" << grid.rho_index << " = " << grid.rho << "\n";
    for (int i = 0; i < grid.orbits(); ++i) out << "N_" << i + 1 << " = " << grid.inside_count[static_cast<std::size_t>(i)] << "\n";
    for (std::size_t c = 0; c < grid.clusters.size(); ++c) {
        const auto& cl = grid.clusters[c];
        out << "cluster " << c << " t=";
        if (cl.potential.finite())
            out << cl.potential.value;
        else
            out << "F^" << cl.potential.overflow << "(" << cl.potential.value << ")";
        out << " s=" << cl.entry << ":";
        for (const auto& m : cl.members) out << " " << index_text(m);
        out << "\n";
    }
    out << "pair H L\n";
    for (const auto& cl : grid.clusters) {
        for (std::size_t x = 0; x < cl.members.size(); ++x) {
            for (std::size_t y = x + 1; y < cl.members.size(); ++y) {
                const auto& a = cl.members[x];
                const auto& b = cl.members[y];
                out << index_text(a) << "-" << index_text(b) << " ";
                try {
                    out << H_index(grid, a, b);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::DepthExhausted) throw;
                    out << ">" << grid.depth - std::max(a.second, b.second);
                }
                const auto L = L_index(grid, a, b);
                out << " " << (L ? std::to_string(*L) : std::string("inf")) << "\n";
            }
        }
    }
    return out.str();
}

int cmd_check(const io::RunConfig& config, const std::string& grid_path, const std::string& positions_arg,
              const std::string& what)
{
    const auto request = io::grid_request_from_json(io::read_json_file(grid_path));
    const int depth = request.depth.value_or(config.grid_depth);
    const int rho_index = request.rho_index.value_or(config.rho_index);
    const auto grid = build_grid(request.map, request.spec, depth, rho_index, config.grid_options());

    if (what == "clusters") {
        emit(config, cluster_table(grid));
        return kPass;
    }
    if (what == "grid") {
        emit(config, io::to_json(grid, request.map).dump(2) + "\n");
        return kPass;
    }
    if (what != "certificates") throw UsageError("check target must be certificates, clusters or grid, got '" + what + "'");

    const Positions<double> positions =
        positions_arg == "identity" ? identity_positions(grid) : io::positions_from_json(io::read_json_file(positions_arg));
    std::vector<CertificateReport> reports;
    reports.push_back(check_inside_disk(grid, positions));
    reports.push_back(check_asymptotics_outside(grid, positions));
    reports.push_back(check_cluster_rigidity(grid, positions, {config.rigidity_radial, config.rigidity_angular}));
    const auto constants = config.optional_constants();
    if (auto r = check_separation(grid, positions, constants)) reports.push_back(*r);
    if (auto r = check_clusters_inside(grid, positions, constants)) reports.push_back(*r);

    Json out = Json::array();
    bool pass = true;
    for (const auto& r : reports) {
        out.push_back(io::to_json(r));
        pass = pass && r.pass;
    }
    emit(config, out.dump(2) + "\n");
    return pass ? kPass : kDomainFailure;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rayforge: dynamic rays, cluster certificates and escaping-value solver for p(exp(z))"};
    app.require_subcommand(0, 1);

    std::string config_path;
    bool show_config = false;
    Overrides o;
    app.add_option("--config", config_path, "JSON config file (overrides $RAYFORGE_CONFIG)");
    app.add_flag("--show-config", show_config, "Print the effective config and exit");
    app.add_option("--tol", o.tol, "Solver tolerance");
    app.add_option("--ray-tol", o.ray_tol, "Ray point tolerance");
    app.add_option("--eps-pot", o.eps_pot, "Relative equal-potential tolerance");
    app.add_option("--eps-sv", o.eps_sv, "Singular value merge tolerance");
    app.add_option("--big-radius", o.big_radius, "Seed radius R_big");
    app.add_option("--J", o.grid_depth, "Grid depth");
    app.add_option("--rho-index", o.rho_index, "1-based midpoint index of rho");
    app.add_option("--max-iterations", o.max_iterations, "Solver iteration budget");
    app.add_option("--certificate-depth", o.certificate_depth, "Forward-orbit certificate depth");
    app.add_option("--c-exp", o.c_exp, "Expansivity constant");
    app.add_option("--c-log", o.c_log, "Expansivity real-part constant");
    app.add_option("--beta", o.beta, "Separation constant beta");
    app.add_option("--A", o.A, "Homotopy constant A");
    app.add_option("--C", o.C, "Homotopy constant C");
    app.add_option("--M-rho", o.M_rho, "Separation constant M_rho");
    app.add_option("--out", o.output, "Output file (default stdout)");
    app.fallthrough();

    std::string map_text = "d=1,k=0+0i", addr_text, range_text;
    auto* ray = app.add_subcommand("ray", "Sample a dynamic ray to CSV");
    ray->add_option("--map", map_text, "Map shorthand d=1,k=0+0i or a JSON map file");
    ray->add_option("--addr", addr_text, "External address, e.g. \"1 0 | 0\"")->required();
    ray->add_option("--t", range_text, "Potential range lo:hi:n")->required();

    std::string spec_path, init_path, path_path;
    auto* solve_cmd = app.add_subcommand("solve", "Find the map realizing an escape spec");
    solve_cmd->add_option("--spec", spec_path, "Spec JSON file")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--init", init_path, "Initial map (JSON file or shorthand)");

    auto* trace_cmd = app.add_subcommand("trace", "Continue a solution along a potential path");
    trace_cmd->add_option("--spec", spec_path, "Spec JSON file")->required()->check(CLI::ExistingFile);
    trace_cmd->add_option("--path", path_path, "Path JSON file")->required()->check(CLI::ExistingFile);
    trace_cmd->add_option("--init", init_path, "Initial map (JSON file or shorthand)");

    std::string grid_path, positions_arg = "identity", what = "certificates";
    auto* check = app.add_subcommand("check", "Run certificate checks on a marked grid");
    check->add_option("what", what, "certificates (default), clusters or grid");
    check->add_option("--grid", grid_path, "Grid JSON file: map, spec, J, rho_index")->required()->check(CLI::ExistingFile);
    check->add_option("--positions", positions_arg, "identity or a positions JSON file");

    auto* addr = app.add_subcommand("addr", "External address utilities");
    addr->require_subcommand(1);
    std::string a_text, b_text;
    std::size_t shift_n = 1;
    auto* addr_shift = addr->add_subcommand("shift", "Print sigma^n s");
    addr_shift->add_option("s", a_text, "Address")->required();
    addr_shift->add_option("--n", shift_n, "Shift count");
    auto* addr_overlap = addr->add_subcommand("overlap", "Print whether two addresses share a tail");
    addr_overlap->add_option("a", a_text, "Address")->required();
    addr_overlap->add_option("b", b_text, "Address")->required();
    double wedge_t = 0, wedge_K = 0;
    int wedge_d = 1;
    auto* addr_wedge = addr->add_subcommand("wedge", "Print whether s lies in the wedge W_{t,K} around a center");
    addr_wedge->add_option("center", a_text, "Wedge center")->required();
    addr_wedge->add_option("s", b_text, "Address to test")->required();
    addr_wedge->add_option("--t", wedge_t, "Potential t")->required();
    addr_wedge->add_option("--K", wedge_K, "Width K")->required();
    addr_wedge->add_option("--d", wedge_d, "Degree");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        const io::RunConfig config = effective_config(config_path, o);
        if (show_config) {
            std::cout << io::to_json(config).dump(2) << "\n";
            return kPass;
        }
        if (*ray) return cmd_ray(config, map_text, addr_text, range_text);
        if (*solve_cmd) return cmd_solve(config, spec_path, init_path);
        if (*trace_cmd) return cmd_trace(config, spec_path, path_path, init_path);
        if (*check) return cmd_check(config, grid_path, positions_arg, what);
        if (*addr_shift) {
            std::cout << to_string(shift(parse_address(a_text), shift_n)) << "\n";
            return kPass;
        }
        if (*addr_overlap) {
            std::cout << (overlapping(parse_address(a_text), parse_address(b_text)) ? "true" : "false") << "\n";
            return kPass;
        }
        if (*addr_wedge) {
            const Wedge<double> w{parse_address(a_text), wedge_t, wedge_K, wedge_d};
            std::cout << (wedge_contains(w, parse_address(b_text)) ? "true" : "false") << "\n";
            return kPass;
        }
        std::cerr << app.help();
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::ParseError ? kUsage : kDomainFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainFailure;
    }
}
