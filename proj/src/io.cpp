#include <rayforge/io.hpp>

#include <fstream>
#include <algorithm>
#include <cctype>
#include <iomanip>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

namespace rayforge::io {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

template <class T>
void read_optional(const Json& j, const char* key, std::optional<T>& out)
{
    if (!j.contains(key)) return;
    if (j.at(key).is_null())
        out.reset();
    else
        out = j.at(key).get<T>();
}

template <class T>
void read_value(const Json& j, const char* key, T& out)
{
    if (j.contains(key)) out = j.at(key).get<T>();
}

Json optional_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json complex_json(const std::complex<double>& z) { return Json::array({z.real(), z.imag()}); }

std::string format_double(double x)
{
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

void RunConfig::validate() const
{
    const auto positive = [](double x, const char* name) {
        if (!(x > 0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be > 0");
    };
    positive(tol, "tol");
    positive(ray_tol, "ray_tol");
    positive(eps_pot, "eps_pot");
    positive(eps_sv, "eps_sv");
    positive(big_radius, "big_radius");
    if (grid_depth < 0) throw Error(ErrorCode::InvalidArgument, "grid_depth must be >= 0");
    if (rho_index < 1) throw Error(ErrorCode::InvalidArgument, "rho_index must be >= 1");
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
    if (newton_iterations < 1) throw Error(ErrorCode::InvalidArgument, "newton_iterations must be >= 1");
    if (certificate_depth < 0) throw Error(ErrorCode::InvalidArgument, "certificate_depth must be >= 0");
    if (rigidity_radial < 1 || rigidity_angular < 1)
        throw Error(ErrorCode::InvalidArgument, "rigidity grid sizes must be >= 1");
    if (expansivity_steps < 1) throw Error(ErrorCode::InvalidArgument, "expansivity_steps must be >= 1");
    for (const auto& [x, name] : {std::pair{c_exp, "c_exp"}, std::pair{c_log, "c_log"}, std::pair{beta, "beta"},
                                  std::pair{A, "A"}, std::pair{C, "C"}, std::pair{M_rho, "M_rho"}})
        if (x) positive(*x, name);
}

RayOptions<double> RunConfig::ray_options() const
{
    RayOptions<double> out;
    out.tol = ray_tol;
    out.big_radius = big_radius;
    return out;
}

SolveOptions<double> RunConfig::solve_options() const
{
    SolveOptions<double> out;
    out.tol = tol;
    out.max_iterations = max_iterations;
    out.certificate_depth = certificate_depth;
    out.big_radius = big_radius;
    out.eps_sv = eps_sv;
    out.newton_iterations = newton_iterations;
    return out;
}

GridOptions<double> RunConfig::grid_options() const
{
    GridOptions<double> out;
    out.ray = ray_options();
    out.eps_pot = eps_pot;
    return out;
}

ExpansivityOptions<double> RunConfig::expansivity_options() const { return {expansivity_steps, c_exp, c_log}; }

OptionalConstants<double> RunConfig::optional_constants() const { return {beta, A, C, M_rho}; }

Json to_json(const RunConfig& c)
{
    return Json{{"tol", c.tol},
                {"ray_tol", c.ray_tol},
                {"eps_pot", c.eps_pot},
                {"eps_sv", c.eps_sv},
                {"grid_depth", c.grid_depth},
                {"rho_index", c.rho_index},
                {"max_iterations", c.max_iterations},
                {"newton_iterations", c.newton_iterations},
                {"certificate_depth", c.certificate_depth},
                {"big_radius", c.big_radius},
                {"rigidity_radial", c.rigidity_radial},
                {"rigidity_angular", c.rigidity_angular},
                {"expansivity_steps", c.expansivity_steps},
                {"c_exp", optional_json(c.c_exp)},
                {"c_log", optional_json(c.c_log)},
                {"beta", optional_json(c.beta)},
                {"A", optional_json(c.A)},
                {"C", optional_json(c.C)},
                {"M_rho", optional_json(c.M_rho)},
                {"output", c.output}};
}

RunConfig config_from_json(const Json& j, RunConfig c)
{
    if (!j.is_object()) parse_error("config must be a JSON object");
    static const std::vector<std::string> known{
        "tol",          "ray_tol",         "eps_pot",          "eps_sv",           "grid_depth",
        "rho_index",    "max_iterations",  "newton_iterations", "certificate_depth", "big_radius",
        "rigidity_radial", "rigidity_angular", "expansivity_steps", "c_exp",          "c_log",
        "beta",         "A",               "C",                "M_rho",            "output"};
    for (const auto& item : j.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            parse_error("unknown config key '" + item.key() + "'");
    try {
        read_value(j, "tol", c.tol);
        read_value(j, "ray_tol", c.ray_tol);
        read_value(j, "eps_pot", c.eps_pot);
        read_value(j, "eps_sv", c.eps_sv);
        read_value(j, "grid_depth", c.grid_depth);
        read_value(j, "rho_index", c.rho_index);
        read_value(j, "max_iterations", c.max_iterations);
        read_value(j, "newton_iterations", c.newton_iterations);
        read_value(j, "certificate_depth", c.certificate_depth);
        read_value(j, "big_radius", c.big_radius);
        read_value(j, "rigidity_radial", c.rigidity_radial);
        read_value(j, "rigidity_angular", c.rigidity_angular);
        read_value(j, "expansivity_steps", c.expansivity_steps);
        read_optional(j, "c_exp", c.c_exp);
        read_optional(j, "c_log", c.c_log);
        read_optional(j, "beta", c.beta);
        read_optional(j, "A", c.A);
        read_optional(j, "C", c.C);
        read_optional(j, "M_rho", c.M_rho);
        read_value(j, "output", c.output);
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("config: ") + e.what());
    }
    return c;
}

Json to_json(const ExternalAddress& s) { return Json{{"prefix", s.prefix()}, {"cycle", s.cycle()}}; }

ExternalAddress address_from_json(const Json& j)
{
    if (j.is_string()) return parse_address(j.get<std::string>());
    if (!j.is_object() || !j.contains("cycle")) parse_error("address must be a string or {\"prefix\", \"cycle\"}");
    try {
        std::vector<Entry> prefix;
        if (j.contains("prefix")) prefix = j.at("prefix").get<std::vector<Entry>>();
        return ExternalAddress(std::move(prefix), j.at("cycle").get<std::vector<Entry>>());
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("address: ") + e.what());
    }
}

std::complex<double> parse_complex(const std::string& text)
{
    static const std::regex number(R"([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)");
    static const std::regex full(R"(([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i)");
    static const std::regex imag_only(R"(([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i)");
    std::smatch m;
    if (std::regex_match(text, m, full)) return {std::stod(m[1]), std::stod(m[2])};
    if (std::regex_match(text, m, imag_only)) return {0.0, std::stod(m[1])};
    if (std::regex_match(text, number)) return {std::stod(text), 0.0};
    parse_error("cannot parse complex number '" + text + "'");
}

Json to_json(const EntireMap<double>& g)
{
    Json coeffs = Json::array();
    for (Eigen::Index k = 0; k < g.coeffs().size(); ++k) coeffs.push_back(complex_json(g.coeffs()[k]));
    return Json{{"d", g.degree()}, {"coeffs", coeffs}};
}

EntireMap<double> map_from_json(const Json& j)
{
    if (j.is_string()) return parse_map_shorthand(j.get<std::string>());
    if (!j.is_object() || !j.contains("d") || !j.contains("coeffs")) parse_error("map needs \"d\" and \"coeffs\"");
    try {
        const int d = j.at("d").get<int>();
        const auto& coeffs = j.at("coeffs");
        if (d < 1 || !coeffs.is_array() || static_cast<int>(coeffs.size()) != d)
            parse_error("map of degree " + std::to_string(d) + " needs exactly d coefficients c_0..c_{d-1}");
        CoeffVector<double> c(d);
        for (int k = 0; k < d; ++k) {
            const auto& z = coeffs.at(static_cast<std::size_t>(k));
            if (z.is_array() && z.size() == 2)
                c[k] = {z.at(0).get<double>(), z.at(1).get<double>()};
            else if (z.is_number())
                c[k] = {z.get<double>(), 0.0};
            else
                parse_error("map coefficient must be [re, im] or a number");
        }
        return EntireMap<double>(c);
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("map: ") + e.what());
    }
}

EntireMap<double> parse_map_shorthand(const std::string& text)
{
    int d = 0;
    std::map<int, std::complex<double>> coeffs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) parse_error("map shorthand item '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "d") {
            try {
                d = std::stoi(value);
            } catch (const std::exception&) {
                parse_error("map degree '" + value + "' is not an integer");
            }
        } else if (key == "k") {
            coeffs[0] = parse_complex(value);
        } else if (key.size() >= 2 && key[0] == 'c' && std::all_of(key.begin() + 1, key.end(), ::isdigit)) {
            coeffs[std::stoi(key.substr(1))] = parse_complex(value);
        } else {
            parse_error("unknown map shorthand key '" + key + "'");
        }
    }
    if (d < 1) parse_error("map shorthand needs d >= 1");
    CoeffVector<double> c = CoeffVector<double>::Zero(d);
    for (const auto& [k, z] : coeffs) {
        if (k >= d) parse_error("coefficient c" + std::to_string(k) + " exceeds degree " + std::to_string(d));
        c[k] = z;
    }
    return EntireMap<double>(c);
}

Json to_json(const EscapeSpec<double>& spec)
{
    Json addresses = Json::array();
    for (const auto& s : spec.addresses) addresses.push_back(to_string(s));
    return Json{{"d", spec.degree}, {"addresses", addresses}, {"potentials", spec.potentials}};
}

EscapeSpec<double> spec_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("addresses") || !j.contains("potentials"))
        parse_error("spec needs \"addresses\" and \"potentials\"");
    EscapeSpec<double> spec;
    try {
        spec.degree = j.value("d", 1);
        for (const auto& a : j.at("addresses")) spec.addresses.push_back(address_from_json(a));
        spec.potentials = j.at("potentials").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("spec: ") + e.what());
    }
    return spec;
}

Json to_json(const SolveResult<double>& r)
{
    Json sv = Json::array(), targets = Json::array(), certificate = Json::array();
    for (const auto& z : r.singular_values) sv.push_back(complex_json(z));
    for (const auto& z : r.targets) targets.push_back(complex_json(z));
    for (const auto& c : r.certificate)
        certificate.push_back(Json{{"i", c.orbit + 1}, {"j", c.step}, {"error", c.error}});
    return Json{{"map", to_json(r.map)},
                {"singular_values", sv},
                {"targets", targets},
                {"residuals", r.residuals},
                {"max_residual", r.max_residual()},
                {"iterations", r.iterations},
                {"certificate", certificate},
                {"certificate_truncated", r.certificate_truncated}};
}

Json to_json(const CertificateReport& report)
{
    Json witnesses = Json::array();
    const auto index = [](const PointIndex& p) { return Json::array({p.first + 1, p.second}); };
    for (const auto& w : report.witnesses) {
        Json item{{"first", index(w.first)}};
        item["second"] = w.second ? index(*w.second) : Json(nullptr);
        item["measured"] = w.measured;
        item["bound"] = w.bound;
        item["relation"] = w.relation;
        item["ok"] = w.ok;
        if (!w.note.empty()) item["note"] = w.note;
        witnesses.push_back(std::move(item));
    }
    Json config = Json::object();
    for (const auto& [key, value] : report.config) config[key] = value;
    return Json{{"name", report.name}, {"verdict", report.pass ? "pass" : "fail"}, {"witnesses", witnesses}, {"config", config}};
}

Json to_json(const MarkedGrid<double>& grid, const EntireMap<double>& g)
{
    Json points = Json::array();
    for (int i = 0; i < grid.orbits(); ++i) {
        for (int j = 0; j <= grid.depth; ++j) {
            const auto& pt = grid.at({i, j});
            Json item{{"i", i + 1}, {"j", j}, {"t", pt.potential.value}};
            if (!pt.potential.finite()) item["overflow"] = pt.potential.overflow;
            item["s_first"] = pt.first_entry;
            item["re"] = pt.position ? Json(pt.position->real()) : Json(nullptr);
            item["im"] = pt.position ? Json(pt.position->imag()) : Json(nullptr);
            item["cluster"] = pt.cluster;
            points.push_back(std::move(item));
        }
    }
    return Json{{"map", to_json(g)},
                {"spec", to_json(grid.spec)},
                {"J", grid.depth},
                {"rho_index", grid.rho_index},
                {"rho", grid.rho},
                {"inside_count", grid.inside_count},
                {"points", points}};
}

GridRequest grid_request_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("map") || !j.contains("spec"))
        parse_error("grid file needs \"map\" and \"spec\"");
    GridRequest out{map_from_json(j.at("map")), spec_from_json(j.at("spec")), std::nullopt, std::nullopt};
    try {
        if (j.contains("J")) out.depth = j.at("J").get<int>();
        if (j.contains("rho_index")) out.rho_index = j.at("rho_index").get<int>();
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("grid: ") + e.what());
    }
    return out;
}

Positions<double> positions_from_json(const Json& j)
{
    if (!j.is_array()) parse_error("positions must be an array of {i, j, re, im}");
    Positions<double> out;
    try {
        for (const auto& p : j)
            out[{p.at("i").get<int>() - 1, p.at("j").get<int>()}] = {p.at("re").get<double>(), p.at("im").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("positions: ") + e.what());
    }
    return out;
}

std::vector<std::vector<double>> path_from_json(const Json& j)
{
    const Json& rows = j.is_object() && j.contains("potentials") ? j.at("potentials") : j;
    if (!rows.is_array() || rows.empty()) parse_error("path must be a nonempty array of potential vectors");
    try {
        return rows.get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("path: ") + e.what());
    }
}

void write_ray_csv(std::ostream& out, const std::vector<RaySample<double>>& samples)
{
    out << "t,re,im,depth,err_bound\n";
    for (const auto& s : samples)
        out << format_double(s.potential) << ',' << format_double(s.position.real()) << ','
            << format_double(s.position.imag()) << ',' << s.depth << ',' << format_double(s.err_bound) << '\n';
}

void write_trace_csv(std::ostream& out, const std::vector<std::vector<double>>& path,
                     const std::vector<SolveResult<double>>& results)
{
    if (results.empty()) return;
    const std::size_t m = path.front().size();
    const Eigen::Index d = results.front().map.coeffs().size();
    out << "step";
    for (std::size_t i = 1; i <= m; ++i) out << ",T_" << i;
    for (Eigen::Index k = 0; k < d; ++k) out << ",coeff_re_" << k;
    for (Eigen::Index k = 0; k < d; ++k) out << ",coeff_im_" << k;
    out << ",residual\n";
    for (std::size_t step = 0; step < results.size(); ++step) {
        out << step;
        for (double T : path[step]) out << ',' << format_double(T);
        const auto& c = results[step].map.coeffs();
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(c[k].real());
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(c[k].imag());
        out << ',' << format_double(results[step].max_residual()) << '\n';
    }
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) parse_error("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        parse_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace rayforge::io
