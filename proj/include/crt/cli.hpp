#pragma once

// Run configuration and command dispatch behind the crt_cli executable.

#include "crt/io.hpp"

#include <fstream>
#include <optional>

namespace crt::cli {

using json = io::json;

enum class Command { Verify, SolveThm1, SolveThm2, Convergence, Moments };

inline Command parse_command(const std::string& s)
{
    if (s == "verify") return Command::Verify;
    if (s == "solve-thm1") return Command::SolveThm1;
    if (s == "solve-thm2") return Command::SolveThm2;
    if (s == "convergence") return Command::Convergence;
    if (s == "moments") return Command::Moments;
    throw ConfigError("unknown command: " + s);
}

inline std::string to_string(Command c)
{
    switch (c) {
    case Command::Verify: return "verify";
    case Command::SolveThm1: return "solve-thm1";
    case Command::SolveThm2: return "solve-thm2";
    case Command::Convergence: return "convergence";
    case Command::Moments: return "moments";
    }
    return "?";
}

struct GridSpec {
    bool automatic = true;
    int n_s = 0;
    int n_angle = 0;

    [[nodiscard]] std::string str() const
    {
        return automatic ? "auto" : std::to_string(n_s) + "," + std::to_string(n_angle);
    }
};

inline GridSpec parse_grid(const std::string& s)
{
    if (s == "auto") return {};
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("grid must be 'auto' or 's,angle': " + s);
    try {
        std::size_t used1 = 0, used2 = 0;
        const int a = std::stoi(s.substr(0, comma), &used1);
        const int b = std::stoi(s.substr(comma + 1), &used2);
        if (used1 != comma || used2 != s.size() - comma - 1) throw std::invalid_argument(s);
        if (a < 2 || b < 4) throw ConfigError("grid needs n_s >= 2 and n_angle >= 4");
        return {false, a, b};
    } catch (const std::logic_error&) {
        throw ConfigError("grid must be 'auto' or 's,angle': " + s);
    }
}

struct Family {
    std::string name = "manufactured";
    json params = json::object();
};

struct RunConfig {
    Command command = Command::Verify;
    int n = 4;
    GridSpec grid;
    std::uint64_t seed = 7;
    std::map<std::string, double> tolerances;
    std::string output_path; ///< empty: stdout
    Family family;
    long long samples = 100000; ///< Monte Carlo samples for `moments`
    std::string matrix_csv;     ///< optional CSV dump of the Zbar_hat Galerkin matrix
};

/// Keys accepted by --tol: the verify tolerances plus the solver thresholds.
inline std::map<std::string, double> tolerance_defaults()
{
    auto t = verify::default_tolerances();
    const HardyOptions h;
    t["precondition_tol"] = h.precondition_tol;
    t["kernel_cut"] = h.kernel_cut;
    return t;
}

inline std::pair<std::string, double> parse_tolerance(const std::string& s)
{
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("tolerance must be key=value: " + s);
    const std::string key = s.substr(0, eq);
    try {
        std::size_t used = 0;
        const double v = std::stod(s.substr(eq + 1), &used);
        if (used != s.size() - eq - 1 || !(v >= 0.0)) throw std::invalid_argument(s);
        return {key, v};
    } catch (const std::logic_error&) {
        throw ConfigError("invalid tolerance value: " + s);
    }
}

inline void validate(const RunConfig& cfg)
{
    if (cfg.n < 0) throw ConfigError("n must be >= 0");
    if (cfg.n > 12) throw ConfigError("n > 12 is outside the supported range");
    const auto known = tolerance_defaults();
    for (const auto& [key, value] : cfg.tolerances)
        if (!known.contains(key)) throw ConfigError("unknown tolerance key: " + key);
    static const std::set<std::string> families{"manufactured", "h1-violating", "hardy-violating", "zero"};
    if (!families.contains(cfg.family.name)) throw ConfigError("unknown family: " + cfg.family.name);
    if (cfg.command == Command::SolveThm1 && cfg.family.name == "hardy-violating")
        throw ConfigError("solve-thm1 takes the h1-violating family, not hardy-violating");
    if (cfg.command == Command::SolveThm2 && cfg.family.name == "h1-violating")
        throw ConfigError("solve-thm2 takes the hardy-violating family, not h1-violating");
    if ((cfg.command == Command::SolveThm1 || cfg.command == Command::SolveThm2) && cfg.n < 1)
        throw ConfigError("solver commands need n >= 1");
    if (cfg.samples < 10000) throw ConfigError("samples must be >= 1e4");
}

/// Reads a JSON config mirroring RunConfig; unknown keys are rejected.
inline RunConfig config_from_json(const json& j, RunConfig cfg = {})
{
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "command") cfg.command = parse_command(value.get<std::string>());
            else if (key == "n") cfg.n = value.get<int>();
            else if (key == "grid") {
                if (value.is_string()) cfg.grid = parse_grid(value.get<std::string>());
                else cfg.grid = parse_grid(std::to_string(value.at(0).get<int>()) + "," + std::to_string(value.at(1).get<int>()));
            } else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "tolerances") {
                for (const auto& [k, v] : value.items()) cfg.tolerances[k] = v.get<double>();
            } else if (key == "output_path") cfg.output_path = value.get<std::string>();
            else if (key == "family") {
                if (value.is_string()) cfg.family = {value.get<std::string>(), json::object()};
                else {
                    cfg.family.name = value.at("name").get<std::string>();
                    cfg.family.params = value.value("params", json::object());
                }
            } else if (key == "samples") cfg.samples = value.get<long long>();
            else if (key == "matrix_csv") cfg.matrix_csv = value.get<std::string>();
            else if (key == "schema_version") {
                if (value.get<int>() != io::kSchemaVersion) throw ConfigError("unsupported schema_version");
            } else throw ConfigError("unknown config key: " + key);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {})
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j, std::move(cfg));
}

struct RunOutcome {
    json report;
    int exit_code = 0;
    std::string csv; ///< table for convergence / moments
};

namespace detail {

inline double tol(const RunConfig& cfg, const std::string& key)
{
    if (const auto it = cfg.tolerances.find(key); it != cfg.tolerances.end()) return it->second;
    return tolerance_defaults().at(key);
}

struct Assertion {
    std::string name;
    double value;
    double tolerance;
    bool strict = false;
};

inline json assertions_json(const std::vector<Assertion>& list, std::vector<std::string>& failures)
{
    json out = json::array();
    for (const auto& a : list) {
        const verify::Metric m{a.name, a.value, a.tolerance, a.strict};
        if (!m.passed()) failures.push_back(a.name);
        out.push_back(io::to_json(m));
    }
    return out;
}

inline json config_json(const RunConfig& cfg)
{
    json tolerances = json::object();
    for (const auto& [k, v] : cfg.tolerances) tolerances[k] = v;
    return {
        {"command", to_string(cfg.command)},
        {"n", cfg.n},
        {"grid", cfg.grid.str()},
        {"seed", cfg.seed},
        {"tolerances", tolerances},
        {"family", {{"name", cfg.family.name}, {"params", cfg.family.params}}},
        {"samples", cfg.samples},
    };
}

inline QuadratureGrid resolve_grid(const RunConfig& cfg, int degree)
{
    return cfg.grid.automatic ? default_grid(degree) : build_grid(cfg.grid.n_s, cfg.grid.n_angle);
}

inline void write_matrix(const RunConfig& cfg, const OperatorMatrix& m)
{
    if (cfg.matrix_csv.empty()) return;
    std::ofstream out(cfg.matrix_csv);
    if (!out) throw ConfigError("cannot write " + cfg.matrix_csv);
    io::write_csv(out, m);
}

inline RunOutcome run_verify(const RunConfig& cfg)
{
    verify::VerifyConfig vc;
    vc.n = cfg.n;
    vc.seed = cfg.seed;
    for (const auto& [k, v] : cfg.tolerances)
        if (verify::default_tolerances().contains(k)) vc.tolerances[k] = v;
    if (cfg.family.params.contains("checks"))
        for (const auto& id : cfg.family.params.at("checks")) vc.only.insert(id.get<int>());

    const auto results = verify::run(vc);
    RunOutcome out;
    json checks = json::array();
    std::vector<std::string> failures;
    for (const auto& r : results) {
        checks.push_back(io::to_json(r));
        if (!r.passed()) failures.push_back("AC" + std::to_string(r.id) + " " + r.name);
    }
    out.report["checks"] = checks;
    out.report["failures"] = failures;
    out.exit_code = failures.empty() ? 0 : 1;
    return out;
}

inline RunOutcome run_solve(const RunConfig& cfg)
{
    const bool thm1 = cfg.command == Command::SolveThm1;
    HardyOptions options;
    options.precondition_tol = tol(cfg, "precondition_tol");
    options.kernel_cut = tol(cfg, "kernel_cut");
    const SphereComplex c(cfg.n, resolve_grid(cfg, cfg.n), options);
    write_matrix(cfg, c.zbar());
    auto basis = c.basis_ptr();

    TransferOptions topt;
    topt.seed = cfg.seed;
    HeisenbergFunction f;
    std::optional<SpectralFunction> expected; // sphere coefficients of the known solution
    const auto& name = cfg.family.name;
    const auto& params = cfg.family.params;

    if (name == "zero") {
        f = [](const HeisenbergPoint&) { return cplx{}; };
        expected = basis->zero();
    } else if (name == "manufactured" && thm1) {
        SpectralFunction v = random_non_hardy(c, cfg.seed);
        if (params.contains("monomial")) {
            const auto m = params.at("monomial").get<std::array<int, 4>>();
            const MonomialIndex idx{m[0], m[1], m[2], m[3]};
            if (basis->monomial_position(idx) < 0) throw ConfigError("monomial outside the truncated space");
            v = monomial_function(*basis, idx);
            v = v - c.szego_project(v);
        }
        if (v.norm() == 0.0) throw ConfigError("manufactured data has no non-Hardy part");
        f = thm1_data_for(basis, v);
        expected = v;
    } else if (name == "manufactured") {
        const auto g = random_non_h1(c, cfg.seed);
        f = thm2_data_for(basis, g);
        expected = g.twisted;
    } else if (name == "h1-violating") {
        const auto kernel = c.h1_kernel_basis();
        const int index = params.value("index", 0);
        if (index < 0 || index >= static_cast<int>(kernel.size())) throw ConfigError("h1-violating index out of range");
        f = thm1_data_from_form(basis, kernel[static_cast<std::size_t>(index)]);
    } else {
        // h^{-2} times a Hardy monomial zeta^a
        const auto a = params.value("monomial", std::array<int, 2>{1, 0});
        const MonomialIndex idx{a[0], a[1], 0, 0};
        if (basis->monomial_position(idx) < 0) throw ConfigError("monomial outside the truncated space");
        f = hardy_weighted(basis, monomial_function(*basis, idx));
    }

    const auto [sol, report] = thm1 ? solve_thm1(c, f, topt) : solve_thm2(c, f, topt);

    std::vector<Assertion> checks;
    if (expected) {
        const double scale = expected->norm();
        const double recovery = (sol.u_hat() - *expected).norm() / (scale > 0.0 ? scale : 1.0);
        checks.push_back({"transfer.sphere_residual", report.sphere_residual, tol(cfg, "transfer.sphere_residual")});
        checks.push_back({"transfer.recovery", recovery, tol(cfg, "transfer.recovery")});
        checks.push_back({"transfer.h1_residual", report.h1_residual_max, tol(cfg, "transfer.h1_residual")});
        checks.push_back({"transfer.norm_identity", report.norm_identity_error, tol(cfg, "transfer.norm_identity")});
    }

    RunOutcome out;
    std::vector<std::string> failures;
    out.report["transfer_report"] = io::to_json(report);
    out.report["grid"] = io::to_json(c.grid());
    out.report["basis"] = io::to_json(c.basis());
    out.report["diagnostics"] = {
        {"galerkin_refinement_change", c.galerkin_refinement_change()},
        {"hardy_rank", c.hardy_rank()},
        {"h1_rank", c.h1_rank()},
        {"solution_norm", sol.u_hat().norm()},
    };
    out.report["assertions"] = assertions_json(checks, failures);
    out.report["failures"] = failures;
    out.exit_code = failures.empty() ? 0 : 1;
    return out;
}

inline RunOutcome run_convergence(const RunConfig& cfg)
{
    if (cfg.n < 2) throw ConfigError("convergence needs n >= 2");
    RunOutcome out;
    json rows = json::array();
    std::vector<std::vector<double>> table;
    double previous = std::numeric_limits<double>::infinity(), worst_ratio = 0.0, worst_galerkin = 0.0;
    for (int n = 1; n <= cfg.n; ++n) {
        const auto basis = Basis::build(n);
        const auto grid = cfg.grid.automatic ? default_grid(n) : resolve_grid(cfg, n);
        const auto g = GridFunction::sample(grid, [](const SpherePoint& q) { return cplx{std::exp(q.zeta1.real())}; });
        const double r = analyze(*basis, g, grid).residual_norm / sphere_l2_norm(grid, g);
        const double change = zbar_hat_galerkin(*basis, grid).refinement_change;
        if (std::isfinite(previous)) worst_ratio = std::max(worst_ratio, r / previous);
        previous = r;
        worst_galerkin = std::max(worst_galerkin, change);
        rows.push_back({{"n", n}, {"grid", grid.id()}, {"rank", basis->rank()}, {"analyze_residual", r},
                        {"galerkin_change", change}});
        table.push_back({double(n), double(grid.n_s()), double(grid.n_angle()), double(basis->rank()), r, change});
    }
    std::vector<std::string> failures;
    out.report["table"] = rows;
    out.report["assertions"] = assertions_json(
        {{"convergence.decrease_ratio", worst_ratio, tol(cfg, "convergence.decrease_ratio"), true},
         {"convergence.galerkin", worst_galerkin, tol(cfg, "convergence.galerkin")}},
        failures);
    out.report["failures"] = failures;
    std::ostringstream csv;
    io::write_csv(csv, {"n", "n_s", "n_angle", "rank", "analyze_residual", "galerkin_change"}, table);
    out.csv = csv.str();
    out.exit_code = failures.empty() ? 0 : 1;
    return out;
}

inline RunOutcome run_moments(const RunConfig& cfg)
{
    RunOutcome out;
    json rows = json::array();
    std::vector<std::vector<double>> table;
    double worst = 0.0;
    std::uint64_t stream = 0;
    // diagonal moments up to degree n plus one off-diagonal pair per degree
    for (int d = 0; d <= cfg.n; ++d)
        for (int a1 = 0; a1 <= d; ++a1) {
            const std::array<int, 2> a{a1, d - a1};
            std::vector<std::array<int, 2>> partners{a};
            if (a[0] != a[1]) partners.push_back({a[1], a[0]});
            for (const auto& b : partners) {
                const auto mc = testkit::monte_carlo_moment(a, b, cfg.samples, cfg.seed + stream++);
                const double exact = a == b ? monomial_moment(a, a) : 0.0;
                const double sigmas = testkit::sigma_distance(mc, exact);
                worst = std::max(worst, sigmas);
                rows.push_back({{"a", a}, {"b", b}, {"exact", exact}, {"estimate_re", mc.estimate.real()},
                                {"estimate_im", mc.estimate.imag()}, {"standard_error", mc.standard_error},
                                {"sigmas", sigmas}});
                table.push_back({double(a[0]), double(a[1]), double(b[0]), double(b[1]), exact, mc.estimate.real(),
                                 mc.estimate.imag(), mc.standard_error});
            }
        }
    std::vector<std::string> failures;
    out.report["table"] = rows;
    out.report["assertions"] = assertions_json({{"basis.mc_sigma", worst, tol(cfg, "basis.mc_sigma")}}, failures);
    out.report["failures"] = failures;
    std::ostringstream csv;
    io::write_csv(csv, {"a1", "a2", "b1", "b2", "exact", "estimate_re", "estimate_im", "standard_error"}, table);
    out.csv = csv.str();
    out.exit_code = failures.empty() ? 0 : 1;
    return out;
}

} // namespace detail

/// Executes a command. Configuration problems surface as ConfigError (exit 2);
/// numerical failures are caught and reported with exit 1.
inline RunOutcome run(const RunConfig& cfg)
{
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();
    RunOutcome out;
    try {
        switch (cfg.command) {
        case Command::Verify: out = detail::run_verify(cfg); break;
        case Command::SolveThm1:
        case Command::SolveThm2: out = detail::run_solve(cfg); break;
        case Command::Convergence: out = detail::run_convergence(cfg); break;
        case Command::Moments: out = detail::run_moments(cfg); break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidConfig& e) {
        throw ConfigError(e.what());
    } catch (const Error& e) {
        out.report = json::object();
        out.report["failures"] = {e.what()};
        out.exit_code = 1;
    }
    json report{{"schema_version", io::kSchemaVersion}, {"config", detail::config_json(cfg)}};
    for (const auto& item : out.report.items()) report[item.key()] = item.value();
    report["passed"] = out.exit_code == 0;
    report["elapsed_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.report = std::move(report);
    return out;
}

} // namespace crt::cli
