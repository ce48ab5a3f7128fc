#include "crt/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Tangential Cauchy-Riemann solver on S^3 and the Heisenberg group"};
    std::string config_path, command, grid, family, out, csv, matrix;
    int n = -1;
    std::uint64_t seed = 0;
    long long samples = 0;
    std::vector<std::string> tols;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--command", command, "verify | solve-thm1 | solve-thm2 | convergence | moments");
    app.add_option("--n", n, "truncation degree N");
    app.add_option("--grid", grid, "quadrature grid: 's,angle' or 'auto'");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--tol", tols, "tolerance override key=value (repeatable)");
    app.add_option("--out", out, "report path (default stdout)");
    app.add_option("--family", family, "manufactured | h1-violating | hardy-violating | zero");
    app.add_option("--samples", samples, "Monte Carlo samples for moments");
    app.add_option("--csv", csv, "table output for convergence and moments");
    app.add_option("--matrix-csv", matrix, "dump the Galerkin matrix of the solve commands");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        crt::cli::RunConfig cfg;
        if (!config_path.empty()) cfg = crt::cli::load_config(config_path);
        if (!command.empty()) cfg.command = crt::cli::parse_command(command);
        if (app.count("--n")) cfg.n = n;
        if (!grid.empty()) cfg.grid = crt::cli::parse_grid(grid);
        if (app.count("--seed")) cfg.seed = seed;
        for (const auto& t : tols) cfg.tolerances.insert_or_assign(crt::cli::parse_tolerance(t).first,
                                                                    crt::cli::parse_tolerance(t).second);
        if (!out.empty()) cfg.output_path = out;
        if (!family.empty()) cfg.family = {family, crt::cli::json::object()};
        if (app.count("--samples")) cfg.samples = samples;
        if (!matrix.empty()) cfg.matrix_csv = matrix;

        const auto result = crt::cli::run(cfg);
        const std::string text = result.report.dump(2) + "\n";
        if (cfg.output_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(cfg.output_path);
            if (!f) throw crt::ConfigError("cannot write " + cfg.output_path);
            f << text;
        }
        if (!csv.empty() && !result.csv.empty()) {
            std::ofstream f(csv);
            if (!f) throw crt::ConfigError("cannot write " + csv);
            f << result.csv;
        }
        if (result.exit_code != 0) {
            for (const auto& name : result.report.at("failures")) std::cerr << "failed: " << name.get<std::string>() << '\n';
        }
        return result.exit_code;
    } catch (const crt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
}
