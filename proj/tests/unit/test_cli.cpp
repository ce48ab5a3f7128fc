#include "crt/cli.hpp"

#include <gtest/gtest.h>

using namespace crt;
using namespace crt::cli;

TEST(Cli, ParsesGridAndTolerances)
{
    EXPECT_TRUE(parse_grid("auto").automatic);
    const auto g = parse_grid("10,20");
    EXPECT_FALSE(g.automatic);
    EXPECT_EQ(g.n_s, 10);
    EXPECT_EQ(g.n_angle, 20);
    EXPECT_THROW(parse_grid("10"), ConfigError);
    EXPECT_THROW(parse_grid("10,x"), ConfigError);
    EXPECT_THROW(parse_grid("1,20"), ConfigError);
    EXPECT_EQ(parse_tolerance("transfer.recovery=1e-7").second, 1e-7);
    EXPECT_THROW(parse_tolerance("transfer.recovery"), ConfigError);
    EXPECT_THROW(parse_tolerance("transfer.recovery=abc"), ConfigError);
    EXPECT_THROW(parse_command("solve"), ConfigError);
}

TEST(Cli, ConfigFromJson)
{
    const auto cfg = config_from_json(json::parse(R"({
        "schema_version": 1, "command": "solve-thm2", "n": 3, "grid": [10, 20], "seed": 11,
        "tolerances": {"transfer.recovery": 1e-7},
        "family": {"name": "hardy-violating", "params": {"monomial": [0, 1]}}
    })"));
    EXPECT_EQ(cfg.command, Command::SolveThm2);
    EXPECT_EQ(cfg.n, 3);
    EXPECT_EQ(cfg.grid.str(), "10,20");
    EXPECT_EQ(cfg.seed, 11u);
    EXPECT_EQ(cfg.tolerances.at("transfer.recovery"), 1e-7);
    EXPECT_EQ(cfg.family.name, "hardy-violating");
    EXPECT_THROW(config_from_json(json::parse(R"({"n": "four"})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"unknown": 1})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"schema_version": 9})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse("[1]")), ConfigError);
}

TEST(Cli, RejectsInvalidConfigs)
{
    RunConfig cfg;
    cfg.n = -1;
    EXPECT_THROW(run(cfg), ConfigError);
    cfg = {};
    cfg.tolerances["nope"] = 1.0;
    EXPECT_THROW(run(cfg), ConfigError);
    cfg = {};
    cfg.command = Command::SolveThm1;
    cfg.family.name = "hardy-violating";
    EXPECT_THROW(run(cfg), ConfigError);
    cfg.family.name = "manufactured";
    cfg.grid = parse_grid("3,6"); // does not resolve degree 2N
    EXPECT_THROW(run(cfg), ConfigError);
}

TEST(Cli, SolveThm1ManufacturedReport)
{
    RunConfig cfg;
    cfg.command = Command::SolveThm1;
    cfg.n = 3;
    const auto out = run(cfg);
    EXPECT_EQ(out.exit_code, 0);
    const auto& r = out.report;
    EXPECT_EQ(r.at("schema_version"), io::kSchemaVersion);
    for (const char* key : {"sphere_residual", "h1_residual_max", "h1_residual_rms", "precondition_component",
                            "norm_l2_h1", "norm_l2_s3", "n", "grid", "seed", "elapsed_ms"})
        EXPECT_TRUE(r.at("transfer_report").contains(key)) << key;
    EXPECT_LE(r.at("transfer_report").at("sphere_residual").get<double>(), 1e-8);
    EXPECT_TRUE(r.at("passed").get<bool>());
    EXPECT_EQ(r.at("basis").at("rank"), restricted_dimension(3));
    EXPECT_EQ(r.at("grid").at("id"), "hopf:10x20");
}

TEST(Cli, ViolatingFamiliesAreDiagnostic)
{
    RunConfig cfg;
    cfg.command = Command::SolveThm1;
    cfg.family.name = "h1-violating";
    cfg.n = 3;
    auto out = run(cfg);
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_GT(out.report.at("transfer_report").at("precondition_component").get<double>(), 0.9);
    EXPECT_TRUE(out.report.at("transfer_report").at("precondition_violated").get<bool>());

    cfg.command = Command::SolveThm2;
    cfg.family.name = "hardy-violating";
    out = run(cfg);
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_TRUE(out.report.at("transfer_report").at("precondition_violated").get<bool>());
}

TEST(Cli, ImpossibleToleranceIsAHardFailure)
{
    RunConfig cfg;
    cfg.command = Command::SolveThm2;
    cfg.n = 2;
    cfg.tolerances["transfer.sphere_residual"] = 0.0;
    cfg.tolerances["transfer.h1_residual"] = 0.0;
    const auto out = run(cfg);
    EXPECT_EQ(out.exit_code, 1);
    EXPECT_FALSE(out.report.at("failures").empty());
}

TEST(Cli, ReportsAreDeterministicModuloTiming)
{
    auto strip = [](json j) {
        j.erase("elapsed_ms");
        if (j.contains("transfer_report")) j["transfer_report"].erase("elapsed_ms");
        if (j.contains("checks"))
            for (auto& c : j["checks"]) c.erase("elapsed_ms");
        return j.dump();
    };
    RunConfig cfg;
    cfg.command = Command::SolveThm2;
    cfg.n = 3;
    cfg.seed = 5;
    EXPECT_EQ(strip(run(cfg).report), strip(run(cfg).report));

    cfg.command = Command::Moments;
    cfg.n = 2;
    cfg.samples = 20000;
    const auto a = run(cfg), b = run(cfg);
    EXPECT_EQ(strip(a.report), strip(b.report));
    EXPECT_EQ(a.csv, b.csv);
    EXPECT_EQ(a.exit_code, 0);
}

TEST(Cli, ConvergenceTable)
{
    RunConfig cfg;
    cfg.command = Command::Convergence;
    cfg.n = 4;
    const auto out = run(cfg);
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(out.report.at("table").size(), 4u);
    EXPECT_NE(out.csv.find("analyze_residual"), std::string::npos);
}

TEST(Cli, VerifySubset)
{
    RunConfig cfg;
    cfg.command = Command::Verify;
    cfg.family.params = {{"checks", {1, 3, 9}}};
    const auto out = run(cfg);
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(out.report.at("checks").size(), 3u);
    cfg.family.params = {{"checks", {15}}};
    EXPECT_THROW(run(cfg), ConfigError);
}

TEST(Io, MatrixCsv)
{
    const auto basis = Basis::build(1);
    std::ostringstream os;
    io::write_csv(os, lbar_matrix_exact(*basis));
    const auto text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2 + basis->rank() * basis->rank());
}
