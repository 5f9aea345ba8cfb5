#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gkb/harness/config.hpp"
#include "gkb/harness/experiment.hpp"
#include "gkb/harness/io.hpp"

using namespace gkb;
using namespace gkb::harness;
namespace fs = std::filesystem;

namespace {

const char* small_config = R"({
  "seed": 5,
  "instance": {"kernel": {"type": "rbf", "lengthscale": 0.3}, "model": {"type": "bernoulli"},
               "num_arms": 4, "num_anchors": 3, "B": 1.0},
  "experiment": {"horizon": 15, "replications": 3,
                 "policies": ["uniform_random", {"name": "eff_gkb_ucb", "label": "eff"}]}
})";

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("gkb_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string error_of(const std::string& text)
{
    try {
        parse_config(text, "cfg.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(GKB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream(path) << text;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        lines.push_back(line);
    }
    return lines;
}

} // namespace

TEST(Config, ParsesPoliciesAndDefaults)
{
    const ExperimentConfig c = parse_config(small_config);
    EXPECT_EQ(c.seed, 5U);
    EXPECT_EQ(c.horizon, 15);
    EXPECT_DOUBLE_EQ(c.delta, 0.1);
    ASSERT_EQ(c.policies.size(), 2U);
    EXPECT_EQ(c.policies[0].label, "uniform_random");
    EXPECT_EQ(c.policies[1].label, "eff");
    EXPECT_EQ(c.policies[1].kind, PolicyKind::eff_gkb_ucb);
    EXPECT_EQ(instance_seed(c), instance_seed(parse_config(small_config)));
}

TEST(Config, UnknownKeyNamesFieldAndLine)
{
    const std::string msg = error_of("{\n  \"seed\": 1,\n  \"instance\": {\n    \"colour\": 3\n  }\n}");
    EXPECT_NE(msg.find("cfg.json:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("instance.colour"), std::string::npos) << msg;
}

TEST(Config, WrongTypeNamesField)
{
    const std::string msg = error_of("{\"experiment\": {\"horizon\": \"long\"}}");
    EXPECT_NE(msg.find("experiment.horizon"), std::string::npos) << msg;
}

TEST(Config, RejectsInvalidValues)
{
    EXPECT_NE(error_of("{\"experiment\": {\"delta\": 1.5}}"), "");
    EXPECT_NE(error_of("{\"experiment\": {\"horizon\": 0}}"), "");
    EXPECT_NE(error_of("{\"experiment\": {\"policies\": [\"thompson\"]}}"), "");
    EXPECT_NE(error_of("{\"experiment\": {\"policies\": [\"greedy\", \"greedy\"]}}"), "");
    EXPECT_NE(error_of("{\"instance\": {\"kernel\": {\"type\": \"cosine\"}}}"), "");
    EXPECT_NE(error_of("{\"seed\": 1,"), "");
}

TEST(Io, FormatNumber)
{
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(-2.0), "-2");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Io, AtomicWriteLeavesNoTemporary)
{
    const fs::path dir = scratch("atomic");
    write_atomic(dir / "a" / "b.txt", "first");
    write_atomic(dir / "a" / "b.txt", "second");
    EXPECT_EQ(read_file(dir / "a" / "b.txt"), "second");
    EXPECT_EQ(std::distance(fs::directory_iterator(dir / "a"), fs::directory_iterator{}), 1);
}

TEST(Experiment, RunFilesAndAggregate)
{
    ExperimentConfig c = parse_config(small_config);
    const fs::path dir = scratch("run");
    c.output_dir = dir.string();
    std::ostringstream log;
    ASSERT_EQ(run_experiment(c, 2, log), 0);

    for (const auto* f : {"environment.json", "manifest.json", "aggregate.csv"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    std::vector<std::vector<double>> cum(2, std::vector<double>(15, 0.0));
    for (int p = 0; p < 2; ++p) {
        for (int rep = 0; rep < 3; ++rep) {
            const auto lines = lines_of(read_file(dir / run_file(c.policies[p].label, rep)));
            ASSERT_EQ(lines.size(), 16U);
            EXPECT_EQ(lines[0], "t,policy,replication,arm_index,reward,inst_regret,cum_regret,D_t,B_t,newton_iters,"
                                "bisection_iters,wall_ms");
            for (int t = 1; t <= 15; ++t) {
                std::vector<std::string> cells;
                std::istringstream row(lines[static_cast<std::size_t>(t)]);
                for (std::string cell; std::getline(row, cell, ',');) {
                    cells.push_back(cell);
                }
                ASSERT_EQ(cells.size(), 12U);
                EXPECT_EQ(std::stoi(cells[0]), t);
                EXPECT_EQ(cells[1], c.policies[p].label);
                EXPECT_EQ(cells[11], "0");
                cum[p][t - 1] += std::stod(cells[6]) / 3.0;
            }
        }
    }
    const auto agg = lines_of(read_file(dir / "aggregate.csv"));
    ASSERT_EQ(agg.size(), 31U);
    EXPECT_EQ(agg[0], "t,policy,mean_cum_regret,median_cum_regret,replications");
    for (std::size_t i = 1; i < agg.size(); ++i) {
        std::istringstream row(agg[i]);
        std::string t, label, mean;
        std::getline(row, t, ',');
        std::getline(row, label, ',');
        std::getline(row, mean, ',');
        const int p = label == "uniform_random" ? 0 : 1;
        EXPECT_NEAR(std::stod(mean), cum[p][std::stoul(t) - 1], 1e-12);
    }
    const Json manifest = Json::parse(read_file(dir / "manifest.json"));
    EXPECT_EQ(manifest["failed_replications"], 0);
    EXPECT_EQ(manifest["replications"].size(), 6U);
}

TEST(Experiment, IdenticalAcrossWorkerCounts)
{
    ExperimentConfig c = parse_config(small_config);
    const fs::path a = scratch("workers_a");
    const fs::path b = scratch("workers_b");
    std::ostringstream log;
    c.output_dir = a.string();
    run_experiment(c, 1, log);
    c.output_dir = b.string();
    run_experiment(c, 3, log);
    EXPECT_EQ(read_file(a / "aggregate.csv"), read_file(b / "aggregate.csv"));
    EXPECT_EQ(read_file(a / run_file("eff", 2)), read_file(b / run_file("eff", 2)));
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch("cli");
    write_text(dir / "ok.json", small_config);
    write_text(dir / "bad.json", "{\"experiment\": {\"horizon\": -3}}");
    const std::string out = " --out " + (dir / "out").string();

    EXPECT_EQ(run_cli("print-instance " + (dir / "ok.json").string()), 0);
    EXPECT_EQ(run_cli("run-experiment " + (dir / "ok.json").string() + out), 0);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("run-experiment"), 2);
    EXPECT_EQ(run_cli("run-experiment " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run_cli("run-experiment " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run_cli("run-experiment " + (dir / "ok.json").string() + " --workers 0"), 2);
    EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, RerunIsByteIdentical)
{
    const fs::path dir = scratch("rerun");
    write_text(dir / "ok.json", small_config);
    for (const auto* name : {"a", "b"}) {
        ASSERT_EQ(run_cli("run-experiment " + (dir / "ok.json").string() + " --workers 2 --out " +
                          (dir / name).string()),
                  0);
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
        if (entry.is_regular_file()) {
            const fs::path rel = fs::relative(entry.path(), dir / "a");
            if (rel == "manifest.json") {
                continue;
            }
            EXPECT_EQ(read_file(entry.path()), read_file(dir / "b" / rel)) << rel;
        }
    }
}

TEST(Cli, SeedOverrideChangesOutput)
{
    const fs::path dir = scratch("seed");
    write_text(dir / "ok.json", small_config);
    run_cli("run-experiment " + (dir / "ok.json").string() + " --out " + (dir / "a").string());
    run_cli("run-experiment " + (dir / "ok.json").string() + " --seed 6 --out " + (dir / "b").string());
    EXPECT_NE(read_file(dir / "a" / "aggregate.csv"), read_file(dir / "b" / "aggregate.csv"));
}

TEST(Cli, VerifyNegativeControl)
{
    const fs::path dir = scratch("verify");
    write_text(dir / "v.json", R"({"seed": 3, "verify": {"suites": {"weighted_gain": {"instances": 100}}}})");
    const std::string base = "verify " + (dir / "v.json").string() + " --out " + (dir / "out").string();
    EXPECT_EQ(run_cli(base), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "verify_report.json"));
    EXPECT_EQ(run_cli(base + " --bound-multiplier 0.5"), 1);
}
