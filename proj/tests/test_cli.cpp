#include "mosindy/io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int exit_code;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mosindy_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CliRun run(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = env + " \"" MOSINDY_CLI_PATH "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliRun r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, mosindy::io::read_text(out), mosindy::io::read_text(err)};
    fs::remove(out);
    fs::remove(err);
    return r;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = mosindy::io::read_text(e.path());
    }
    return files;
}

void expect_error(const CliRun& r, int code) {
    EXPECT_EQ(r.exit_code, code) << r.err;
    const json j = json::parse(r.err, nullptr, false);
    ASSERT_FALSE(j.is_discarded()) << r.err;
    EXPECT_EQ(j["error"]["exit_code"], code);
    EXPECT_FALSE(j["error"]["message"].get<std::string>().empty());
}

// Runs args into dir/a, replays from dir/a/manifest.json into dir/b and
// compares every file byte for byte.
void expect_replay_identical(const std::string& command, const std::string& args, const fs::path& dir) {
    fs::create_directories(dir);
    const CliRun a = run(command + " " + args + " -o \"" + (dir / "a").string() + "\"", dir);
    ASSERT_EQ(a.exit_code, 0) << a.err;
    const CliRun b = run(command + " --config \"" + (dir / "a" / "manifest.json").string() + "\" -o \"" +
                          (dir / "b").string() + "\"",
                      dir);
    ASSERT_EQ(b.exit_code, 0) << b.err;
    const auto ta = tree(dir / "a"), tb = tree(dir / "b");
    EXPECT_GT(ta.size(), 1u);
    EXPECT_EQ(ta, tb) << command;
}

}  // namespace

TEST(Cli, GenerateHopfWritesEveryScheduledSet) {
    const fs::path dir = scratch("gen");
    const CliRun r = run("generate --system hopf -o \"" + (dir / "out").string() + "\"", dir);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    int transients = 0, attractors = 0;
    for (const auto& e : fs::directory_iterator(dir / "out" / "transients")) transients += e.path().extension() == ".csv";
    for (const auto& e : fs::directory_iterator(dir / "out" / "attractors")) attractors += e.path().extension() == ".csv";
    EXPECT_EQ(transients, 14);
    EXPECT_EQ(attractors, 14);
    const json ds = mosindy::io::read_json(dir / "out" / "dataset.json");
    EXPECT_EQ(ds["single_transient"]["mu"], 0.01);
    const json m = mosindy::io::read_json(dir / "out" / "manifest.json");
    EXPECT_EQ(m["command"], "generate");
    EXPECT_EQ(m["config"]["system"], "hopf");
}

TEST(Cli, FitDefaultsToStandardAndReadsGeneratedData) {
    const fs::path dir = scratch("fit");
    ASSERT_EQ(run("generate -s hopf -o \"" + (dir / "data").string() + "\"", dir).exit_code, 0);
    const CliRun r = run("fit --data \"" + (dir / "data").string() + "\" --lambda 0.006 -o \"" + (dir / "std").string() + "\"", dir);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const json rep = mosindy::io::read_json(dir / "std" / "fit_report.json");
    EXPECT_EQ(rep["hyperparameters"]["alpha"], 1.0);
    EXPECT_NE(r.out.find("dx/dt"), std::string::npos);

    const CliRun mo = run("fit --data \"" + (dir / "data").string() + "\" --lambda 0.006 --alpha 1e4 -o \"" +
                           (dir / "mo").string() + "\"",
                       dir);
    ASSERT_EQ(mo.exit_code, 0) << mo.err;
    EXPECT_EQ(mosindy::io::read_json(dir / "mo" / "fit_report.json")["structure_match"], true);
}

TEST(Cli, ErrorsAreJsonWithDocumentedExitCodes) {
    const fs::path dir = scratch("err");
    expect_error(run("fit -s hopf --lambda 1.5 -o \"" + (dir / "x").string() + "\"", dir), 2);
    expect_error(run("fit -s hopf -o \"" + (dir / "x").string() + "\"", dir), 2);
    const CliRun bad = run("generate -s duffing -o \"" + (dir / "x").string() + "\"", dir);
    expect_error(bad, 2);
    EXPECT_NE(bad.err.find("stuart_landau"), std::string::npos);
    expect_error(run("fit --data \"" + (dir / "nowhere").string() + "\" --lambda 0.1", dir), 4);
    EXPECT_EQ(run("generate --no-such-flag", dir).exit_code, 2);
    EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST(Cli, OutputRootComesFromTheEnvironment) {
    const fs::path dir = scratch("env");
    const CliRun r = run("generate -s saddle_node", dir, "MOSINDY_OUTPUT_ROOT=\"" + (dir / "root").string() + "\"");
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "root" / "generate_saddle_node" / "manifest.json"));
}

TEST(Cli, RobustnessDefaultGridHasThirtyCells) {
    const fs::path dir = scratch("rob");
    const CliRun r = run("robustness -s lorenz --realizations 2 -o \"" + (dir / "out").string() + "\"", dir);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const std::string csv = mosindy::io::read_text(dir / "out" / "heatmap.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 31);
}

TEST(Cli, ReplayFromManifestIsByteIdentical) {
    const fs::path dir = scratch("replay");
    expect_replay_identical("generate", "-s saddle_node", dir / "generate");
    expect_replay_identical("fit", "-s hopf --selection combined --lambda 0.006 --alpha 1e4", dir / "fit");
    expect_replay_identical("sweep", "-s saddle_node", dir / "sweep");
    expect_replay_identical("robustness", "-s hopf --realizations 2 --noise-levels 0,0.1 --keep-fractions 1,0.5",
                            dir / "robustness");
    expect_replay_identical("condition-curve", "-s stuart_landau", dir / "cc");
}
