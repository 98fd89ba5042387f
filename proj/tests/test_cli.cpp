#include "lossequiv/cli.hpp"
#include "lossequiv/io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace lossequiv {
namespace {

const fs::path golden_dir(LOSSEQUIV_GOLDEN_DIR);

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lossequiv");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void key_paths(const nlohmann::json& v, const std::string& path, std::vector<std::string>& out) {
    if (v.is_object()) {
        for (const auto& [key, child] : v.items()) {
            const auto p = path.empty() ? key : path + "." + key;
            out.push_back(p);
            key_paths(child, p, out);
        }
    } else if (v.is_array() && !v.empty()) {
        key_paths(v.front(), path + "[]", out);
    }
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("lossequiv-cli-" + std::to_string(std::random_device{}()))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
}

TEST(Cli, demo_small_sample) {
    const auto r = cli({"demo-small-sample"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Total Absolute Difference 10 10"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Index of Dissimilarity 0.0004 0.0024"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Share of Total 0.0109 0.9891"), std::string::npos) << r.out;
}

TEST(Cli, compute_two_inputs_matches_golden_layout) {
    const auto r = cli({"compute", "--input", (golden_dir / "set1.csv").string(), "--input",
                        (golden_dir / "set2.csv").string(), "--label", "Set 1", "--label", "Set 2"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, slurp(golden_dir / "compute_two_inputs.txt"));
}

TEST(Cli, compute_single_input_and_measure_selection) {
    const auto r = cli({"compute", "--input", (golden_dir / "set2.csv").string(), "--measure", "tad", "--measure",
                        "id", "--id-normalization", "conventional"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out,
              "Measure                              set2\n"
              "Total Absolute Difference         10.0000\n"
              "Index of Dissimilarity (1/2 sum)   0.0049\n");
}

TEST(Cli, compute_errors) {
    EXPECT_EQ(cli({"compute", "--input", (golden_dir / "set1.csv").string(), "--measure", "rmse"}).code, 1);
    EXPECT_EQ(cli({"compute", "--input", "/nonexistent.csv"}).code, 2);
    EXPECT_EQ(cli({"compute"}).code, 1);

    TempDir dir;
    write_file(dir.path() / "bad.csv", "id,target,realized\na,10,-1\n");
    const auto bad = cli({"compute", "--input", (dir.path() / "bad.csv").string()});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("row 1"), std::string::npos) << bad.err;
}

TEST(Cli, usage_errors_exit_one) {
    const auto unknown = cli({"frobnicate"});
    EXPECT_EQ(unknown.code, 1);
    EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
    EXPECT_EQ(cli({"compute", "--bogus-flag"}).code, 1);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, diagnose_schema_matches_golden) {
    const auto r = cli({"diagnose", "--input", (golden_dir / "set1.csv").string(), "--spec", "2,-1,target"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    std::vector<std::string> paths;
    key_paths(doc, "", paths);
    std::string joined;
    for (const auto& p : paths) joined += p + "\n";
    EXPECT_EQ(joined, slurp(golden_dir / "diagnose_schema.txt"));

    const auto& eq = doc.at("equivalence");
    EXPECT_EQ(eq.at("n").get<int>(), 2);
    EXPECT_EQ(eq.at("K").get<double>(), 500.0);
    EXPECT_EQ(doc.at("spec").at("weight_side").get<std::string>(), "target");
}

TEST(Cli, diagnose_writes_file_and_validates) {
    TempDir dir;
    const auto out = (dir.path() / "report.json").string();
    const auto r = cli({"diagnose", "--input", (golden_dir / "set1.csv").string(), "--out", out});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(slurp(out));
    EXPECT_NEAR(doc.at("equivalence").at("difference").get<double>(), 5.0 - 505.0 * 0.9 / 1010.0, 1e-12);

    EXPECT_EQ(cli({"diagnose", "--input", (golden_dir / "set1.csv").string(), "--spec", "1,2,target"}).code, 1);
    EXPECT_EQ(cli({"diagnose", "--input", (golden_dir / "set1.csv").string(), "--eps0", "-1"}).code, 1);

    write_file(dir.path() / "zero.csv", "id,target,realized\na,0,1\nb,2,2\n");
    EXPECT_EQ(cli({"diagnose", "--input", (dir.path() / "zero.csv").string(), "--spec", "1,-1,target"}).code, 1);
    EXPECT_EQ(cli({"diagnose", "--input", (dir.path() / "zero.csv").string(), "--spec", "1,-1,target",
                   "--skip-zero-weights"})
                  .code,
              0);
}

TEST(Cli, simulate_then_rate) {
    TempDir dir;
    write_file(dir.path() / "config.json",
               R"({"n_grid": [100, 1000, 10000], "replicates": 20, "seed": 3,
                   "specs": ["1,0,target", "2,0,target"]})");
    const auto cfg = (dir.path() / "config.json").string();
    const auto a = cli({"simulate", "--config", cfg, "--out", (dir.path() / "a").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto summary = nlohmann::json::parse(slurp(dir.path() / "a" / "summary.json"));
    EXPECT_TRUE(summary.contains("config"));
    EXPECT_EQ(summary.at("results").size(), 2u);

    const auto points = (dir.path() / "a" / "points.csv").string();
    const auto rate = cli({"rate", "--points", points, "--field", "c_error", "--spec", "1,0,target"});
    EXPECT_EQ(rate.code, 0) << rate.err;
    EXPECT_NE(rate.out.find("slope: -0."), std::string::npos) << rate.out;
    EXPECT_EQ(cli({"rate", "--points", points, "--field", "c_error"}).code, 1);
    EXPECT_EQ(cli({"rate", "--points", points, "--field", "speed", "--spec", "1,0,target"}).code, 1);

    // Identical config gives identical bytes, regardless of thread count.
    const auto b = cli({"simulate", "--config", cfg, "--out", (dir.path() / "b").string(), "--threads", "3"});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(slurp(points), slurp(dir.path() / "b" / "points.csv"));

    const auto c = cli({"simulate", "--config", cfg, "--out", (dir.path() / "c").string(), "--seed", "4"});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_NE(slurp(points), slurp(dir.path() / "c" / "points.csv"));
}

TEST(Cli, simulate_rejects_bad_config) {
    TempDir dir;
    write_file(dir.path() / "bad.json", R"({"replicates": 0})");
    EXPECT_EQ(cli({"simulate", "--config", (dir.path() / "bad.json").string(), "--out", dir.path().string()}).code, 1);
    write_file(dir.path() / "broken.json", "{not json");
    EXPECT_EQ(cli({"simulate", "--config", (dir.path() / "broken.json").string(), "--out", dir.path().string()}).code,
              1);
    EXPECT_EQ(cli({"simulate", "--config", (dir.path() / "none.json").string(), "--out", dir.path().string()}).code,
              2);
}

TEST(Cli, rate_on_exact_power_law) {
    TempDir dir;
    std::ostringstream text;
    text << points_header << '\n';
    for (int n : {100, 1000, 10000, 100000}) {
        for (int r = 0; r < 3; ++r) {
            text << "1;0;target," << n << ',' << r << ",0," << 1.0 / std::sqrt(static_cast<double>(n))
                 << ",0,0,0,0\n";
        }
    }
    write_file(dir.path() / "points.csv", text.str());
    const auto r = cli({"rate", "--points", (dir.path() / "points.csv").string(), "--field", "c_error"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("slope: -0.500"), std::string::npos) << r.out;

    const auto degenerate = cli({"rate", "--points", (dir.path() / "points.csv").string(), "--field", "diff"});
    EXPECT_EQ(degenerate.code, 1);
}

TEST(Cli, binary_exit_codes) {
    const std::string exe = LOSSEQUIV_CLI;
    auto status = [&](const std::string& args) {
        const int raw = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(raw);
    };
    EXPECT_EQ(status("demo-small-sample"), 0);
    EXPECT_EQ(status("no-such-command"), 1);
    EXPECT_EQ(status("compute --input /nonexistent.csv"), 2);
}

}  // namespace
}  // namespace lossequiv
