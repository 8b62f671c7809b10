#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("vup_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const json& j, const std::string& name = "run.json") {
        const auto p = dir_ / name;
        std::ofstream(p) << j.dump(2);
        return p;
    }

    int run(std::vector<std::string> args) {
        std::vector<const char*> argv{"vup"};
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return vup::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static json base_config() {
        return json::parse(R"({
          "seed": 3,
          "model": {"builtin": "ipsa2d"},
          "grid": {"dims": [{"lower": -5, "upper": 5, "count": 100}, {"lower": -1, "upper": 1, "count": 100}]},
          "scenario": {"range": [-3, 3], "count": 12, "sigma_ell": 0.5, "sigma_alpha": 0.25},
          "output": {"bins": 200},
          "mc": {"samples": 20000}
        })");
    }

    std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }

    std::size_t csv_rows(const fs::path& p) {
        std::ifstream in(p);
        std::size_t n = 0;
        for (std::string line; std::getline(in, line);) ++n;
        return n;
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, BuildMatrixIsByteIdenticalOnRerun) {
    const auto cfg = write_config(base_config());
    ASSERT_EQ(run({"build-matrix", "--config", cfg.string(), "--out-dir", (dir_ / "a").string()}), 0) << err_.str();
    ASSERT_EQ(run({"build-matrix", "--config", cfg.string(), "--out-dir", (dir_ / "b").string()}), 0) << err_.str();
    const auto a = slurp(dir_ / "a" / "model_matrix.vupm");
    EXPECT_EQ(a.size(), 40u + 4u * 100 * 100);
    EXPECT_EQ(a, slurp(dir_ / "b" / "model_matrix.vupm"));
    const auto manifest = json::parse(slurp(dir_ / "a" / "manifest.json"));
    EXPECT_EQ(manifest["command"], "build-matrix");
    EXPECT_TRUE(manifest["hashes"].contains("model"));
}

TEST_F(Cli, PropagateReusesMatrixAndRejectsMismatch) {
    const auto cfg = write_config(base_config());
    const auto m = dir_ / "m";
    ASSERT_EQ(run({"build-matrix", "--config", cfg.string(), "--out-dir", m.string()}), 0);
    const auto matrix = (m / "model_matrix.vupm").string();
    ASSERT_EQ(run({"propagate", "--config", cfg.string(), "--out-dir", (dir_ / "p1").string(), "--matrix", matrix}), 0)
        << err_.str();
    ASSERT_EQ(run({"propagate", "--config", cfg.string(), "--out-dir", (dir_ / "p2").string()}), 0);
    EXPECT_EQ(slurp(dir_ / "p1" / "output.csv"), slurp(dir_ / "p2" / "output.csv"));
    EXPECT_EQ(csv_rows(dir_ / "p1" / "output.csv"), 201u);

    auto other = base_config();
    other["grid"]["dims"][1]["upper"] = 2.0;
    const auto other_cfg = write_config(other, "other.json");
    EXPECT_EQ(run({"propagate", "--config", other_cfg.string(), "--out-dir", (dir_ / "p3").string(), "--matrix", matrix}), 1);
    EXPECT_EQ(err_.str().rfind("error:", 0), 0u);
    EXPECT_NE(err_.str().find("grid"), std::string::npos) << err_.str();
}

TEST_F(Cli, CorruptMatrixIsAFormatError) {
    const auto cfg = write_config(base_config());
    ASSERT_EQ(run({"build-matrix", "--config", cfg.string(), "--out-dir", dir_.string()}), 0);
    const auto path = dir_ / "model_matrix.vupm";
    auto bytes = slurp(path);
    bytes[1] = 'X';
    std::ofstream(path, std::ios::binary) << bytes;
    EXPECT_EQ(run({"propagate", "--config", cfg.string(), "--out-dir", dir_.string(), "--matrix", path.string()}), 1);
    EXPECT_NE(err_.str().find("magic"), std::string::npos) << err_.str();
}

TEST_F(Cli, FiveScenarioBatch) {
    auto j = base_config();
    j["scenario"]["sigma_ell"] = {0.05, 0.25, 0.5, 1.0, 3.0};
    j.erase("grid");
    const auto cfg = write_config(j);
    ASSERT_EQ(run({"propagate", "--config", cfg.string(), "--out-dir", dir_.string()}), 0) << err_.str();
    for (int g = 0; g < 5; ++g) EXPECT_TRUE(fs::exists(dir_ / ("output_sigma" + std::to_string(g) + ".csv"))) << g;
    ASSERT_EQ(run({"ipsa", "--config", cfg.string(), "--out-dir", dir_.string()}), 0) << err_.str();
    for (int g = 0; g < 5; ++g) EXPECT_TRUE(fs::exists(dir_ / ("summary_sigma" + std::to_string(g) + ".csv"))) << g;
}

TEST_F(Cli, ConfigErrorsAreExitTwoWithKeyPath) {
    auto j = base_config();
    j["output"]["bins"] = 0;
    EXPECT_EQ(run({"propagate", "--config", write_config(j).string()}), 2);
    EXPECT_NE(err_.str().find("error: output.bins"), std::string::npos) << err_.str();

    j = base_config();
    j["grid"]["dims"][0]["lower"] = 9;
    EXPECT_EQ(run({"propagate", "--config", write_config(j).string()}), 2);
    EXPECT_EQ(err_.str().rfind("error: grid", 0), 0u) << err_.str();

    j = base_config();
    j["scenario"]["sigma_elll"] = 1;
    EXPECT_EQ(run({"propagate", "--config", write_config(j).string()}), 2);
    EXPECT_NE(err_.str().find("scenario.sigma_elll"), std::string::npos);

    j = base_config();
    j["model"] = {{"expression", "x^2 + $"}, {"variables", {"x", "alpha"}}};
    EXPECT_EQ(run({"propagate", "--config", write_config(j).string()}), 2);
    EXPECT_NE(err_.str().find("model.expression"), std::string::npos);

    EXPECT_EQ(run({"propagate", "--config", (dir_ / "missing.json").string()}), 2);
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"propagate"}), 2);
    std::size_t lines = 0;
    for (char c : err_.str()) lines += c == '\n';
    EXPECT_EQ(lines, 1u);
}

TEST_F(Cli, IpsaSummaryIsSymmetricForEvenModel) {
    auto j = base_config();
    j["model"] = {{"expression", "x^2"}, {"variables", {"x", "alpha"}}};
    j["scenario"] = {{"locations", {-1.5, 1.5}}, {"sigma_ell", 0.3}, {"sigma_alpha", 0.25}};
    j["grid"]["dims"][0]["count"] = 101;
    ASSERT_EQ(run({"ipsa", "--config", write_config(j).string(), "--out-dir", dir_.string()}), 0) << err_.str();
    std::ifstream in(dir_ / "summary.csv");
    std::string header, a, b;
    std::getline(in, header);
    std::getline(in, a);
    std::getline(in, b);
    EXPECT_EQ(header, "ell,mean,var,argmax,ci_lo,ci_hi");
    auto fields = [](const std::string& line) {
        std::vector<double> v;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) v.push_back(std::stod(f));
        return v;
    };
    const auto fa = fields(a), fb = fields(b);
    ASSERT_EQ(fa.size(), 6u);
    EXPECT_EQ(fa[0], -fb[0]);
    for (std::size_t i = 1; i < 6; ++i) EXPECT_NEAR(fa[i], fb[i], 1e-12) << header;
}

TEST_F(Cli, TinySigmaWarns) {
    auto j = base_config();
    j["scenario"]["sigma_ell"] = 0.001;
    ASSERT_EQ(run({"ipsa", "--config", write_config(j).string(), "--out-dir", dir_.string()}), 0) << err_.str();
    EXPECT_NE(err_.str().find("warning:"), std::string::npos);
}

TEST_F(Cli, VarsLinearModel) {
    json j = {{"model", {{"expression", "2*x"}, {"variables", {"x"}}}},
              {"vars", {{"ell", {{"lower", 0}, {"upper", 10}, {"count", 100}}}, {"scale_limit", 3.0}, {"v_count", 20000}}}};
    ASSERT_EQ(run({"vars", "--config", write_config(j).string(), "--out-dir", dir_.string(), "--scales", "0.1,0.3,0.5"}), 0)
        << err_.str();
    const auto manifest = json::parse(slurp(dir_ / "manifest.json"));
    EXPECT_NEAR(manifest["results"]["Gamma"].get<double>(), 4.0 * 27.0 / 6.0, 1e-6);
    EXPECT_NEAR(manifest["results"]["generalized_expectation_uniform"].get<double>(),
                manifest["results"]["expectation"].get<double>(), 1e-12);
    EXPECT_EQ(csv_rows(dir_ / "scales.csv"), 4u);
}

TEST_F(Cli, McIsSeedReproducibleAndTakesFixedBinning) {
    auto j = base_config();
    j["scenario"] = {{"locations", {1.0}}, {"sigma_ell", 0.5}, {"sigma_alpha", 0.25}};
    const auto cfg = write_config(j);
    ASSERT_EQ(run({"propagate", "--config", cfg.string(), "--out-dir", (dir_ / "v").string()}), 0);
    const auto vup_csv = (dir_ / "v" / "output.csv").string();
    ASSERT_EQ(run({"mc", "--config", cfg.string(), "--out-dir", (dir_ / "a").string(), "--fixed-binning-from", vup_csv}), 0)
        << err_.str();
    ASSERT_EQ(run({"mc", "--config", cfg.string(), "--out-dir", (dir_ / "b").string(), "--fixed-binning-from", vup_csv,
                   "--mc-sort"}), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "mc.csv"), slurp(dir_ / "b" / "mc.csv"));
    std::ifstream va(vup_csv), ma(dir_ / "a" / "mc.csv");
    std::string l1, l2;
    for (int i = 0; i < 3; ++i) {
        std::getline(va, l1);
        std::getline(ma, l2);
    }
    EXPECT_EQ(l1.substr(0, l1.find(',')), l2.substr(0, l2.find(',')));
}

TEST_F(Cli, BenchWritesCsv) {
    ASSERT_EQ(run({"bench", "--out-dir", dir_.string(), "--n", "400", "--l-values", "1,2", "--k", "20", "--reps", "3"}), 0)
        << err_.str();
    EXPECT_EQ(csv_rows(dir_ / "bench.csv"), 5u);
    EXPECT_EQ(run({"bench", "--out-dir", dir_.string(), "--n", "400", "--reps", "2"}), 2);
    EXPECT_EQ(run({"bench", "--out-dir", dir_.string(), "--n", "abc"}), 2);
}
