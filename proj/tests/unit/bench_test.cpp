#include <gtest/gtest.h>

#include <sstream>

#include "vup/bench.hpp"
#include "vup/error.hpp"

using namespace vup;

namespace {

BenchResult synthetic(double vup_scale, double mc_scale, std::size_t n = 1000) {
    BenchResult r;
    for (std::size_t l : {1, 2, 5, 10, 20, 50, 100}) {
        const double L = static_cast<double>(l);
        BenchRow v{"vup", "cpu", n, l, 3, 1.0 + vup_scale * L, 1.0, 1.0, {}, true, true};
        BenchRow m{"mc", "cpu", n, l, 3, mc_scale * L, 1.0, 1.0, {}, true, true};
        r.rows.push_back(v);
        r.rows.push_back(m);
    }
    return r;
}

bool check(const ComplexityReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c.passed;
    ADD_FAILURE() << "missing check " << name;
    return false;
}

}  // namespace

TEST(Complexity, HealthyResultPasses) {
    const auto report = assert_complexity(synthetic(0.05, 1.5), 1000);
    EXPECT_TRUE(report.passed());
    EXPECT_EQ(report.checks.size(), 4u);
    for (const auto& n : report.notes) EXPECT_TRUE(n.passed) << n.detail;
}

TEST(Complexity, LinearVupFailsSublinearity) {
    BenchResult r = synthetic(0.05, 1.5);
    for (auto& row : r.rows)
        if (row.method == "vup") row.median_s = static_cast<double>(row.l);
    const auto report = assert_complexity(r, 1000);
    EXPECT_FALSE(check(report, "vup_sublinear"));
    EXPECT_TRUE(check(report, "mc_linear"));
}

TEST(Complexity, ConstantMcFailsLinearity) {
    BenchResult r = synthetic(0.05, 1.5);
    for (auto& row : r.rows)
        if (row.method == "mc") row.median_s = 2.0;
    const auto report = assert_complexity(r, 1000);
    EXPECT_FALSE(check(report, "mc_linear"));
}

TEST(Complexity, MissingPointThrows) {
    BenchResult r = synthetic(0.05, 1.5);
    r.rows.pop_back();
    EXPECT_THROW(assert_complexity(r, 1000), InvalidArgument);
    EXPECT_THROW(assert_complexity(synthetic(0.05, 1.5), 999), InvalidArgument);
}

TEST(Sweep, SmallRunProducesConsistentRows) {
    SweepConfig cfg;
    cfg.grid_sizes = {400};
    cfg.l_values = {1, 3};
    cfg.bins = 20;
    cfg.reps = 3;
    const auto result = run_sweep(builtin("bench2d"), cfg);
    ASSERT_EQ(result.rows.size(), 4u);
    for (const auto& row : result.rows) {
        EXPECT_EQ(row.reps, 3u);
        EXPECT_LE(row.min_s, row.median_s);
        EXPECT_LE(row.median_s, row.max_s);
        EXPECT_TRUE(row.deterministic) << row.method;
        EXPECT_EQ(row.breakdown.size(), 3u);
    }
    ASSERT_NE(result.find("vup", 400, 3), nullptr);
    EXPECT_TRUE(result.find("vup", 400, 3)->breakdown.count("matrix_build_s"));
    EXPECT_TRUE(result.find("mc", 400, 1)->breakdown.count("sortbin_s"));
    cfg.reps = 2;
    EXPECT_THROW(run_sweep(builtin("bench2d"), cfg), InvalidArgument);
}

TEST(Sweep, CsvSchema) {
    std::ostringstream os;
    write_bench_csv(os, synthetic(0.1, 1.0));
    std::istringstream is(os.str());
    std::string header, first;
    std::getline(is, header);
    std::getline(is, first);
    EXPECT_EQ(header, "method,N,L,reps,median_s,min_s,max_s,breakdown_json");
    EXPECT_EQ(first.rfind("vup,1000,1,3,", 0), 0u) << first;
    EXPECT_NE(first.find("\"\"backend\"\":\"\"cpu\"\""), std::string::npos) << first;
}
