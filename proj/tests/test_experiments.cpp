#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hpl/experiments.hpp"

using namespace hpl;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hpl_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string failures(const SuiteResult& res) {
    std::string s;
    for (const auto& c : res.cases) {
        if (!c.error.empty()) s += c.name + ": " + c.error + "\n";
        for (const auto& ch : c.checks)
            if (!ch.pass) s += c.name + "/" + ch.name + ": " + ch.detail + "\n";
    }
    return s;
}

}  // namespace

TEST(Suites, FastSuitesPass) {
    for (const char* name : {"eigenfunction", "pde", "polar_lemma"}) {
        const SuiteResult res = run_suite(name);
        EXPECT_TRUE(res.pass()) << name << "\n" << failures(res);
    }
}

TEST(Suites, ConcurrencyDoesNotChangeResults) {
    const SuiteResult a = run_suite("polar_lemma", 1);
    const SuiteResult b = run_suite("polar_lemma", 3);
    EXPECT_EQ(a.to_json().dump(2), b.to_json().dump(2));
}

TEST(Suites, WrittenArtifactsMatchTheReport) {
    const fs::path out = fresh_dir("artifacts");
    const SuiteResult res = run_suite("eigenfunction");
    write_suite(res, out);
    for (const auto& a : res.artifacts()) EXPECT_TRUE(fs::exists(out / a)) << a;
    const Json j = Json::parse(read_file(out / "eigenfunction" / "report.json"));
    EXPECT_EQ(j["suite"], "eigenfunction");
    EXPECT_EQ(j["pass"], res.pass());
    EXPECT_EQ(j["cases"].size(), res.cases.size());
    fs::remove_all(out);
}

TEST(Suites, RerunIsByteIdentical) {
    const fs::path a = fresh_dir("rerun_a"), b = fresh_dir("rerun_b");
    write_suite(run_suite("pde", 1), a);
    write_suite(run_suite("pde", 2), b);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), a);
        ASSERT_TRUE(fs::exists(b / rel)) << rel;
        EXPECT_EQ(read_file(e.path()), read_file(b / rel)) << rel;
        ++files;
    }
    EXPECT_GT(files, 4u);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Suites, TheoremOneOnAReducedGrid) {
    SuiteConfig cfg = default_suite_config("theorem1");
    cfg.settings.t_last = 9;
    cfg.settings.r_levels = 10;
    const SuiteResult res = run_suite(cfg);
    EXPECT_TRUE(res.pass()) << failures(res);
    const CaseResult* delta = res.find("delta_d2");
    ASSERT_NE(delta, nullptr);
    std::map<std::string, double> nums(delta->numbers.begin(), delta->numbers.end());
    EXPECT_NEAR(nums.at("lebesgue_slope"), -2.0, 0.1);
}

TEST(Suites, UnknownSuiteIsAConfigError) {
    SuiteConfig cfg;
    cfg.suite = "no_such_suite";
    EXPECT_THROW((void)run_suite(cfg), ConfigError);
    EXPECT_THROW((void)default_suite_config("no_such_suite"), ConfigError);
}

TEST(PolarComparison, AgreesOnTheDefaultCorpus) {
    const SuiteConfig cfg = default_suite_config("polar_lemma");
    ASSERT_FALSE(cfg.polar_cases.empty());
    for (const auto& pc : cfg.polar_cases) {
        const PolarComparison c = compare_polar(pc);
        EXPECT_TRUE(c.pass()) << pc.name << " gap " << c.scaled_gap << " tol " << c.tol;
    }
}
