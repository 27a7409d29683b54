#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hpl/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun hpl_run(std::vector<std::string> args) {
    args.insert(args.begin(), "hpl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = hpl::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

/// Value of `column` in the first data row of a rendered table.
double first_value(const std::string& text, const std::string& column) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> cols;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        if (cols.empty()) {
            cols = cells;
            continue;
        }
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == column) return std::stod(cells.at(i));
        break;
    }
    ADD_FAILURE() << "no column " << column << " in\n" << text;
    return 0.0;
}

std::string summary_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (line.rfind(key + ",", 0) == 0) return line.substr(key.size() + 1);
    return {};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hpl_cli_" + name);
    fs::remove_all(p);
    return p;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override { unsetenv("HPL_QUAD_TOL"); }
    void TearDown() override { unsetenv("HPL_QUAD_TOL"); }
};

}  // namespace

TEST_F(Cli, HelpExitsZero) {
    const CliRun r = hpl_run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("kernel"), std::string::npos);
}

TEST_F(Cli, KernelGoldenValue) {
    const CliRun r = hpl_run({"kernel", "--d", "1", "--t", "1", "--x", "0", "--y", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(first_value(r.out, "value") / 0.259553271994330757667, 1.0, 1e-8);
    EXPECT_LT(first_value(r.out, "error"), 1e-9);
    EXPECT_EQ(r.out.rfind("# hpl kernel", 0), 0u);
}

TEST_F(Cli, KernelRangesAddUp) {
    auto value = [](const char* range) {
        const CliRun r = hpl_run({"kernel", "--d", "2", "--t", "0.5", "--x=0.5,0.5", "--y=0.5,-0.5", "--range", range});
        EXPECT_EQ(r.code, 0) << r.err;
        return first_value(r.out, "value");
    };
    EXPECT_NEAR(value("local") / 0.0388672744711392877679, 1.0, 1e-8);
    EXPECT_NEAR(value("global") / 0.00516738738595502877128, 1.0, 1e-8);
    EXPECT_NEAR(value("full"), value("local") + value("global"), 1e-12);
}

TEST_F(Cli, PhiGoldenValue) {
    const CliRun r = hpl_run({"phi", "--d", "1", "--y", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(first_value(r.out, "phi") / 0.284977681862601017761802908495, 1.0, 1e-13);
}

TEST_F(Cli, UsageErrorsExitTwoWithoutOutput) {
    const std::vector<std::vector<std::string>> bad{
        {},
        {"no-such-command"},
        {"kernel", "--d", "1", "--t", "1", "--x", "0"},
        {"kernel", "--d", "1", "--t", "-1", "--x", "0", "--y", "0"},
        {"kernel", "--d", "2", "--t", "1", "--x", "0", "--y", "0,0"},
        {"kernel", "--d", "1", "--t", "1", "--x", "0", "--y", "0", "--range", "middle"},
        {"kernel", "--d", "1", "--t", "one", "--x", "0", "--y", "0"},
        {"apply", "--density", "exp(-r^2/2", "--d", "1", "--t", "1", "--x", "0"},
        {"apply", "--t", "1", "--x", "0"},
        {"suite", "no_such_suite"},
        {"suite", "theorem1", "--t-exponents", "9", "3"},
    };
    for (const auto& args : bad) {
        const CliRun r = hpl_run(args);
        std::string joined;
        for (const auto& a : args) joined += a + ' ';
        EXPECT_EQ(r.code, 2) << joined << "\n" << r.err;
        EXPECT_TRUE(r.out.empty()) << joined;
        EXPECT_FALSE(r.err.empty()) << joined;
    }
}

TEST_F(Cli, QuadToleranceFromEnvironment) {
    setenv("HPL_QUAD_TOL", "2", 1);
    EXPECT_EQ(hpl_run({"kernel", "--d", "1", "--t", "1", "--x", "0", "--y", "0"}).code, 2);
    setenv("HPL_QUAD_TOL", "1e-6", 1);
    const CliRun r = hpl_run({"kernel", "--d", "1", "--t", "1", "--x", "0", "--y", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(first_value(r.out, "value") / 0.259553271994330757667, 1.0, 1e-5);
    EXPECT_EQ(summary_value(r.out, "# env_HPL_QUAD_TOL"), "1e-6");
}

TEST_F(Cli, NumericFailureExitsThree) {
    // The cubature cannot resolve this oscillation; the result row is flagged.
    const CliRun r = hpl_run({"apply", "--density", "sin(1e9*r)", "--d", "1", "--support", "1", "--t", "0.5", "--x", "0.3"});
    EXPECT_EQ(r.code, 3) << r.out << r.err;
    EXPECT_NE(r.out.find("quadrature"), std::string::npos);
    // A kernel tolerance below the absolute floor still converges on that floor.
    setenv("HPL_QUAD_TOL", "1e-300", 1);
    EXPECT_EQ(hpl_run({"kernel", "--d", "1", "--t", "1", "--x", "0", "--y", "0"}).code, 0);
}

TEST_F(Cli, PolarCheckPassAndFail) {
    const std::vector<std::string> base{"polar-check", "--density", "exp(-r^2)", "--d", "2", "--support", "6"};
    const CliRun ok = hpl_run(base);
    EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
    auto strict = base;
    strict.insert(strict.end(), {"--at=0.3,0", "--f0", "sin(5*r)", "--tol", "1e-300"});
    EXPECT_EQ(hpl_run(strict).code, 1);
}

TEST_F(Cli, ApplyEigenfunction) {
    const CliRun r = hpl_run({"apply", "--density", "exp(-r^2/2)", "--d", "1", "--t", "0.5", "--x", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(first_value(r.out, "re") / (std::exp(-0.5) * std::exp(-0.5)), 1.0, 1e-6);
}

TEST_F(Cli, DiffVerdict) {
    std::vector<std::string> args{"diff", "--density", "exp(-r^2/2)", "--d", "1", "--x0", "0"};
    for (double r = 0.5; r > 0.005; r /= 2) args.insert(args.end(), {"--r", hpl::format_double(r)});
    const CliRun r = hpl_run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(summary_value(r.out, "verdict"), "lebesgue");
}

TEST_F(Cli, Calibrate) {
    const CliRun r = hpl_run({"calibrate", "--d", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(first_value(r.out, "c_d") / first_value(r.out, "c_d_closed_form"), 1.0, 1e-8);
    EXPECT_LT(first_value(r.out, "verification_residual"), 1e-6);
}

TEST_F(Cli, SuitePrintConfig) {
    const CliRun r = hpl_run({"suite", "theorem1", "--print-config", "--r-levels", "9"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = hpl::Json::parse(r.out);
    EXPECT_EQ(j["suite"], "theorem1");
    EXPECT_EQ(j["settings"]["r_levels"], 9);
}

TEST_F(Cli, SuiteWritesArtifactsDeterministically) {
    const fs::path a = fresh_dir("a"), b = fresh_dir("b");
    const CliRun ra = hpl_run({"suite", "pde", "--out", a.string()});
    ASSERT_EQ(ra.code, 0) << ra.out << ra.err;
    EXPECT_EQ(ra.out.rfind("suite pde: PASS", 0), 0u);
    const CliRun rb = hpl_run({"suite", "pde", "--jobs", "2", "--out", b.string()});
    ASSERT_EQ(rb.code, 0);
    const std::string rep = read_file(a / "pde" / "report.json");
    EXPECT_FALSE(rep.empty());
    EXPECT_EQ(rep, read_file(b / "pde" / "report.json"));
    EXPECT_TRUE(fs::exists(a / "pde" / "gaussian_d1" / "pde_residual.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_F(Cli, OutWritesTableFile) {
    const fs::path dir = fresh_dir("out");
    const CliRun r = hpl_run({"phi", "--d", "2", "--y=1,0", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file(dir / "phi.csv"), r.out);
    fs::remove_all(dir);
}
