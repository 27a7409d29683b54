#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hpl/experiments.hpp"
#include "hpl/measure_io.hpp"
#include "hpl/suite_config.hpp"

using namespace hpl;

namespace {

ComplexMeasure sample_measure() {
    ComplexMeasure m;
    m.d = 2;
    m.label = "sample";
    m.ac.push_back(make_ac_term("exp(-r^2/2) * sin(1/r)", Vec{0.1, 0.2}, 3.5, Complex(0.3, -0.1), {Vec{0.1, 0.2}}));
    m.ac.push_back(make_ac_term("ind(r < 0.5)", Vec::zero(2), 1.0));
    m.atoms.push_back({Vec{0.1 + 0.2, 1.0 / 3.0}, Complex(1.0 / 7.0, -2.0)});
    return m;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("hpl_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST(MeasureIo, RoundTripPreservesEveryLiteral) {
    const ComplexMeasure m = sample_measure();
    const std::string text = measure_to_text(m);
    const ComplexMeasure back = measure_from_json(parse_json_text(text, "test"));
    EXPECT_EQ(measure_to_text(back), text);
    ASSERT_EQ(back.atoms.size(), 1u);
    EXPECT_EQ(back.atoms[0].point, m.atoms[0].point);
    EXPECT_EQ(back.atoms[0].weight, m.atoms[0].weight);
    EXPECT_EQ(back.ac[0].coeff, m.ac[0].coeff);
    ASSERT_EQ(back.ac[0].removable.size(), 1u);
}

TEST(MeasureIo, CantorAndDefaults) {
    const Json j = Json::parse(R"({"version": 1, "d": 1, "singular": {"type": "cantor", "interval": [0, 2]},
                                   "ac": {"expr": "1", "support_radius": 0.5}})");
    const ComplexMeasure m = measure_from_json(j);
    ASSERT_TRUE(m.singular.has_value());
    EXPECT_EQ(m.singular->b, 2.0);
    EXPECT_EQ(m.singular->mass, Complex(1.0));
    EXPECT_EQ(m.ac.at(0).coeff, Complex(1.0));
    EXPECT_EQ(m.ac.at(0).center, Vec::zero(1));
}

TEST(MeasureIo, RejectsMalformedDocuments) {
    const char* bad[] = {
        R"({"d": 1})",
        R"({"version": 2, "d": 1})",
        R"({"version": 1, "d": 0})",
        R"({"version": 1, "d": 1.5})",
        R"({"version": 1, "d": 2, "atoms": [{"point": [1]}]})",
        R"({"version": 1, "d": 2, "atoms": [{"point": [1, 0]}, {"point": [1, 0]}]})",
        R"({"version": 1, "d": 1, "ac": {"expr": "1 +", "support_radius": 1}})",
        R"({"version": 1, "d": 1, "ac": {"expr": "1"}})",
        R"({"version": 1, "d": 2, "singular": {"type": "cantor", "interval": [0, 1]}})",
        R"({"version": 1, "d": 1, "singular": {"type": "devil", "interval": [0, 1]}})",
    };
    for (const char* text : bad) EXPECT_THROW((void)measure_from_json(Json::parse(text)), ConfigError) << text;
    EXPECT_THROW((void)parse_json_text("{not json", "x"), ConfigError);
    EXPECT_THROW((void)load_measure("/nonexistent/measure.json"), ConfigError);
}

TEST(SuiteConfig, DefaultsRoundTripForEverySuite) {
    for (const auto& name : suite_names()) {
        const SuiteConfig cfg = default_suite_config(name);
        const Json j = suite_config_to_json(cfg);
        const SuiteConfig back = suite_config_from_json(j);
        EXPECT_EQ(suite_config_to_json(back).dump(), j.dump()) << name;
        EXPECT_EQ(back.suite, name);
    }
}

TEST(SuiteConfig, MeasureFilesResolveRelativeToConfig) {
    const auto dir = temp_dir("cfg");
    {
        std::ofstream(dir / "m.json") << measure_to_text(sample_measure());
    }
    Json j = suite_config_to_json(default_suite_config("polar_lemma"));
    j["cases"] = Json::array({{{"name", "from_file"}, {"measure_file", "m.json"}, {"center", {0.0, 0.0}}, {"f0", "exp(-r)"}}});
    {
        std::ofstream(dir / "suite.json") << j.dump(2);
    }
    const SuiteConfig cfg = load_suite_config((dir / "suite.json").string());
    ASSERT_EQ(cfg.polar_cases.size(), 1u);
    EXPECT_EQ(cfg.polar_cases[0].measure.label, "sample");
    EXPECT_EQ(cfg.polar_cases[0].measure_file, "m.json");
}

TEST(SuiteConfig, RejectsInvalidConfigs) {
    auto with = [](const std::string& suite, const std::function<void(Json&)>& edit) {
        Json j = suite_config_to_json(default_suite_config(suite));
        edit(j);
        return j;
    };
    const Json bad[] = {
        with("theorem1", [](Json& j) { j["suite"] = "nope"; }),
        with("theorem1", [](Json& j) { j["settings"]["t_exponents"] = {5, 3}; }),
        with("theorem1", [](Json& j) { j["settings"]["mystery"] = 1; }),
        with("theorem1", [](Json& j) { j["cases"][1]["name"] = j["cases"][0]["name"]; }),
        with("theorem1", [](Json& j) { j["cases"][0]["name"] = "../escape"; }),
        with("theorem1", [](Json& j) { j["cases"][0]["expected_class"] = "maybe"; }),
        with("theorem1", [](Json& j) { j["cases"][0]["expected"] = "lebesgue"; }),
        with("theorem1", [](Json& j) { j["extra"] = true; }),
        with("theorem1", [](Json& j) { j["cases"][0]["x0"] = {0.0, 0.0, 0.0}; }),
        with("polar_lemma", [](Json& j) { j["cases"][0]["f0"] = "y1"; }),
        with("theorem2_d3cond", [](Json& j) { j["cases"][0]["small_ball"] = Json::array({{{"exponent", "d-4"}, {"require", true}}}); }),
    };
    for (std::size_t i = 0; i < std::size(bad); ++i)
        EXPECT_THROW((void)suite_config_from_json(bad[i]), ConfigError) << "case " << i;
}

TEST(SuiteSettings, Validation) {
    SuiteSettings s;
    EXPECT_NO_THROW(s.validate());
    s.trend.ratio = 1.5;
    EXPECT_THROW(s.validate(), ConfigError);
    s = {};
    s.aperture_fracs = {0.0, 1.5};
    EXPECT_THROW(s.validate(), ConfigError);
}
