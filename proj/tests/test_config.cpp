#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thumbopt/config.hpp"

using namespace thumbopt;
using namespace thumbopt::config;
using nlohmann::json;

namespace {

const std::string kSource = THUMBOPT_SOURCE_DIR;

json reference_json() { return json::parse(reference::kHandJson); }

std::string error_of(const json& j) {
    try {
        parse_run_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, EmbeddedCopyMatchesShippedFile) {
    const auto shipped = load_run_config(kSource + "/configs/reference_hand.json");
    EXPECT_EQ(shipped, testsupport::reference_config());
}

TEST(Config, ReferenceValues) {
    const auto c = testsupport::reference_config();
    EXPECT_EQ(c.grid.total(), 19200000u);
    EXPECT_EQ(c.requirements, grasp::GraspRequirements{});
    EXPECT_NEAR(c.deformation.delta_mm(), 4.87, 5e-3);
    ASSERT_TRUE(c.hand.manipulation_window);
    const auto h = build_hand(c);
    EXPECT_EQ(h.index.size(), 100u);
    EXPECT_EQ(h.thumb.sweep.size(), 100u);
    EXPECT_LT(h.manip_begin, h.manip_stop());
}

TEST(Config, RoundTripThroughJson) {
    const auto c = testsupport::reference_config();
    const auto back = parse_run_config(to_json(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, RoundTripPistonCrankAndPolyline) {
    auto j = reference_json();
    j["hand"]["thumb"].erase("sweep");
    j["hand"]["thumb"]["piston_crank"] = {{"crank_radius", 10}, {"rod_length", 30}, {"stroke", {39, 21}},
                                          {"angle_offset", 5}, {"sign", -1}};
    j["hand"]["middle"] = {{"source", "polyline"}, {"file", "middle.csv"}};
    const auto c = parse_run_config(j, "/nonexistent");
    ASSERT_TRUE(c.hand.thumb.piston_crank);
    EXPECT_EQ(parse_run_config(to_json(c)), c);
    EXPECT_EQ(resolve(c, "middle.csv"), "/nonexistent/middle.csv");
    EXPECT_EQ(thumb_sweep(c.hand.thumb).size(), 100u);
}

TEST(Config, PolylineFingerLoadsRelativeToConfig) {
    const auto dir = std::filesystem::temp_directory_path() / "thumbopt_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "middle.csv");
        f << "x,y,z\n";
        for (int k = 0; k < 10; ++k) f << 0 << ',' << 100 + k << ',' << -k << '\n';
    }
    auto j = reference_json();
    j["hand"]["middle"] = {{"source", "polyline"}, {"file", "middle.csv"}};
    {
        std::ofstream f(dir / "run.json");
        f << j.dump(2);
    }
    const auto c = load_run_config((dir / "run.json").string());
    const auto h = build_hand(c);
    EXPECT_EQ(h.middle.size(), 10u);
    std::filesystem::remove_all(dir);
}

TEST(Config, RadiansUnit) {
    auto j = to_json(testsupport::reference_config());
    EXPECT_EQ(j["units"]["angle"], "rad");
    EXPECT_EQ(parse_run_config(j), testsupport::reference_config());
}

TEST(ConfigErrors, NamesTheOffendingField) {
    auto j = reference_json();
    j["hand"]["thumb"]["steps"] = 0;
    EXPECT_NE(error_of(j).find("config.hand.thumb.steps"), std::string::npos);

    j = reference_json();
    j["hand"]["index"]["linkage"].erase("coupler");
    EXPECT_NE(error_of(j).find("config.hand.index.linkage: missing field 'coupler'"), std::string::npos);

    j = reference_json();
    j["requirements"]["precision"] = {60, 0};
    EXPECT_NE(error_of(j).find("config.requirements.precision"), std::string::npos);

    j = reference_json();
    j["units"]["length"] = "cm";
    EXPECT_NE(error_of(j).find("config.units.length"), std::string::npos);

    j = reference_json();
    j["grid"]["yaw"]["steps"] = -3;
    EXPECT_NE(error_of(j).find("config.grid.yaw.steps"), std::string::npos);

    j = reference_json();
    j["hand"]["thumb"]["tip_offset"]["radial"] = 0;
    EXPECT_NE(error_of(j).find("radial"), std::string::npos);

    j = reference_json();
    j["output"]["heatmap_dims"] = {"x", "q"};
    EXPECT_NE(error_of(j).find("unknown dimension 'q'"), std::string::npos);

    j = reference_json();
    j["schema_version"] = 7;
    EXPECT_NE(error_of(j).find("schema_version"), std::string::npos);

    j = reference_json();
    j["hand"]["manipulation_window"] = {5, 5};
    EXPECT_NE(error_of(j).find("manipulation_window"), std::string::npos);
}

TEST(ConfigErrors, FileProblems) {
    EXPECT_THROW(load_run_config("/nonexistent/run.json"), ConfigError);
    const auto p = std::filesystem::temp_directory_path() / "thumbopt_bad.json";
    {
        std::ofstream f(p);
        f << "{\n  \"hand\": [1, 2,\n";
    }
    try {
        load_run_config(p.string());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
    std::filesystem::remove(p);
}

TEST(ConfigErrors, WindowOutsideTrajectory) {
    auto j = reference_json();
    j["hand"]["manipulation_window"] = {90, 150};
    const auto c = parse_run_config(j);
    EXPECT_THROW(build_hand(c), std::invalid_argument);
}
