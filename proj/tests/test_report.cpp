#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thumbopt/report.hpp"

using namespace thumbopt;
using nlohmann::json;

namespace {

double rad(double d) { return d * geom::kPi / 180.0; }

opt::SearchGrid small_grid() {
    auto around = [](double c, double s) { return opt::GridDim{c - 1.5 * s, c + 1.5 * s, 3}; };
    return opt::SearchGrid({around(116.0, 4.0), around(124.0, 4.0), around(52.0, 4.0), opt::GridDim{rad(-67.5), rad(-67.5), 1},
                            opt::GridDim{rad(12.0), rad(12.0), 1}, around(rad(63.0), rad(3.0))});
}

opt::OptimizationResult run(const grasp::GraspRequirements& req) {
    const auto c = testsupport::reference_config();
    return opt::optimize(testsupport::reference_hand(), req, small_grid(), c.deformation.delta_mm());
}

}  // namespace

TEST(ResultJson, WinnerFields) {
    const auto r = run(grasp::GraspRequirements{});
    ASSERT_TRUE(r.omega_opt);
    const json j = report::result_json(r);
    EXPECT_EQ(j["schema"], "thumbopt.result");
    EXPECT_EQ(j["status"], "complete");
    EXPECT_EQ(j["counts"]["total"], 81u);
    EXPECT_EQ(j["counts"]["valid"], r.valid_count);
    EXPECT_DOUBLE_EQ(j["w_max_mm"].get<double>(), r.w_max);
    EXPECT_DOUBLE_EQ(j["omega_opt"]["x_mm"].get<double>(), r.omega_opt->origin.x);
    EXPECT_NEAR(j["omega_opt"]["yaw_deg"].get<double>(), report::deg(r.omega_opt->yaw), 1e-12);
    EXPECT_EQ(j["width"]["empty"], false);
    EXPECT_EQ(j["metadata"]["grid"].size(), 6u);
    EXPECT_EQ(j["metadata"]["grid"][3]["unit"], "deg");
    EXPECT_NEAR(j["metadata"]["delta_m_mm"].get<double>(), 4.87, 5e-3);
    EXPECT_EQ(j["metadata"]["run_hash"].get<std::string>().size(), 16u);
    EXPECT_TRUE(j.contains("manipulation_coverage"));
    EXPECT_EQ(j["top"].size(), r.top.size());
}

TEST(ResultJson, NoWinner) {
    auto req = grasp::GraspRequirements{};
    req.precision = {0.0, 500.0};
    const json j = report::result_json(run(req));
    EXPECT_TRUE(j["omega_opt"].is_null());
    EXPECT_EQ(j["counts"]["valid"], 0u);
    EXPECT_TRUE(j["top"].empty());
    EXPECT_FALSE(j.contains("width"));
}

TEST(TopCsv, HeaderAndRows) {
    const auto r = run(grasp::GraspRequirements{});
    std::ostringstream os;
    report::write_top_csv(os, r.top);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "rank,linear_index,x_mm,y_mm,z_mm,roll_deg,pitch_deg,yaw_deg,w_empty,w_lo_mm,w_hi_mm,w_width_mm");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11);
    }
    EXPECT_EQ(rows, r.top.size());
}

TEST(TopCsv, EmptyIntervalRow) {
    std::ostringstream os;
    report::write_top_csv(os, {opt::RankedConfig{4, {}, manip::WidthInterval()}});
    EXPECT_NE(os.str().find("\n1,4,0,0,0,0,0,0,1,,,0\n"), std::string::npos) << os.str();
}

TEST(Heatmap, SliceThroughOptimum) {
    const auto r = run(grasp::GraspRequirements{});
    ASSERT_TRUE(r.opt_index);
    const auto g = small_grid();
    const auto c = testsupport::reference_config();
    const auto h = report::compute_heatmap(testsupport::reference_hand(), c.requirements, c.deformation.delta_mm(), g,
                                           0, 1, g.indices_of(*r.opt_index));
    ASSERT_EQ(h.cells.size(), 9u);
    const auto idx = g.indices_of(*r.opt_index);
    const auto& best = h.cells[idx[0] * 3 + idx[1]];
    EXPECT_TRUE(best.valid);
    EXPECT_DOUBLE_EQ(best.width, r.w_max);
    std::ostringstream os;
    report::write_heatmap_svg(os, h);
    const std::string svg = os.str();
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_GE(static_cast<std::size_t>(std::count(svg.begin(), svg.end(), '\n')), 9u);
}
