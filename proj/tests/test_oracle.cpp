#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thumbopt/oracle.hpp"

using namespace thumbopt;
using namespace thumbopt::oracle;
using geom::kPi;

TEST(OracleContactAngle, SymmetricMatchesClosedForm) {
    for (double R : {0.0, 3.0, 20.0, 55.0}) {
        const double d = 2.0 * (R + 5.0) * 0.8;
        const auto o = oracle_contact_angle(d, 5.0, 5.0, R);
        const auto c = geom::contact_angle(d, 5.0, 5.0, R);
        ASSERT_TRUE(o && c);
        EXPECT_NEAR(*o, *c, 1e-6);
    }
}

TEST(OracleContactAngle, CollinearAndInfeasible) {
    const auto o = oracle_contact_angle(50.0, 5.0, 5.0, 20.0);
    ASSERT_TRUE(o);
    EXPECT_NEAR(*o, kPi, 1e-6);
    EXPECT_FALSE(oracle_contact_angle(51.0, 5.0, 5.0, 20.0));
    EXPECT_FALSE(geom::contact_angle(51.0, 5.0, 5.0, 20.0));
}

TEST(OracleRMax, AgreesWithClosedForm) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> r(1.0, 12.0), d(1.0, 120.0), t(0.4, 3.0);
    for (int k = 0; k < 500; ++k) {
        const double ra = r(rng), rb = r(rng), dd = d(rng), tt = t(rng);
        const auto a = geom::solve_R_max(dd, ra, rb, tt);
        const auto b = oracle_r_max(dd, ra, rb, tt);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
            EXPECT_NEAR(*a, *b, 1e-6 * std::max(1.0, *a));
        }
    }
}

TEST(VerifySuite, ContactAnglesAndRMax) {
    const auto a = verify_contact_angles(1000, 11);
    EXPECT_TRUE(a.pass);
    EXPECT_LT(a.max_deviation, 1e-5);
    const auto b = verify_r_max(1000, 12);
    EXPECT_TRUE(b.pass);
    EXPECT_LT(b.max_deviation, 1e-5);
}

TEST(VerifySuite, PerturbationIsDetected) {
    EXPECT_FALSE(verify_contact_angles(200, 11, 1.0).pass);
    EXPECT_FALSE(verify_r_max(200, 12, 1.0).pass);
}

TEST(OracleValidity, VacuousAndUnreachable) {
    HandModel hand;
    hand.radii = {8.0, 8.0, 8.0};
    using testsupport::sample;
    hand.index = testsupport::single(sample({0, 0, 0}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}));
    hand.middle = testsupport::single(sample({8, 0, 0}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}));
    // Acute, overlapping tips: every smallest object has radius 0.
    hand.thumb.tip = {4.0, 5.0, 0.0};
    hand.thumb.sweep = kin::linspace(-0.5, 0.5, 9);
    grasp::GraspRequirements req;
    req.precision = req.lateral = req.tripod = req.manipulation = {0.0, 0.0};
    req.alpha_perm = req.force_dir_limit = kPi;
    req.theta_min = 0.1;
    const geom::AxisConfig cfg{};
    const auto o = oracle_validity(cfg, hand, req);
    EXPECT_EQ(o.valid(), grasp::is_valid_grasp(cfg, hand, req).valid());
    EXPECT_TRUE(o.valid());
    EXPECT_FALSE(oracle_validity({{500, 0, 0}, 0, 0, 0}, hand, grasp::GraspRequirements{}).valid());
}

TEST(OracleValidity, ThumbPosesMatchLibraryTrajectory) {
    const auto& hand = testsupport::reference_hand();
    std::mt19937_64 rng(3);
    const auto grid = testsupport::reference_config().grid;
    for (int k = 0; k < 20; ++k) {
        const auto cfg = random_config(rng, grid);
        const auto poses = detail::thumb_poses(cfg, hand);
        const auto traj = hand.thumb_trajectory(cfg);
        ASSERT_EQ(poses.size(), traj.size());
        for (std::size_t j = 0; j < poses.size(); ++j) {
            EXPECT_NEAR(detail::len(poses[j].tip - traj[j].tip), 0.0, 1e-9);
            EXPECT_NEAR(detail::len(poses[j].tangent - traj[j].tangent.vec()), 0.0, 1e-9);
        }
    }
}

TEST(OracleValidity, TripodRadiiMatchClosedForm) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> p(-30.0, 30.0), r(2.0, 8.0);
    int compared = 0;
    for (int k = 0; k < 300; ++k) {
        const geom::Point3 a{p(rng), p(rng), 0}, b{p(rng), p(rng), 0}, c{p(rng), p(rng), 0};
        const double ra = r(rng), rb = r(rng), rc = r(rng);
        std::vector<double> found;
        detail::tripod_radii(a, ra, b, rb, c, rc, 1.0, found);
        const auto lib = grasp::solve_tripod_placement(a, ra, b, rb, c, rc);
        double lib_max = -1.0, orc_max = -1.0;
        for (const auto& pl : lib) lib_max = std::max(lib_max, pl.radius);
        for (double x : found) orc_max = std::max(orc_max, x);
        if (lib_max > 0.05 && orc_max >= 0.0) {
            ++compared;
            EXPECT_NEAR(lib_max, orc_max, 1e-6);
        }
    }
    EXPECT_GT(compared, 30);
}

TEST(OracleWidthSweep, ReferenceHandEndpoints) {
    const auto& hand = testsupport::reference_hand();
    const auto cfg = testsupport::reference_config();
    const double delta = cfg.deformation.delta_mm();
    const auto configs = capable_configs(hand, cfg.requirements, cfg.grid, 4, 99);
    ASSERT_FALSE(configs.empty());
    for (const auto& c : configs) {
        const auto s = oracle_width_sweep(c, hand, cfg.requirements, delta);
        const auto lib = manip::manipulation_range(c, hand, cfg.requirements, delta).overall;
        EXPECT_TRUE(s.capable);
        if (lib.empty()) {
            EXPECT_FALSE(s.range.has_value());
        } else if (lib.width() > 0.1) {
            EXPECT_TRUE(s.range.has_value());
        }
        if (s.range) {
            EXPECT_NEAR((*s.range)[0], lib.lo(), 0.1);
            EXPECT_NEAR((*s.range)[1], lib.hi(), 0.1);
        }
    }
    EXPECT_FALSE(oracle_width_sweep({{500, 0, 0}, 0, 0, 0}, hand, cfg.requirements, delta).capable);
}

TEST(ReducedHand, CapsSamples) {
    const auto small = reduced_hand(testsupport::reference_hand(), 20);
    EXPECT_EQ(small.index.size(), 20u);
    EXPECT_EQ(small.middle.size(), 20u);
    EXPECT_EQ(small.thumb.sweep.size(), 20u);
    EXPECT_NO_THROW(small.validate());
}
