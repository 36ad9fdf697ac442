#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thumbopt/manip.hpp"
#include "thumbopt/oracle.hpp"

using namespace thumbopt;
using namespace thumbopt::manip;
using geom::kPi;
using testsupport::sample;

namespace {

// Index at the origin, side normal +z, pad +y. Thumb steps on a circle of radius d about the
// index: lateral poses near +z (tangent pointing down at the index), precision poses near +y.
kin::Trajectory arc_thumb(double d, std::size_t steps) {
    std::vector<kin::TrajectorySample> s;
    for (std::size_t k = 0; k < steps; ++k) {
        const double a = kPi / 2 * static_cast<double>(k) / static_cast<double>(steps - 1);
        const geom::Point3 p{0.0, d * std::sin(a), d * std::cos(a)};
        s.push_back(sample(p, {0.0, -std::sin(a) - 0.2, -std::cos(a)}, {0, -1, 0}, {1, 0, 0}));
    }
    return kin::Trajectory(std::move(s), {});
}

const kin::TrajectorySample kIndex = sample({0, 0, 0}, {0, 1, 0}, {0, 1, 0}, {0, 0, 1});

}  // namespace

TEST(DeltaM, TableValue) {
    EXPECT_NEAR(delta_m(10.0, 134.3e3), 4.87, 5e-3);
    EXPECT_NEAR(DeformationModel{}.delta_mm(), 4.87, 5e-3);
}

TEST(DeltaM, UnitCancellation) { EXPECT_NEAR(delta_m(kPi, 1.0), 1000.0, 1e-9); }

TEST(DeltaM, SmallForceHighPrecision) {
    // sqrt(0.1 / (pi * 134300)) m, evaluated with long double.
    const long double ref = std::sqrt(0.1L / (3.141592653589793238462643383279502884L * 134300.0L)) * 1000.0L;
    EXPECT_NEAR(delta_m(0.1, 134.3e3), static_cast<double>(ref), 1e-12);
    EXPECT_THROW(delta_m(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(delta_m(1.0, -1.0), std::invalid_argument);
}

TEST(WidthIntervalOps, IntersectAndClip) {
    const WidthInterval a(1.0, 5.0), b(3.0, 8.0), c(6.0, 7.0);
    EXPECT_EQ(a.intersect(b), WidthInterval(3.0, 5.0));
    EXPECT_TRUE(a.intersect(c).empty());
    EXPECT_EQ(WidthInterval(-2.0, 1.0).clipped_nonnegative(), WidthInterval(0.0, 1.0));
    EXPECT_TRUE(WidthInterval(-2.0, -1.0).clipped_nonnegative().empty());
    EXPECT_DOUBLE_EQ(WidthInterval().width(), 0.0);
    EXPECT_TRUE(WidthInterval(2.0, 2.0).contains(2.0));
}

TEST(CriticalPoints, LateralWithoutPrecisionIsNone) {
    std::vector<kin::TrajectorySample> s(3, sample({0, 0, 20}, {0, 0, -1}, {0, 0, -1}, {1, 0, 0}));
    const auto cp = critical_points(s, kIndex, grasp::GraspRequirements{});
    EXPECT_FALSE(cp.has_value());
}

TEST(CriticalPoints, SingleSamplePassingBoth) {
    // Thumb on the diagonal: within 45 deg of both the pad and the side normal.
    const double c = std::sqrt(0.5);
    std::vector<kin::TrajectorySample> s{sample({0, 20 * c, 20 * c}, {0, -c, -c}, {0, -1, 0}, {1, 0, 0})};
    grasp::GraspRequirements req;
    req.alpha_perm = kPi / 4;
    const auto cp = critical_points(s, kIndex, req);
    ASSERT_TRUE(cp);
    EXPECT_EQ(cp->j_lateral, 0u);
    EXPECT_EQ(cp->j_precision, 0u);
    EXPECT_EQ(cp->size(), 1u);
}

TEST(CriticalPoints, MatchesLinearScan) {
    const auto thumb = arc_thumb(20.0, 50);
    const grasp::GraspRequirements req;
    const auto cp = critical_points(thumb.samples(), kIndex, req);
    ASSERT_TRUE(cp);
    std::size_t last_lat = 0, first_prec = thumb.size();
    for (std::size_t j = 0; j < thumb.size(); ++j) {
        if (grasp::lateral_established(thumb[j], kIndex, req)) last_lat = j;
    }
    for (std::size_t j = last_lat; j < thumb.size() && first_prec == thumb.size(); ++j) {
        if (grasp::precision_established(thumb[j], kIndex, req)) first_prec = j;
    }
    EXPECT_EQ(cp->j_lateral, last_lat);
    EXPECT_EQ(cp->j_precision, first_prec);
    EXPECT_FALSE(cp->reversed);
    EXPECT_LT(cp->jm_begin, cp->jm_end);
}

TEST(CriticalPoints, ReversedWhenPrecisionComesFirst) {
    auto fwd = arc_thumb(20.0, 50).samples();
    const std::vector<kin::TrajectorySample> rev(fwd.rbegin(), fwd.rend());
    const auto cp = critical_points(rev, kIndex, grasp::GraspRequirements{});
    ASSERT_TRUE(cp);
    EXPECT_TRUE(cp->reversed);
    EXPECT_EQ(cp->jm_begin, cp->j_precision);
    EXPECT_EQ(cp->jm_end, cp->j_lateral);
}

TEST(WidthIntervalLaw, ConstantDistanceGivesTwoDelta) {
    const double delta = 4.87, d0 = 20.0;
    const auto thumb = arc_thumb(d0, 40);
    const auto w = width_interval(thumb.samples(), kIndex.tip, 0, 39, 16.0, delta);
    EXPECT_NEAR(w.lo(), d0 - 16.0, 1e-9);
    EXPECT_NEAR(w.hi(), d0 - 16.0 + 2 * delta, 1e-9);
    EXPECT_NEAR(w.width(), 2 * delta, 1e-9);
}

TEST(WidthIntervalLaw, ExcessiveExcursionIsEmpty) {
    std::vector<kin::TrajectorySample> s{sample({0, 0, 20}, {0, 0, -1}, {0, 0, -1}, {1, 0, 0}),
                                         sample({0, 0, 31}, {0, 0, -1}, {0, 0, -1}, {1, 0, 0})};
    EXPECT_TRUE(width_interval(s, kIndex.tip, 0, 1, 16.0, 4.87).empty());
    EXPECT_THROW(width_interval(s, kIndex.tip, 1, 0, 16.0, 4.87), std::invalid_argument);
}

TEST(ManipulationRange, SingleIndexSampleIsItsOwnInterval) {
    HandModel hand;
    hand.index = testsupport::single(kIndex);
    hand.middle = hand.index;
    hand.manip_end = 1;
    const auto thumb = arc_thumb(20.0, 40);
    const auto a = manipulation_range(thumb, hand, grasp::GraspRequirements{}, 4.87);
    ASSERT_EQ(a.per_index.size(), 1u);
    EXPECT_EQ(a.raw, a.per_index[0].width);
    EXPECT_NEAR(a.overall.width(), 2 * 4.87, 1e-9);
}

TEST(ManipulationRange, DisjointIntervalsAreEmpty) {
    HandModel hand;
    // Second index sample sits 20 mm further from the thumb arc centre: W_1 shifts by ~20 mm.
    hand.index = kin::Trajectory({kIndex, sample({0, -20, -20}, {0, 1, 0}, {0, 1, 0}, {0, 0, 1})}, {});
    hand.middle = hand.index;
    const auto thumb = arc_thumb(20.0, 40);
    const auto a = manipulation_range(thumb, hand, grasp::GraspRequirements{}, 4.87);
    ASSERT_EQ(a.per_index.size(), 2u);
    EXPECT_TRUE(a.overall.empty());
}

TEST(ManipulationRange, MissingCriticalPointEmptiesW) {
    HandModel hand;
    hand.index = testsupport::single(sample({0, 0, 0}, {0, 1, 0}, {0, 1, 0}, {0, 0, -1}));
    hand.middle = hand.index;
    const auto a = manipulation_range(arc_thumb(20.0, 40), hand, grasp::GraspRequirements{}, 4.87);
    EXPECT_FALSE(a.per_index[0].critical.has_value());
    EXPECT_TRUE(a.overall.empty());
}

TEST(ManipulationRange, ReferenceHandAgainstWidthSweep) {
    const auto& hand = testsupport::reference_hand();
    const auto cfg = testsupport::reference_config();
    const auto configs = oracle::capable_configs(hand, cfg.requirements, cfg.grid, 8, 77);
    ASSERT_FALSE(configs.empty());
    const auto rep = oracle::verify_widths(hand, cfg.requirements, cfg.deformation.delta_mm(), configs);
    EXPECT_EQ(rep.agreements, rep.cases);
    EXPECT_LE(rep.max_deviation, 0.1 + 1e-9);
}

TEST(ManipulationRange, DirectDistanceEnumeration) {
    const auto& hand = testsupport::reference_hand();
    const auto cfg = testsupport::reference_config();
    const auto configs = oracle::capable_configs(hand, cfg.requirements, cfg.grid, 3, 5);
    for (const auto& c : configs) {
        const auto thumb = hand.thumb_trajectory(c);
        const auto a = manipulation_range(thumb, hand, cfg.requirements, 4.87);
        for (const auto& rec : a.per_index) {
            ASSERT_TRUE(rec.critical);
            double lo = 1e300, hi = -1e300;
            for (std::size_t j = rec.critical->jm_begin; j <= rec.critical->jm_end; ++j) {
                const geom::Vec3 v = thumb[j].tip - hand.index[rec.index_sample].tip;
                const double d = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            EXPECT_NEAR(rec.d_min, lo, 1e-12);
            EXPECT_NEAR(rec.d_max, hi, 1e-12);
        }
    }
}

TEST(Transition, InsideHoldsOutsideFails) {
    HandModel hand;
    hand.index = testsupport::single(kIndex);
    hand.middle = hand.index;
    hand.manip_end = 1;
    const auto thumb = arc_thumb(20.0, 40);
    const auto a = manipulation_range(thumb, hand, grasp::GraspRequirements{}, 4.87);
    for (double w = a.overall.lo(); w <= a.overall.hi(); w += 1.0) {
        EXPECT_TRUE(simulate_transition(thumb, hand, {}, 4.87, w).pass) << w;
    }
    EXPECT_FALSE(simulate_transition(thumb, hand, {}, 4.87, a.overall.hi() + 0.5).pass);
    EXPECT_FALSE(simulate_transition(thumb, hand, {}, 4.87, a.overall.lo() - 0.5).pass);
    EXPECT_THROW(simulate_transition(thumb, hand, {}, 4.87, -1.0), std::invalid_argument);
}
