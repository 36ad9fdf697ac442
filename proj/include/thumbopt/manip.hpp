#pragma once

// Precision-lateral transition analysis: critical thumb steps per index sample and the interval
// of object widths that stay graspable through the whole transition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "thumbopt/geom.hpp"
#include "thumbopt/grasp.hpp"
#include "thumbopt/hand.hpp"
#include "thumbopt/kinematics.hpp"

namespace thumbopt::manip {

using geom::Point3;
using kin::TrajectorySample;

// Maximum fingertip deformation sqrt(F / (pi E)) in millimetres, F in newtons, E in pascals.
inline double delta_m(double force_n, double youngs_modulus_pa) {
    if (!(force_n > 0.0) || !(youngs_modulus_pa > 0.0)) {
        throw std::invalid_argument("delta_m: force and Young's modulus must be positive");
    }
    return std::sqrt(force_n / (geom::kPi * youngs_modulus_pa)) * 1000.0;
}

struct DeformationModel {
    double force_n = 10.0;
    double youngs_modulus_pa = 134.3e3;

    double delta_mm() const { return delta_m(force_n, youngs_modulus_pa); }
    bool operator==(const DeformationModel&) const = default;
};

class WidthInterval {
public:
    WidthInterval() = default;  // empty
    WidthInterval(double lo, double hi) : lo_(lo), hi_(hi), empty_(!(lo <= hi)) {}

    static WidthInterval empty_interval() { return {}; }

    bool empty() const { return empty_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    // |W|: 0 when empty.
    double width() const { return empty_ ? 0.0 : hi_ - lo_; }
    bool contains(double w) const { return !empty_ && lo_ <= w && w <= hi_; }

    WidthInterval intersect(const WidthInterval& o) const {
        if (empty_ || o.empty_) {
            return {};
        }
        return {std::max(lo_, o.lo_), std::min(hi_, o.hi_)};
    }
    // Drops negative widths.
    WidthInterval clipped_nonnegative() const {
        if (empty_ || hi_ < 0.0) {
            return {};
        }
        return {std::max(0.0, lo_), hi_};
    }
    bool operator==(const WidthInterval& o) const {
        return empty_ == o.empty_ && (empty_ || (lo_ == o.lo_ && hi_ == o.hi_));
    }

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
    bool empty_ = true;
};

// j_lateral: last lateral-valid thumb step. j_precision: first precision-valid step at or after
// it. When precision poses only occur before j_lateral, J_m is the closed range back to the
// nearest one and `reversed` is set.
struct CriticalPoints {
    std::size_t j_lateral = 0;
    std::size_t j_precision = 0;
    std::size_t jm_begin = 0;  // inclusive
    std::size_t jm_end = 0;    // inclusive
    bool reversed = false;

    std::size_t size() const { return jm_end - jm_begin + 1; }
    bool operator==(const CriticalPoints&) const = default;
};

inline std::optional<CriticalPoints> critical_points(std::span<const TrajectorySample> thumb,
                                                     const TrajectorySample& index_sample,
                                                     const grasp::GraspRequirements& req) {
    std::optional<std::size_t> j_lat;
    for (std::size_t j = thumb.size(); j-- > 0;) {
        if (grasp::lateral_established(thumb[j], index_sample, req)) {
            j_lat = j;
            break;
        }
    }
    if (!j_lat) {
        return std::nullopt;
    }
    for (std::size_t j = *j_lat; j < thumb.size(); ++j) {
        if (grasp::precision_established(thumb[j], index_sample, req)) {
            return CriticalPoints{*j_lat, j, *j_lat, j, false};
        }
    }
    for (std::size_t j = *j_lat; j-- > 0;) {
        if (grasp::precision_established(thumb[j], index_sample, req)) {
            return CriticalPoints{*j_lat, j, j, *j_lat, true};
        }
    }
    return std::nullopt;
}

struct DistanceRange {
    double d_max = 0.0;
    double d_min = 0.0;
};

inline DistanceRange transition_distances(std::span<const TrajectorySample> thumb, const Point3& index_pos,
                                          std::size_t jm_begin, std::size_t jm_end) {
    if (jm_begin > jm_end || jm_end >= thumb.size()) {
        throw std::invalid_argument("transition range out of bounds");
    }
    DistanceRange r{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::size_t j = jm_begin; j <= jm_end; ++j) {
        const double d = geom::distance(index_pos, thumb[j].tip);
        r.d_max = std::max(r.d_max, d);
        r.d_min = std::min(r.d_min, d);
    }
    return r;
}

// [d_max - (r_T + r_I), d_min - (r_T + r_I) + 2 delta_m]; empty when the bounds cross.
inline WidthInterval width_interval(std::span<const TrajectorySample> thumb, const Point3& index_pos,
                                    std::size_t jm_begin, std::size_t jm_end, double tip_radius_sum,
                                    double delta_mm) {
    const DistanceRange r = transition_distances(thumb, index_pos, jm_begin, jm_end);
    return {r.d_max - tip_radius_sum, (r.d_min - tip_radius_sum) + 2.0 * delta_mm};
}

struct IndexTransition {
    std::size_t index_sample = 0;
    std::optional<CriticalPoints> critical;
    double d_max = 0.0;
    double d_min = 0.0;
    WidthInterval width;
};

struct TransitionAnalysis {
    std::vector<IndexTransition> per_index;
    WidthInterval raw;      // intersection before clipping
    WidthInterval overall;  // clipped to non-negative widths
};

inline TransitionAnalysis manipulation_range(const kin::Trajectory& thumb, const HandModel& hand,
                                             const grasp::GraspRequirements& req, double delta_mm) {
    const std::span<const TrajectorySample> thumb_span(thumb.samples());
    const double radius_sum = hand.radii.thumb + hand.radii.index;
    TransitionAnalysis out;
    bool first = true;
    for (std::size_t i = hand.manip_begin; i < hand.manip_stop(); ++i) {
        IndexTransition rec;
        rec.index_sample = i;
        rec.critical = critical_points(thumb_span, hand.index[i], req);
        if (rec.critical) {
            const DistanceRange dr =
                transition_distances(thumb_span, hand.index[i].tip, rec.critical->jm_begin, rec.critical->jm_end);
            rec.d_max = dr.d_max;
            rec.d_min = dr.d_min;
            rec.width = WidthInterval(dr.d_max - radius_sum, (dr.d_min - radius_sum) + 2.0 * delta_mm);
        }
        out.raw = first ? rec.width : out.raw.intersect(rec.width);
        first = false;
        out.per_index.push_back(rec);
    }
    out.overall = out.raw.clipped_nonnegative();
    return out;
}

inline TransitionAnalysis manipulation_range(const geom::AxisConfig& cfg, const HandModel& hand,
                                             const grasp::GraspRequirements& req, double delta_mm) {
    return manipulation_range(hand.thumb_trajectory(cfg), hand, req, delta_mm);
}

// One row per thumb step of J_m for every manipulation index sample.
struct TransitionStep {
    std::size_t index_sample = 0;
    std::size_t j = 0;
    double distance = 0.0;
    double gap = 0.0;  // d - (r_T + r_I)
    bool hold = false; // gap <= w <= gap + 2 delta_m
};

struct TransitionReport {
    std::vector<TransitionStep> steps;
    bool capable = true;  // every index sample has both critical points
    bool pass = false;
};

inline TransitionReport simulate_transition(const kin::Trajectory& thumb, const HandModel& hand,
                                            const grasp::GraspRequirements& req, double delta_mm, double width) {
    if (width < 0.0) {
        throw std::invalid_argument("transition: object width must be non-negative");
    }
    const std::span<const TrajectorySample> thumb_span(thumb.samples());
    const double radius_sum = hand.radii.thumb + hand.radii.index;
    TransitionReport rep;
    bool all_hold = true;
    for (std::size_t i = hand.manip_begin; i < hand.manip_stop(); ++i) {
        const auto cp = critical_points(thumb_span, hand.index[i], req);
        if (!cp) {
            rep.capable = false;
            continue;
        }
        for (std::size_t j = cp->jm_begin; j <= cp->jm_end; ++j) {
            TransitionStep s;
            s.index_sample = i;
            s.j = j;
            s.distance = geom::distance(hand.index[i].tip, thumb[j].tip);
            s.gap = s.distance - radius_sum;
            s.hold = s.gap <= width && width <= s.gap + 2.0 * delta_mm;
            all_hold = all_hold && s.hold;
            rep.steps.push_back(s);
        }
    }
    rep.pass = rep.capable && all_hold;
    return rep;
}

}  // namespace thumbopt::manip
