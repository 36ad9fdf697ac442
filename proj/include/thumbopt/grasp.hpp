#pragma once

// Grasp feasibility of a thumb placement: precision, lateral and tripod checks over the
// finger motion ranges. Pairs and triples are quantified existentially over all samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thumbopt/geom.hpp"
#include "thumbopt/hand.hpp"
#include "thumbopt/kinematics.hpp"

namespace thumbopt::grasp {

using geom::Point3;
using geom::Vec3;
using kin::Trajectory;
using kin::TrajectorySample;

inline constexpr double kAngleSlack = 1e-9;
inline constexpr double kRadiusSlack = 1e-9;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Range&) const = default;
};

struct GraspRequirements {
    Range precision{0.0, 60.0};
    Range lateral{0.0, 30.0};
    Range tripod{10.0, 80.0};
    Range manipulation{0.0, 30.0};
    double theta_min = 110.0 * geom::kPi / 180.0;
    double alpha_perm = 30.0 * geom::kPi / 180.0;
    double force_dir_limit = 45.0 * geom::kPi / 180.0;

    void validate() const {
        for (const Range* r : {&precision, &lateral, &tripod, &manipulation}) {
            if (!(r->lo <= r->hi) || r->lo < 0.0) {
                throw std::invalid_argument("requirements: ranges need 0 <= lo <= hi");
            }
        }
        for (double a : {theta_min, alpha_perm, force_dir_limit}) {
            if (!(a > 0.0) || a > geom::kPi) {
                throw std::invalid_argument("requirements: angles must be in (0, pi]");
            }
        }
    }
    bool operator==(const GraspRequirements&) const = default;
};

enum Violation : std::uint32_t {
    kNone = 0,
    kAlpha = 1u << 0,              // no pair has the reference normal within alpha_perm
    kForce = 1u << 1,              // no pair has the force digit moving within the limit
    kNoEstablishedPair = 1u << 2,  // no pair satisfies both establishment conditions
    kRangeMax = 1u << 3,           // achievable maximum radius below requirement
    kRangeMin = 1u << 4,           // achievable minimum radius above requirement
    kDegenerateTriangle = 1u << 5, // every triple is collinear
    kNoCenterInside = 1u << 6,     // no triple admits an object centre inside its triangle
    kSkipped = 1u << 7,            // not evaluated (early exit after an earlier failure)
};

inline std::string describe_violations(std::uint32_t v) {
    static const std::array<const char*, 8> names{"alpha",           "force",           "no_established_pair",
                                                  "range_max",       "range_min",       "degenerate_triangle",
                                                  "no_center_inside", "skipped"};
    std::string out;
    for (std::size_t b = 0; b < names.size(); ++b) {
        if (v & (1u << b)) {
            if (!out.empty()) {
                out += '|';
            }
            out += names[b];
        }
    }
    return out.empty() ? "none" : out;
}

struct SamplePair {
    std::size_t thumb = 0;
    std::size_t index = 0;
    bool operator==(const SamplePair&) const = default;
};

struct PairCheck {
    bool ok = false;
    std::uint32_t violations = kNone;
    std::size_t established_pairs = 0;
    std::optional<double> achieved_r_min;
    std::optional<double> achieved_r_max;
    std::optional<SamplePair> r_min_pair;
    std::optional<SamplePair> r_max_pair;
    double best_alpha = geom::kPi;        // smallest reference-normal angle over all pairs
    double best_force_angle = geom::kPi;  // smallest force-direction angle over all pairs
};

struct TripodCheck {
    bool ok = false;
    std::uint32_t violations = kNone;
    std::optional<double> achieved_r_min;
    std::optional<double> achieved_r_max;
    // thumb-object-index, thumb-object-middle, index-object-middle at the largest-radius triple
    std::optional<std::array<double, 3>> contact_angles;
    std::optional<std::array<std::size_t, 3>> r_max_triple;  // thumb, index, middle
};

struct GraspVerdict {
    PairCheck precision;
    PairCheck lateral;
    TripodCheck tripod;

    bool precision_ok() const { return precision.ok; }
    bool lateral_ok() const { return lateral.ok; }
    bool tripod_ok() const { return tripod.ok; }
    bool valid() const { return precision.ok && lateral.ok && tripod.ok; }
};

enum class CheckMode {
    full,        // scan everything, complete diagnostics
    early_exit,  // stop as soon as the outcome is known
};

namespace detail {

// cos(limit + slack), or -inf when the widened limit reaches pi.
inline double cos_threshold(double limit) {
    const double widened = limit + kAngleSlack;
    return widened >= geom::kPi ? -std::numeric_limits<double>::infinity() : std::cos(widened);
}

inline double safe_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

enum class PairKind { precision, lateral };

inline PairCheck check_pair(PairKind kind, const Trajectory& thumb, const Trajectory& index, double r_thumb,
                            double r_index, const Range& range, const GraspRequirements& req, CheckMode mode) {
    const geom::ContactRadiusSolver solver(r_thumb, r_index, req.theta_min);
    const double cos_alpha = cos_threshold(req.alpha_perm);
    const double cos_force = cos_threshold(req.force_dir_limit);
    const double need_max = range.hi - kRadiusSlack;
    const double need_min = range.lo + kRadiusSlack;

    PairCheck out;
    bool any_alpha = false, any_force = false;
    double best_alpha_cos = -1.0, best_force_cos = -1.0;
    double r_lo = std::numeric_limits<double>::infinity();
    double r_hi = -std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < index.size(); ++i) {
        const TrajectorySample& is = index[i];
        const Vec3& ref = kind == PairKind::precision ? is.pad_normal.vec() : is.side_normal.vec();
        for (std::size_t j = 0; j < thumb.size(); ++j) {
            const TrajectorySample& ts = thumb[j];
            const Vec3 g = ts.tip - is.tip;  // grasp direction c_T - c_I, unnormalized
            const double d = g.norm();
            if (!(d > 0.0)) {
                continue;
            }
            const double alpha_cos = ref.dot(g) / d;
            // Precision: the index pushes toward the thumb. Lateral: the thumb pushes toward the index.
            const double force_cos = kind == PairKind::precision ? is.tangent.dot(g) / d : -ts.tangent.dot(g) / d;
            best_alpha_cos = std::max(best_alpha_cos, alpha_cos);
            best_force_cos = std::max(best_force_cos, force_cos);
            const bool alpha_ok = alpha_cos >= cos_alpha;
            const bool force_ok = force_cos >= cos_force;
            any_alpha = any_alpha || alpha_ok;
            any_force = any_force || force_ok;
            if (!(alpha_ok && force_ok)) {
                continue;
            }
            const auto r_max = solver.r_max(d);
            if (!r_max) {
                continue;  // this pose cannot hold any object at theta_min
            }
            ++out.established_pairs;
            const double r_min = solver.r_min(d);
            if (r_min < r_lo) {
                r_lo = r_min;
                out.r_min_pair = SamplePair{j, i};
            }
            if (*r_max > r_hi) {
                r_hi = *r_max;
                out.r_max_pair = SamplePair{j, i};
            }
            if (mode == CheckMode::early_exit && r_hi >= need_max && r_lo <= need_min) {
                out.ok = true;
                out.achieved_r_min = r_lo;
                out.achieved_r_max = r_hi;
                out.best_alpha = safe_acos(best_alpha_cos);
                out.best_force_angle = safe_acos(best_force_cos);
                return out;
            }
        }
    }

    out.best_alpha = safe_acos(best_alpha_cos);
    out.best_force_angle = safe_acos(best_force_cos);
    if (!any_alpha) {
        out.violations |= kAlpha;
    }
    if (!any_force) {
        out.violations |= kForce;
    }
    if (out.established_pairs == 0) {
        out.violations |= kNoEstablishedPair;
    } else {
        out.achieved_r_min = r_lo;
        out.achieved_r_max = r_hi;
        if (!(r_hi >= need_max)) {
            out.violations |= kRangeMax;
        }
        if (!(r_lo <= need_min)) {
            out.violations |= kRangeMin;
        }
    }
    out.ok = out.violations == kNone;
    return out;
}

}  // namespace detail

inline PairCheck check_precision(const Trajectory& thumb, const Trajectory& index, const FingertipRadii& radii,
                                 const GraspRequirements& req, CheckMode mode = CheckMode::full) {
    return detail::check_pair(detail::PairKind::precision, thumb, index, radii.thumb, radii.index, req.precision,
                              req, mode);
}

inline PairCheck check_lateral(const Trajectory& thumb, const Trajectory& index, const FingertipRadii& radii,
                               const GraspRequirements& req, CheckMode mode = CheckMode::full) {
    return detail::check_pair(detail::PairKind::lateral, thumb, index, radii.thumb, radii.index, req.lateral, req,
                              mode);
}

// Establishment conditions only (reference normal and force direction) for one sample pair.
inline bool precision_established(const TrajectorySample& thumb, const TrajectorySample& index,
                                  const GraspRequirements& req) {
    const Vec3 g = thumb.tip - index.tip;
    const double d = g.norm();
    if (!(d > 0.0)) {
        return false;
    }
    return index.pad_normal.dot(g) / d >= detail::cos_threshold(req.alpha_perm) &&
           index.tangent.dot(g) / d >= detail::cos_threshold(req.force_dir_limit);
}

inline bool lateral_established(const TrajectorySample& thumb, const TrajectorySample& index,
                                const GraspRequirements& req) {
    const Vec3 g = thumb.tip - index.tip;
    const double d = g.norm();
    if (!(d > 0.0)) {
        return false;
    }
    return index.side_normal.dot(g) / d >= detail::cos_threshold(req.alpha_perm) &&
           -thumb.tangent.dot(g) / d >= detail::cos_threshold(req.force_dir_limit);
}

// ---------------------------------------------------------------------------
// Tripod

struct TripodPlacement {
    double radius = 0.0;  // clamped to >= 0 for interpenetrating tips
    Point3 center{};
};

// At most two placements exist (roots of a quadratic).
struct TripodSolutions {
    std::array<TripodPlacement, 2> items{};
    std::size_t count = 0;

    bool empty() const { return count == 0; }
    std::size_t size() const { return count; }
    const TripodPlacement* begin() const { return items.data(); }
    const TripodPlacement* end() const { return items.data() + count; }
    void push_back(const TripodPlacement& p) { items[count++] = p; }
};

// Object spheres centred in the plane of the three tips and touching all of them, with the
// centre inside the (closed) triangle. With c = c(R) linear in R from the pairwise difference
// equations, |c - p1| = R + r1 becomes a quadratic in R. Roots need R + r_k > 0 for every tip;
// negative roots (tips overlapping) are reported as radius 0.
inline TripodSolutions solve_tripod_placement(const Point3& p1, double r1, const Point3& p2, double r2,
                                                           const Point3& p3, double r3) {
    TripodSolutions out;
    const Vec3 e1 = p2 - p1;
    const double len = e1.norm();
    if (!(len > 0.0)) {
        return out;
    }
    const Vec3 u = e1 / len;
    const Vec3 e2 = p3 - p1;
    const double a = e2.dot(u);
    const Vec3 w_raw = e2 - u * a;
    const double b = w_raw.norm();
    if (!(b > 1e-9 * std::max(len, e2.norm()))) {
        return out;  // collinear
    }
    const Vec3 w = w_raw / b;

    // cx = ax0 + ax1 R, cy = ay0 + ay1 R
    const double ax0 = (len * len + r1 * r1 - r2 * r2) / (2.0 * len);
    const double ax1 = -(r2 - r1) / len;
    const double ay0 = (a * a + b * b + r1 * r1 - r3 * r3 - 2.0 * a * ax0) / (2.0 * b);
    const double ay1 = (-2.0 * (r3 - r1) - 2.0 * a * ax1) / (2.0 * b);

    const double qa = ax1 * ax1 + ay1 * ay1 - 1.0;
    const double qb = 2.0 * (ax0 * ax1 + ay0 * ay1 - r1);
    const double qc = ax0 * ax0 + ay0 * ay0 - r1 * r1;

    std::array<double, 2> roots{};
    std::size_t n_roots = 0;
    if (std::abs(qa) < 1e-12) {
        if (qb != 0.0) {
            roots[n_roots++] = -qc / qb;
        }
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
            if (q != 0.0) {
                roots[n_roots++] = q / qa;
                roots[n_roots++] = qc / q;
            } else {
                roots[n_roots++] = 0.0;
            }
        }
    }

    const double eps = 1e-9 * std::max(1.0, len * len);
    for (std::size_t k = 0; k < n_roots; ++k) {
        const double r = roots[k];
        if (!std::isfinite(r) || !(r + r1 > 0.0 && r + r2 > 0.0 && r + r3 > 0.0)) {
            continue;
        }
        const double cx = ax0 + ax1 * r;
        const double cy = ay0 + ay1 * r;
        // Counter-clockwise triangle (0,0), (len,0), (a,b).
        const double s1 = len * cy;
        const double s2 = (a - len) * cy - b * (cx - len);
        const double s3 = -a * (cy - b) + b * (cx - a);
        if (s1 < -eps || s2 < -eps || s3 < -eps) {
            continue;
        }
        out.push_back({std::max(0.0, r), p1 + u * cx + w * cy});
    }
    return out;
}

// Triples are pruned by bounds that never change the achieved range. Every point of a triangle
// lies within L / sqrt(3) of its nearest vertex (L the longest edge), so R <= L / sqrt(3) - min r_k;
// every edge gives R >= (edge - r_a - r_b) / 2, and radii are clamped at 0.
// A triple (or a whole thumb/index pair) is skipped when it can neither raise the largest radius
// nor lower the smallest one found so far, so full mode reports exact extremes. Early exit also
// skips triples that cannot help an unmet requirement; its verdict and violations stay exact but
// the reported extremes cover only what it evaluated.
inline TripodCheck check_tripod(const Trajectory& thumb, const Trajectory& index, const Trajectory& middle,
                                const FingertipRadii& radii, const GraspRequirements& req,
                                CheckMode mode = CheckMode::full) {
    TripodCheck out;
    const double need_max = req.tripod.hi - kRadiusSlack;
    const double need_min = req.tripod.lo + kRadiusSlack;
    constexpr double kBoundMargin = 1e-7;  // covers rounding between the bounds and the solver
    double r_lo = std::numeric_limits<double>::infinity();
    double r_hi = -std::numeric_limits<double>::infinity();
    bool any_triangle = false;
    bool found = false;
    Point3 best_center{};

    const std::size_t nm = middle.size();
    const double r_small = std::min({radii.thumb, radii.index, radii.middle});
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    std::vector<double> d_im(index.size() * nm), d_tm(thumb.size() * nm);
    std::vector<double> far_im(index.size(), 0.0), far_tm(thumb.size(), 0.0);
    for (std::size_t i = 0; i < index.size(); ++i) {
        for (std::size_t k = 0; k < nm; ++k) {
            d_im[i * nm + k] = geom::distance(index[i].tip, middle[k].tip);
            far_im[i] = std::max(far_im[i], d_im[i * nm + k]);
        }
    }
    for (std::size_t j = 0; j < thumb.size(); ++j) {
        for (std::size_t k = 0; k < nm; ++k) {
            d_tm[j * nm + k] = geom::distance(thumb[j].tip, middle[k].tip);
            far_tm[j] = std::max(far_tm[j], d_tm[j * nm + k]);
        }
    }
    // True when a placement with radius in [lb, ub] could move either extreme. Early exit only
    // cares about extremes that do not meet the requirement yet.
    auto may_improve = [&](double lb, double ub) {
        const bool raise = ub + kBoundMargin > r_hi && (mode == CheckMode::full || r_hi < need_max);
        const bool lower = r_lo > 0.0 && std::max(0.0, lb) - kBoundMargin < r_lo &&
                           (mode == CheckMode::full || r_lo > need_min);
        return raise || lower;
    };

    // Pairs with the largest upper bound first: the largest radius turns up early and the
    // remaining pairs mostly fall to the bounds.
    struct PairBound {
        double ub, lb, d;
        std::size_t j, i;
    };
    std::vector<PairBound> pairs;
    pairs.reserve(thumb.size() * index.size());
    for (std::size_t j = 0; j < thumb.size(); ++j) {
        for (std::size_t i = 0; i < index.size(); ++i) {
            const double d_ti = geom::distance(thumb[j].tip, index[i].tip);
            pairs.push_back({std::max({d_ti, far_tm[j], far_im[i]}) * inv_sqrt3 - r_small,
                             0.5 * (d_ti - radii.thumb - radii.index), d_ti, j, i});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const PairBound& x, const PairBound& y) {
        return x.ub != y.ub ? x.ub > y.ub : (x.j != y.j ? x.j < y.j : x.i < y.i);
    });

    for (const PairBound& pb : pairs) {
        const std::size_t j = pb.j, i = pb.i;
        const Point3& pt = thumb[j].tip;
        const Point3& pi = index[i].tip;
        const double d_ti = pb.d, lb_ti = pb.lb;
        {
            if (found && !may_improve(lb_ti, pb.ub)) {
                continue;
            }
            for (std::size_t k = 0; k < nm; ++k) {
                const double a = d_tm[j * nm + k], b = d_im[i * nm + k];
                if (found) {
                    const double lb = std::max({lb_ti, 0.5 * (a - radii.thumb - radii.middle),
                                                0.5 * (b - radii.index - radii.middle)});
                    if (!may_improve(lb, std::max({d_ti, a, b}) * inv_sqrt3 - r_small)) {
                        continue;
                    }
                }
                const Point3& pm = middle[k].tip;
                const auto placements = solve_tripod_placement(pt, radii.thumb, pi, radii.index, pm, radii.middle);
                if (!placements.empty()) {
                    any_triangle = true;
                } else if (!any_triangle) {
                    const Vec3 n = (pi - pt).cross(pm - pt);
                    any_triangle = n.norm() > 1e-9 * std::max(1.0, (pi - pt).squared_norm());
                }
                for (const auto& pl : placements) {
                    found = true;
                    r_lo = std::min(r_lo, pl.radius);
                    if (pl.radius > r_hi) {
                        r_hi = pl.radius;
                        out.r_max_triple = std::array<std::size_t, 3>{j, i, k};
                        best_center = pl.center;
                    }
                }
                if (mode == CheckMode::early_exit && r_hi >= need_max && r_lo <= need_min) {
                    out.ok = true;
                    out.achieved_r_min = r_lo;
                    out.achieved_r_max = r_hi;
                    return out;
                }
            }
        }
    }

    if (!found) {
        out.violations |= any_triangle ? kNoCenterInside : kDegenerateTriangle;
    } else {
        out.achieved_r_min = r_lo;
        out.achieved_r_max = r_hi;
        const auto& t = *out.r_max_triple;
        const Point3& pt = thumb[t[0]].tip;
        const Point3& pi = index[t[1]].tip;
        const Point3& pm = middle[t[2]].tip;
        out.contact_angles = std::array<double, 3>{geom::angle_between(pt - best_center, pi - best_center),
                                                   geom::angle_between(pt - best_center, pm - best_center),
                                                   geom::angle_between(pi - best_center, pm - best_center)};
        if (!(r_hi >= need_max)) {
            out.violations |= kRangeMax;
        }
        if (!(r_lo <= need_min)) {
            out.violations |= kRangeMin;
        }
    }
    out.ok = out.violations == kNone;
    return out;
}

// ---------------------------------------------------------------------------

inline GraspVerdict is_valid_grasp(const Trajectory& thumb, const HandModel& hand, const GraspRequirements& req,
                                   CheckMode mode = CheckMode::full) {
    GraspVerdict v;
    v.precision = check_precision(thumb, hand.index, hand.radii, req, mode);
    if (mode == CheckMode::early_exit && !v.precision.ok) {
        v.lateral.violations = kSkipped;
        v.tripod.violations = kSkipped;
        return v;
    }
    v.lateral = check_lateral(thumb, hand.index, hand.radii, req, mode);
    if (mode == CheckMode::early_exit && !v.lateral.ok) {
        v.tripod.violations = kSkipped;
        return v;
    }
    v.tripod = check_tripod(thumb, hand.index, hand.middle, hand.radii, req, mode);
    return v;
}

inline GraspVerdict is_valid_grasp(const geom::AxisConfig& cfg, const HandModel& hand, const GraspRequirements& req,
                                   CheckMode mode = CheckMode::full) {
    return is_valid_grasp(hand.thumb_trajectory(cfg), hand, req, mode);
}

}  // namespace thumbopt::grasp
