#pragma once

// Slow reference implementations used to cross-check the fast paths. They share only the data
// types with the library: rotations, angles, placements and scans are recomputed here from
// primitive arithmetic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "thumbopt/geom.hpp"
#include "thumbopt/grasp.hpp"
#include "thumbopt/hand.hpp"
#include "thumbopt/kinematics.hpp"
#include "thumbopt/manip.hpp"
#include "thumbopt/optimizer.hpp"

namespace thumbopt::oracle {

using geom::Vec3;

namespace detail {

inline double len(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline Vec3 unit(const Vec3& v) { return v / len(v); }

inline double angle_acos(const Vec3& a, const Vec3& b) {
    const double c = (a.x * b.x + a.y * b.y + a.z * b.z) / (len(a) * len(b));
    return std::acos(std::max(-1.0, std::min(1.0, c)));
}

struct Pose {
    Vec3 tip, tangent, pad, side;
};

// Thumb samples rebuilt from the Euler angles directly.
inline std::vector<Pose> thumb_poses(const geom::AxisConfig& cfg, const HandModel& hand) {
    const double cr = std::cos(cfg.roll), sr = std::sin(cfg.roll);
    const double cp = std::cos(cfg.pitch), sp = std::sin(cfg.pitch);
    const double cy = std::cos(cfg.yaw), sy = std::sin(cfg.yaw);
    // Rx(roll) * Ry(pitch) * Rz(yaw), columns written out.
    const Vec3 col_x{cp * cy, sr * sp * cy + cr * sy, -cr * sp * cy + sr * sy};
    const Vec3 col_y{-cp * sy, -sr * sp * sy + cr * cy, cr * sp * sy + sr * cy};
    const Vec3 col_z{sp, -sr * cp, cr * cp};
    const auto& tip = hand.thumb.tip;
    const Vec3 centre = cfg.origin + col_z * tip.axial;

    std::vector<Pose> out;
    for (double phi : hand.thumb.sweep) {
        const double a = phi + tip.phase;
        out.push_back({centre + col_x * (tip.radial * std::cos(a)) + col_y * (tip.radial * std::sin(a)), {}, {},
                       col_z});
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].tangent = k + 1 < out.size() ? unit(out[k + 1].tip - out[k].tip) : out[k - 1].tangent;
    }
    for (auto& p : out) {
        p.pad = p.tangent;
        if (hand.thumb.pad_tilt != 0.0) {
            Vec3 in = centre - p.tip;
            in = unit(in - p.tangent * in.dot(p.tangent));
            p.pad = unit(p.tangent * std::cos(hand.thumb.pad_tilt) + in * std::sin(hand.thumb.pad_tilt));
        }
    }
    return out;
}

inline std::vector<Pose> finger_poses(const kin::Trajectory& t) {
    std::vector<Pose> out;
    for (const auto& s : t) {
        out.push_back({s.tip, s.tangent.vec(), s.pad_normal.vec(), s.side_normal.vec()});
    }
    return out;
}

inline bool within(double angle, double limit) { return angle <= limit + 1e-9; }

inline bool precision_pose(const Pose& thumb, const Pose& index, const grasp::GraspRequirements& req) {
    const Vec3 g = thumb.tip - index.tip;
    if (len(g) == 0.0) {
        return false;
    }
    return within(angle_acos(index.pad, g), req.alpha_perm) && within(angle_acos(index.tangent, g), req.force_dir_limit);
}

inline bool lateral_pose(const Pose& thumb, const Pose& index, const grasp::GraspRequirements& req) {
    const Vec3 g = thumb.tip - index.tip;
    if (len(g) == 0.0) {
        return false;
    }
    return within(angle_acos(index.side, g), req.alpha_perm) &&
           within(angle_acos(-thumb.tangent, g), req.force_dir_limit);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Contact angle by search: walk the object centre around the circle of radius R + r_a about tip
// a and find where it is exactly R + r_b from tip b.

inline std::optional<double> oracle_contact_angle(double d, double r_a, double r_b, double object_radius,
                                                  int samples = 2000) {
    const double ra = object_radius + r_a;
    const double rb = object_radius + r_b;
    // Tip a at the origin, tip b at (d, 0); centre at ra (cos t, sin t), t in [0, pi].
    auto f = [&](double t) {
        const double x = ra * std::cos(t) - d, y = ra * std::sin(t);
        return std::sqrt(x * x + y * y) - rb;
    };
    double t_prev = 0.0, f_prev = f(0.0);
    for (int k = 1; k <= samples; ++k) {
        const double t = geom::kPi * k / samples;
        const double fk = f(t);
        if (f_prev == 0.0 || (f_prev < 0.0) != (fk < 0.0)) {
            double lo = t_prev, hi = t;
            for (int it = 0; it < 100 && f_prev != 0.0; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((f(mid) < 0.0) == (f(lo) < 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            const double tc = f_prev == 0.0 ? t_prev : 0.5 * (lo + hi);
            const Vec3 c{ra * std::cos(tc), ra * std::sin(tc), 0.0};
            return detail::angle_acos(Vec3{} - c, Vec3{d, 0.0, 0.0} - c);
        }
        t_prev = t;
        f_prev = fk;
    }
    return std::nullopt;
}

// Largest R with contact angle >= theta_min, by bisection on the angle. The scan starts at the
// smallest object that reaches both tips, where the contact is collinear.
inline std::optional<double> oracle_r_max(double d, double r_a, double r_b, double theta_min) {
    auto theta = [&](double r) -> double {
        const double a = r + r_a, b = r + r_b;
        if (d >= a + b) {
            return d - (a + b) <= 1e-12 * d ? geom::kPi : -1.0;
        }
        if (d <= std::abs(a - b)) {
            return -1.0;
        }
        return std::acos(std::max(-1.0, std::min(1.0, (a * a + b * b - d * d) / (2.0 * a * b))));
    };
    const double start = std::max(0.0, 0.5 * (d - r_a - r_b));
    if (theta(start) < theta_min) {
        return std::nullopt;
    }
    double lo = start, hi = std::max(1.0, 2.0 * start);
    while (theta(hi) >= theta_min) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (theta(mid) >= theta_min ? lo : hi) = mid;
    }
    return lo;
}

// ---------------------------------------------------------------------------
// Validity by enumeration.

struct OracleVerdict {
    bool precision = false;
    bool lateral = false;
    bool tripod = false;
    bool valid() const { return precision && lateral && tripod; }
};

namespace detail {

// Contact angle from the law of cosines, or -1 when the object cannot touch both tips.
inline double pair_theta(double d, double r_a, double r_b, double R) {
    const double a = R + r_a, b = R + r_b;
    if (d >= a + b) {
        return d - (a + b) <= 1e-12 * d ? geom::kPi : -1.0;
    }
    if (d <= std::abs(a - b)) {
        return -1.0;
    }
    return std::acos(std::max(-1.0, std::min(1.0, (a * a + b * b - d * d) / (2.0 * a * b))));
}

template <typename Established>
bool pair_oracle(const std::vector<Pose>& thumb, const std::vector<Pose>& index, double r_t, double r_i,
                 const grasp::Range& range, const grasp::GraspRequirements& req, double radius_step,
                 Established established) {
    bool have_max = false, have_min = false;
    for (const auto& ip : index) {
        for (const auto& tp : thumb) {
            if (!established(tp, ip)) {
                continue;
            }
            const double d = len(tp.tip - ip.tip);
            // Pose holds some object at theta_min at all (the smallest object gives the widest angle).
            if (pair_theta(d, r_t, r_i, 0.0) < req.theta_min - 1e-12 &&
                pair_theta(d, r_t, r_i, std::max(0.0, 0.5 * (d - r_t - r_i))) < req.theta_min - 1e-12) {
                continue;
            }
            const double cap = d / (2.0 * std::sin(req.theta_min / 2.0)) + 1.0;
            std::vector<double> radii{0.0, range.lo, range.hi, std::max(0.0, 0.5 * (d - r_t - r_i))};
            for (double r = 0.0; r <= cap; r += radius_step) {
                radii.push_back(r);
            }
            for (double r : radii) {
                const double th = pair_theta(d, r_t, r_i, r);
                if (r >= range.hi - 1e-9 && th >= req.theta_min - 1e-9) {
                    have_max = true;
                }
            }
            // Smallest object that still touches both tips.
            if (std::max(0.0, 0.5 * (d - r_t - r_i)) <= range.lo + 1e-9) {
                have_min = true;
            }
            if (have_max && have_min) {
                return true;
            }
        }
    }
    return false;
}

// In-plane tripod placements for one triple: scan R, intersect the first two circles, bisect the
// residual against the third on both branches, keep centres inside the triangle.
inline void tripod_radii(const Vec3& p1, double r1, const Vec3& p2, double r2, const Vec3& p3, double r3,
                         double step, std::vector<double>& found) {
    const Vec3 e1 = p2 - p1;
    const double l = len(e1);
    if (l == 0.0) {
        return;
    }
    const Vec3 u = e1 / l;
    const Vec3 e2 = p3 - p1;
    const double ax = e2.dot(u);
    const Vec3 wr = e2 - u * ax;
    const double ay = len(wr);
    if (ay <= 1e-9 * std::max(l, len(e2))) {
        return;
    }
    const double qx = ax, qy = ay;  // third vertex in plane coordinates

    auto centre = [&](double R, int branch, double& cx, double& cy) {
        const double a = R + r1, b = R + r2;
        cx = (l * l + a * a - b * b) / (2.0 * l);
        const double h2 = a * a - cx * cx;
        if (h2 < 0.0) {
            return false;
        }
        cy = branch * std::sqrt(h2);
        return true;
    };
    auto residual = [&](double R, int branch, double& out) {
        double cx, cy;
        if (!centre(R, branch, cx, cy)) {
            return false;
        }
        out = std::sqrt((cx - qx) * (cx - qx) + (cy - qy) * (cy - qy)) - (R + r3);
        return true;
    };
    auto inside = [&](double cx, double cy) {
        // Barycentric coordinates of (cx, cy) in (0,0), (l,0), (qx,qy).
        const double det = l * qy;
        const double b2 = (cx * qy - cy * qx) / det;
        const double b3 = (l * cy) / det;
        const double b1 = 1.0 - b2 - b3;
        const double tol = 1e-9;
        return b1 >= -tol && b2 >= -tol && b3 >= -tol;
    };

    const double r_lo = -std::min({r1, r2, r3}) + 1e-9;
    const double r_hi = std::max({l, len(e2), len(p3 - p2)}) + 1.0;
    for (int branch : {1, -1}) {
        double prev_r = r_lo, prev_f = 0.0;
        bool prev_ok = residual(prev_r, branch, prev_f);
        for (double R = r_lo + step;; R += step) {
            R = std::min(R, r_hi);
            double f = 0.0;
            const bool ok = residual(R, branch, f);
            if (ok && prev_ok && (f == 0.0 || (f < 0.0) != (prev_f < 0.0))) {
                double lo = prev_r, hi = R, flo = prev_f;
                for (int it = 0; it < 100; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    double fm = 0.0;
                    if (!residual(mid, branch, fm)) {
                        break;
                    }
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                const double root = f == 0.0 ? R : 0.5 * (lo + hi);
                double cx, cy;
                if (centre(root, branch, cx, cy) && inside(cx, cy)) {
                    found.push_back(std::max(0.0, root));
                }
            }
            prev_r = R;
            prev_f = f;
            prev_ok = ok;
            if (R >= r_hi) {
                break;
            }
        }
    }
}

}  // namespace detail

struct OracleOptions {
    double radius_step = 0.5;  // mm
    double tripod_step = 1.0;  // mm
};

inline OracleVerdict oracle_validity(const geom::AxisConfig& cfg, const HandModel& hand,
                                     const grasp::GraspRequirements& req, const OracleOptions& opt = {}) {
    using namespace detail;
    const auto thumb = thumb_poses(cfg, hand);
    const auto index = finger_poses(hand.index);
    const auto middle = finger_poses(hand.middle);
    OracleVerdict v;
    v.precision = pair_oracle(thumb, index, hand.radii.thumb, hand.radii.index, req.precision, req, opt.radius_step,
                              [&](const Pose& t, const Pose& i) { return precision_pose(t, i, req); });
    v.lateral = pair_oracle(thumb, index, hand.radii.thumb, hand.radii.index, req.lateral, req, opt.radius_step,
                            [&](const Pose& t, const Pose& i) { return lateral_pose(t, i, req); });
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::vector<double> found;
    for (const auto& t : thumb) {
        for (const auto& i : index) {
            for (const auto& m : middle) {
                found.clear();
                tripod_radii(t.tip, hand.radii.thumb, i.tip, hand.radii.index, m.tip, hand.radii.middle,
                             opt.tripod_step, found);
                for (double r : found) {
                    lo = std::min(lo, r);
                    hi = std::max(hi, r);
                }
            }
        }
    }
    v.tripod = hi >= req.tripod.hi - 1e-6 && lo <= req.tripod.lo + 1e-6;
    return v;
}

// ---------------------------------------------------------------------------
// Manipulation range by sweeping candidate widths.

struct WidthSweep {
    bool capable = false;  // every manipulation index sample has both critical points
    std::optional<std::array<double, 2>> range;  // maximal contiguous run of passing widths
};

inline WidthSweep oracle_width_sweep(const geom::AxisConfig& cfg, const HandModel& hand,
                                     const grasp::GraspRequirements& req, double delta_mm, double step = 0.1) {
    using namespace detail;
    const auto thumb = thumb_poses(cfg, hand);
    const auto index = finger_poses(hand.index);
    const double rsum = hand.radii.thumb + hand.radii.index;
    std::vector<std::vector<double>> gaps;  // per index sample, the gaps over J_m
    double w_top = 0.0;
    for (std::size_t i = hand.manip_begin; i < hand.manip_stop(); ++i) {
        std::optional<std::size_t> jl;
        for (std::size_t j = 0; j < thumb.size(); ++j) {
            if (lateral_pose(thumb[j], index[i], req)) {
                jl = j;
            }
        }
        if (!jl) {
            return {};
        }
        std::optional<std::size_t> jp;
        for (std::size_t j = *jl; j < thumb.size() && !jp; ++j) {
            if (precision_pose(thumb[j], index[i], req)) {
                jp = j;
            }
        }
        std::size_t b = *jl, e = jp.value_or(0);
        if (!jp) {
            for (std::size_t j = 0; j < *jl; ++j) {
                if (precision_pose(thumb[j], index[i], req)) {
                    jp = j;
                }
            }
            if (!jp) {
                return {};
            }
            b = *jp;
            e = *jl;
        }
        std::vector<double> g;
        for (std::size_t j = b; j <= e; ++j) {
            g.push_back(len(index[i].tip - thumb[j].tip) - rsum);
            w_top = std::max(w_top, g.back() + 2.0 * delta_mm);
        }
        gaps.push_back(std::move(g));
    }
    WidthSweep out;
    out.capable = true;
    std::optional<double> first, last;
    for (std::int64_t k = 0;; ++k) {
        const double w = static_cast<double>(k) * step;
        if (w > w_top + step) {
            break;
        }
        bool pass = true;
        for (const auto& g : gaps) {
            for (double gap : g) {
                pass = pass && gap <= w && w <= gap + 2.0 * delta_mm;
            }
        }
        if (pass) {
            if (!first) {
                first = w;
            }
            last = w;
        } else if (first) {
            break;
        }
    }
    if (first) {
        out.range = std::array<double, 2>{*first, *last};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sequential two-pass reference for optimize(): validate everything, then rank.

struct SequentialResult {
    std::optional<std::uint64_t> opt_index;
    double w_max = 0.0;
    std::uint64_t valid_count = 0;
    std::vector<std::uint64_t> valid_indices;
};

inline SequentialResult sequential_optimize(const HandModel& hand, const grasp::GraspRequirements& req,
                                            const opt::SearchGrid& grid, double delta_mm) {
    SequentialResult out;
    for (std::uint64_t k = 0; k < grid.total(); ++k) {
        if (grasp::is_valid_grasp(grid.config_at(k), hand, req).valid()) {
            out.valid_indices.push_back(k);
        }
    }
    out.valid_count = out.valid_indices.size();
    double best = -1.0;
    for (std::uint64_t k : out.valid_indices) {
        const double w = manip::manipulation_range(grid.config_at(k), hand, req, delta_mm).overall.width();
        if (w > best) {
            best = w;
            out.opt_index = k;
        }
    }
    out.w_max = out.opt_index ? best : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Verification suite: library against oracles on random cases.

struct OracleReport {
    std::string name;
    std::size_t cases = 0;
    std::size_t agreements = 0;
    double max_deviation = 0.0;
    bool pass = false;
};

// Random feasible contact-angle cases; deviation in radians. `perturb` shifts the library's
// tip separation to show the comparison can fail.
inline OracleReport verify_contact_angles(std::size_t cases, std::uint64_t seed, double perturb = 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rad(1.0, 20.0), obj(0.0, 80.0), frac(0.05, 0.95);
    OracleReport rep{"contact_angle", 0, 0, 0.0, false};
    while (rep.cases < cases) {
        const double ra = rad(rng), rb = rad(rng), R = obj(rng);
        const double a = R + ra, b = R + rb;
        const double d = std::abs(a - b) + frac(rng) * (a + b - std::abs(a - b));
        const auto lib = geom::solve_object_placement({{0, 0, 0}, ra}, {{d + perturb, 0, 0}, rb}, R);
        const auto orc = oracle_contact_angle(d, ra, rb, R);
        ++rep.cases;
        if (!lib || !orc) {
            rep.max_deviation = std::numeric_limits<double>::infinity();
            continue;
        }
        const double dev = std::abs(*lib - *orc);
        rep.max_deviation = std::max(rep.max_deviation, dev);
        rep.agreements += dev < 1e-5;
    }
    rep.pass = rep.agreements == rep.cases;
    return rep;
}

// theta(R_max) == theta_min, evaluated by the oracle's contact angle.
inline OracleReport verify_r_max(std::size_t cases, std::uint64_t seed, double perturb = 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rad(1.0, 20.0), sep(1.0, 200.0), th(0.5, 3.0);
    OracleReport rep{"r_max_round_trip", 0, 0, 0.0, false};
    while (rep.cases < cases) {
        const double ra = rad(rng), rb = rad(rng), d = sep(rng), theta_min = th(rng);
        const auto r = geom::solve_R_max(d + perturb, ra, rb, theta_min);
        const auto ref = oracle_r_max(d, ra, rb, theta_min);
        if (!r && !ref) {
            continue;
        }
        ++rep.cases;
        if (!r || !ref) {
            rep.max_deviation = std::numeric_limits<double>::infinity();
            continue;
        }
        const auto angle = oracle_contact_angle(d, ra, rb, *r);
        const double dev = angle ? std::abs(*angle - theta_min) : std::numeric_limits<double>::infinity();
        rep.max_deviation = std::max(rep.max_deviation, dev);
        rep.agreements += dev < 1e-5;
    }
    rep.pass = rep.agreements == rep.cases;
    return rep;
}

// Every k-th sample, keeping the last, so that no trajectory exceeds max_samples.
inline kin::Trajectory decimate(const kin::Trajectory& t, std::size_t max_samples) {
    if (t.size() <= max_samples) {
        return t;
    }
    std::vector<kin::TrajectorySample> s;
    std::vector<double> p;
    for (std::size_t k = 0; k < max_samples; ++k) {
        const std::size_t src = k * (t.size() - 1) / (max_samples - 1);
        s.push_back(t[src]);
        p.push_back(t.params()[src]);
    }
    return kin::Trajectory(std::move(s), std::move(p));
}

inline HandModel reduced_hand(const HandModel& hand, std::size_t max_samples) {
    HandModel h = hand;
    h.index = decimate(hand.index, max_samples);
    h.middle = decimate(hand.middle, max_samples);
    if (h.thumb.sweep.size() > max_samples) {
        h.thumb.sweep = kin::linspace(hand.thumb.sweep.front(), hand.thumb.sweep.back(), max_samples);
    }
    h.manip_begin = 0;
    h.manip_end = 0;
    return h;
}

inline geom::AxisConfig random_config(std::mt19937_64& rng, const opt::SearchGrid& grid) {
    auto pick = [&](std::size_t k) {
        std::uniform_real_distribution<double> u(grid.dim(k).lo, grid.dim(k).hi);
        return u(rng);
    };
    return geom::AxisConfig{{pick(0), pick(1), pick(2)}, pick(3), pick(4), pick(5)}.normalized();
}

// Per-check verdicts of is_valid_grasp against oracle_validity. Requirements are drawn at random
// around `base` so both outcomes occur; agreement is counted per check.
struct ValidityCounts {
    std::array<std::size_t, 3> accepted{};  // oracle-true cases per check
};

inline OracleReport verify_validity(const HandModel& hand, const grasp::GraspRequirements& base,
                                    const opt::SearchGrid& grid, std::size_t cases, std::uint64_t seed,
                                    double perturb = 0.0, ValidityCounts* counts = nullptr) {
    const HandModel small = reduced_hand(hand, 20);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    OracleReport rep{"grasp_validity", 0, 0, 0.0, false};
    for (std::size_t c = 0; c < cases; ++c) {
        const geom::AxisConfig cfg = random_config(rng, grid);
        grasp::GraspRequirements req = base;
        req.precision = {base.precision.lo + 10.0 * u01(rng), base.precision.hi * u01(rng)};
        req.lateral = {base.lateral.lo + 10.0 * u01(rng), base.lateral.hi * u01(rng)};
        req.tripod = {base.tripod.lo * u01(rng), base.tripod.hi * u01(rng)};
        for (grasp::Range* r : {&req.precision, &req.lateral, &req.tripod}) {
            if (r->lo > r->hi) {
                std::swap(r->lo, r->hi);
            }
        }
        req.alpha_perm = base.alpha_perm * (1.0 + u01(rng));
        geom::AxisConfig lib_cfg = cfg;
        lib_cfg.origin.x += perturb;
        const auto lib = grasp::is_valid_grasp(lib_cfg, small, req);
        const auto orc = oracle_validity(cfg, small, req);
        const bool agree = lib.precision.ok == orc.precision && lib.lateral.ok == orc.lateral &&
                           lib.tripod.ok == orc.tripod;
        if (counts) {
            counts->accepted[0] += orc.precision;
            counts->accepted[1] += orc.lateral;
            counts->accepted[2] += orc.tripod;
        }
        ++rep.cases;
        rep.agreements += agree;
    }
    rep.pass = rep.agreements == rep.cases;
    return rep;
}

// manipulation_range against the width sweep; endpoints within one sweep step and W inside every
// W_i. Deviation is the largest endpoint difference in mm.
inline OracleReport verify_widths(const HandModel& hand, const grasp::GraspRequirements& req, double delta_mm,
                                  const std::vector<geom::AxisConfig>& configs, double perturb = 0.0,
                                  double step = 0.1) {
    OracleReport rep{"manipulation_range", 0, 0, 0.0, false};
    for (const auto& cfg : configs) {
        geom::AxisConfig lib_cfg = cfg;
        lib_cfg.origin.x += perturb;
        const auto lib = manip::manipulation_range(lib_cfg, hand, req, delta_mm);
        const auto orc = oracle_width_sweep(cfg, hand, req, delta_mm, step);
        bool ok = true;
        for (const auto& rec : lib.per_index) {
            if (!lib.raw.empty() && !(rec.width.lo() <= lib.raw.lo() && lib.raw.hi() <= rec.width.hi())) {
                ok = false;  // intersection law
            }
        }
        const auto& w = lib.overall;
        if (orc.range) {
            const double dev = w.empty() ? std::numeric_limits<double>::infinity()
                                         : std::max(std::abs(w.lo() - (*orc.range)[0]),
                                                    std::abs(w.hi() - (*orc.range)[1]));
            rep.max_deviation = std::max(rep.max_deviation, dev);
            ok = ok && dev <= step + 1e-9;
        } else {
            // A non-empty W narrower than one step can fall between sweep points.
            ok = ok && (w.empty() || w.width() < step);
        }
        ++rep.cases;
        rep.agreements += ok;
    }
    rep.pass = rep.agreements == rep.cases;
    return rep;
}

// Configurations whose manipulation analysis is non-trivial: every window sample has both
// critical points. Found by random search plus small perturbations of earlier hits, or of
// `near` when given (e.g. a known optimum, to reach configurations with a non-empty W).
inline std::vector<geom::AxisConfig> capable_configs(const HandModel& hand, const grasp::GraspRequirements& req,
                                                     const opt::SearchGrid& grid, std::size_t want,
                                                     std::uint64_t seed, std::size_t max_draws = 2000000,
                                                     const std::vector<geom::AxisConfig>& near = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::vector<geom::AxisConfig> out;
    auto capable = [&](const geom::AxisConfig& cfg) {
        const auto thumb = hand.thumb_trajectory(cfg);
        for (std::size_t i = hand.manip_begin; i < hand.manip_stop(); ++i) {
            if (!manip::critical_points(thumb.samples(), hand.index[i], req)) {
                return false;
            }
        }
        return true;
    };
    for (std::size_t n = 0; n < max_draws && out.size() < want; ++n) {
        const auto& base = near.empty() ? out : near;
        geom::AxisConfig cfg;
        if (!base.empty() && n % 2 == 1) {
            const double scale = near.empty() ? 1.0 : 0.3;
            cfg = base[n / 2 % base.size()];
            cfg.origin += Vec3{3.0 * scale * jitter(rng), 3.0 * scale * jitter(rng), 3.0 * scale * jitter(rng)};
            cfg.roll += 0.05 * scale * jitter(rng);
            cfg.pitch += 0.05 * scale * jitter(rng);
            cfg.yaw += 0.05 * scale * jitter(rng);
            cfg = cfg.normalized();
        } else {
            cfg = random_config(rng, grid);
        }
        if (capable(cfg)) {
            out.push_back(cfg);
        }
    }
    return out;
}

}  // namespace thumbopt::oracle
