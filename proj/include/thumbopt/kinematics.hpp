#pragma once

// Finger trajectory generators: four-bar coupler curves for index/middle, the piston-crank
// thumb drive, the ring/little differential, and the discretized Trajectory they produce.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "thumbopt/geom.hpp"

namespace thumbopt::kin {

using geom::Point3;
using geom::RigidTransform;
using geom::UnitVec3;
using geom::Vec3;

// ---------------------------------------------------------------------------
// Four-bar linkage

struct Vec2 {
    double u = 0.0;
    double v = 0.0;

    Vec2 operator+(const Vec2& o) const { return {u + o.u, v + o.v}; }
    Vec2 operator-(const Vec2& o) const { return {u - o.u, v - o.v}; }
    Vec2 operator*(double s) const { return {u * s, v * s}; }
    double cross(const Vec2& o) const { return u * o.v - v * o.u; }
    double norm() const { return std::hypot(u, v); }
    Vec2 perp() const { return {-v, u}; }
};

enum class Branch { open, crossed };

// Planar linkage drawn in the (u, v) plane of `frame`. Ground pivots A = (0, 0) and
// D = ground * (cos ground_angle, sin ground_angle); input link A-B, coupler B-C, output D-C.
// The coupler point sits at B + along * e + perp * e_perp with e = (C - B) / |C - B|.
// Branch::open puts C left of the directed diagonal B -> D, Branch::crossed right of it.
struct FourBarLinkage {
    double ground = 1.0;
    double input = 1.0;
    double coupler = 1.0;
    double output = 1.0;
    double coupler_point_along = 0.0;
    double coupler_point_perp = 0.0;
    double ground_angle = 0.0;
    RigidTransform frame{};

    void validate() const {
        if (!(ground > 0.0 && input > 0.0 && coupler > 0.0 && output > 0.0)) {
            throw std::invalid_argument("FourBarLinkage: link lengths must be positive");
        }
    }
};

struct FourBarPose {
    Vec2 a, b, c, d;
    Vec2 coupler_point;
    double residual = 0.0;  // max deviation of |BC| and |DC| from their link lengths
};

class AssemblyError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline FourBarPose four_bar_solve(const FourBarLinkage& l, double input_angle, Branch branch) {
    l.validate();
    FourBarPose p;
    p.a = {0.0, 0.0};
    p.d = {l.ground * std::cos(l.ground_angle), l.ground * std::sin(l.ground_angle)};
    p.b = {l.input * std::cos(input_angle), l.input * std::sin(input_angle)};

    const Vec2 bd = p.d - p.b;
    const double e = bd.norm();
    if (!(e > 0.0) || e > l.coupler + l.output || e < std::abs(l.coupler - l.output)) {
        throw AssemblyError("four-bar linkage cannot be assembled at this input angle");
    }
    const Vec2 unit = bd * (1.0 / e);
    const double along = (l.coupler * l.coupler - l.output * l.output + e * e) / (2.0 * e);
    const double h = std::sqrt(std::max(0.0, l.coupler * l.coupler - along * along));
    const Vec2 mid = p.b + unit * along;
    const Vec2 c_pos = mid + unit.perp() * h;  // left of B->D
    const Vec2 c_neg = mid - unit.perp() * h;

    // Open: C left of the directed diagonal B -> D. The side only changes through a singular
    // (folded) pose, so a branch stays continuous along a stroke.
    const bool pick_pos = branch == Branch::open;
    p.c = pick_pos ? c_pos : c_neg;

    const Vec2 bc = p.c - p.b;
    const double bc_len = bc.norm();
    const Vec2 e_c = bc * (1.0 / bc_len);
    p.coupler_point = p.b + e_c * l.coupler_point_along + e_c.perp() * l.coupler_point_perp;
    p.residual = std::max(std::abs(bc_len - l.coupler), std::abs((p.c - p.d).norm() - l.output));
    return p;
}

inline Point3 plane_to_world(const FourBarLinkage& l, const Vec2& q) {
    return l.frame.apply(Point3{q.u, q.v, 0.0});
}

inline Point3 four_bar_forward(const FourBarLinkage& l, double input_angle, Branch branch) {
    return plane_to_world(l, four_bar_solve(l, input_angle, branch).coupler_point);
}

// ---------------------------------------------------------------------------
// Piston-crank thumb drive

class MechanismLimit : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct PistonCrank {
    double crank_radius = 1.0;
    double rod_length = 2.0;
    Point3 crank_pivot{};
    UnitVec3 slider_axis{1.0, 0.0, 0.0};

    void validate() const {
        if (!(crank_radius > 0.0) || !(rod_length > crank_radius)) {
            throw std::invalid_argument("PistonCrank: need rod_length > crank_radius > 0");
        }
    }
    double stroke_min() const { return rod_length - crank_radius; }
    double stroke_max() const { return rod_length + crank_radius; }
};

// Slider distance from the crank pivot: x(phi) = r cos phi + sqrt(l^2 - r^2 sin^2 phi).
inline double piston_crank_slider(const PistonCrank& pc, double crank_angle) {
    pc.validate();
    const double r = pc.crank_radius, l = pc.rod_length;
    const double s = std::sin(crank_angle);
    return r * std::cos(crank_angle) + std::sqrt(l * l - r * r * s * s);
}

inline Point3 piston_crank_slider_point(const PistonCrank& pc, double crank_angle) {
    return pc.crank_pivot + pc.slider_axis.vec() * piston_crank_slider(pc, crank_angle);
}

// Inverse of piston_crank_slider on phi in [0, pi].
inline double piston_crank_angle(const PistonCrank& pc, double slider_pos) {
    pc.validate();
    const double r = pc.crank_radius, l = pc.rod_length;
    constexpr double slack = 1e-12;
    if (!(slider_pos >= pc.stroke_min() - slack && slider_pos <= pc.stroke_max() + slack)) {
        throw MechanismLimit("piston-crank: slider position outside the stroke");
    }
    const double c = (slider_pos * slider_pos + r * r - l * l) / (2.0 * slider_pos * r);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

// ---------------------------------------------------------------------------
// Ring/little differential

struct Differential {
    bool ring_constrained = false;
    bool little_constrained = false;
    double ring_share = 1.0;
    double little_share = 1.0;
};

struct DifferentialOutput {
    double ring = 0.0;
    double little = 0.0;
    bool stalled = false;
};

// Actuator travel maps 1:1 to each finger when free, so the fingers share 2x the actuator
// travel; a constrained finger passes its share to the other one.
inline DifferentialOutput differential_distribute(const Differential& diff, double actuator_delta) {
    if (!(diff.ring_share > 0.0 && diff.little_share > 0.0)) {
        throw std::invalid_argument("Differential: distribution shares must be positive");
    }
    const double total = 2.0 * actuator_delta;
    if (diff.ring_constrained && diff.little_constrained) {
        return {0.0, 0.0, true};
    }
    if (diff.ring_constrained) {
        return {0.0, total, false};
    }
    if (diff.little_constrained) {
        return {total, 0.0, false};
    }
    const double ring = total * (diff.ring_share / (diff.ring_share + diff.little_share));
    return {ring, total - ring, false};
}

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectorySample {
    Point3 tip{};
    UnitVec3 tangent{};
    UnitVec3 pad_normal{};
    UnitVec3 side_normal{};
};

// How pad and side normals are derived when a source does not provide them.
//   pad  = cos(pad_tilt) * tangent + sin(pad_tilt) * (palm_axis projected off the tangent)
//   side = thumb_side projected off the tangent
// pad_tilt = 0 makes the pad face the direction of flexion.
struct NormalModel {
    UnitVec3 palm_axis{0.0, 0.0, 1.0};
    UnitVec3 thumb_side{1.0, 0.0, 0.0};
    double pad_tilt = 0.0;
};

class Trajectory {
public:
    Trajectory() = default;

    // Samples must be finite; at least two.
    Trajectory(std::vector<TrajectorySample> samples, std::vector<double> params)
        : samples_(std::move(samples)), params_(std::move(params)) {
        if (samples_.size() < 2) {
            throw std::invalid_argument("Trajectory: need at least two samples");
        }
        if (params_.empty()) {
            params_.resize(samples_.size());
            for (std::size_t k = 0; k < params_.size(); ++k) {
                params_[k] = static_cast<double>(k);
            }
        }
        if (params_.size() != samples_.size()) {
            throw std::invalid_argument("Trajectory: parameter count does not match sample count");
        }
        for (const auto& s : samples_) {
            if (!s.tip.is_finite()) {
                throw std::invalid_argument("Trajectory: non-finite sample coordinates");
            }
        }
    }

    std::size_t size() const { return samples_.size(); }
    const TrajectorySample& operator[](std::size_t k) const { return samples_[k]; }
    const std::vector<TrajectorySample>& samples() const { return samples_; }
    const std::vector<double>& params() const { return params_; }
    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

private:
    std::vector<TrajectorySample> samples_;
    std::vector<double> params_;
};

// Normalized first differences; the last sample repeats the previous tangent.
inline std::vector<UnitVec3> first_difference_tangents(const std::vector<Point3>& pts) {
    if (pts.size() < 2) {
        throw std::invalid_argument("trajectory: need at least two samples");
    }
    std::vector<UnitVec3> t;
    t.reserve(pts.size());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        auto u = UnitVec3::try_normalize(pts[k + 1] - pts[k]);
        if (!u) {
            throw std::invalid_argument("trajectory: duplicate consecutive samples");
        }
        t.push_back(*u);
    }
    t.push_back(t.back());
    return t;
}

inline UnitVec3 project_off(const Vec3& v, const UnitVec3& t, const char* what) {
    auto u = UnitVec3::try_normalize(v - t.vec() * t.dot(v), 1e-9);
    if (!u) {
        throw std::invalid_argument(std::string("trajectory: ") + what + " is parallel to the motion");
    }
    return *u;
}

inline UnitVec3 pad_from_tangent(const UnitVec3& t, const UnitVec3& palm_off_tangent, double tilt) {
    if (tilt == 0.0) {
        return t;
    }
    return UnitVec3(t.vec() * std::cos(tilt) + palm_off_tangent.vec() * std::sin(tilt));
}

inline Trajectory trajectory_from_points(const std::vector<Point3>& pts, std::vector<double> params,
                                         const NormalModel& nm) {
    for (const auto& p : pts) {
        if (!p.is_finite()) {
            throw std::invalid_argument("trajectory: non-finite coordinates");
        }
    }
    const auto tangents = first_difference_tangents(pts);
    std::vector<TrajectorySample> out;
    out.reserve(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const UnitVec3& t = tangents[k];
        UnitVec3 pad = t;
        if (nm.pad_tilt != 0.0) {
            pad = pad_from_tangent(t, project_off(nm.palm_axis.vec(), t, "palm axis"), nm.pad_tilt);
        }
        out.push_back({pts[k], t, pad, project_off(nm.thumb_side.vec(), t, "thumb-side vector")});
    }
    return Trajectory(std::move(out), std::move(params));
}

// Thumb tip placement in the axis frame: radial distance from the axis, height along it,
// and the angular phase added to every sweep angle.
struct TipOffset {
    double radial = 50.0;
    double axial = 0.0;
    double phase = 0.0;
};

class DegenerateThumb : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Circle about the local z axis of axis_frame(axis), one sample per sweep angle. Side normal is
// the rotation axis; the pad normal tilts from the tangent toward the circle centre.
inline Trajectory thumb_trajectory(const geom::AxisConfig& axis, const TipOffset& tip,
                                   const std::vector<double>& sweep_angles, double pad_tilt = 0.0) {
    if (!(tip.radial > 0.0)) {
        throw DegenerateThumb("thumb trajectory: radial offset must be positive");
    }
    if (sweep_angles.size() < 2) {
        throw std::invalid_argument("thumb trajectory: need at least two steps");
    }
    const RigidTransform frame = geom::axis_frame(axis);
    const UnitVec3 axis_dir(frame.rotation.column(2));
    const Point3 centre = frame.apply({0.0, 0.0, tip.axial});

    std::vector<Point3> pts;
    pts.reserve(sweep_angles.size());
    for (double phi : sweep_angles) {
        const double a = phi + tip.phase;
        pts.push_back(frame.apply({tip.radial * std::cos(a), tip.radial * std::sin(a), tip.axial}));
    }
    const auto tangents = first_difference_tangents(pts);
    std::vector<TrajectorySample> out;
    out.reserve(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const UnitVec3& t = tangents[k];
        UnitVec3 pad = t;
        if (pad_tilt != 0.0) {
            pad = pad_from_tangent(t, project_off(centre - pts[k], t, "radial direction"), pad_tilt);
        }
        out.push_back({pts[k], t, pad, axis_dir});
    }
    return Trajectory(std::move(out), sweep_angles);
}

inline std::vector<double> linspace(double begin, double end, std::size_t steps) {
    if (steps < 2) {
        throw std::invalid_argument("linspace: need at least two steps");
    }
    std::vector<double> v(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        v[k] = begin + (end - begin) * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
    return v;
}

inline Trajectory thumb_trajectory(const geom::AxisConfig& axis, const TipOffset& tip, double sweep_begin,
                                   double sweep_end, std::size_t steps, double pad_tilt = 0.0) {
    if (!(sweep_begin != sweep_end)) {
        throw std::invalid_argument("thumb trajectory: degenerate sweep");
    }
    return thumb_trajectory(axis, tip, linspace(sweep_begin, sweep_end, steps), pad_tilt);
}

// Thumb rotation angles produced by driving the piston-crank slider uniformly across
// [stroke_begin, stroke_end]; crank angle is mapped to thumb angle as offset + sign * phi.
inline std::vector<double> stroke_sweep_angles(const PistonCrank& pc, double stroke_begin, double stroke_end,
                                               std::size_t steps, double angle_offset, double sign = 1.0) {
    std::vector<double> angles;
    for (double x : linspace(stroke_begin, stroke_end, steps)) {
        angles.push_back(angle_offset + sign * piston_crank_angle(pc, x));
    }
    return angles;
}

// ---------------------------------------------------------------------------
// Finger sources

struct FourBarSource {
    FourBarLinkage linkage;
    Branch branch = Branch::open;
    double angle_begin = 0.0;
    double angle_end = 1.0;
    std::size_t steps = 100;
};

struct PolylineSource {
    std::vector<Point3> points;
    // Either empty or one entry per point.
    std::vector<Vec3> pad_normals;
    std::vector<Vec3> side_normals;
};

using FingerSource = std::variant<FourBarSource, PolylineSource>;

inline Trajectory finger_trajectory(const FourBarSource& src, const NormalModel& nm) {
    const auto angles = linspace(src.angle_begin, src.angle_end, src.steps);
    std::vector<Point3> pts;
    pts.reserve(angles.size());
    for (double a : angles) {
        pts.push_back(four_bar_forward(src.linkage, a, src.branch));
    }
    return trajectory_from_points(pts, angles, nm);
}

inline Trajectory finger_trajectory(const PolylineSource& src, const NormalModel& nm) {
    if (src.pad_normals.empty() && src.side_normals.empty()) {
        return trajectory_from_points(src.points, {}, nm);
    }
    if (src.pad_normals.size() != src.points.size() || src.side_normals.size() != src.points.size()) {
        throw std::invalid_argument("polyline: normals must be given for every sample or for none");
    }
    const auto tangents = first_difference_tangents(src.points);
    std::vector<TrajectorySample> out;
    for (std::size_t k = 0; k < src.points.size(); ++k) {
        if (!src.points[k].is_finite()) {
            throw std::invalid_argument("polyline: non-finite coordinates");
        }
        out.push_back({src.points[k], tangents[k], UnitVec3(src.pad_normals[k]), UnitVec3(src.side_normals[k])});
    }
    return Trajectory(std::move(out), {});
}

inline Trajectory finger_trajectory(const FingerSource& src, const NormalModel& nm) {
    return std::visit([&](const auto& s) { return finger_trajectory(s, nm); }, src);
}

inline Trajectory index_trajectory(const FingerSource& src, const NormalModel& nm) {
    return finger_trajectory(src, nm);
}

// Polyline CSV: x,y,z[,nx,ny,nz,sx,sy,sz] per row, millimetres. A non-numeric first line is
// treated as a header; blank lines and lines starting with '#' are skipped.
inline PolylineSource parse_polyline_csv(std::istream& in) {
    PolylineSource src;
    std::string line;
    std::size_t line_no = 0;
    bool first_data = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
                    numeric = false;
                }
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first_data) {
                first_data = false;
                continue;
            }
            throw std::invalid_argument("polyline line " + std::to_string(line_no) + ": non-numeric field");
        }
        first_data = false;
        if (vals.size() != 3 && vals.size() != 9) {
            throw std::invalid_argument("polyline line " + std::to_string(line_no) + ": expected 3 or 9 columns");
        }
        const Point3 p{vals[0], vals[1], vals[2]};
        if (!p.is_finite()) {
            throw std::invalid_argument("polyline line " + std::to_string(line_no) + ": non-finite coordinates");
        }
        src.points.push_back(p);
        if (vals.size() == 9) {
            src.pad_normals.push_back({vals[3], vals[4], vals[5]});
            src.side_normals.push_back({vals[6], vals[7], vals[8]});
        }
    }
    if (!src.pad_normals.empty() && src.pad_normals.size() != src.points.size()) {
        throw std::invalid_argument("polyline: normals must be given for every row or for none");
    }
    return src;
}

inline PolylineSource read_polyline_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open polyline file: " + path);
    }
    return parse_polyline_csv(in);
}

}  // namespace thumbopt::kin
