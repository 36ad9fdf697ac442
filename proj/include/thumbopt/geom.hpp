#pragma once

// Core 3-D types and the closed-form sphere-contact solvers.
//
// Units: millimetres and radians throughout.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace thumbopt::geom {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kIdentityTol = 1e-9;
inline constexpr double kSolverTol = 1e-6;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    constexpr double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
    bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

using Point3 = Vec3;

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

// A direction with |v| = 1. Construction normalizes; zero or non-finite input throws.
class UnitVec3 {
public:
    UnitVec3() = default;
    explicit UnitVec3(const Vec3& v) {
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw std::invalid_argument("UnitVec3: cannot normalize a zero or non-finite vector");
        }
        v_ = v / n;
    }
    UnitVec3(double x, double y, double z) : UnitVec3(Vec3{x, y, z}) {}

    // Normalizes if possible; nullopt for vectors shorter than min_norm.
    static std::optional<UnitVec3> try_normalize(const Vec3& v, double min_norm = 1e-12) {
        const double n = v.norm();
        if (!(n > min_norm) || !std::isfinite(n)) {
            return std::nullopt;
        }
        UnitVec3 u;
        u.v_ = v / n;
        return u;
    }

    const Vec3& vec() const { return v_; }
    operator const Vec3&() const { return v_; }  // NOLINT(google-explicit-constructor)
    double x() const { return v_.x; }
    double y() const { return v_.y; }
    double z() const { return v_.z; }
    double dot(const Vec3& o) const { return v_.dot(o); }
    UnitVec3 operator-() const {
        UnitVec3 u;
        u.v_ = -v_;
        return u;
    }
    bool operator==(const UnitVec3&) const = default;

private:
    Vec3 v_{1.0, 0.0, 0.0};
};

struct Mat3 {
    // Row-major.
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static constexpr Mat3 identity() { return {}; }
    constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
    constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

    constexpr Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    constexpr Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) {
                    s += (*this)(i, k) * o(k, j);
                }
                r(i, j) = s;
            }
        }
        return r;
    }
    constexpr Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                r(i, j) = (*this)(j, i);
            }
        }
        return r;
    }
    constexpr double determinant() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    constexpr Vec3 column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

    static Mat3 rot_x(double a) {
        const double c = std::cos(a), s = std::sin(a);
        return {{1, 0, 0, 0, c, -s, 0, s, c}};
    }
    static Mat3 rot_y(double a) {
        const double c = std::cos(a), s = std::sin(a);
        return {{c, 0, s, 0, 1, 0, -s, 0, c}};
    }
    static Mat3 rot_z(double a) {
        const double c = std::cos(a), s = std::sin(a);
        return {{c, -s, 0, s, c, 0, 0, 0, 1}};
    }
};

struct RigidTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{};

    Point3 apply(const Point3& p) const { return rotation * p + translation; }
    Vec3 apply_vector(const Vec3& v) const { return rotation * v; }
    RigidTransform inverse() const {
        const Mat3 rt = rotation.transposed();
        return {rt, -(rt * translation)};
    }
    RigidTransform operator*(const RigidTransform& o) const {
        return {rotation * o.rotation, rotation * o.translation + translation};
    }
};

// Wraps into (-pi, pi].
inline double normalize_angle(double a) {
    if (!std::isfinite(a)) {
        throw std::invalid_argument("normalize_angle: non-finite angle");
    }
    double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    if (r <= -kPi) {
        r += 2.0 * kPi;
    }
    return r;
}

// Thumb rotation-axis placement: origin plus intrinsic roll (x), pitch (y), yaw (z).
struct AxisConfig {
    Point3 origin{};
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;

    AxisConfig normalized() const {
        return {origin, normalize_angle(roll), normalize_angle(pitch), normalize_angle(yaw)};
    }
    bool operator==(const AxisConfig&) const = default;
};

struct SphereFingertip {
    Point3 center{};
    double radius = 1.0;

    SphereFingertip() = default;
    SphereFingertip(const Point3& c, double r) : center(c), radius(r) {
        if (!(r > 0.0)) {
            throw std::invalid_argument("SphereFingertip: radius must be positive");
        }
    }
};

// Intrinsic x -> y -> z rotation, translation = origin. The thumb axis is the frame's local z.
inline RigidTransform axis_frame(const AxisConfig& cfg) {
    return {Mat3::rot_x(cfg.roll) * Mat3::rot_y(cfg.pitch) * Mat3::rot_z(cfg.yaw), cfg.origin};
}

// Rodrigues rotation of p about the line through axis_point along axis_dir.
inline Point3 rotate_about_axis(const Point3& p, const Point3& axis_point, const UnitVec3& axis_dir,
                                double angle) {
    const Vec3 k = axis_dir.vec();
    const Vec3 v = p - axis_point;
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec3 rotated = v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
    return axis_point + rotated;
}

// Robust near 0 and pi, unlike acos of the dot product.
inline double angle_between(const Vec3& u, const Vec3& v) {
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

// Angle at the object centre between the two contact directions for an object of radius
// object_radius touching both tips. nullopt when no such placement exists.
inline std::optional<double> contact_angle(double d, double r_a, double r_b, double object_radius) {
    const double a = object_radius + r_a;
    const double b = object_radius + r_b;
    if (d > a + b || d <= std::abs(a - b)) {
        return std::nullopt;
    }
    const double c = (a * a + b * b - d * d) / (2.0 * a * b);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

inline std::optional<double> solve_object_placement(const SphereFingertip& tip_a,
                                                    const SphereFingertip& tip_b,
                                                    double object_radius) {
    if (object_radius < 0.0) {
        throw std::invalid_argument("solve_object_placement: object radius must be non-negative");
    }
    return contact_angle(distance(tip_a.center, tip_b.center), tip_a.radius, tip_b.radius,
                         object_radius);
}

// Contact-radius solver for a fixed pair of tip radii and minimum grasp angle. Largest object
// radius with contact angle >= theta_min follows from the law of cosines:
//   (R + r_a)(R + r_b) = (d^2 - (r_a - r_b)^2) / (2 (1 - cos theta_min)).
class ContactRadiusSolver {
public:
    ContactRadiusSolver(double r_a, double r_b, double theta_min)
        : sum_(r_a + r_b), dr2_((r_a - r_b) * (r_a - r_b)) {
        if (!(theta_min > 0.0) || theta_min > kPi) {
            throw std::invalid_argument("theta_min must be in (0, pi]");
        }
        inv_denominator_ = 1.0 / (2.0 * (1.0 - std::cos(theta_min)));
    }

    std::optional<double> r_max(double d) const {
        const double spread = d * d - dr2_;
        if (!(spread > 0.0)) {
            return std::nullopt;
        }
        const double r = 0.5 * (-sum_ + std::sqrt(dr2_ + 4.0 * spread * inv_denominator_));
        if (r < 0.0) {
            return std::nullopt;
        }
        return r;
    }

    // Collinear contact; interpenetrating tips clamp to zero.
    double r_min(double d) const { return std::max(0.0, 0.5 * (d - sum_)); }

private:
    double sum_;
    double dr2_;
    double inv_denominator_ = 0.0;
};

inline std::optional<double> solve_R_max(double d, double r_a, double r_b, double theta_min) {
    if (!(d > 0.0)) {
        throw std::invalid_argument("solve_R_max: separation must be positive");
    }
    return ContactRadiusSolver(r_a, r_b, theta_min).r_max(d);
}

inline double solve_R_min(double d, double r_a, double r_b) {
    if (!(d > 0.0)) {
        throw std::invalid_argument("solve_R_min: separation must be positive");
    }
    return std::max(0.0, 0.5 * (d - r_a - r_b));
}

}  // namespace thumbopt::geom
