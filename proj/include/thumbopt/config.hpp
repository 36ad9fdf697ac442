#pragma once

// Run configuration: a JSON document describing the hand, the requirements, the search grid and
// output options. Lengths are millimetres; angles are degrees unless units.angle is "rad".
// Parsed angles are held in radians.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "thumbopt/geom.hpp"
#include "thumbopt/grasp.hpp"
#include "thumbopt/hand.hpp"
#include "thumbopt/kinematics.hpp"
#include "thumbopt/manip.hpp"
#include "thumbopt/optimizer.hpp"

namespace thumbopt::config {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrameSpec {
    geom::Point3 origin{};
    geom::Vec3 u_axis{1.0, 0.0, 0.0};
    geom::Vec3 v_axis{0.0, 1.0, 0.0};
    bool operator==(const FrameSpec&) const = default;

    // Gram-Schmidt on (u, v); the third axis is u x v.
    geom::RigidTransform transform() const {
        const geom::UnitVec3 u(u_axis);
        const geom::UnitVec3 v(v_axis - u.vec() * u.dot(v_axis));
        const geom::Vec3 w = u.vec().cross(v.vec());
        geom::Mat3 r;
        for (int k = 0; k < 3; ++k) {
            const geom::Vec3& col = k == 0 ? u.vec() : (k == 1 ? v.vec() : w);
            r(0, k) = col.x;
            r(1, k) = col.y;
            r(2, k) = col.z;
        }
        return {r, origin};
    }
};

struct FourBarSpec {
    double ground = 0.0, input = 0.0, coupler = 0.0, output = 0.0;
    double coupler_point_along = 0.0, coupler_point_perp = 0.0;
    double ground_angle = 0.0;  // rad
    FrameSpec frame{};
    kin::Branch branch = kin::Branch::open;
    double angle_begin = 0.0, angle_end = 0.0;  // rad
    std::size_t steps = 100;
    bool operator==(const FourBarSpec&) const = default;
};

struct PolylineSpec {
    std::string file;  // as written in the config
    bool operator==(const PolylineSpec&) const = default;
};

using FingerSpec = std::variant<FourBarSpec, PolylineSpec>;

struct PistonCrankDrive {
    double crank_radius = 0.0;
    double rod_length = 0.0;
    double stroke_begin = 0.0, stroke_end = 0.0;
    double angle_offset = 0.0;  // rad
    double sign = 1.0;
    bool operator==(const PistonCrankDrive&) const = default;
};

struct ThumbSpec {
    kin::TipOffset tip{};
    double sweep_begin = 0.0, sweep_end = 0.0;  // rad
    std::size_t steps = 100;
    std::optional<PistonCrankDrive> piston_crank;
    bool operator==(const ThumbSpec& o) const {
        return tip.radial == o.tip.radial && tip.axial == o.tip.axial && tip.phase == o.tip.phase &&
               sweep_begin == o.sweep_begin && sweep_end == o.sweep_end && steps == o.steps &&
               piston_crank == o.piston_crank;
    }
};

struct HandSpec {
    FingertipRadii radii{};
    geom::Vec3 palm_axis{0.0, 0.0, 1.0};
    geom::Vec3 thumb_side{1.0, 0.0, 0.0};
    double pad_tilt = 0.0;  // rad
    ThumbSpec thumb{};
    FingerSpec index{};
    FingerSpec middle{};
    std::optional<std::array<std::size_t, 2>> manipulation_window;
    bool operator==(const HandSpec& o) const {
        return radii.thumb == o.radii.thumb && radii.index == o.radii.index && radii.middle == o.radii.middle &&
               palm_axis == o.palm_axis && thumb_side == o.thumb_side && pad_tilt == o.pad_tilt &&
               thumb == o.thumb && index == o.index && middle == o.middle &&
               manipulation_window == o.manipulation_window;
    }
};

struct SearchSpec {
    unsigned workers = 0;  // 0: default_worker_count()
    std::size_t top_k = 10;
    bool pruning = true;
    std::string checkpoint;
    std::uint64_t checkpoint_block = 1u << 18;
    bool operator==(const SearchSpec&) const = default;
};

struct OutputSpec {
    std::string directory = "thumbopt_out";
    std::array<std::size_t, 2> heatmap_dims{0, 1};
    bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
    HandSpec hand{};
    grasp::GraspRequirements requirements{};
    manip::DeformationModel deformation{};
    opt::SearchGrid grid{};
    SearchSpec search{};
    OutputSpec output{};
    std::string base_dir = ".";  // directory relative paths resolve against; not serialized

    bool operator==(const RunConfig& o) const {
        return hand == o.hand && requirements == o.requirements && deformation == o.deformation &&
               grid == o.grid && search == o.search && output == o.output;
    }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Reader {
public:
    Reader(const json& j, std::string path, double angle_scale) : j_(j), path_(std::move(path)), scale_(angle_scale) {}

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    Reader at(const char* key) const {
        if (!j_.is_object() || !j_.contains(key)) {
            fail(std::string("missing field '") + key + "'");
        }
        return {j_.at(key), path_ + "." + key, scale_};
    }

    double number() const {
        if (!j_.is_number()) {
            fail("expected a number");
        }
        return j_.get<double>();
    }
    double length() const { return number(); }
    double angle() const { return number() * scale_; }
    double positive_length() const {
        const double v = number();
        if (!(v > 0.0)) {
            fail("expected a positive length");
        }
        return v;
    }
    std::uint64_t count() const {
        if (!j_.is_number_integer() || j_.get<std::int64_t>() < 1) {
            fail("expected a positive integer");
        }
        return j_.get<std::uint64_t>();
    }
    bool boolean() const {
        if (!j_.is_boolean()) {
            fail("expected true or false");
        }
        return j_.get<bool>();
    }
    std::string string() const {
        if (!j_.is_string()) {
            fail("expected a string");
        }
        return j_.get<std::string>();
    }
    std::array<double, 2> pair(bool angle) const {
        if (!j_.is_array() || j_.size() != 2 || !j_[0].is_number() || !j_[1].is_number()) {
            fail("expected a two-element numeric array");
        }
        const double s = angle ? scale_ : 1.0;
        return {j_[0].get<double>() * s, j_[1].get<double>() * s};
    }
    geom::Vec3 vec3() const {
        if (!j_.is_array() || j_.size() != 3) {
            fail("expected a three-element numeric array");
        }
        for (const auto& e : j_) {
            if (!e.is_number()) {
                fail("expected a three-element numeric array");
            }
        }
        return {j_[0].get<double>(), j_[1].get<double>(), j_[2].get<double>()};
    }
    grasp::Range range() const {
        const auto p = pair(false);
        if (!(p[0] >= 0.0 && p[0] <= p[1])) {
            fail("expected [lo, hi] with 0 <= lo <= hi");
        }
        return {p[0], p[1]};
    }

private:
    const json& j_;
    std::string path_;
    double scale_;
};

inline FrameSpec parse_frame(const Reader& r) {
    FrameSpec f;
    f.origin = r.at("origin").vec3();
    f.u_axis = r.at("u_axis").vec3();
    f.v_axis = r.at("v_axis").vec3();
    if (f.u_axis.norm() == 0.0 || f.u_axis.cross(f.v_axis).norm() == 0.0) {
        r.fail("frame axes must be non-zero and not parallel");
    }
    return f;
}

inline FingerSpec parse_finger(const Reader& r) {
    const std::string src = r.at("source").string();
    if (src == "polyline") {
        return PolylineSpec{r.at("file").string()};
    }
    if (src != "four_bar") {
        r.fail("source must be 'four_bar' or 'polyline'");
    }
    FourBarSpec fb;
    const Reader l = r.at("linkage");
    fb.ground = l.at("ground").positive_length();
    fb.input = l.at("input").positive_length();
    fb.coupler = l.at("coupler").positive_length();
    fb.output = l.at("output").positive_length();
    fb.coupler_point_along = l.at("coupler_point_along").length();
    fb.coupler_point_perp = l.at("coupler_point_perp").length();
    fb.ground_angle = l.at("ground_angle").angle();
    fb.frame = parse_frame(r.at("frame"));
    const auto in = r.at("input_angle").pair(true);
    fb.angle_begin = in[0];
    fb.angle_end = in[1];
    fb.steps = r.at("steps").count();
    if (fb.steps < 2) {
        r.at("steps").fail("need at least two samples");
    }
    if (r.has("branch")) {
        const std::string b = r.at("branch").string();
        if (b != "open" && b != "crossed") {
            r.at("branch").fail("expected 'open' or 'crossed'");
        }
        fb.branch = b == "open" ? kin::Branch::open : kin::Branch::crossed;
    }
    return fb;
}

inline ThumbSpec parse_thumb(const Reader& r) {
    ThumbSpec t;
    const Reader tip = r.at("tip_offset");
    t.tip.radial = tip.at("radial").length();
    if (!(t.tip.radial > 0.0)) {
        tip.at("radial").fail("thumb tip must be off the rotation axis (radial > 0)");
    }
    t.tip.axial = tip.at("axial").length();
    t.tip.phase = tip.has("phase") ? tip.at("phase").angle() : 0.0;
    t.steps = r.at("steps").count();
    if (t.steps < 2) {
        r.at("steps").fail("need at least two steps");
    }
    if (r.has("piston_crank")) {
        const Reader pc = r.at("piston_crank");
        PistonCrankDrive d;
        d.crank_radius = pc.at("crank_radius").positive_length();
        d.rod_length = pc.at("rod_length").positive_length();
        if (!(d.rod_length > d.crank_radius)) {
            pc.at("rod_length").fail("rod must be longer than the crank radius");
        }
        const auto s = pc.at("stroke").pair(false);
        d.stroke_begin = s[0];
        d.stroke_end = s[1];
        d.angle_offset = pc.has("angle_offset") ? pc.at("angle_offset").angle() : 0.0;
        d.sign = pc.has("sign") ? pc.at("sign").number() : 1.0;
        if (d.sign != 1.0 && d.sign != -1.0) {
            pc.at("sign").fail("expected 1 or -1");
        }
        t.piston_crank = d;
    } else {
        const auto s = r.at("sweep").pair(true);
        t.sweep_begin = s[0];
        t.sweep_end = s[1];
        if (t.sweep_begin == t.sweep_end) {
            r.at("sweep").fail("sweep must not be degenerate");
        }
    }
    return t;
}

inline opt::GridDim parse_dim(const Reader& r, bool angle) {
    const auto range = r.at("range").pair(angle);
    if (!(range[0] <= range[1])) {
        r.at("range").fail("expected lo <= hi");
    }
    return {range[0], range[1], r.at("steps").count()};
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j, const std::string& base_dir = ".") {
    using detail::Reader;
    RunConfig cfg;
    cfg.base_dir = base_dir;
    if (!j.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
        throw ConfigError("config.schema_version: unsupported version");
    }
    double scale = geom::kPi / 180.0;
    if (j.contains("units")) {
        const Reader u(j.at("units"), "config.units", 1.0);
        if (u.has("length") && u.at("length").string() != "mm") {
            u.at("length").fail("only 'mm' is supported");
        }
        if (u.has("angle")) {
            const std::string a = u.at("angle").string();
            if (a == "rad") {
                scale = 1.0;
            } else if (a != "deg") {
                u.at("angle").fail("expected 'deg' or 'rad'");
            }
        }
    }
    const Reader root(j, "config", scale);

    // hand
    const Reader h = root.at("hand");
    const Reader rad = h.at("fingertip_radii");
    cfg.hand.radii = {rad.at("thumb").positive_length(), rad.at("index").positive_length(),
                      rad.at("middle").positive_length()};
    if (h.has("normals")) {
        const Reader n = h.at("normals");
        if (n.has("palm_axis")) {
            cfg.hand.palm_axis = n.at("palm_axis").vec3();
        }
        if (n.has("thumb_side")) {
            cfg.hand.thumb_side = n.at("thumb_side").vec3();
        }
        if (n.has("pad_tilt")) {
            cfg.hand.pad_tilt = n.at("pad_tilt").angle();
        }
        if (cfg.hand.palm_axis.norm() == 0.0 || cfg.hand.thumb_side.norm() == 0.0) {
            n.fail("normal reference vectors must be non-zero");
        }
    }
    cfg.hand.thumb = detail::parse_thumb(h.at("thumb"));
    cfg.hand.index = detail::parse_finger(h.at("index"));
    cfg.hand.middle = detail::parse_finger(h.at("middle"));
    if (h.has("manipulation_window")) {
        const auto w = h.at("manipulation_window").pair(false);
        if (!(w[0] >= 0.0 && w[0] < w[1]) || w[0] != std::floor(w[0]) || w[1] != std::floor(w[1])) {
            h.at("manipulation_window").fail("expected integer sample indices [begin, end) with begin < end");
        }
        cfg.hand.manipulation_window = std::array<std::size_t, 2>{static_cast<std::size_t>(w[0]),
                                                                  static_cast<std::size_t>(w[1])};
    }

    // requirements
    if (root.has("requirements")) {
        const Reader q = root.at("requirements");
        auto& req = cfg.requirements;
        if (q.has("precision")) req.precision = q.at("precision").range();
        if (q.has("lateral")) req.lateral = q.at("lateral").range();
        if (q.has("tripod")) req.tripod = q.at("tripod").range();
        if (q.has("manipulation")) req.manipulation = q.at("manipulation").range();
        if (q.has("theta_min")) req.theta_min = q.at("theta_min").angle();
        if (q.has("alpha_perm")) req.alpha_perm = q.at("alpha_perm").angle();
        if (q.has("force_dir_limit")) req.force_dir_limit = q.at("force_dir_limit").angle();
        try {
            req.validate();
        } catch (const std::invalid_argument& e) {
            q.fail(e.what());
        }
    }

    if (root.has("deformation")) {
        const Reader d = root.at("deformation");
        cfg.deformation.force_n = d.at("force_n").number();
        cfg.deformation.youngs_modulus_pa = d.at("youngs_modulus_pa").number();
        if (!(cfg.deformation.force_n > 0.0 && cfg.deformation.youngs_modulus_pa > 0.0)) {
            d.fail("force and Young's modulus must be positive");
        }
    }

    const Reader g = root.at("grid");
    std::array<opt::GridDim, 6> dims{};
    for (std::size_t k = 0; k < 6; ++k) {
        dims[k] = detail::parse_dim(g.at(opt::kDimNames[k]), k >= 3);
    }
    try {
        cfg.grid = opt::SearchGrid(dims);
    } catch (const std::exception& e) {
        g.fail(e.what());
    }

    if (root.has("search")) {
        const Reader s = root.at("search");
        if (s.has("workers")) {
            const Reader w = s.at("workers");
            const double v = w.number();
            if (v < 0 || v != std::floor(v)) {
                w.fail("expected a non-negative integer");
            }
            cfg.search.workers = static_cast<unsigned>(v);
        }
        if (s.has("top_k")) cfg.search.top_k = s.at("top_k").count();
        if (s.has("pruning")) cfg.search.pruning = s.at("pruning").boolean();
        if (s.has("checkpoint")) cfg.search.checkpoint = s.at("checkpoint").string();
        if (s.has("checkpoint_block")) cfg.search.checkpoint_block = s.at("checkpoint_block").count();
    }
    if (root.has("output")) {
        const Reader o = root.at("output");
        if (o.has("directory")) cfg.output.directory = o.at("directory").string();
        if (o.has("heatmap_dims")) {
            const Reader hd = o.at("heatmap_dims");
            std::array<std::size_t, 2> dims2{};
            for (std::size_t k = 0; k < 2; ++k) {
                const json& e = j.at("output").at("heatmap_dims");
                if (!e.is_array() || e.size() != 2 || !e[k].is_string()) {
                    hd.fail("expected two dimension names");
                }
                const std::string name = e[k].get<std::string>();
                std::size_t idx = 6;
                for (std::size_t d = 0; d < 6; ++d) {
                    if (name == opt::kDimNames[d]) idx = d;
                }
                if (idx == 6) {
                    hd.fail("unknown dimension '" + name + "'");
                }
                dims2[k] = idx;
            }
            if (dims2[0] == dims2[1]) {
                hd.fail("dimensions must differ");
            }
            cfg.output.heatmap_dims = dims2;
        }
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    const auto parent = std::filesystem::path(path).parent_path();
    return parse_run_config(j, parent.empty() ? "." : parent.string());
}

// ---------------------------------------------------------------------------
// Serialization (angles written in radians so a round trip is exact)

namespace detail {

inline json vec_json(const geom::Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline json finger_json(const FingerSpec& f) {
    if (const auto* p = std::get_if<PolylineSpec>(&f)) {
        return {{"source", "polyline"}, {"file", p->file}};
    }
    const auto& fb = std::get<FourBarSpec>(f);
    return {{"source", "four_bar"},
            {"linkage",
             {{"ground", fb.ground},
              {"input", fb.input},
              {"coupler", fb.coupler},
              {"output", fb.output},
              {"coupler_point_along", fb.coupler_point_along},
              {"coupler_point_perp", fb.coupler_point_perp},
              {"ground_angle", fb.ground_angle}}},
            {"frame",
             {{"origin", vec_json(fb.frame.origin)},
              {"u_axis", vec_json(fb.frame.u_axis)},
              {"v_axis", vec_json(fb.frame.v_axis)}}},
            {"input_angle", json::array({fb.angle_begin, fb.angle_end})},
            {"steps", fb.steps},
            {"branch", fb.branch == kin::Branch::open ? "open" : "crossed"}};
}

inline json range_json(const grasp::Range& r) { return json::array({r.lo, r.hi}); }

}  // namespace detail

inline json to_json(const RunConfig& c) {
    using detail::vec_json;
    json thumb = {{"tip_offset", {{"radial", c.hand.thumb.tip.radial},
                                  {"axial", c.hand.thumb.tip.axial},
                                  {"phase", c.hand.thumb.tip.phase}}},
                  {"steps", c.hand.thumb.steps}};
    if (c.hand.thumb.piston_crank) {
        const auto& d = *c.hand.thumb.piston_crank;
        thumb["piston_crank"] = {{"crank_radius", d.crank_radius},
                                 {"rod_length", d.rod_length},
                                 {"stroke", json::array({d.stroke_begin, d.stroke_end})},
                                 {"angle_offset", d.angle_offset},
                                 {"sign", d.sign}};
    } else {
        thumb["sweep"] = json::array({c.hand.thumb.sweep_begin, c.hand.thumb.sweep_end});
    }
    json hand = {{"fingertip_radii",
                  {{"thumb", c.hand.radii.thumb}, {"index", c.hand.radii.index}, {"middle", c.hand.radii.middle}}},
                 {"normals",
                  {{"palm_axis", vec_json(c.hand.palm_axis)},
                   {"thumb_side", vec_json(c.hand.thumb_side)},
                   {"pad_tilt", c.hand.pad_tilt}}},
                 {"thumb", thumb},
                 {"index", detail::finger_json(c.hand.index)},
                 {"middle", detail::finger_json(c.hand.middle)}};
    if (c.hand.manipulation_window) {
        hand["manipulation_window"] = json::array({(*c.hand.manipulation_window)[0], (*c.hand.manipulation_window)[1]});
    }
    const auto& q = c.requirements;
    json grid = json::object();
    for (std::size_t k = 0; k < 6; ++k) {
        const auto& d = c.grid.dim(k);
        grid[opt::kDimNames[k]] = {{"range", json::array({d.lo, d.hi})}, {"steps", d.count}};
    }
    return {{"schema_version", kSchemaVersion},
            {"units", {{"length", "mm"}, {"angle", "rad"}}},
            {"hand", hand},
            {"requirements",
             {{"precision", detail::range_json(q.precision)},
              {"lateral", detail::range_json(q.lateral)},
              {"tripod", detail::range_json(q.tripod)},
              {"manipulation", detail::range_json(q.manipulation)},
              {"theta_min", q.theta_min},
              {"alpha_perm", q.alpha_perm},
              {"force_dir_limit", q.force_dir_limit}}},
            {"deformation",
             {{"force_n", c.deformation.force_n}, {"youngs_modulus_pa", c.deformation.youngs_modulus_pa}}},
            {"grid", grid},
            {"search",
             {{"workers", c.search.workers},
              {"top_k", c.search.top_k},
              {"pruning", c.search.pruning},
              {"checkpoint", c.search.checkpoint},
              {"checkpoint_block", c.search.checkpoint_block}}},
            {"output",
             {{"directory", c.output.directory},
              {"heatmap_dims", json::array({opt::kDimNames[c.output.heatmap_dims[0]],
                                            opt::kDimNames[c.output.heatmap_dims[1]]})}}}};
}

// ---------------------------------------------------------------------------
// Model construction

inline std::string resolve(const RunConfig& c, const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (std::filesystem::path(c.base_dir) / fp).string();
}

inline kin::Trajectory build_finger(const RunConfig& c, const FingerSpec& f, const kin::NormalModel& nm) {
    if (const auto* p = std::get_if<PolylineSpec>(&f)) {
        return kin::finger_trajectory(kin::read_polyline_csv(resolve(c, p->file)), nm);
    }
    const auto& fb = std::get<FourBarSpec>(f);
    kin::FourBarSource src;
    src.linkage = {fb.ground, fb.input, fb.coupler, fb.output, fb.coupler_point_along, fb.coupler_point_perp,
                   fb.ground_angle, fb.frame.transform()};
    src.branch = fb.branch;
    src.angle_begin = fb.angle_begin;
    src.angle_end = fb.angle_end;
    src.steps = fb.steps;
    return kin::finger_trajectory(src, nm);
}

inline std::vector<double> thumb_sweep(const ThumbSpec& t) {
    if (t.piston_crank) {
        const auto& d = *t.piston_crank;
        kin::PistonCrank pc;
        pc.crank_radius = d.crank_radius;
        pc.rod_length = d.rod_length;
        return kin::stroke_sweep_angles(pc, d.stroke_begin, d.stroke_end, t.steps, d.angle_offset, d.sign);
    }
    return kin::linspace(t.sweep_begin, t.sweep_end, t.steps);
}

inline HandModel build_hand(const RunConfig& c) {
    kin::NormalModel nm;
    nm.palm_axis = geom::UnitVec3(c.hand.palm_axis);
    nm.thumb_side = geom::UnitVec3(c.hand.thumb_side);
    nm.pad_tilt = c.hand.pad_tilt;
    HandModel h;
    h.radii = c.hand.radii;
    h.thumb.tip = c.hand.thumb.tip;
    h.thumb.sweep = thumb_sweep(c.hand.thumb);
    h.thumb.pad_tilt = c.hand.pad_tilt;
    h.index = build_finger(c, c.hand.index, nm);
    h.middle = build_finger(c, c.hand.middle, nm);
    if (c.hand.manipulation_window) {
        h.manip_begin = (*c.hand.manipulation_window)[0];
        h.manip_end = (*c.hand.manipulation_window)[1];
    }
    h.validate();
    return h;
}

}  // namespace thumbopt::config
