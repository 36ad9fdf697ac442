#pragma once

// Output writers: result JSON, top-k CSV, and an SVG heatmap of |W| over two grid dimensions.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "thumbopt/grasp.hpp"
#include "thumbopt/hand.hpp"
#include "thumbopt/optimizer.hpp"

namespace thumbopt::report {

using nlohmann::json;

inline constexpr int kResultSchemaVersion = 1;

inline double deg(double rad) { return rad * 180.0 / geom::kPi; }

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline json config_json(const geom::AxisConfig& c) {
    return {{"x_mm", c.origin.x},     {"y_mm", c.origin.y},       {"z_mm", c.origin.z},
            {"roll_deg", deg(c.roll)}, {"pitch_deg", deg(c.pitch)}, {"yaw_deg", deg(c.yaw)}};
}

inline json interval_json(const manip::WidthInterval& w) {
    if (w.empty()) {
        return {{"empty", true}, {"width_mm", 0.0}};
    }
    return {{"empty", false}, {"lo_mm", w.lo()}, {"hi_mm", w.hi()}, {"width_mm", w.width()}};
}

inline json range_json(const grasp::Range& r) { return json::array({r.lo, r.hi}); }

// Part of the manipulation requirement [W_min, W_max] covered by W.
inline json coverage_json(const manip::WidthInterval& w, const grasp::Range& req) {
    json j = {{"requirement_mm", range_json(req)}};
    const manip::WidthInterval c = w.intersect(manip::WidthInterval(req.lo, req.hi));
    j["covered"] = interval_json(c);
    j["fraction"] = req.hi > req.lo ? c.width() / (req.hi - req.lo) : (c.empty() ? 0.0 : 1.0);
    return j;
}

inline json result_json(const opt::OptimizationResult& r) {
    const auto& m = r.meta;
    json dims = json::array();
    for (std::size_t k = 0; k < 6; ++k) {
        const auto& d = m.grid.dim(k);
        const bool angle = k >= 3;
        dims.push_back({{"name", opt::kDimNames[k]},
                        {"lo", angle ? deg(d.lo) : d.lo},
                        {"hi", angle ? deg(d.hi) : d.hi},
                        {"steps", d.count},
                        {"unit", angle ? "deg" : "mm"}});
    }
    json top = json::array();
    for (const auto& t : r.top) {
        json e = config_json(t.config);
        e["linear_index"] = t.linear_index;
        e["width"] = interval_json(t.width);
        top.push_back(e);
    }
    const auto& q = m.requirements;
    json out = {
        {"schema", "thumbopt.result"},
        {"schema_version", kResultSchemaVersion},
        {"status", r.completed ? "complete" : "partial"},
        {"omega_opt", nullptr},
        {"w_max_mm", r.w_max},
        {"counts",
         {{"total", m.grid.total()},
          {"evaluated", r.evaluated_count},
          {"valid", r.valid_count},
          {"pruned", r.pruned_count},
          {"next_index", r.next_index}}},
        {"top", top},
        {"metadata",
         {{"grid", dims},
          {"grid_bounds", "hand-size-relative defaults, not taken from a published design"},
          {"run_hash", hex64(m.grid_hash)},
          {"thumb_steps", m.thumb_steps},
          {"index_samples", m.index_samples},
          {"middle_samples", m.middle_samples},
          {"manipulation_window", json::array({m.manip_begin, m.manip_end})},
          {"requirements",
           {{"precision_mm", range_json(q.precision)},
            {"lateral_mm", range_json(q.lateral)},
            {"tripod_mm", range_json(q.tripod)},
            {"manipulation_mm", range_json(q.manipulation)},
            {"theta_min_deg", deg(q.theta_min)},
            {"alpha_perm_deg", deg(q.alpha_perm)},
            {"force_dir_limit_deg", deg(q.force_dir_limit)}}},
          {"delta_m_mm", m.delta_mm},
          {"workers", m.workers},
          {"pruning", m.pruning},
          {"wall_seconds", m.wall_seconds},
          {"throughput_configs_per_s", m.wall_seconds > 0.0 ? r.evaluated_count / m.wall_seconds : 0.0}}}};
    if (r.omega_opt) {
        json o = config_json(*r.omega_opt);
        o["linear_index"] = *r.opt_index;
        out["omega_opt"] = o;
        out["width"] = interval_json(*r.opt_width);
        out["manipulation_coverage"] = coverage_json(*r.opt_width, q.manipulation);
    }
    return out;
}

inline void write_top_csv(std::ostream& os, const std::vector<opt::RankedConfig>& top) {
    os << "rank,linear_index,x_mm,y_mm,z_mm,roll_deg,pitch_deg,yaw_deg,w_empty,w_lo_mm,w_hi_mm,w_width_mm\n";
    os.precision(17);
    std::size_t rank = 1;
    for (const auto& t : top) {
        const auto& c = t.config;
        os << rank++ << ',' << t.linear_index << ',' << c.origin.x << ',' << c.origin.y << ',' << c.origin.z << ','
           << deg(c.roll) << ',' << deg(c.pitch) << ',' << deg(c.yaw) << ',' << (t.width.empty() ? 1 : 0) << ',';
        if (t.width.empty()) {
            os << ",,0\n";
        } else {
            os << t.width.lo() << ',' << t.width.hi() << ',' << t.width.width() << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Heatmap

struct HeatmapCell {
    bool valid = false;
    double width = 0.0;
};

struct Heatmap {
    std::size_t dim_a = 0, dim_b = 1;
    std::vector<double> a_values, b_values;
    std::vector<HeatmapCell> cells;  // row-major, a slowest
    std::array<std::uint64_t, 6> anchor{};
};

// Slice through the grid: dimensions a and b vary, the others stay at the anchor indices.
inline Heatmap compute_heatmap(const HandModel& hand, const grasp::GraspRequirements& req, double delta_mm,
                               const opt::SearchGrid& grid, std::size_t dim_a, std::size_t dim_b,
                               const std::array<std::uint64_t, 6>& anchor) {
    Heatmap h;
    h.dim_a = dim_a;
    h.dim_b = dim_b;
    h.anchor = anchor;
    for (std::uint64_t k = 0; k < grid.dim(dim_a).count; ++k) h.a_values.push_back(grid.dim(dim_a).value(k));
    for (std::uint64_t k = 0; k < grid.dim(dim_b).count; ++k) h.b_values.push_back(grid.dim(dim_b).value(k));
    auto idx = anchor;
    for (std::uint64_t ia = 0; ia < grid.dim(dim_a).count; ++ia) {
        for (std::uint64_t ib = 0; ib < grid.dim(dim_b).count; ++ib) {
            idx[dim_a] = ia;
            idx[dim_b] = ib;
            const auto e = opt::evaluate_one(grid.config_of(idx), hand, req, delta_mm, grasp::CheckMode::early_exit);
            h.cells.push_back({e.verdict.valid(), e.width.width()});
        }
    }
    return h;
}

namespace detail {

// Five-stop blue-to-yellow ramp.
inline std::string ramp(double t) {
    static constexpr double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    t = std::min(1.0, std::max(0.0, t)) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                  static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                  static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

}  // namespace detail

inline void write_heatmap_svg(std::ostream& os, const Heatmap& h) {
    const double cell = 18.0, left = 70.0, top = 40.0;
    const std::size_t na = h.a_values.size(), nb = h.b_values.size();
    const double w = left + nb * cell + 120.0, ht = top + na * cell + 60.0;
    double wmax = 0.0;
    for (const auto& c : h.cells) wmax = std::max(wmax, c.width);
    auto label = [&](std::size_t dim, double v) {
        std::ostringstream s;
        s.precision(4);
        s << (dim >= 3 ? deg(v) : v);
        return s.str();
    };
    auto unit = [](std::size_t dim) { return dim >= 3 ? "deg" : "mm"; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << ht << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    os << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">|W| (mm) over " << opt::kDimNames[h.dim_a] << " x "
       << opt::kDimNames[h.dim_b] << ", other dimensions at the optimum; grey = invalid grasp</text>\n";
    for (std::size_t ia = 0; ia < na; ++ia) {
        for (std::size_t ib = 0; ib < nb; ++ib) {
            const auto& c = h.cells[ia * nb + ib];
            const std::string fill = c.valid ? detail::ramp(wmax > 0.0 ? c.width / wmax : 0.0) : "#d0d0d0";
            os << "<rect x=\"" << left + ib * cell << "\" y=\"" << top + ia * cell << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"" << fill << "\"><title>" << opt::kDimNames[h.dim_a] << '='
               << label(h.dim_a, h.a_values[ia]) << ' ' << opt::kDimNames[h.dim_b] << '='
               << label(h.dim_b, h.b_values[ib]) << (c.valid ? " |W|=" + std::to_string(c.width) : " invalid")
               << "</title></rect>\n";
        }
        os << "<text x=\"" << left - 4 << "\" y=\"" << top + ia * cell + cell * 0.7
           << "\" text-anchor=\"end\">" << label(h.dim_a, h.a_values[ia]) << "</text>\n";
    }
    for (std::size_t ib = 0; ib < nb; ++ib) {
        const double x = left + ib * cell + cell * 0.5, y = top + na * cell + 12;
        os << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"end\" transform=\"rotate(-60 " << x << ' ' << y
           << ")\">" << label(h.dim_b, h.b_values[ib]) << "</text>\n";
    }
    os << "<text x=\"12\" y=\"" << top + na * cell * 0.5 << "\" transform=\"rotate(-90 12 " << top + na * cell * 0.5
       << ")\" text-anchor=\"middle\">" << opt::kDimNames[h.dim_a] << " (" << unit(h.dim_a) << ")</text>\n";
    os << "<text x=\"" << left + nb * cell * 0.5 << "\" y=\"" << ht - 6 << "\" text-anchor=\"middle\">"
       << opt::kDimNames[h.dim_b] << " (" << unit(h.dim_b) << ")</text>\n";
    const double lx = left + nb * cell + 30;
    for (int s = 0; s <= 10; ++s) {
        os << "<rect x=\"" << lx << "\" y=\"" << top + (10 - s) * 12 << "\" width=\"14\" height=\"12\" fill=\""
           << detail::ramp(s / 10.0) << "\"/>\n";
    }
    os << "<text x=\"" << lx + 18 << "\" y=\"" << top + 10 << "\">" << wmax << "</text>\n";
    os << "<text x=\"" << lx + 18 << "\" y=\"" << top + 130 << "\">0</text>\n";
    os << "</svg>\n";
}

}  // namespace thumbopt::report
