#pragma once

// Exhaustive search over thumb-axis placements: filter by grasp validity, rank by the width of
// the manipulation interval. Results are independent of the worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ios>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "thumbopt/geom.hpp"
#include "thumbopt/grasp.hpp"
#include "thumbopt/hand.hpp"
#include "thumbopt/manip.hpp"

namespace thumbopt::opt {

using geom::AxisConfig;
using manip::WidthInterval;

// ---------------------------------------------------------------------------
// Grid

struct GridDim {
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t count = 1;

    // Cell centres: lo + (k + 1/2) (hi - lo) / count. A single cell sits at the midpoint.
    double value(std::uint64_t k) const {
        return lo + (static_cast<double>(k) + 0.5) * (hi - lo) / static_cast<double>(count);
    }
    bool operator==(const GridDim&) const = default;
};

inline constexpr std::array<const char*, 6> kDimNames{"x", "y", "z", "roll", "pitch", "yaw"};

// Row-major over (x, y, z, roll, pitch, yaw): x varies slowest, yaw fastest.
class SearchGrid {
public:
    SearchGrid() = default;
    explicit SearchGrid(const std::array<GridDim, 6>& dims) : dims_(dims) {
        total_ = 1;
        for (const auto& d : dims_) {
            if (d.count < 1) {
                throw std::invalid_argument("search grid: every dimension needs at least one step");
            }
            if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || d.lo > d.hi) {
                throw std::invalid_argument("search grid: each range needs finite lo <= hi");
            }
            if (total_ > std::numeric_limits<std::uint64_t>::max() / d.count) {
                throw std::overflow_error("search grid: total configuration count overflows");
            }
            total_ *= d.count;
        }
    }

    const std::array<GridDim, 6>& dims() const { return dims_; }
    const GridDim& dim(std::size_t k) const { return dims_[k]; }
    std::uint64_t total() const { return total_; }

    std::array<std::uint64_t, 6> indices_of(std::uint64_t linear) const {
        if (linear >= total_) {
            throw std::out_of_range("search grid: linear index out of range");
        }
        std::array<std::uint64_t, 6> idx{};
        for (std::size_t k = 6; k-- > 0;) {
            idx[k] = linear % dims_[k].count;
            linear /= dims_[k].count;
        }
        return idx;
    }

    std::uint64_t linear_of(const std::array<std::uint64_t, 6>& idx) const {
        std::uint64_t linear = 0;
        for (std::size_t k = 0; k < 6; ++k) {
            if (idx[k] >= dims_[k].count) {
                throw std::out_of_range("search grid: per-dimension index out of range");
            }
            linear = linear * dims_[k].count + idx[k];
        }
        return linear;
    }

    AxisConfig config_at(std::uint64_t linear) const { return config_of(indices_of(linear)); }

    AxisConfig config_of(const std::array<std::uint64_t, 6>& idx) const {
        AxisConfig c;
        c.origin = {dims_[0].value(idx[0]), dims_[1].value(idx[1]), dims_[2].value(idx[2])};
        c.roll = dims_[3].value(idx[3]);
        c.pitch = dims_[4].value(idx[4]);
        c.yaw = dims_[5].value(idx[5]);
        return c.normalized();
    }

    bool operator==(const SearchGrid& o) const { return dims_ == o.dims_; }

private:
    std::array<GridDim, 6> dims_{};
    std::uint64_t total_ = 1;
};

// Calls fn(linear, config) for every grid point in [begin, end).
template <typename Fn>
void enumerate_grid(const SearchGrid& grid, Fn&& fn, std::uint64_t begin = 0,
                    std::uint64_t end = std::numeric_limits<std::uint64_t>::max()) {
    end = std::min(end, grid.total());
    for (std::uint64_t k = begin; k < end; ++k) {
        fn(k, grid.config_at(k));
    }
}

// ---------------------------------------------------------------------------
// Per-configuration evaluation

struct Evaluation {
    grasp::GraspVerdict verdict;
    WidthInterval width;  // empty unless the grasp verdict is valid
    bool pruned = false;
};

// Verdict plus manipulation range; the range is only computed for valid configurations.
inline Evaluation evaluate_one(const AxisConfig& cfg, const HandModel& hand, const grasp::GraspRequirements& req,
                               double delta_mm, grasp::CheckMode mode = grasp::CheckMode::full) {
    Evaluation e;
    const kin::Trajectory thumb = hand.thumb_trajectory(cfg);
    e.verdict = grasp::is_valid_grasp(thumb, hand, req, mode);
    if (e.verdict.valid()) {
        e.width = manip::manipulation_range(thumb, hand, req, delta_mm).overall;
    }
    return e;
}

struct BoundingSphere {
    geom::Point3 center{};
    double radius = 0.0;
};

// Cheap rejection: every precision pair meeting the minimum-radius requirement has
// d <= r_T + r_I + 2 R_Gmin, so a thumb circle that stays farther than that from every index
// chunk sphere cannot pass the precision check. The full circle contains the sampled arc.
class PruneFilter {
public:
    PruneFilter() = default;
    PruneFilter(const HandModel& hand, const grasp::GraspRequirements& req, std::size_t chunk = 8) {
        threshold_ = hand.radii.thumb + hand.radii.index + 2.0 * req.precision.lo + 1e-6;
        tip_ = hand.thumb.tip;
        const auto& idx = hand.index.samples();
        for (std::size_t s = 0; s < idx.size(); s += chunk) {
            const std::size_t e = std::min(idx.size(), s + chunk);
            geom::Vec3 lo = idx[s].tip, hi = idx[s].tip;
            for (std::size_t k = s; k < e; ++k) {
                const auto& p = idx[k].tip;
                lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
                hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
            }
            BoundingSphere b{(lo + hi) * 0.5, 0.0};
            for (std::size_t k = s; k < e; ++k) {
                b.radius = std::max(b.radius, geom::distance(b.center, idx[k].tip));
            }
            b.radius += 1e-9;
            spheres_.push_back(b);
        }
    }

    // True when the configuration certainly fails the precision check.
    bool reject(const AxisConfig& cfg) const {
        const geom::RigidTransform frame = geom::axis_frame(cfg);
        const geom::Vec3 n = frame.rotation.column(2);
        const geom::Point3 c = frame.apply({0.0, 0.0, tip_.axial});
        for (const auto& b : spheres_) {
            const geom::Vec3 v = b.center - c;
            const double h = v.dot(n);
            const double p = std::sqrt(std::max(0.0, v.squared_norm() - h * h));
            const double dist = std::sqrt(h * h + (p - tip_.radial) * (p - tip_.radial));
            if (dist - b.radius <= threshold_) {
                return false;
            }
        }
        return true;
    }

    const std::vector<BoundingSphere>& spheres() const { return spheres_; }
    double threshold() const { return threshold_; }

private:
    std::vector<BoundingSphere> spheres_;
    kin::TipOffset tip_{};
    double threshold_ = 0.0;
};

// ---------------------------------------------------------------------------
// Results

struct RankedConfig {
    std::uint64_t linear_index = 0;
    AxisConfig config{};
    WidthInterval width;
    bool operator==(const RankedConfig&) const = default;
};

// Larger |W| first; equal widths resolved by the lower linear index.
inline bool ranks_before(const RankedConfig& a, const RankedConfig& b) {
    const double wa = a.width.width(), wb = b.width.width();
    if (wa != wb) {
        return wa > wb;
    }
    return a.linear_index < b.linear_index;
}

class TopK {
public:
    explicit TopK(std::size_t k = 10) : k_(k) {}

    void offer(const RankedConfig& r) {
        if (k_ == 0) {
            return;
        }
        if (items_.size() == k_ && !ranks_before(r, items_.back())) {
            return;
        }
        for (const auto& it : items_) {
            if (it.linear_index == r.linear_index) {
                return;
            }
        }
        items_.insert(std::upper_bound(items_.begin(), items_.end(), r, ranks_before), r);
        if (items_.size() > k_) {
            items_.pop_back();
        }
    }
    void merge(const TopK& o) {
        for (const auto& r : o.items_) {
            offer(r);
        }
    }
    const std::vector<RankedConfig>& items() const { return items_; }
    std::size_t capacity() const { return k_; }

private:
    std::size_t k_;
    std::vector<RankedConfig> items_;
};

// Running state of a search; also the checkpoint payload.
struct SearchState {
    std::uint64_t next_index = 0;
    std::uint64_t evaluated = 0;
    std::uint64_t valid = 0;
    std::uint64_t pruned = 0;
    // Best valid configuration so far, tracked apart from the top-k list so top_k = 0 still works.
    std::optional<RankedConfig> best;
    TopK top{10};

    void offer(const RankedConfig& r) {
        if (!best || ranks_before(r, *best)) {
            best = r;
        }
        top.offer(r);
    }
    void merge(const SearchState& o) {
        evaluated += o.evaluated;
        valid += o.valid;
        pruned += o.pruned;
        if (o.best && (!best || ranks_before(*o.best, *best))) {
            best = o.best;
        }
        top.merge(o.top);
    }
};

struct ResultMetadata {
    SearchGrid grid;
    std::uint64_t grid_hash = 0;
    std::size_t thumb_steps = 0;
    std::size_t index_samples = 0;
    std::size_t middle_samples = 0;
    std::size_t manip_begin = 0;
    std::size_t manip_end = 0;
    grasp::GraspRequirements requirements;
    double delta_mm = 0.0;
    unsigned workers = 1;
    double wall_seconds = 0.0;
    bool pruning = true;
};

struct OptimizationResult {
    std::optional<AxisConfig> omega_opt;
    std::optional<std::uint64_t> opt_index;
    std::optional<WidthInterval> opt_width;
    double w_max = 0.0;
    std::uint64_t valid_count = 0;
    std::uint64_t evaluated_count = 0;
    std::uint64_t pruned_count = 0;
    std::vector<RankedConfig> top;
    bool completed = false;
    std::uint64_t next_index = 0;
    ResultMetadata meta;

    // Everything except timing and worker count.
    bool same_outcome(const OptimizationResult& o) const {
        return omega_opt == o.omega_opt && opt_index == o.opt_index && opt_width == o.opt_width &&
               w_max == o.w_max && valid_count == o.valid_count && evaluated_count == o.evaluated_count &&
               pruned_count == o.pruned_count && top == o.top && completed == o.completed &&
               next_index == o.next_index && meta.grid_hash == o.meta.grid_hash;
    }
};

// ---------------------------------------------------------------------------
// Run fingerprint

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t k = 0; k < n; ++k) {
            h_ ^= p[k];
            h_ *= 0x100000001b3ULL;
        }
    }
    void f64(double v) { bytes(&v, sizeof v); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void vec(const geom::Vec3& v) {
        f64(v.x);
        f64(v.y);
        f64(v.z);
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t run_hash(const HandModel& hand, const grasp::GraspRequirements& req, const SearchGrid& grid,
                              double delta_mm, std::size_t top_k) {
    Fnv1a h;
    for (const auto& d : grid.dims()) {
        h.f64(d.lo);
        h.f64(d.hi);
        h.u64(d.count);
    }
    for (const grasp::Range& r : {req.precision, req.lateral, req.tripod, req.manipulation}) {
        h.f64(r.lo);
        h.f64(r.hi);
    }
    h.f64(req.theta_min);
    h.f64(req.alpha_perm);
    h.f64(req.force_dir_limit);
    h.f64(delta_mm);
    h.u64(top_k);
    h.f64(hand.radii.thumb);
    h.f64(hand.radii.index);
    h.f64(hand.radii.middle);
    h.f64(hand.thumb.tip.radial);
    h.f64(hand.thumb.tip.axial);
    h.f64(hand.thumb.tip.phase);
    h.f64(hand.thumb.pad_tilt);
    for (double a : hand.thumb.sweep) {
        h.f64(a);
    }
    for (const kin::Trajectory* t : {&hand.index, &hand.middle}) {
        h.u64(t->size());
        for (const auto& s : *t) {
            h.vec(s.tip);
            h.vec(s.tangent);
            h.vec(s.pad_normal);
            h.vec(s.side_normal);
        }
    }
    h.u64(hand.manip_begin);
    h.u64(hand.manip_stop());
    return h.value();
}

// ---------------------------------------------------------------------------
// Checkpoint file, text format version 1:
//
//   thumbopt-checkpoint 1
//   run_hash <16 hex digits>
//   total <grid size>
//   next_index <n>
//   evaluated <n>
//   valid <n>
//   pruned <n>
//   best <linear_index> <lo> <hi> <empty 0|1>     or   best none
//   top <count>
//   <linear_index> <lo> <hi> <empty 0|1>          one line per entry, best first
//
// Floating-point fields are C99 hex floats so a resume restores bit-identical state.

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string hex_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double parse_hex_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw CheckpointError("checkpoint: malformed floating-point field '" + s + "'");
    }
    return v;
}

inline std::string ranked_line(const RankedConfig& r) {
    return std::to_string(r.linear_index) + " " + hex_double(r.width.lo()) + " " + hex_double(r.width.hi()) + " " +
           (r.width.empty() ? "1" : "0");
}

inline RankedConfig parse_ranked(std::istream& in, const SearchGrid& grid) {
    std::uint64_t idx = 0;
    std::string lo, hi;
    int empty = 0;
    if (!(in >> idx >> lo >> hi >> empty)) {
        throw CheckpointError("checkpoint: malformed ranked entry");
    }
    RankedConfig r;
    r.linear_index = idx;
    r.config = grid.config_at(idx);
    r.width = empty ? WidthInterval::empty_interval() : WidthInterval(parse_hex_double(lo), parse_hex_double(hi));
    return r;
}

}  // namespace detail

inline void write_checkpoint(const std::string& path, std::uint64_t hash, const SearchGrid& grid,
                             const SearchState& st) {
    std::ostringstream out;
    out << "thumbopt-checkpoint " << kCheckpointVersion << "\n";
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    out << "run_hash " << hex << "\n";
    out << "total " << grid.total() << "\n";
    out << "next_index " << st.next_index << "\n";
    out << "evaluated " << st.evaluated << "\n";
    out << "valid " << st.valid << "\n";
    out << "pruned " << st.pruned << "\n";
    out << "best " << (st.best ? detail::ranked_line(*st.best) : std::string("none")) << "\n";
    out << "top " << st.top.items().size() << "\n";
    for (const auto& r : st.top.items()) {
        out << detail::ranked_line(r) << "\n";
    }
    // Write-then-rename so an interrupted write never leaves a truncated checkpoint.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) {
            throw CheckpointError("cannot write checkpoint: " + tmp);
        }
        f << out.str();
        if (!f) {
            throw CheckpointError("failed writing checkpoint: " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

inline SearchState read_checkpoint(const std::string& path, std::uint64_t expected_hash, const SearchGrid& grid,
                                   std::size_t top_k) {
    std::ifstream in(path);
    if (!in) {
        throw CheckpointError("cannot open checkpoint: " + path);
    }
    auto expect = [&](const char* key) {
        std::string k;
        if (!(in >> k) || k != key) {
            throw CheckpointError(std::string("checkpoint: expected '") + key + "'");
        }
    };
    int version = 0;
    expect("thumbopt-checkpoint");
    if (!(in >> version) || version != kCheckpointVersion) {
        throw CheckpointError("checkpoint: unsupported version");
    }
    std::string hash_hex;
    expect("run_hash");
    in >> hash_hex;
    std::uint64_t hash = 0;
    try {
        hash = std::stoull(hash_hex, nullptr, 16);
    } catch (const std::exception&) {
        throw CheckpointError("checkpoint: malformed run hash");
    }
    if (hash != expected_hash) {
        throw CheckpointError("checkpoint: run hash does not match this configuration");
    }
    std::uint64_t total = 0;
    expect("total");
    in >> total;
    if (total != grid.total()) {
        throw CheckpointError("checkpoint: grid size mismatch");
    }
    SearchState st;
    st.top = TopK(top_k);
    expect("next_index");
    in >> st.next_index;
    expect("evaluated");
    in >> st.evaluated;
    expect("valid");
    in >> st.valid;
    expect("pruned");
    in >> st.pruned;
    expect("best");
    const auto pos = in.tellg();
    std::string word;
    in >> word;
    if (word != "none") {
        in.seekg(pos);
        st.best = detail::parse_ranked(in, grid);
    }
    std::size_t n = 0;
    expect("top");
    in >> n;
    for (std::size_t k = 0; k < n; ++k) {
        st.top.offer(detail::parse_ranked(in, grid));
    }
    if (!in || st.next_index > grid.total()) {
        throw CheckpointError("checkpoint: truncated or inconsistent file");
    }
    return st;
}

// ---------------------------------------------------------------------------
// Search

struct OptimizeOptions {
    unsigned workers = 1;
    std::size_t top_k = 10;
    bool pruning = true;
    std::uint64_t block_size = 1u << 18;  // configurations between reductions and checkpoints
    std::uint64_t chunk_size = 512;       // unit of work handed to a worker
    std::string checkpoint_path;          // empty: no checkpointing
    bool resume = true;                   // continue from checkpoint_path when it exists
    std::optional<std::uint64_t> stop_after;  // stop (as if interrupted) once next_index reaches this
    std::function<void(const SearchState&)> on_block;  // called after every block reduction
};

inline unsigned default_worker_count() {
    if (const char* env = std::getenv("THUMBOPT_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) {
                return static_cast<unsigned>(v);
            }
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline void evaluate_range(const SearchGrid& grid, const HandModel& hand, const grasp::GraspRequirements& req,
                           double delta_mm, const PruneFilter* prune, std::uint64_t begin, std::uint64_t end,
                           SearchState& st) {
    for (std::uint64_t k = begin; k < end; ++k) {
        const AxisConfig cfg = grid.config_at(k);
        ++st.evaluated;
        if (prune && prune->reject(cfg)) {
            ++st.pruned;
            continue;
        }
        const Evaluation e = evaluate_one(cfg, hand, req, delta_mm, grasp::CheckMode::early_exit);
        if (!e.verdict.valid()) {
            continue;
        }
        ++st.valid;
        st.offer({k, cfg, e.width});
    }
}

}  // namespace detail

inline OptimizationResult optimize(const HandModel& hand, const grasp::GraspRequirements& req,
                                   const SearchGrid& grid, double delta_mm, const OptimizeOptions& opts = {}) {
    hand.validate();
    req.validate();
    if (grid.total() == 0) {
        throw std::invalid_argument("optimize: empty grid");
    }
    if (!(delta_mm >= 0.0) || !std::isfinite(delta_mm)) {
        throw std::invalid_argument("optimize: fingertip deformation must be finite and non-negative");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const unsigned workers = std::max(1u, opts.workers);
    const std::uint64_t hash = run_hash(hand, req, grid, delta_mm, opts.top_k);
    std::optional<PruneFilter> prune;
    if (opts.pruning) {
        prune.emplace(hand, req);
    }

    SearchState state;
    state.top = TopK(opts.top_k);
    if (!opts.checkpoint_path.empty() && opts.resume && std::filesystem::exists(opts.checkpoint_path)) {
        state = read_checkpoint(opts.checkpoint_path, hash, grid, opts.top_k);
    }

    const std::uint64_t stop = std::min(grid.total(), opts.stop_after.value_or(grid.total()));
    const std::uint64_t block = std::max<std::uint64_t>(1, opts.block_size);
    const std::uint64_t chunk = std::max<std::uint64_t>(1, opts.chunk_size);

    while (state.next_index < stop) {
        const std::uint64_t b0 = state.next_index;
        const std::uint64_t b1 = std::min(stop, b0 + block);
        const std::uint64_t n_chunks = (b1 - b0 + chunk - 1) / chunk;
        std::vector<SearchState> partial(n_chunks);
        for (auto& p : partial) {
            p.top = TopK(opts.top_k);
        }
        std::atomic<std::uint64_t> next_chunk{0};
        auto work = [&] {
            for (std::uint64_t c; (c = next_chunk.fetch_add(1)) < n_chunks;) {
                const std::uint64_t s = b0 + c * chunk;
                detail::evaluate_range(grid, hand, req, delta_mm, prune ? &*prune : nullptr, s,
                                       std::min(b1, s + chunk), partial[c]);
            }
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back(work);
            }
            for (auto& t : pool) {
                t.join();
            }
        }
        for (const auto& p : partial) {
            state.merge(p);
        }
        state.next_index = b1;
        if (!opts.checkpoint_path.empty()) {
            write_checkpoint(opts.checkpoint_path, hash, grid, state);
        }
        if (opts.on_block) {
            opts.on_block(state);
        }
    }

    OptimizationResult res;
    res.valid_count = state.valid;
    res.evaluated_count = state.evaluated;
    res.pruned_count = state.pruned;
    res.top = state.top.items();
    res.next_index = state.next_index;
    res.completed = state.next_index == grid.total();
    if (state.best) {
        res.omega_opt = state.best->config;
        res.opt_index = state.best->linear_index;
        res.opt_width = state.best->width;
        res.w_max = state.best->width.width();
    }
    res.meta.grid = grid;
    res.meta.grid_hash = hash;
    res.meta.thumb_steps = hand.thumb.sweep.size();
    res.meta.index_samples = hand.index.size();
    res.meta.middle_samples = hand.middle.size();
    res.meta.manip_begin = hand.manip_begin;
    res.meta.manip_end = hand.manip_stop();
    res.meta.requirements = req;
    res.meta.delta_mm = delta_mm;
    res.meta.workers = workers;
    res.meta.pruning = opts.pruning;
    res.meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace thumbopt::opt
