// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "json.hpp"
#include "thumbopt/config.hpp"
#include "thumbopt/kinematics.hpp"
#include "thumbopt/manip.hpp"
#include "thumbopt/optimizer.hpp"
#include "thumbopt/oracle.hpp"
#include "thumbopt/reference.hpp"

using namespace thumbopt;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int n, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
    failures += !pass;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rad(double d) { return d * geom::kPi / 180.0; }
double report_deg(double r) { return r * 180.0 / geom::kPi; }

opt::SearchGrid neighbourhood(const geom::AxisConfig& c) {
    auto around = [](double v, double s) { return opt::GridDim{v - 1.5 * s, v + 1.5 * s, 3}; };
    return opt::SearchGrid({around(c.origin.x, 4.0), around(c.origin.y, 4.0), around(c.origin.z, 4.0),
                            around(c.roll, rad(3.0)), around(c.pitch, rad(3.0)), around(c.yaw, rad(3.0))});
}

void criterion1() {
    const double d = manip::delta_m(10.0, 134.3e3);
    report(1, std::abs(d - 4.87) <= 0.005, fmt("delta_m(10 N, 134.3 kPa) = %.6f mm (target 4.87 +/- 0.005)", d));
}

void criterion2() {
    const auto t0 = Clock::now();
    const auto a = oracle::verify_contact_angles(1000, 2024);
    const auto b = oracle::verify_r_max(1000, 2025);
    const double s = seconds_since(t0);
    report(2, a.pass && b.pass && a.max_deviation < 1e-5 && b.max_deviation < 1e-5 && s < 10.0,
           fmt("contact angle %zu/%zu max dev %.2e rad; R_max round trip %zu/%zu max dev %.2e rad; %.2f s",
               a.agreements, a.cases, a.max_deviation, b.agreements, b.cases, b.max_deviation, s));
}

void criterion3(const HandModel& hand, const config::RunConfig& cfg) {
    const auto t0 = Clock::now();
    oracle::ValidityCounts counts;
    const auto r = oracle::verify_validity(hand, cfg.requirements, cfg.grid, 100, 7, 0.0, &counts);
    const double s = seconds_since(t0);
    report(3, r.pass && r.cases == 100 && s < 60.0,
           fmt("%zu/%zu verdicts agree (20-sample trajectories, 0.5 mm radius grid; oracle-true precision %zu, "
               "lateral %zu, tripod %zu); %.1f s",
               r.agreements, r.cases, counts.accepted[0], counts.accepted[1], counts.accepted[2], s));
}

// Half the cases are drawn near the optimum so the endpoint comparison sees non-empty intervals.
void criterion4(const HandModel& hand, const config::RunConfig& cfg, const geom::AxisConfig& centre) {
    const auto t0 = Clock::now();
    const auto configs = oracle::capable_configs(hand, cfg.requirements, cfg.grid, 20, 11, 2000000, {centre});
    // A 0.01 mm sweep keeps the oracle's own quantization well inside the 0.1 mm tolerance.
    const auto r = oracle::verify_widths(hand, cfg.requirements, cfg.deformation.delta_mm(), configs, 0.0, 0.01);
    std::size_t nonempty = 0;
    for (const auto& c : configs) {
        nonempty += !manip::manipulation_range(c, hand, cfg.requirements, cfg.deformation.delta_mm()).overall.empty();
    }
    const double s = seconds_since(t0);
    report(4, r.pass && r.cases == 20 && r.max_deviation <= 0.1 && nonempty >= 10 && s < 60.0,
           fmt("%zu/%zu configurations agree (%zu with non-empty W), max endpoint deviation %.3f mm, "
               "intersection law holds; %.1f s",
               r.agreements, r.cases, nonempty, r.max_deviation, s));
}

void criterion5(const HandModel& hand, const config::RunConfig& cfg, const geom::AxisConfig& centre) {
    const auto t0 = Clock::now();
    const auto grid = neighbourhood(centre);
    const double delta = cfg.deformation.delta_mm();
    const auto seq = oracle::sequential_optimize(hand, cfg.requirements, grid, delta);
    opt::OptimizeOptions o;
    o.chunk_size = 16;
    o.block_size = 128;
    o.workers = 1;
    const auto one = opt::optimize(hand, cfg.requirements, grid, delta, o);
    bool same = one.valid_count == seq.valid_count && one.opt_index == seq.opt_index && one.w_max == seq.w_max;
    for (unsigned w : {4u, 8u}) {
        o.workers = w;
        same = same && opt::optimize(hand, cfg.requirements, grid, delta, o).same_outcome(one);
    }
    const double s = seconds_since(t0);
    report(5, same && s < 30.0,
           fmt("3^6 grid around the reference optimum: %llu valid, w_max %.6f mm, winner #%lld; sequential oracle "
               "identical, workers 1/4/8 identical; %.1f s",
               static_cast<unsigned long long>(one.valid_count), one.w_max,
               one.opt_index ? static_cast<long long>(*one.opt_index) : -1LL, s));
}

// Returns the full-grid result for criterion 7.
opt::OptimizationResult criterion6(const HandModel& hand, const config::RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "thumbopt_acceptance";
    fs::create_directories(dir);
    const std::string ck = (dir / "run.ckpt").string(), saved = (dir / "late.ckpt").string();
    fs::remove(ck);
    fs::remove(saved);

    const std::uint64_t total = cfg.grid.total();
    const std::uint64_t late = total / 10 * 9;
    opt::OptimizeOptions o;
    o.workers = opt::default_worker_count();
    o.top_k = 10;
    o.checkpoint_path = ck;
    o.resume = false;
    bool copied = false;
    std::uint64_t saved_at = 0;
    o.on_block = [&](const opt::SearchState& st) {
        if (!copied && st.next_index >= late) {
            fs::copy_file(ck, saved, fs::copy_options::overwrite_existing);
            copied = true;
            saved_at = st.next_index;
        }
    };
    const auto straight = opt::optimize(hand, cfg.requirements, cfg.grid, cfg.deformation.delta_mm(), o);

    fs::copy_file(saved, ck, fs::copy_options::overwrite_existing);
    o.on_block = nullptr;
    o.resume = true;
    const auto resumed = opt::optimize(hand, cfg.requirements, cfg.grid, cfg.deformation.delta_mm(), o);
    fs::remove_all(dir);

    const double rate = straight.evaluated_count / straight.meta.wall_seconds;
    const bool pass = straight.completed && straight.evaluated_count == total && total == 19200000u &&
                      copied && resumed.same_outcome(straight);
    std::string winner = "none";
    if (straight.omega_opt) {
        const auto& w = *straight.omega_opt;
        winner = fmt("(%.1f, %.1f, %.1f mm, %.1f, %.1f, %.1f deg) W=[%.4f, %.4f]", w.origin.x, w.origin.y,
                     w.origin.z, report_deg(w.roll), report_deg(w.pitch), report_deg(w.yaw), straight.opt_width->lo(),
                     straight.opt_width->hi());
    }
    report(6, pass,
           fmt("%llu configurations, %u worker(s), %.1f s, %.0f configs/s; %llu valid, %llu pruned; resume from "
               "checkpoint at %llu bit-identical; w_max %.4f mm at %s",
               static_cast<unsigned long long>(straight.evaluated_count), straight.meta.workers,
               straight.meta.wall_seconds, rate, static_cast<unsigned long long>(straight.valid_count),
               static_cast<unsigned long long>(straight.pruned_count), static_cast<unsigned long long>(saved_at),
               straight.w_max, winner.c_str()));
    return straight;
}

void criterion7(const HandModel& hand, const config::RunConfig& cfg, const opt::OptimizationResult& res) {
    const auto t0 = Clock::now();
    if (!res.omega_opt || res.opt_width->empty()) {
        report(7, false, "no optimized configuration with a non-empty W");
        return;
    }
    const auto thumb = hand.thumb_trajectory(*res.omega_opt);
    const double delta = cfg.deformation.delta_mm();
    const auto& w = *res.opt_width;
    std::size_t tried = 0, passed = 0;
    for (double x = w.lo(); x <= w.hi(); x += 1.0) {
        ++tried;
        passed += manip::simulate_transition(thumb, hand, cfg.requirements, delta, x).pass;
    }
    const bool outside_fails = !manip::simulate_transition(thumb, hand, cfg.requirements, delta, w.hi() + 2.0).pass;
    const double s = seconds_since(t0);
    report(7, tried > 0 && passed == tried && outside_fails && s < 10.0,
           fmt("W=[%.4f, %.4f] mm: %zu/%zu widths at 1 mm steps hold; w = hi + 2 mm %s; %.3f s", w.lo(), w.hi(),
               passed, tried, outside_fails ? "fails" : "HOLDS", s));
}

void criterion8() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> len(5.0, 60.0), ang(-geom::kPi, geom::kPi), off(-30.0, 30.0);
    double worst = 0.0;
    std::size_t poses = 0;
    while (poses < 10000) {
        kin::FourBarLinkage l;
        l.ground = len(rng);
        l.input = len(rng);
        l.coupler = len(rng);
        l.output = len(rng);
        l.coupler_point_along = off(rng);
        l.coupler_point_perp = off(rng);
        l.ground_angle = ang(rng);
        const auto branch = poses % 2 ? kin::Branch::open : kin::Branch::crossed;
        try {
            const auto p = kin::four_bar_solve(l, ang(rng), branch);
            worst = std::max(worst, p.residual);
            worst = std::max(worst, std::abs((p.b - p.a).norm() - l.input));
            worst = std::max(worst, std::abs((p.d - p.a).norm() - l.ground));
            ++poses;
        } catch (const kin::AssemblyError&) {
        }
    }
    std::uniform_real_distribution<double> act(-20.0, 20.0), share(0.1, 5.0);
    std::uniform_int_distribution<int> flag(0, 3);
    double worst_sum = 0.0;
    std::size_t redirected = 0, stalls = 0;
    bool redirect_ok = true;
    for (int k = 0; k < 10000; ++k) {
        const int f = flag(rng);
        kin::Differential d{(f & 1) != 0, (f & 2) != 0, share(rng), share(rng)};
        const double a = act(rng);
        const auto out = kin::differential_distribute(d, a);
        if (f == 3) {
            ++stalls;
            redirect_ok = redirect_ok && out.stalled && out.ring == 0.0 && out.little == 0.0;
            continue;
        }
        worst_sum = std::max(worst_sum, std::abs(out.ring + out.little - 2.0 * a));
        if (f != 0) {
            ++redirected;
            redirect_ok = redirect_ok && (f == 1 ? out.ring == 0.0 : out.little == 0.0);
        }
    }
    const double s = seconds_since(t0);
    report(8, worst < 1e-9 && worst_sum < 1e-12 && redirect_ok && s < 10.0,
           fmt("four-bar loop closure max residual %.2e mm over %zu poses; differential |ring+little-2a| max %.1e over "
               "10000 cases (%zu redirected, %zu stalled); %.2f s",
               worst, poses, worst_sum, redirected, stalls, s));
}

}  // namespace

int main() {
    const auto cfg = config::parse_run_config(nlohmann::json::parse(reference::kHandJson));
    const HandModel hand = config::build_hand(cfg);

    criterion1();
    criterion2();
    criterion3(hand, cfg);
    // The optimum of the full reference run.
    const geom::AxisConfig optimum{{116, 124, 52}, rad(-67.5), rad(12), rad(63)};
    criterion4(hand, cfg, optimum);
    criterion5(hand, cfg, optimum);
    const auto full = criterion6(hand, cfg);
    criterion7(hand, cfg, full);
    criterion8();
    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
