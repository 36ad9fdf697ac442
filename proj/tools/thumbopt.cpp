#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thumbopt/config.hpp"
#include "thumbopt/grasp.hpp"
#include "thumbopt/manip.hpp"
#include "thumbopt/optimizer.hpp"
#include "thumbopt/oracle.hpp"
#include "thumbopt/reference.hpp"
#include "thumbopt/report.hpp"

namespace {

using namespace thumbopt;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNoResult = 2;
constexpr int kExitTransitionFail = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "x,y,z,roll,pitch,yaw" in mm and degrees.
geom::AxisConfig parse_omega(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw UsageError("--omega: '" + item + "' is not a number");
        }
    }
    if (v.size() != 6) {
        throw UsageError("--omega needs 6 comma-separated values x,y,z,roll,pitch,yaw (mm, deg); got " +
                         std::to_string(v.size()));
    }
    const double r = geom::kPi / 180.0;
    return geom::AxisConfig{{v[0], v[1], v[2]}, v[3] * r, v[4] * r, v[5] * r}.normalized();
}

std::string metadata_line(const opt::OptimizationResult& res) {
    std::ostringstream os;
    os << "# run_hash=" << report::hex64(res.meta.grid_hash) << " total=" << res.meta.grid.total()
       << " thumb_steps=" << res.meta.thumb_steps << " index_samples=" << res.meta.index_samples
       << " middle_samples=" << res.meta.middle_samples << " manipulation_window=" << res.meta.manip_begin << ':'
       << res.meta.manip_end;
    return os.str();
}

int cmd_optimize(const std::string& path, std::optional<unsigned> workers, const std::string& checkpoint,
                 std::optional<std::size_t> top_k, std::optional<std::uint64_t> stop_after, const std::string& out_dir,
                 bool quiet) {
    const config::RunConfig cfg = config::load_run_config(path);
    const HandModel hand = config::build_hand(cfg);

    opt::OptimizeOptions o;
    o.workers = workers.value_or(cfg.search.workers ? cfg.search.workers : opt::default_worker_count());
    o.top_k = top_k.value_or(cfg.search.top_k);
    o.pruning = cfg.search.pruning;
    o.block_size = cfg.search.checkpoint_block;
    o.checkpoint_path = !checkpoint.empty() ? checkpoint
                        : cfg.search.checkpoint.empty() ? std::string()
                                                        : config::resolve(cfg, cfg.search.checkpoint);
    o.stop_after = stop_after;
    if (!quiet) {
        o.on_block = [&](const opt::SearchState& s) {
            std::fprintf(stderr, "\r%llu / %llu configurations, %llu valid", static_cast<unsigned long long>(s.next_index),
                         static_cast<unsigned long long>(cfg.grid.total()), static_cast<unsigned long long>(s.valid));
        };
    }
    const opt::OptimizationResult res = opt::optimize(hand, cfg.requirements, cfg.grid, cfg.deformation.delta_mm(), o);
    if (!quiet) {
        std::fputc('\n', stderr);
    }

    const std::filesystem::path dir = std::filesystem::path(out_dir.empty() ? cfg.output.directory : out_dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "result.json");
        f << std::setw(2) << report::result_json(res) << '\n';
    }
    {
        std::ofstream f(dir / "top_k.csv");
        f << metadata_line(res) << '\n';
        report::write_top_csv(f, res.top);
    }
    if (res.omega_opt) {
        const auto anchor = cfg.grid.indices_of(*res.opt_index);
        const auto h = report::compute_heatmap(hand, cfg.requirements, cfg.deformation.delta_mm(), cfg.grid,
                                               cfg.output.heatmap_dims[0], cfg.output.heatmap_dims[1], anchor);
        std::ofstream f(dir / "heatmap.svg");
        report::write_heatmap_svg(f, h);
    }

    std::cout << "status: " << (res.completed ? "complete" : "partial") << '\n'
              << "evaluated: " << res.evaluated_count << " of " << cfg.grid.total() << ", valid: " << res.valid_count
              << ", pruned: " << res.pruned_count << '\n'
              << "throughput: " << std::fixed << std::setprecision(0)
              << (res.meta.wall_seconds > 0 ? res.evaluated_count / res.meta.wall_seconds : 0.0) << " configs/s ("
              << res.meta.workers << " workers)\n";
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6);
    if (res.omega_opt) {
        const auto& c = *res.omega_opt;
        std::cout << "omega_opt: x=" << c.origin.x << " y=" << c.origin.y << " z=" << c.origin.z
                  << " roll=" << report::deg(c.roll) << " pitch=" << report::deg(c.pitch)
                  << " yaw=" << report::deg(c.yaw) << " (index " << *res.opt_index << ")\n";
        if (res.opt_width->empty()) {
            std::cout << "W: empty\n";
        } else {
            std::cout << "W: [" << res.opt_width->lo() << ", " << res.opt_width->hi() << "] mm, |W| = " << res.w_max
                      << " mm\n";
        }
    } else {
        std::cout << "no valid configuration\n";
    }
    std::cout << "artifacts: " << dir.string() << '\n';
    if (res.completed && !res.omega_opt) {
        return kExitNoResult;
    }
    return kExitOk;
}

void print_pair(const char* name, const grasp::PairCheck& p) {
    std::cout << name << ": " << (p.ok ? "ok" : "FAIL (" + grasp::describe_violations(p.violations) + ")")
              << "  established pairs " << p.established_pairs;
    if (p.achieved_r_min) {
        std::cout << "  R range [" << *p.achieved_r_min << ", " << *p.achieved_r_max << "] mm";
    }
    std::cout << "  best alpha " << report::deg(p.best_alpha) << " deg, best force angle "
              << report::deg(p.best_force_angle) << " deg\n";
}

int cmd_check(const std::string& path, const std::string& omega) {
    const config::RunConfig cfg = config::load_run_config(path);
    const HandModel hand = config::build_hand(cfg);
    const geom::AxisConfig w = parse_omega(omega);
    const kin::Trajectory thumb = hand.thumb_trajectory(w);
    const auto v = grasp::is_valid_grasp(thumb, hand, cfg.requirements);
    std::cout << std::setprecision(6);
    print_pair("precision", v.precision);
    print_pair("lateral", v.lateral);
    std::cout << "tripod: "
              << (v.tripod.ok ? "ok" : "FAIL (" + grasp::describe_violations(v.tripod.violations) + ")");
    if (v.tripod.achieved_r_min) {
        std::cout << "  R range [" << *v.tripod.achieved_r_min << ", " << *v.tripod.achieved_r_max << "] mm";
    }
    if (v.tripod.contact_angles) {
        const auto& a = *v.tripod.contact_angles;
        std::cout << "  contact angles T-I " << report::deg(a[0]) << " T-M " << report::deg(a[1]) << " I-M "
                  << report::deg(a[2]) << " deg";
    }
    std::cout << '\n' << "grasp: " << (v.valid() ? "valid" : "invalid") << '\n';

    const auto tr = manip::manipulation_range(thumb, hand, cfg.requirements, cfg.deformation.delta_mm());
    std::cout << "index_sample,j_lateral,j_precision,reversed,d_min_mm,d_max_mm,w_lo_mm,w_hi_mm\n";
    for (const auto& r : tr.per_index) {
        std::cout << r.index_sample << ',';
        if (!r.critical) {
            std::cout << ",,,,,,\n";
            continue;
        }
        std::cout << r.critical->j_lateral << ',' << r.critical->j_precision << ',' << r.critical->reversed << ','
                  << r.d_min << ',' << r.d_max << ',';
        if (r.width.empty()) {
            std::cout << ",\n";
        } else {
            std::cout << r.width.lo() << ',' << r.width.hi() << '\n';
        }
    }
    if (tr.overall.empty()) {
        std::cout << "W: empty\n";
    } else {
        std::cout << "W: [" << tr.overall.lo() << ", " << tr.overall.hi() << "] mm, |W| = " << tr.overall.width()
                  << " mm\n";
    }
    return v.valid() ? kExitOk : kExitNoResult;
}

int cmd_transition(const std::string& path, const std::string& omega, double width) {
    const config::RunConfig cfg = config::load_run_config(path);
    const HandModel hand = config::build_hand(cfg);
    const geom::AxisConfig w = parse_omega(omega);
    const auto rep = manip::simulate_transition(hand.thumb_trajectory(w), hand, cfg.requirements,
                                                cfg.deformation.delta_mm(), width);
    if (!rep.capable) {
        std::cerr << "transition: configuration is not lateral/precision-capable for every manipulation index "
                     "sample\n";
        return kExitNoResult;
    }
    std::cout << std::setprecision(10) << "index_sample,j,d_mm,gap_mm,hold\n";
    for (const auto& s : rep.steps) {
        std::cout << s.index_sample << ',' << s.j << ',' << s.distance << ',' << s.gap << ',' << (s.hold ? 1 : 0)
                  << '\n';
    }
    std::cerr << "transition: width " << width << " mm " << (rep.pass ? "PASS" : "FAIL") << '\n';
    return rep.pass ? kExitOk : kExitTransitionFail;
}

int cmd_verify(const std::string& path, double perturb, std::uint64_t seed) {
    const config::RunConfig cfg = path.empty() ? config::parse_run_config(nlohmann::json::parse(reference::kHandJson))
                                               : config::load_run_config(path);
    const HandModel hand = config::build_hand(cfg);
    const double dm = cfg.deformation.delta_mm();

    std::vector<oracle::OracleReport> reps;
    {
        const double v = manip::delta_m(10.0, 134.3e3) + perturb;
        const double dev = std::abs(v - 4.87);
        reps.push_back({"delta_m_4.87mm", 1, dev <= 0.005 ? 1u : 0u, dev, dev <= 0.005});
    }
    reps.push_back(oracle::verify_contact_angles(1000, seed, perturb));
    reps.push_back(oracle::verify_r_max(1000, seed + 1, perturb));
    reps.push_back(oracle::verify_validity(hand, cfg.requirements, cfg.grid, 100, seed + 2, perturb));
    const auto configs = oracle::capable_configs(hand, cfg.requirements, cfg.grid, 20, seed + 3);
    reps.push_back(oracle::verify_widths(hand, cfg.requirements, dm, configs, perturb));
    if (configs.size() < 20) {
        reps.back().pass = false;
        reps.back().name += "_too_few_capable_configs";
    }

    bool ok = true;
    std::cout << "check,cases,agreements,max_deviation,pass\n" << std::setprecision(6);
    for (const auto& r : reps) {
        std::cout << r.name << ',' << r.cases << ',' << r.agreements << ',' << r.max_deviation << ','
                  << (r.pass ? "PASS" : "FAIL") << '\n';
        ok = ok && r.pass;
    }
    return ok ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thumb rotation-axis placement search"};
    app.require_subcommand(1);

    std::string config_path, omega, checkpoint, out_dir;
    std::optional<unsigned> workers;
    std::optional<std::size_t> top_k;
    std::optional<std::uint64_t> stop_after;
    double width = 0.0, perturb = 0.0;
    std::uint64_t seed = 1;
    bool quiet = false;

    auto* opt = app.add_subcommand("optimize", "run the grid search and write result.json, top_k.csv, heatmap.svg");
    opt->add_option("config", config_path, "run configuration (JSON)")->required();
    opt->add_option("--workers", workers, "worker threads (default: config, then THUMBOPT_WORKERS, then all cores)");
    opt->add_option("--checkpoint", checkpoint, "checkpoint file; resumed from when present");
    opt->add_option("--top-k", top_k, "number of ranked configurations to keep");
    opt->add_option("--stop-after", stop_after, "stop once this many configurations are done (resume later)");
    opt->add_option("--out", out_dir, "output directory (default: config output.directory)");
    opt->add_flag("--quiet", quiet, "no progress output");

    auto* chk = app.add_subcommand("check", "grasp and transition diagnostics for one configuration");
    chk->add_option("config", config_path, "run configuration (JSON)")->required();
    chk->add_option("--omega", omega, "x,y,z,roll,pitch,yaw in mm and degrees")->required();

    auto* ver = app.add_subcommand("verify", "compare the library against the brute-force oracles");
    ver->add_option("--config", config_path, "hand to verify on (default: built-in reference hand)");
    ver->add_option("--perturb", perturb, "deliberate geometry error in mm fed to the library side");
    ver->add_option("--seed", seed, "random seed");

    auto* trn = app.add_subcommand("transition", "per-step hold table for one object width");
    trn->add_option("config", config_path, "run configuration (JSON)")->required();
    trn->add_option("--omega", omega, "x,y,z,roll,pitch,yaw in mm and degrees")->required();
    trn->add_option("--width", width, "object width in mm")->required()->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (opt->parsed()) {
            return cmd_optimize(config_path, workers, checkpoint, top_k, stop_after, out_dir, quiet);
        }
        if (chk->parsed()) {
            return cmd_check(config_path, omega);
        }
        if (ver->parsed()) {
            return cmd_verify(config_path, perturb, seed);
        }
        return cmd_transition(config_path, omega, width);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
    } catch (const opt::CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kExitConfig;
}
