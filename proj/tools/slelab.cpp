// slelab: reproducible command-line front end for the SLE numerical laboratory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "sle/csvio.hpp"
#include "sle/experiments.hpp"
#include "sle/greens.hpp"
#include "sle/loewner.hpp"
#include "sle/natparam.hpp"
#include "sle/sampler.hpp"
#include "sle/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_argv(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

// refuse to clobber outputs unless asked
void check_output(const std::string& path, bool overwrite) {
    if (!overwrite && fs::exists(path))
        throw CLI::ValidationError("output exists (use --overwrite): " + path);
}

std::vector<std::pair<std::string, std::string>> common_meta(const std::string& cmdline,
                                                             uint64_t seed) {
    return {{"version", sle::kVersion}, {"command", cmdline}, {"seed", std::to_string(seed)}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slelab: numerical laboratory for chordal SLE (kappa < 8)"};
    app.require_subcommand(1);
    const std::string cmdline = join_argv(argc, argv);

    std::string out_dir = "out";
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool overwrite = false;
    app.add_option("--out-dir", out_dir, "output directory (created if absent)");
    app.add_option("--workers", workers, "worker threads (output identical for all values)");
    app.add_flag("--overwrite", overwrite, "allow overwriting existing outputs");

    // simulate: driving + trace CSVs
    auto* sim = app.add_subcommand("simulate", "sample a chordal driving path and its trace");
    double sim_kappa = 0, sim_horizon = 1.0, sim_dt = 1e-4, sim_tip = -1.0;
    uint64_t sim_seed = 1;
    long long sim_trace_points = 4096;
    sim->add_option("--kappa", sim_kappa, "kappa in (0,8)")->required();
    sim->add_option("--horizon", sim_horizon, "capacity-time horizon");
    sim->add_option("--dt", sim_dt, "driving grid step");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--tip-offset", sim_tip, "trace tip offset (default 0.5*sqrt(a*dt))");
    sim->add_option("--trace-points", sim_trace_points,
                    "cap on trace points (grid is decimated above this)");

    // trace: re-extract from a stored driving path
    auto* trc = app.add_subcommand("trace", "extract the trace of a stored driving path");
    std::string trc_driving;
    double trc_tip = -1.0;
    long long trc_points = 4096;
    trc->add_option("--driving", trc_driving, "driving CSV path")->required();
    trc->add_option("--tip-offset", trc_tip, "tip offset (default 0.5*sqrt(a*dt))");
    trc->add_option("--trace-points", trc_points, "cap on trace points");

    // phi-table
    auto* phi = app.add_subcommand("phi-table", "build the Monte-Carlo phi table");
    double phi_kappa = 0, phi_dt = 1e-4;
    long long phi_n = 2000;
    uint64_t phi_seed = 1;
    phi->add_option("--kappa", phi_kappa, "kappa in (0,8)")->required();
    phi->add_option("--n-per-node", phi_n, "two-sided runs per node");
    phi->add_option("--dt", phi_dt, "SDE step");
    phi->add_option("--seed", phi_seed, "master seed");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a catalog experiment");
    std::string exp_name, exp_config;
    uint64_t exp_seed = 0;
    bool exp_seed_set = false;
    exp->add_option("name", exp_name, "experiment name")->required();
    exp->add_option("--config", exp_config, "JSON config file");
    exp->add_option_function<uint64_t>(
           "--seed", [&](const uint64_t& v) { exp_seed = v; exp_seed_set = true; },
           "master seed override");

    // selftest
    auto* st = app.add_subcommand("selftest", "exact-identity suite (no Monte Carlo)");
    (void)st;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        fs::create_directories(out_dir);

        if (sim->parsed()) {
            sle::KappaParams params = sle::kappa_params(sim_kappa);
            sle::DrivingPath d = sle::sample_chordal(params, sim_horizon, sim_dt, sim_seed);
            const std::string dpath = out_dir + "/driving.csv";
            const std::string tpath = out_dir + "/trace.csv";
            check_output(dpath, overwrite);
            check_output(tpath, overwrite);
            sle::write_driving_csv(dpath, d, common_meta(cmdline, sim_seed));

            // decimate the grid for the O(N^2) zipper when the path is long
            size_t stride = 1;
            while (d.steps() / stride > static_cast<size_t>(sim_trace_points)) stride *= 2;
            sle::DrivingPath dd;
            dd.a = d.a;
            dd.dt = d.dt * static_cast<double>(stride);
            for (size_t k = 0; k < d.values.size(); k += stride) dd.values.push_back(d.values[k]);
            const double tip = sim_tip > 0 ? sim_tip : sle::default_tip_offset(dd.a, dd.dt);
            sle::TracePolyline tr = sle::extract_trace(dd, tip);
            tr.kappa = sim_kappa;
            sle::write_trace_csv(tpath, tr, common_meta(cmdline, sim_seed));
            std::printf("wrote %s and %s (%zu trace points)\n", dpath.c_str(), tpath.c_str(),
                        tr.points.size());
            return 0;
        }

        if (trc->parsed()) {
            sle::DrivingPath d = sle::read_driving_csv(trc_driving);
            size_t stride = 1;
            while (d.steps() / stride > static_cast<size_t>(trc_points)) stride *= 2;
            sle::DrivingPath dd;
            dd.a = d.a;
            dd.dt = d.dt * static_cast<double>(stride);
            for (size_t k = 0; k < d.values.size(); k += stride) dd.values.push_back(d.values[k]);
            const double tip = trc_tip > 0 ? trc_tip : sle::default_tip_offset(dd.a, dd.dt);
            sle::TracePolyline tr = sle::extract_trace(dd, tip);
            tr.kappa = 2.0 / d.a;
            const std::string tpath = out_dir + "/trace.csv";
            check_output(tpath, overwrite);
            sle::write_trace_csv(tpath, tr, common_meta(cmdline, 0));
            std::printf("wrote %s (%zu points)\n", tpath.c_str(), tr.points.size());
            return 0;
        }

        if (phi->parsed()) {
            sle::KappaParams params = sle::kappa_params(phi_kappa);
            sle::PhiGridSpec grid;
            grid.dt = phi_dt;
            sle::PhiTable t = sle::build_phi_table(params, grid, phi_n, phi_seed, workers);
            char name[64];
            std::snprintf(name, sizeof(name), "phi_kappa_%.6f.csv", phi_kappa);
            const std::string path = out_dir + "/" + name;
            check_output(path, overwrite);
            sle::write_phi_csv(path, t);
            std::printf("wrote %s (censor max %.4f, too-coarse max %.4f)\n", path.c_str(),
                        t.max_censor(),
                        *std::max_element(t.too_coarse_frac.begin(), t.too_coarse_frac.end()));
            return 0;
        }

        if (exp->parsed()) {
            json cfg;
            if (!exp_config.empty()) {
                std::ifstream in(exp_config);
                if (!in) {
                    std::fprintf(stderr, "cannot open config: %s\n", exp_config.c_str());
                    return 2;
                }
                in >> cfg;
            } else {
                cfg = sle::default_config(exp_name);
            }
            if (cfg.contains("name") && cfg["name"].get<std::string>() != exp_name) {
                std::fprintf(stderr, "config name %s does not match experiment %s\n",
                             cfg["name"].get<std::string>().c_str(), exp_name.c_str());
                return 2;
            }
            uint64_t seed = exp_seed_set ? exp_seed
                                         : static_cast<uint64_t>(cfg.value("seed", 20260809));
            sle::ExperimentReport rep =
                sle::run_experiment(exp_name, cfg, seed, workers, out_dir + "/phi_cache");
            const std::string cpath = out_dir + "/" + exp_name + ".csv";
            const std::string jpath = out_dir + "/" + exp_name + ".json";
            check_output(cpath, overwrite);
            check_output(jpath, overwrite);
            sle::write_report_csv(cpath, rep, cmdline);
            sle::write_report_json(jpath, rep, cmdline);
            for (const auto& [k, v] : rep.verdicts)
                std::printf("%-40s %s\n", k.c_str(), v ? "pass" : "FAIL");
            std::printf("report: %s (%.1fs)\n", cpath.c_str(), rep.wall_seconds);
            return rep.all_pass() ? 0 : 1;
        }

        if (st->parsed()) {
            auto items = sle::selftest();
            bool all = true;
            for (const auto& it : items) {
                std::printf("[%s] %-32s %s\n", it.pass ? "PASS" : "FAIL", it.name.c_str(),
                            it.detail.c_str());
                all = all && it.pass;
            }
            return all ? 0 : 1;
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const sle::ConfigInvalid& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const sle::UnknownExperiment& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
