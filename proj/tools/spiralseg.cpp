#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "spiralseg/config.hpp"
#include "spiralseg/io.hpp"
#include "spiralseg/pipeline.hpp"
#include "spiralseg/selftest.hpp"
#include "spiralseg/solver.hpp"

namespace fs = std::filesystem;
using namespace spiralseg;

namespace {

enum Exit { kOk = 0, kAnalysisFailed = 1, kConfigError = 2, kNotConverged = 3 };

struct CommonFlags {
    std::string config;
    std::string preset;
    std::string out;
    std::string grid;
    double beta_max = 0.0;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "experiment config file (key = value)");
    app->add_option("--preset", f.preset, "named experiment: fig1a, fig1b, fig1c");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--grid", f.grid, "grid size NxM (n_theta x n_y)");
    app->add_option("--beta-max", f.beta_max, "drop schedule entries above this beta");
}

// Config file first (it may name a preset), then --preset, then the remaining flags.
ExperimentConfig resolve(const CommonFlags& f, const std::optional<fs::path>& fallback = std::nullopt) {
    ExperimentConfig c;
    if (!f.config.empty()) {
        c = load_config(f.config);
    } else if (f.preset.empty() && fallback && fs::exists(*fallback)) {
        c = load_config(*fallback);
    }
    if (!f.preset.empty()) {
        const std::string out = c.output;
        c = preset_config(f.preset);
        c.output = out;
    }
    if (!f.out.empty()) c.output = f.out;
    if (!f.grid.empty()) std::tie(c.n_theta, c.n_y) = parse_grid_size(f.grid);
    if (f.beta_max > 0.0) {
        std::vector<double> keep;
        for (double b : c.beta_schedule)
            if (b <= f.beta_max) keep.push_back(b);
        if (keep.empty()) throw ConfigError("--beta-max leaves an empty beta schedule");
        c.beta_schedule = keep;
    }
    c.validate();
    return c;
}

std::string beta_dir(std::size_t index, double beta) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "beta_%02zu_%.3g", index, beta);
    return buf;
}

struct SolveOutcome {
    std::vector<SystemState> states;
    bool converged = true;
};

SolveOutcome run_solve(const ExperimentConfig& cfg, bool analyze_each) {
    const fs::path out = cfg.output;
    fs::create_directories(out);
    {
        std::ofstream c(out / "config.txt");
        c << describe(cfg);
    }
    const CompetitionMatrix a = cfg.build_matrix();
    const StripGrid g = cfg.build_grid();
    std::ofstream log(out / "sweep.csv");
    log << "beta,iterations,defect,converged,overlap,seconds\n";
    SolveOutcome result;
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t index = 0;
    continuation_sweep(g, a, cfg.build_traces(), cfg.beta_schedule, cfg.relax, [&](const SystemState& s) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double ov = overlap_metrics(s).max_product;
        log << format_double(s.beta) << "," << s.iterations << "," << format_double(s.max_residual()) << ","
            << (s.converged ? 1 : 0) << "," << format_double(ov) << "," << secs << std::endl;
        std::printf("beta %-8.3g iterations %-6d defect %.3e %s overlap %.3e  %.1fs\n", s.beta, s.iterations,
                    s.max_residual(), s.converged ? "converged" : "NOT CONVERGED", ov, secs);
        std::fflush(stdout);
        const fs::path dir = out / beta_dir(index++, s.beta);
        write_checkpoint(s, a, dir);
        result.states.push_back(s);
        if (!s.converged) result.converged = false;
        if (analyze_each) {
            const AnalysisReport r = analyze(s, a, cfg, &result.states);
            write_report(r, s, dir / "analysis");
        }
    });
    return result;
}

// A checkpoint directory, or a solve output directory holding beta_* checkpoints.
std::vector<Checkpoint> load_checkpoints(const fs::path& path) {
    if (fs::exists(path / "manifest.txt")) return {read_checkpoint(path)};
    if (!fs::is_directory(path)) throw FormatError(path, 0, "not a checkpoint or sweep directory");
    std::map<std::string, fs::path> dirs;
    for (const auto& e : fs::directory_iterator(path))
        if (e.is_directory() && e.path().filename().string().rfind("beta_", 0) == 0 && fs::exists(e.path() / "manifest.txt"))
            dirs[e.path().filename().string()] = e.path();
    if (dirs.empty()) throw FormatError(path, 0, "no checkpoints found");
    std::vector<Checkpoint> out;
    for (const auto& [name, p] : dirs) out.push_back(read_checkpoint(p));
    std::sort(out.begin(), out.end(), [](const Checkpoint& x, const Checkpoint& y) { return x.state.beta < y.state.beta; });
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segregation limits of planar competition systems and their spiral interfaces"};
    app.require_subcommand(1);

    CommonFlags solve_f, sweep_f, analyze_f;
    auto* solve = app.add_subcommand("solve", "run the beta continuation and write checkpoints");
    add_common(solve, solve_f);
    auto* sweep = app.add_subcommand("sweep", "solve and analyze every beta of the schedule");
    add_common(sweep, sweep_f);
    auto* analyze_cmd = app.add_subcommand("analyze", "analyze a checkpoint or a sweep directory");
    add_common(analyze_cmd, analyze_f);
    std::string checkpoint;
    analyze_cmd->add_option("checkpoint", checkpoint, "checkpoint or sweep directory")->required();
    auto* selftest = app.add_subcommand("selftest", "synthetic checks, no PDE solves");
    auto* presets = app.add_subcommand("presets", "print the named experiment configs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*selftest) {
            bool ok = true;
            const auto t0 = std::chrono::steady_clock::now();
            for (const auto& r : run_selftest()) {
                std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
                ok = ok && r.pass;
            }
            std::cout << "selftest " << (ok ? "passed" : "failed") << " in "
                      << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << "s\n";
            return ok ? kOk : kAnalysisFailed;
        }
        if (*presets) {
            for (const auto& name : preset_names()) std::cout << "# " << name << "\n" << describe(preset_config(name)) << "\n";
            return kOk;
        }
        if (*solve || *sweep) {
            const CommonFlags& f = *solve ? solve_f : sweep_f;
            if (f.config.empty() && f.preset.empty()) {
                std::cerr << (*solve ? solve : sweep)->help() << "\nerror: give --config or --preset\n";
                return kConfigError;
            }
            const ExperimentConfig cfg = resolve(f);
            const SolveOutcome out = run_solve(cfg, sweep->parsed());
            if (!out.converged) {
                std::cerr << "error: relaxation did not reach the tolerance at some beta (see sweep.csv)\n";
                return kNotConverged;
            }
            if (*sweep) {
                const auto& last = out.states.back();
                const AnalysisReport r = analyze(last, cfg.build_matrix(), cfg, &out.states);
                write_report(r, last, fs::path(cfg.output) / "analysis");
                std::cout << format_summary(r);
                return r.passed() ? kOk : kAnalysisFailed;
            }
            return kOk;
        }
        if (*analyze_cmd) {
            const fs::path in = checkpoint;
            const auto cps = load_checkpoints(in);
            std::optional<fs::path> saved;
            if (fs::exists(in / "config.txt")) saved = in / "config.txt";
            else if (fs::exists(in.parent_path() / "config.txt")) saved = in.parent_path() / "config.txt";
            ExperimentConfig cfg = resolve(analyze_f, saved);
            const Checkpoint& last = cps.back();
            if (last.state.k() != cfg.h) throw ConfigError("checkpoint has " + std::to_string(last.state.k()) +
                                                           " species but the config says h=" + std::to_string(cfg.h));
            std::vector<SystemState> traj;
            for (const auto& c : cps) traj.push_back(c.state);
            const AnalysisReport r = analyze(last.state, last.matrix, cfg, traj.size() > 1 ? &traj : nullptr);
            const fs::path dir = analyze_f.out.empty() ? in / "analysis" : fs::path(analyze_f.out);
            write_report(r, last.state, dir);
            std::cout << format_summary(r);
            return r.passed() ? kOk : kAnalysisFailed;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ContinuationError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kNotConverged;
    } catch (const SolveError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kNotConverged;
    }
    return kOk;
}
