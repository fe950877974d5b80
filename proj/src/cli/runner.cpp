#include "collapse/cli/runner.hpp"

#include "collapse/analytic.hpp"
#include "collapse/bell.hpp"
#include "collapse/parallel.hpp"
#include "collapse/walk.hpp"

#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#ifndef COLLAPSE_VERSION
#define COLLAPSE_VERSION "0.0.0"
#endif

namespace collapse::cli {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kDegree = std::numbers::pi / 180.0;

std::string num(double v) { return fmt::format("{:.15g}", v); }

struct RunResult {
    std::string body;
    ojson diagnostics = ojson::object();
};

Exec exec_for(const RunConfig&) { return Exec::parallel; }

WalkConfig walk_config(const RunConfig& c)
{
    WalkConfig w;
    w.grid_resolution = c.grid_resolution;
    w.max_steps = c.max_steps;
    w.seed = c.seed;
    return w;
}

RunResult run_born(const RunConfig& c)
{
    const QuantumState state = normalize(parse_amplitudes(c.amplitudes));
    const BornStatistics stats = born_statistics(state, c.trials, walk_config(c), exec_for(c));
    const JointState joint = form_joint(state);

    RunResult r;
    r.diagnostics["trials"] = stats.trials;
    r.diagnostics["excluded_trials"] = stats.excluded;
    r.diagnostics["mean_steps"] = stats.mean_steps;
    if (c.format == Format::csv) {
        std::string out = "state,weight,count,frequency,stderr\n";
        for (std::size_t i = 0; i < state.size(); ++i) {
            out += fmt::format("{},{},{},{},{}\n", i, num(joint.weights[i]), stats.winner_counts[i],
                               num(stats.frequencies[i]), num(stats.stderr_[i]));
        }
        r.body = std::move(out);
    } else {
        ojson j;
        j["subcommand"] = "born";
        j["trials"] = stats.trials;
        j["excluded_trials"] = stats.excluded;
        j["mean_steps"] = stats.mean_steps;
        j["states"] = ojson::array();
        for (std::size_t i = 0; i < state.size(); ++i) {
            j["states"].push_back({{"state", i},
                                   {"weight", joint.weights[i]},
                                   {"count", stats.winner_counts[i]},
                                   {"frequency", stats.frequencies[i]},
                                   {"stderr", stats.stderr_[i]}});
        }
        r.body = j.dump(2) + "\n";
    }
    return r;
}

RunResult run_walk_trajectory(const RunConfig& c)
{
    const JointState joint = form_joint(normalize(parse_amplitudes(c.amplitudes)));
    const WalkConfig wc = walk_config(c);
    Xoshiro256 rng(c.seed, 0);

    std::vector<std::pair<std::int64_t, std::vector<double>>> rows;
    rows.emplace_back(0, update_cross_terms(joint).weights);
    // Weights snap to the grid at step 0.
    const auto start = quantize_weights(joint.weights, wc.grid_resolution);
    for (std::size_t i = 0; i < start.size(); ++i) {
        rows.back().second[i] = static_cast<double>(start[i]) / static_cast<double>(wc.grid_resolution);
    }
    std::int64_t last = 0;
    const WalkOutcome outcome = run_walk(joint, wc, rng, [&](std::int64_t step, const JointState& now) {
        if (step % c.stride == 0) {
            rows.emplace_back(step, now.weights);
            last = step;
        }
    });
    if (last != outcome.steps_taken) {
        rows.emplace_back(outcome.steps_taken, outcome.final_state.weights);
    }

    RunResult r;
    r.diagnostics["winner"] = outcome.winner;
    r.diagnostics["steps"] = outcome.steps_taken;
    ojson order = ojson::array();
    for (const auto& e : outcome.elimination_order) {
        order.push_back({{"state", e.state}, {"step", e.step}});
    }
    r.diagnostics["elimination_order"] = order;

    if (c.format == Format::csv) {
        std::string out = "step";
        for (std::size_t i = 0; i < joint.size(); ++i) {
            out += fmt::format(",w{}", i);
        }
        out += "\n";
        for (const auto& [step, w] : rows) {
            out += std::to_string(step);
            for (double x : w) {
                out += "," + num(x);
            }
            out += "\n";
        }
        r.body = std::move(out);
    } else {
        ojson j;
        j["subcommand"] = "walk";
        j["winner"] = outcome.winner;
        j["steps"] = outcome.steps_taken;
        j["elimination_order"] = order;
        j["trajectory"] = ojson::array();
        for (const auto& [step, w] : rows) {
            j["trajectory"].push_back({{"step", step}, {"weights", w}});
        }
        r.body = j.dump(2) + "\n";
    }
    return r;
}

RunResult run_greens(const RunConfig& c)
{
    const DiffusionParams params{c.diffusion, *c.x0};
    RunResult r;
    ojson rows = ojson::array();
    std::string out = "x,value\n";
    for (double x : parse_grid(c.x_grid, "x-grid")) {
        x = std::clamp(x, 0.0, 1.0);
        const double v = greens_tilde(x, c.laplace, params);
        out += num(x) + "," + num(v) + "\n";
        rows.push_back({{"x", x}, {"value", v}});
    }
    if (c.format == Format::csv) {
        r.body = std::move(out);
    } else {
        ojson j;
        j["subcommand"] = "greens";
        j["x0"] = params.x0;
        j["laplace"] = c.laplace;
        j["diffusion"] = params.D;
        j["rows"] = rows;
        r.body = j.dump(2) + "\n";
    }
    return r;
}

CorrelationModel correlation_model(const RunConfig& c)
{
    CorrelationModel m;
    m.model = parse_model(c.model);
    m.samples = c.samples;
    m.seed = c.seed;
    m.convention = parse_convention(c.convention);
    m.exec = exec_for(c);
    return m;
}

ojson estimate_json(const CorrelationEstimate& e)
{
    ojson j{{"value", e.value}, {"stderr", e.stderr_}, {"n", e.n}, {"model", to_string(e.model)}};
    if (e.model == Model::image_event) {
        j["acceptance_rate"] = e.acceptance_rate;
        j["spectator_mean"] = e.spectator_mean;
        j["spectator_stderr"] = e.spectator_stderr;
    }
    return j;
}

RunResult run_bell(const RunConfig& c)
{
    const CorrelationModel model = correlation_model(c);
    const DetectorSetting a = DetectorSetting::from_degrees(0.0);
    const auto grid = parse_grid(c.theta_grid, "theta-grid");

    RunResult r;
    ojson rows = ojson::array();
    ojson acceptance = ojson::array();
    std::string out = "theta_deg,value,stderr,n,model\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const CorrelationEstimate e = correlation(model, a, DetectorSetting::from_degrees(grid[i]), i);
        out += fmt::format("{},{},{},{},{}\n", num(grid[i]), num(e.value), num(e.stderr_), e.n, to_string(e.model));
        ojson row{{"theta_deg", grid[i]}};
        row.update(estimate_json(e));
        rows.push_back(row);
        if (e.model == Model::image_event) {
            acceptance.push_back({{"theta_deg", grid[i]}, {"acceptance_rate", e.acceptance_rate}});
        }
    }
    if (!acceptance.empty()) {
        r.diagnostics["acceptance_rate"] = acceptance;
    }
    if (c.format == Format::csv) {
        r.body = std::move(out);
    } else {
        ojson j;
        j["subcommand"] = "bell";
        j["model"] = c.model;
        j["convention"] = c.convention;
        j["rows"] = rows;
        r.body = j.dump(2) + "\n";
    }
    return r;
}

RunResult run_chsh(const RunConfig& c)
{
    const CorrelationModel model = correlation_model(c);
    const auto deg = parse_list(c.settings, "settings");
    const ChshReport rep =
        chsh(model, DetectorSetting::from_degrees(deg[0]), DetectorSetting::from_degrees(deg[1]),
             DetectorSetting::from_degrees(deg[2]), DetectorSetting::from_degrees(deg[3]));

    RunResult r;
    static constexpr const char* kPairs[4] = {"a,b", "a,b'", "a',b", "a',b'"};
    ojson terms = ojson::array();
    for (std::size_t k = 0; k < 4; ++k) {
        ojson t{{"pair", kPairs[k]}};
        t.update(estimate_json(rep.terms[k]));
        terms.push_back(t);
    }
    if (model.model == Model::image_event) {
        ojson acc = ojson::array();
        for (const auto& t : rep.terms) {
            acc.push_back(t.acceptance_rate);
        }
        r.diagnostics["acceptance_rate"] = acc;
    }
    if (c.format == Format::csv) {
        r.body = "S,bound,combined_stderr,violated,model\n" +
                 fmt::format("{},{},{},{},{}\n", num(rep.S), num(rep.bound), num(rep.combined_stderr),
                             rep.violated ? "true" : "false", c.model);
    } else {
        ojson j;
        j["subcommand"] = "chsh";
        j["model"] = c.model;
        j["convention"] = c.convention;
        j["settings_deg"] = {{"a", deg[0]}, {"a'", deg[1]}, {"b", deg[2]}, {"b'", deg[3]}};
        j["S"] = rep.S;
        j["bound"] = rep.bound;
        j["combined_stderr"] = rep.combined_stderr;
        j["violated"] = rep.violated;
        j["terms"] = terms;
        r.body = j.dump(2) + "\n";
    }
    return r;
}

RunResult run_c2(const RunConfig& c)
{
    const auto grid = parse_grid(c.theta_grid, "theta-grid");
    std::vector<double> thetas;
    for (double deg : grid) {
        thetas.push_back(std::clamp(deg * kDegree, 0.0, std::numbers::pi));
    }
    const auto constants = solve_c2_grid(thetas, exec_for(c));

    RunResult r;
    std::string out = "theta_deg,c2,overlap,residual\n";
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& k = constants[i];
        out += fmt::format("{},{},{},{}\n", num(grid[i]), num(k.c2), num(k.overlap), num(k.residual));
        rows.push_back({{"theta_deg", grid[i]}, {"c2", k.c2}, {"overlap", k.overlap}, {"residual", k.residual}});
    }
    if (c.format == Format::csv) {
        r.body = std::move(out);
    } else {
        ojson j;
        j["subcommand"] = "c2";
        j["c1"] = kC1;
        j["rows"] = rows;
        r.body = j.dump(2) + "\n";
    }
    return r;
}

RunResult dispatch(const RunConfig& c)
{
    switch (c.subcommand) {
    case Subcommand::born: return run_born(c);
    case Subcommand::walk: return run_walk_trajectory(c);
    case Subcommand::greens: return run_greens(c);
    case Subcommand::bell: return run_bell(c);
    case Subcommand::chsh: return run_chsh(c);
    case Subcommand::c2: return run_c2(c);
    }
    throw Error(ErrorCode::UsageError, "unknown subcommand");
}

void write_manifest(const RunConfig& c, double seconds, const ojson& diagnostics, const std::string& error,
                    std::ostream& err)
{
    if (c.output.empty()) {
        return;
    }
    ojson m;
    m["tool"] = "collapse_walk";
    m["version"] = COLLAPSE_VERSION;
    m["config"] = c.to_json();
    m["duration_seconds"] = seconds;
    m["status"] = error.empty() ? "ok" : "error";
    if (!error.empty()) {
        m["error"] = error;
    }
    m["diagnostics"] = diagnostics;
    std::ofstream file(c.output + ".manifest.json");
    if (!file) {
        err << "warning: cannot write manifest " << c.output << ".manifest.json\n";
        return;
    }
    file << m.dump(2) << "\n";
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::UsageError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::TooFewStates:
    case ErrorCode::AllZero:
    case ErrorCode::DegenerateGrid: return 2;
    default: return 1;
    }
}

int execute(RunConfig config, std::ostream& out, std::ostream& err)
{
    if (config.entropy) {
        std::random_device device;
        config.seed = (static_cast<std::uint64_t>(device()) << 32) | device();
        config.entropy = false;  // the echoed config replays the drawn seed
    }
    set_worker_count(config.threads);
    const auto started = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    RunResult result;
    try {
        result = dispatch(config);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        write_manifest(config, elapsed(), result.diagnostics, e.what(), err);
        set_worker_count(0);
        return exit_code_for(e.code());
    }
    set_worker_count(0);

    if (config.output.empty()) {
        out << result.body;
    } else {
        std::ofstream file(config.output, std::ios::binary);
        if (!file || !(file << result.body)) {
            err << "error: cannot write " << config.output << "\n";
            return 1;
        }
    }
    write_manifest(config, elapsed(), result.diagnostics, "", err);
    return 0;
}

}  // namespace collapse::cli
