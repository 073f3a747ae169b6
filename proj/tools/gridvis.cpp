// gridvis: generate, run, explore, audit, benchmark and render grid
// configurations for the two-color complete-visibility ruleset.

#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "gridvis/algorithm.hpp"
#include "gridvis/checkers.hpp"
#include "gridvis/geometry.hpp"
#include "gridvis/render.hpp"
#include "gridvis/rules.hpp"
#include "gridvis/sim.hpp"
#include "gridvis/trace_io.hpp"

namespace {

using namespace gridvis;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;
constexpr int kExitStepLimit = 3;

Configuration random_config(std::int64_t n, std::int64_t width, std::int64_t height,
                            std::uint64_t seed) {
    if (width * height < n) throw CLI::ValidationError("--width/--height", "box too small for n robots");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> dx(0, width - 1), dy(0, height - 1);
    std::set<Point> used;
    Configuration config;
    RobotId id = 0;
    while (static_cast<std::int64_t>(config.size()) < n) {
        Point p{dx(rng), dy(rng)};
        if (!used.insert(p).second) continue;
        config.robots.push_back({id++, p, Color::A});
    }
    return config;
}

Configuration load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return config_from_json(json::parse(in));
}

RuleSet load_rules(const std::string& rulesDir) {
    return builtin_ruleset(rulesDir.empty() ? default_rules_dir() : rulesDir);
}

struct SchedOpts {
    std::string scheduler = "fsync";
    std::uint64_t seed = 0;
    double p = 0.5;
    int k = 3;
    std::string heuristic = "roundrobin";
    int depth = 300;
};

void add_sched_opts(CLI::App* cmd, SchedOpts& o) {
    cmd->add_option("--scheduler", o.scheduler)
        ->check(CLI::IsMember({"fsync", "ssync", "async-random", "async-adversary", "exhaustive"}));
    cmd->add_option("--seed", o.seed);
    cmd->add_option("--p", o.p, "ssync activation probability");
    cmd->add_option("--k", o.k, "async-random unfairness bound");
    cmd->add_option("--heuristic", o.heuristic)->check(CLI::IsMember({"roundrobin", "stale"}));
    cmd->add_option("--depth", o.depth, "exhaustive depth bound");
}

SchedulerSpec to_spec(const SchedOpts& o) {
    SchedulerSpec s;
    s.seed = o.seed;
    s.activationProbability = o.p;
    s.unfairnessBound = o.k;
    s.heuristic = o.heuristic;
    s.depthBound = o.depth;
    if (o.scheduler == "fsync") s.kind = SchedulerSpec::Kind::Fsync;
    else if (o.scheduler == "ssync") s.kind = SchedulerSpec::Kind::Ssync;
    else if (o.scheduler == "async-random") s.kind = SchedulerSpec::Kind::AsyncRandom;
    else if (o.scheduler == "async-adversary") s.kind = SchedulerSpec::Kind::AsyncAdversary;
    else s.kind = SchedulerSpec::Kind::Exhaustive;
    return s;
}

void write_out(const std::string& outPath, const std::string& text) {
    if (outPath.empty() || outPath == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(outPath);
    if (!out) throw std::runtime_error("cannot write " + outPath);
    out << text;
}

json metrics_json(const Trace& trace) {
    FinalMetrics m = final_metrics(trace);
    return json{{"outcome", outcome_name(trace.outcome)},
                {"rounds", m.rounds},
                {"area", m.area},
                {"diameter0", m.diameter0},
                {"moves", m.moves},
                {"conflicts", m.conflicts},
                {"milestone", milestone_name(m.milestone)},
                {"complete_visibility", m.completeVisibility},
                {"trace_hash", trace_hash(trace)}};
}

int cmd_gen(std::int64_t n, std::int64_t width, std::int64_t height, std::uint64_t seed,
            const std::string& outPath) {
    if (n < 4)
        std::cerr << "warning: the builtin ruleset needs n >= 4; writing the file anyway for "
                     "custom rulesets\n";
    Configuration config = random_config(n, width, height, seed);
    write_out(outPath, config_to_json(config).dump(2) + "\n");
    return kExitOk;
}

int cmd_run(const std::string& configPath, const std::string& replayPath,
            const std::string& rulesDir, const SchedOpts& sched, std::size_t stepLimit,
            const std::string& outPath) {
    RuleSet rules = load_rules(rulesDir);
    Trace trace;
    if (!replayPath.empty()) {
        std::ifstream in(replayPath);
        if (!in) throw std::runtime_error("cannot open " + replayPath);
        Trace recorded = read_trace(in);
        trace = run(recorded.initial, rules, recorded.scheduler, stepLimit);
        if (trace_hash(trace) != trace_hash(recorded)) {
            std::cerr << "replay hash mismatch\n";
            return kExitViolation;
        }
    } else {
        Configuration config = load_config(configPath);
        validate_builtin_start(config);
        trace = run(config, rules, to_spec(sched), stepLimit);
    }
    if (!outPath.empty()) {
        std::ostringstream ss;
        write_trace(trace, ss);
        write_out(outPath, ss.str());
    }
    std::cout << metrics_json(trace).dump(2) << "\n";
    if (trace.outcome == OutcomeKind::StepLimit) return kExitStepLimit;
    if (trace.outcome == OutcomeKind::InvariantViolation) return kExitViolation;
    return classify(trace.final_) == Milestone::C_F ? kExitOk : kExitViolation;
}

int cmd_explore(const std::string& configPath, const std::string& rulesDir, int depth,
                std::size_t stateCap, const std::string& outPath) {
    RuleSet rules = load_rules(rulesDir);
    Configuration config = load_config(configPath);
    validate_builtin_start(config);
    ExplorationReport report = explore(config, rules, depth, stateCap);
    bool allCF = true;
    json nonCf = json::array();
    for (const auto& t : report.terminalConfigs)
        if (classify(t) != Milestone::C_F) {
            allCF = false;
            if (nonCf.size() < 5) nonCf.push_back(config_to_json(t));
        }
    json j{{"states_visited", report.statesVisited},
           {"terminal_configs", report.terminalConfigs.size()},
           {"all_terminals_cf", allCF},
           {"stuck_states", report.stuckStates},
           {"conflict_aborts", report.conflictAborts},
           {"frame_violations", report.frameViolations},
           {"occupancy_violations", report.occupancyViolations},
           {"dead_rules", report.deadRules},
           {"depth_bound_hit", report.depthBoundHit},
           {"incomplete", report.incomplete}};
    if (!nonCf.empty()) j["non_cf_terminals"] = nonCf;
    write_out(outPath, j.dump(2) + "\n");
    bool clean = allCF && report.stuckStates == 0 && report.frameViolations == 0 &&
                 report.occupancyViolations == 0 && !report.terminalConfigs.empty();
    return clean ? kExitOk : kExitViolation;
}

int cmd_check(const std::string& tracePath, const std::string& rulesDir,
              const std::string& outPath) {
    RuleSet rules = load_rules(rulesDir);
    std::ifstream in(tracePath);
    if (!in) throw std::runtime_error("cannot open " + tracePath);
    Trace trace = read_trace(in);
    AuditReport report = audit_trace(trace, rules);
    json viols = json::array();
    for (const auto& v : report.violations)
        viols.push_back({{"step", v.step},
                         {"kind", violation_kind_name(v.kind)},
                         {"detail", v.detail}});
    Milestone final = classify(report.finalConfig);
    json j{{"violations", viols}, {"final_milestone", milestone_name(final)}};
    write_out(outPath, j.dump(2) + "\n");
    return (report.clean() && final == Milestone::C_F) ? kExitOk : kExitViolation;
}

int cmd_bench(std::int64_t nMin, std::int64_t nMax, int seeds, const std::string& rulesDir,
              const SchedOpts& sched, std::size_t stepLimit, const std::string& outPath) {
    RuleSet rules = load_rules(rulesDir);
    std::ostringstream csv;
    csv << "n,seed,D,rounds,area,conflicts,outcome\n";
    bool allOk = true;
    for (std::int64_t n = nMin; n <= nMax; ++n) {
        for (int s = 0; s < seeds; ++s) {
            Configuration config = random_config(n, 3 * n, 3 * n,
                                                 static_cast<std::uint64_t>(n) * 1000 + s);
            SchedOpts opts = sched;
            opts.seed = static_cast<std::uint64_t>(n) * 7919 + s;
            Trace trace = run(config, rules, to_spec(opts), stepLimit);
            FinalMetrics m = final_metrics(trace);
            csv << n << ',' << s << ',' << m.diameter0 << ',' << m.rounds << ',' << m.area << ','
                << m.conflicts << ',' << outcome_name(trace.outcome) << '\n';
            if (trace.outcome != OutcomeKind::Terminated || m.milestone != Milestone::C_F)
                allOk = false;
        }
    }
    write_out(outPath, csv.str());
    return allOk ? kExitOk : kExitViolation;
}

int cmd_render(const std::string& configPath, const std::string& tracePath, std::int64_t frame,
               const std::string& format, const std::string& outPath) {
    Configuration config;
    if (!tracePath.empty()) {
        std::ifstream in(tracePath);
        if (!in) throw std::runtime_error("cannot open " + tracePath);
        Trace trace = read_trace(in);
        config = trace.initial;
        std::int64_t applied = 0;
        for (const auto& ev : trace.events) {
            if (frame >= 0 && applied >= frame) break;
            if (ev.recolor)
                if (auto* r = config.find(ev.robot)) r->color = *ev.recolor;
            if (ev.kind == EventKind::Move && ev.move && !ev.aborted)
                if (auto* r = config.find(ev.robot))
                    r->pos = r->pos + Action{*ev.move, std::nullopt}.delta();
            ++applied;
        }
        if (frame < 0) config = trace.final_;
    } else {
        config = load_config(configPath);
    }
    write_out(outPath, format == "svg" ? render_svg(config) : render_ascii(config));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic grid simulator for luminous opaque robots"};
    app.require_subcommand(1);

    std::string rulesDir, outPath, configPath, tracePath, replayPath, format = "ascii";
    std::int64_t n = 9, width = 27, height = 27, frame = -1, nMin = 4, nMax = 12;
    std::uint64_t seed = 0;
    int seeds = 20, depth = 300;
    std::size_t stepLimit = 1'000'000, stateCap = 2'000'000;
    SchedOpts sched;

    auto* gen = app.add_subcommand("gen", "generate a random all-A configuration");
    gen->add_option("--n", n)->required();
    gen->add_option("--width", width);
    gen->add_option("--height", height);
    gen->add_option("--seed", seed);
    gen->add_option("--out", outPath);

    auto* runc = app.add_subcommand("run", "run one simulation and emit trace + metrics");
    runc->add_option("--config", configPath);
    runc->add_option("--replay", replayPath, "re-run a recorded trace and compare hashes");
    runc->add_option("--rules", rulesDir);
    runc->add_option("--step-limit", stepLimit);
    runc->add_option("--out", outPath, "trace output path (jsonl)");
    add_sched_opts(runc, sched);

    auto* expl = app.add_subcommand("explore", "bounded exhaustive interleaving search");
    expl->add_option("--config", configPath)->required();
    expl->add_option("--rules", rulesDir);
    expl->add_option("--depth", depth);
    expl->add_option("--state-cap", stateCap);
    expl->add_option("--out", outPath);

    auto* check = app.add_subcommand("check", "audit a recorded trace");
    check->add_option("--trace", tracePath)->required();
    check->add_option("--rules", rulesDir);
    check->add_option("--out", outPath);

    auto* bench = app.add_subcommand("bench", "seed-grid sweep, CSV of scaling metrics");
    bench->add_option("--n-min", nMin);
    bench->add_option("--n-max", nMax);
    bench->add_option("--seeds", seeds);
    bench->add_option("--rules", rulesDir);
    bench->add_option("--step-limit", stepLimit);
    bench->add_option("--out", outPath);
    add_sched_opts(bench, sched);

    auto* render = app.add_subcommand("render", "snapshot a configuration or trace frame");
    render->add_option("--config", configPath);
    render->add_option("--trace", tracePath);
    render->add_option("--frame", frame, "event count to replay; -1 = final");
    render->add_option("--format", format)->check(CLI::IsMember({"ascii", "svg"}));
    render->add_option("--out", outPath);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(n, width, height, seed, outPath);
        if (runc->parsed()) {
            if (configPath.empty() == replayPath.empty()) {
                std::cerr << "run: exactly one of --config / --replay is required\n";
                return kExitUsage;
            }
            return cmd_run(configPath, replayPath, rulesDir, sched, stepLimit, outPath);
        }
        if (expl->parsed()) return cmd_explore(configPath, rulesDir, depth, stateCap, outPath);
        if (check->parsed()) return cmd_check(tracePath, rulesDir, outPath);
        if (bench->parsed())
            return cmd_bench(nMin, nMax, seeds, rulesDir, sched, stepLimit, outPath);
        if (render->parsed()) {
            if (configPath.empty() == tracePath.empty()) {
                std::cerr << "render: exactly one of --config / --trace is required\n";
                return kExitUsage;
            }
            return cmd_render(configPath, tracePath, frame, format, outPath);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
