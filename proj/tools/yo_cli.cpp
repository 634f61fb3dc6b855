// yo_cli: run the ablation, TSP and continuous experiments, or a single optimizer.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "yo/harness.hpp"

namespace {

using namespace yo;
using namespace yo::harness;

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> runs;
    std::optional<std::string> out;
    std::optional<double> delay;
    std::optional<std::size_t> parallel;
    std::optional<std::string> config;
    bool timing = false;
};

struct TspFlags {
    std::optional<std::size_t> n;
    std::optional<std::string> seeds;
};

struct SingleFlags {
    std::string problem;
    std::string algo;
    std::size_t n = 50;
    std::vector<std::string> set;
};

void apply_globals(ExperimentSpec& spec, const GlobalFlags& g, bool runs_are_seeds) {
    if (g.config) load_spec_file(*g.config, spec);
    if (g.budget) spec.budget = *g.budget;
    if (g.out) spec.output_dir = *g.out;
    if (g.delay) spec.delay_seconds = *g.delay;
    if (g.parallel) spec.parallel = *g.parallel;
    if (g.timing) spec.include_timing = true;
    if (runs_are_seeds) {
        // --runs R picks R consecutive seeds starting at --seed (or the first configured seed).
        if (g.runs || g.seed) {
            const std::uint64_t first = g.seed.value_or(spec.seeds.empty() ? 1 : spec.seeds.front());
            spec.seeds = seed_range(first, g.runs.value_or(spec.seeds.size()));
        }
    } else {
        if (g.runs) spec.runs_per_variant = *g.runs;
        if (g.seed) spec.seeds = {*g.seed};
    }
}

void report(const ExperimentSpec& spec, const ExperimentResult& r) {
    write_experiment(spec, r);
    write_summary_csv(std::cout, r.table);
    std::cerr << "wrote " << (r.directory / "summary.csv").string() << '\n';
}

int run_single(const GlobalFlags& g, const SingleFlags& s) {
    ProblemSpec problem = parse_problem(s.problem);
    if (problem.kind == ProblemKind::Tsp && s.problem == "tsp") problem.n = s.n;
    OptimizerEntry opt{s.algo, parse_algorithm(s.algo), {}};
    for (const auto& kv : s.set) opt.overrides.push_back(parse_assignment(kv));
    const std::uint64_t seed = g.seed.value_or(0);
    const std::size_t budget = g.budget.value_or(problem.kind == ProblemKind::Tsp ? 20000 : 150);
    const double delay = g.delay.value_or(0.0);
    if (g.parallel && *g.parallel > 1 && opt.algorithm == Algorithm::YO) opt.overrides.emplace_back("parallel_chains", "true");
    JsonOptions jo;
    jo.include_timing = g.timing;

    std::string json;
    if (problem.kind == ProblemKind::Tsp) {
        const auto f = tsp_problem(generate_tsp(problem.n, seed), delay);
        json = to_json_string(run_optimizer(f, opt, {}, budget, seed), jo);
    } else {
        const auto f = continuous_objective(problem, delay);
        json = to_json_string(run_optimizer(f, opt, {}, budget, seed), jo);
    }
    std::cout << json;
    if (g.out) write_file(fs::path(*g.out) / "single" / opt.name / (run_stem(seed, 0) + ".json"), json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid MCMC / greedy / annealing optimizer and its benchmark experiments"};
    app.fallthrough();
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--seed", g.seed, "Seed (first seed for ablation/continuous, instance seed for tsp)");
    app.add_option("--budget", g.budget, "Objective evaluations per run")->check(CLI::PositiveNumber);
    app.add_option("--runs", g.runs, "Runs per variant")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--delay", g.delay, "Seconds of sleep per objective evaluation")->check(CLI::NonNegativeNumber);
    app.add_option("--parallel", g.parallel, "Concurrent runs")->check(CLI::PositiveNumber);
    app.add_option("--config", g.config, "Experiment spec file")->check(CLI::ExistingFile);
    app.add_flag("--timing", g.timing, "Record wall-clock times in outputs");

    auto* ablation = app.add_subcommand("ablation", "Component ablation on the composite 5-D function");
    auto* tsp = app.add_subcommand("tsp", "TSP suite: YO against SA, GA, 2-opt restart and random search");
    TspFlags tf;
    tsp->add_option("--n", tf.n, "Number of cities")->check(CLI::Range(3, 100000));
    tsp->add_option("--seeds", tf.seeds, "Instance seeds, e.g. 42,101,202 or 1-5");
    auto* continuous = app.add_subcommand("continuous", "Rosenbrock 5-D comparison against APSO and random search");
    std::vector<std::string> external;
    continuous->add_option("--external", external, "CSV with header algorithm,seed,final_best (repeatable)")
        ->check(CLI::ExistingFile);
    auto* single = app.add_subcommand("single", "One optimizer on one problem; prints the run record as JSON");
    SingleFlags sf;
    single->add_option("--problem", sf.problem, "composite5d, rosenbrock5d, tsp or tsp(N)")->required();
    single->add_option("--algo", sf.algo, "yo, sa, ga, two_opt_restart, random_search, apso")->required();
    single->add_option("--n", sf.n, "Cities for --problem tsp")->check(CLI::Range(3, 100000));
    single->add_option("--set", sf.set, "Optimizer setting KEY=VALUE (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (ablation->parsed()) {
            auto spec = default_ablation_spec();
            apply_globals(spec, g, true);
            report(spec, run_ablation(spec));
        } else if (tsp->parsed()) {
            auto spec = default_tsp_spec(tf.n.value_or(50));
            apply_globals(spec, g, false);
            if (tf.n) {
                spec.problem.n = *tf.n;
                if (!g.config) spec.name = "tsp_n" + std::to_string(*tf.n);
            }
            if (tf.seeds) spec.seeds = parse_seed_list("--seeds", *tf.seeds);
            report(spec, run_tsp_suite(spec));
        } else if (continuous->parsed()) {
            auto spec = default_continuous_spec();
            apply_globals(spec, g, true);
            for (const auto& e : external) spec.external.emplace_back(e);
            report(spec, run_continuous_comparison(spec));
        } else if (single->parsed()) {
            return run_single(g, sf);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
