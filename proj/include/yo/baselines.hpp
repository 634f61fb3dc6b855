#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"
#include "yo/errors.hpp"
#include "yo/local_search.hpp"
#include "yo/objectives.hpp"
#include "yo/record.hpp"
#include "yo/rng.hpp"
#include "yo/search_space.hpp"
#include "yo/yo.hpp"

namespace yo {

enum class Algorithm { YO, SA, GA, TwoOptRestart, RandomSearch, APSO };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::YO: return "yo";
        case Algorithm::SA: return "sa";
        case Algorithm::GA: return "ga";
        case Algorithm::TwoOptRestart: return "two_opt_restart";
        case Algorithm::RandomSearch: return "random_search";
        case Algorithm::APSO: return "apso";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    for (auto a : {Algorithm::YO, Algorithm::SA, Algorithm::GA, Algorithm::TwoOptRestart, Algorithm::RandomSearch,
                   Algorithm::APSO})
        if (s == to_string(a)) return a;
    if (s == "2opt" || s == "two_opt") return Algorithm::TwoOptRestart;
    if (s == "random") return Algorithm::RandomSearch;
    throw ConfigError("unknown algorithm '" + s + "'");
}

struct BaselineConfig {
    Algorithm algorithm = Algorithm::RandomSearch;
    std::size_t budget = 150;
    std::uint64_t seed = 0;

    // SA
    std::optional<double> t0;    // auto: spread of the initial values, floored at 1
    std::optional<double> beta;  // auto: 0.95 for budgets <= 1000, else 0.9995
    ProposalParams proposal;

    // GA
    std::size_t population_size = 50;
    double crossover_rate = 0.9;
    double mutation_rate = 0.2;
    std::size_t tournament_size = 3;

    // APSO
    std::size_t swarm_size = 20;
    double attraction_beta = 0.5;
    double noise_alpha = 0.3;
    double noise_decay = 0.97;

    // 2-opt restart, continuous spaces (coordinate descent step)
    double refine_scale = 0.05;

    double sa_beta() const { return beta.value_or(budget <= 1000 ? 0.95 : 0.9995); }

    void validate() const {
        if (budget == 0) throw ConfigError("BaselineConfig: budget must be positive");
        if (t0 && !(*t0 > 0.0)) throw ConfigError("BaselineConfig: t0 must be > 0");
        if (beta && !(*beta > 0.0 && *beta <= 1.0)) throw ConfigError("BaselineConfig: beta must lie in (0,1]");
        for (double r : {crossover_rate, mutation_rate})
            if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("BaselineConfig: rates must lie in [0,1]");
        if (population_size < 2 || swarm_size < 2) throw ConfigError("BaselineConfig: population/swarm size must be >= 2");
        if (tournament_size == 0) throw ConfigError("BaselineConfig: tournament_size must be positive");
        if (!(attraction_beta > 0.0 && attraction_beta <= 1.0))
            throw ConfigError("BaselineConfig: attraction_beta must lie in (0,1]");
        if (!(noise_alpha >= 0.0)) throw ConfigError("BaselineConfig: noise_alpha must be >= 0");
        if (!(noise_decay > 0.0 && noise_decay <= 1.0)) throw ConfigError("BaselineConfig: noise_decay must lie in (0,1]");
        if (!(refine_scale > 0.0)) throw ConfigError("BaselineConfig: refine_scale must be > 0");
        proposal.validate();
    }
};

inline nlohmann::ordered_json to_json(const BaselineConfig& c) {
    nlohmann::ordered_json j;
    j["algorithm"] = to_string(c.algorithm);
    j["budget"] = c.budget;
    j["seed"] = c.seed;
    switch (c.algorithm) {
        case Algorithm::SA:
            j["t0"] = c.t0 ? nlohmann::ordered_json(*c.t0) : nlohmann::ordered_json("auto");
            j["beta"] = c.sa_beta();
            j["step_scale"] = c.proposal.step_scale;
            j["move_mix"] = c.proposal.move_mix;
            break;
        case Algorithm::GA:
            j["population_size"] = c.population_size;
            j["crossover_rate"] = c.crossover_rate;
            j["mutation_rate"] = c.mutation_rate;
            j["tournament_size"] = c.tournament_size;
            j["step_scale"] = c.proposal.step_scale;
            break;
        case Algorithm::APSO:
            j["swarm_size"] = c.swarm_size;
            j["attraction_beta"] = c.attraction_beta;
            j["noise_alpha"] = c.noise_alpha;
            j["noise_decay"] = c.noise_decay;
            break;
        case Algorithm::TwoOptRestart: j["refine_scale"] = c.refine_scale; break;
        default: break;
    }
    return j;
}

namespace detail {

/// Ledger + best-so-far bookkeeping shared by the single-trajectory baselines.
template <SearchSpace S>
class BaselineRun {
public:
    using point_type = typename S::point_type;

    BaselineRun(const Objective<S>& f, const BaselineConfig& cfg)
        : f_(f), cfg_(cfg), ledger_(BudgetLedger::unsplit(cfg.budget)), rng_(cfg.seed, 0),
          start_(std::chrono::steady_clock::now()) {}

    std::optional<double> evaluate(const point_type& x) {
        const auto index = ledger_.charge(Phase::Hybrid);
        if (!index) return std::nullopt;
        const double v = f_.evaluate(x);
        tracker_.observe(*index, x, v);
        return v;
    }

    auto evaluator() {
        return [this](const point_type& x) { return evaluate(x); };
    }

    bool exhausted() const { return ledger_.remaining() == 0; }
    RngStream& rng() { return rng_; }
    const S& space() const { return f_.space; }

    RunRecord<point_type> finish() {
        RunRecord<point_type> rec;
        rec.algorithm = to_string(cfg_.algorithm);
        rec.evaluations_used = ledger_.used();
        if (tracker_.best.value) {
            rec.best = tracker_.best;
            rec.best_value = *tracker_.best.value;
        }
        rec.trace = merge_trace(tracker_.improvements, rec.evaluations_used);
        rec.config_echo = to_json(cfg_);
        rec.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        return rec;
    }

private:
    const Objective<S>& f_;
    const BaselineConfig& cfg_;
    BudgetLedger ledger_;
    RngStream rng_;
    BestTracker<point_type> tracker_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Classical SA: one chain, the shared proposal kernel, Boltzmann
/// acceptance and geometric cooling every iteration. No reheating.
template <SearchSpace S>
RunRecord<typename S::point_type> run_sa(const Objective<S>& f, const BaselineConfig& cfg) {
    cfg.validate();
    detail::BaselineRun<S> run(f, cfg);
    CandidateOf<S> current{f.space.random_point(run.rng()), std::nullopt};
    current.value = run.evaluate(current.position);
    if (!current.value) return run.finish();
    double temperature = cfg.t0.value_or(1.0);  // spread of a single initial value is 0
    const double beta = cfg.sa_beta();
    while (true) {
        auto proposal = mcmc_propose(current, f.space, cfg.proposal, run.rng());
        proposal.value = run.evaluate(proposal.position);
        if (!proposal.value) break;
        if (metropolis_accept(*proposal.value, *current.value, temperature, run.rng())) current = std::move(proposal);
        temperature = std::max(temperature * beta, std::numeric_limits<double>::min());
    }
    auto rec = run.finish();
    rec.t0 = cfg.t0.value_or(1.0);
    rec.final_temperatures = {temperature};
    return rec;
}

/// Order crossover (OX) with shared cut points; returns both children.
inline std::pair<Tour, Tour> order_crossover(const Tour& p1, const Tour& p2, RngStream& rng) {
    const std::size_t n = p1.size();
    std::size_t a = rng.index(n), b = rng.index(n);
    if (a > b) std::swap(a, b);
    auto make = [&](const Tour& keep, const Tour& fill) {
        Tour child(n);
        std::vector<bool> used(n, false);
        for (std::size_t i = a; i <= b; ++i) {
            child[i] = keep[i];
            used[keep[i]] = true;
        }
        std::size_t pos = (b + 1) % n;
        for (std::size_t k = 0; k < n; ++k) {
            const auto city = fill[(b + 1 + k) % n];
            if (used[city]) continue;
            child[pos] = city;
            used[city] = true;
            pos = (pos + 1) % n;
        }
        return child;
    };
    return {make(p1, p2), make(p2, p1)};
}

inline std::pair<RealVector, RealVector> uniform_crossover(const RealVector& p1, const RealVector& p2, RngStream& rng) {
    RealVector c1 = p1, c2 = p2;
    for (std::size_t i = 0; i < p1.size(); ++i)
        if (rng.uniform() < 0.5) std::swap(c1[i], c2[i]);
    return {c1, c2};
}

inline void ga_mutate(RealVector& x, const ContinuousBox& space, const BaselineConfig& cfg, RngStream& rng) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (rng.uniform() < cfg.mutation_rate)
            x[i] = space.clamp(x[i] + cfg.proposal.step_scale * space.range(i) * rng.normal(), i);
}

inline void ga_mutate(Tour& t, const PermutationSpace& space, const BaselineConfig& cfg, RngStream& rng) {
    if (!(rng.uniform() < cfg.mutation_rate)) return;
    const std::size_t i = rng.index(space.n_items());
    std::size_t j = rng.index(space.n_items() - 1);
    if (j >= i) ++j;
    apply_tour_move(t, TourMove::Reversal, i, j);
}

template <class Point>
std::size_t tournament_select(const std::vector<Candidate<Point>>& population, std::size_t size, RngStream& rng) {
    std::size_t winner = rng.index(population.size());
    for (std::size_t k = 1; k < size; ++k) {
        const std::size_t c = rng.index(population.size());
        if (*population[c].value < *population[winner].value) winner = c;
    }
    return winner;
}

/// One generation: the elite survives unevaluated, the rest are children
/// of tournament-selected parents (crossover, then mutation), each charged
/// through `eval`. Stops early when `eval` refuses; the returned population
/// then holds only the evaluated individuals.
template <SearchSpace S, Evaluator<typename S::point_type> E>
std::vector<CandidateOf<S>> ga_next_generation(const std::vector<CandidateOf<S>>& population, const S& space,
                                               const BaselineConfig& cfg, RngStream& rng, E&& eval) {
    const auto elite = std::min_element(population.begin(), population.end(),
                                        [](const auto& a, const auto& b) { return *a.value < *b.value; });
    std::vector<CandidateOf<S>> next{*elite};
    while (next.size() < population.size()) {
        const auto& p1 = population[tournament_select(population, cfg.tournament_size, rng)].position;
        const auto& p2 = population[tournament_select(population, cfg.tournament_size, rng)].position;
        std::pair<typename S::point_type, typename S::point_type> kids{p1, p2};
        if (rng.uniform() < cfg.crossover_rate) {
            if constexpr (std::is_same_v<S, PermutationSpace>)
                kids = order_crossover(p1, p2, rng);
            else
                kids = uniform_crossover(p1, p2, rng);
        }
        for (auto* kid : {&kids.first, &kids.second}) {
            if (next.size() == population.size()) break;
            ga_mutate(*kid, space, cfg, rng);
            const auto value = eval(*kid);
            if (!value) return next;
            next.push_back({std::move(*kid), value});
        }
    }
    return next;
}

/// Generational GA with tournament selection, elitism of one, OX or
/// uniform crossover and reversal or Gaussian mutation.
template <SearchSpace S>
RunRecord<typename S::point_type> run_ga(const Objective<S>& f, const BaselineConfig& cfg) {
    cfg.validate();
    if (cfg.population_size > cfg.budget) throw ConfigError("run_ga: population_size exceeds the budget");
    detail::BaselineRun<S> run(f, cfg);
    std::vector<CandidateOf<S>> population;
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
        CandidateOf<S> x{f.space.random_point(run.rng()), std::nullopt};
        x.value = run.evaluate(x.position);
        population.push_back(std::move(x));
    }
    while (!run.exhausted()) {
        auto next = ga_next_generation(population, f.space, cfg, run.rng(), run.evaluator());
        if (next.size() < population.size()) break;
        population = std::move(next);
    }
    return run.finish();
}

/// Random start, full local descent, repeat until the budget is gone.
template <SearchSpace S>
RunRecord<typename S::point_type> run_two_opt_restart(const Objective<S>& f, const BaselineConfig& cfg) {
    cfg.validate();
    detail::BaselineRun<S> run(f, cfg);
    constexpr auto unlimited = std::numeric_limits<std::size_t>::max();
    while (!run.exhausted()) {
        CandidateOf<S> start{f.space.random_point(run.rng()), std::nullopt};
        if constexpr (std::is_same_v<S, ContinuousBox>)
            greedy_refine(std::move(start), f.space, run.evaluator(), unlimited, cfg.refine_scale);
        else
            greedy_refine(std::move(start), f.space, run.evaluator(), unlimited);
    }
    return run.finish();
}

template <SearchSpace S>
RunRecord<typename S::point_type> run_random_search(const Objective<S>& f, const BaselineConfig& cfg) {
    cfg.validate();
    detail::BaselineRun<S> run(f, cfg);
    while (run.evaluate(f.space.random_point(run.rng()))) {
    }
    return run.finish();
}

/// Accelerated PSO position update (no velocity):
/// x <- (1 - beta) x + beta g + alpha * range * N(0,1), clamped.
inline void apso_step(std::vector<RealVector>& swarm, const RealVector& global_best, const ContinuousBox& space,
                      double attraction_beta, double noise_alpha, RngStream& rng) {
    for (auto& x : swarm)
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double noise = noise_alpha > 0.0 ? noise_alpha * space.range(i) * rng.normal() : 0.0;
            x[i] = space.clamp((1.0 - attraction_beta) * x[i] + attraction_beta * global_best[i] + noise, i);
        }
}

inline RunRecord<RealVector> run_apso(const Objective<ContinuousBox>& f, const BaselineConfig& cfg) {
    cfg.validate();
    detail::BaselineRun<ContinuousBox> run(f, cfg);
    std::vector<RealVector> swarm;
    Candidate<RealVector> global_best;
    auto observe = [&](const RealVector& x) {
        const auto v = run.evaluate(x);
        if (v && (!global_best.value || *v < *global_best.value)) global_best = {x, v};
        return v.has_value();
    };
    for (std::size_t i = 0; i < cfg.swarm_size; ++i) {
        swarm.push_back(f.space.random_point(run.rng()));
        if (!observe(swarm.back())) return run.finish();
    }
    double alpha = cfg.noise_alpha;
    while (true) {
        const RealVector g = global_best.position;
        apso_step(swarm, g, f.space, cfg.attraction_beta, alpha, run.rng());
        for (const auto& x : swarm)
            if (!observe(x)) return run.finish();
        alpha *= cfg.noise_decay;
    }
}

inline RunRecord<Tour> run_apso(const Objective<PermutationSpace>&, const BaselineConfig&) {
    throw UnsupportedSpace("run_apso: APSO is defined for continuous spaces only");
}

/// Runs any baseline by name.
template <SearchSpace S>
RunRecord<typename S::point_type> run_baseline(const Objective<S>& f, const BaselineConfig& cfg) {
    switch (cfg.algorithm) {
        case Algorithm::SA: return run_sa(f, cfg);
        case Algorithm::GA: return run_ga(f, cfg);
        case Algorithm::TwoOptRestart: return run_two_opt_restart(f, cfg);
        case Algorithm::RandomSearch: return run_random_search(f, cfg);
        case Algorithm::APSO: return run_apso(f, cfg);
        case Algorithm::YO: break;
    }
    throw ConfigError("run_baseline: YO is not a baseline; use yo::run");
}

}  // namespace yo
