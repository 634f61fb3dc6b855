#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <queue>
#include <shared_mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"
#include "yo/blacklist.hpp"
#include "yo/errors.hpp"
#include "yo/local_search.hpp"
#include "yo/objectives.hpp"
#include "yo/record.hpp"
#include "yo/rng.hpp"
#include "yo/search_space.hpp"

namespace yo {

struct YoConfig {
    std::size_t budget = 150;
    double burn_in_fraction = 0.3;
    std::size_t chains = 4;
    /// Initial temperature; when absent, the spread (max - min) of the
    /// chains' initial values, floored at 1.
    std::optional<double> t0;
    double beta = 0.95;
    double gamma = 3.0;
    std::size_t theta_reheat = 20;
    bool blacklist_enabled = true;
    /// Hyperball radius in normalized [0,1]^D coordinates.
    double blacklist_radius = 0.02;
    /// A refined candidate is poor when its value exceeds this empirical
    /// quantile of every value seen so far in the run.
    double blacklist_quantile = 0.9;
    std::size_t blacklist_warmup = 20;
    std::size_t blacklist_max_regions = 256;
    /// A chain whose proposals hit the blacklist this many times in a row
    /// ends its hybrid phase (guards spaces with very few distinct points).
    std::size_t blacklist_max_streak = 1000;
    std::size_t top_k = 2;
    bool disable_mcmc = false;
    bool disable_greedy = false;
    bool disable_sa = false;
    std::uint64_t seed = 0;
    ProposalParams proposal;
    /// Probe cap per refinement; when absent 2*D (continuous) or n (tours).
    std::optional<std::size_t> refine_max_probes;
    /// Coordinate-descent step as a fraction of each dimension's range.
    double refine_scale = 0.05;
    /// Run chains on separate threads between the synchronization points.
    bool parallel = false;

    void validate() const {
        if (budget == 0) throw ConfigError("YoConfig: budget must be positive");
        if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0))
            throw ConfigError("YoConfig: burn_in_fraction must lie in (0,1)");
        if (chains == 0) throw ConfigError("YoConfig: chains must be >= 1");
        if (top_k == 0 || top_k > chains) throw ConfigError("YoConfig: top_k must lie in [1, chains]");
        if (budget < chains) throw ConfigError("YoConfig: budget must be >= chains");
        if (t0 && !(*t0 > 0.0)) throw ConfigError("YoConfig: t0 must be > 0");
        if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("YoConfig: beta must lie in (0,1)");
        if (!(gamma > 1.0)) throw ConfigError("YoConfig: gamma must be > 1");
        if (theta_reheat == 0) throw ConfigError("YoConfig: theta_reheat must be positive");
        if (!(blacklist_radius > 0.0)) throw ConfigError("YoConfig: blacklist_radius must be > 0");
        if (!(blacklist_quantile > 0.0 && blacklist_quantile < 1.0))
            throw ConfigError("YoConfig: blacklist_quantile must lie in (0,1)");
        if (blacklist_max_regions == 0) throw ConfigError("YoConfig: blacklist_max_regions must be positive");
        if (refine_max_probes && *refine_max_probes == 0)
            throw ConfigError("YoConfig: refine_max_probes must be positive");
        if (!(refine_scale > 0.0)) throw ConfigError("YoConfig: refine_scale must be > 0");
        proposal.validate();
    }
};

inline nlohmann::ordered_json to_json(const YoConfig& c) {
    nlohmann::ordered_json j;
    j["algorithm"] = "yo";
    j["budget"] = c.budget;
    j["burn_in_fraction"] = c.burn_in_fraction;
    j["chains"] = c.chains;
    j["t0"] = c.t0 ? nlohmann::ordered_json(*c.t0) : nlohmann::ordered_json("auto");
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["theta_reheat"] = c.theta_reheat;
    j["blacklist_enabled"] = c.blacklist_enabled;
    j["blacklist_radius"] = c.blacklist_radius;
    j["blacklist_quantile"] = c.blacklist_quantile;
    j["blacklist_warmup"] = c.blacklist_warmup;
    j["blacklist_max_regions"] = c.blacklist_max_regions;
    j["top_k"] = c.top_k;
    j["disable_mcmc"] = c.disable_mcmc;
    j["disable_greedy"] = c.disable_greedy;
    j["disable_sa"] = c.disable_sa;
    j["seed"] = c.seed;
    j["step_scale"] = c.proposal.step_scale;
    j["move_mix"] = c.proposal.move_mix;
    j["refine_max_probes"] =
        c.refine_max_probes ? nlohmann::ordered_json(*c.refine_max_probes) : nlohmann::ordered_json("auto");
    j["refine_scale"] = c.refine_scale;
    j["parallel"] = c.parallel;
    return j;
}

/// Metropolis rule: downhill always, uphill with probability exp(-delta/T).
inline bool metropolis_accept(double f_new, double f_cur, double temperature, RngStream& rng) {
    if (!(temperature > 0.0)) throw ContractViolation("metropolis_accept: temperature must be > 0");
    if (f_new <= f_cur) return true;
    return rng.uniform() < std::exp(-(f_new - f_cur) / temperature);
}

/// Annealing acceptance at the current temperature. With `disable_sa`
/// only strict improvements pass.
inline bool sa_accept(double f_new, double f_cur, double temperature, RngStream& rng, bool disable_sa = false) {
    if (disable_sa) return f_new < f_cur;
    return metropolis_accept(f_new, f_cur, temperature, rng);
}

/// Empirical quantile of a growing multiset: the value at rank ceil(q*n).
/// Two heaps give O(log n) insertion.
class RunningQuantile {
public:
    explicit RunningQuantile(double q) : q_(q) {}

    void add(double v) {
        if (lower_.empty() || v <= lower_.top())
            lower_.push(v);
        else
            upper_.push(v);
        const std::size_t n = lower_.size() + upper_.size();
        const auto target = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q_ * static_cast<double>(n) - 1e-12)));
        while (lower_.size() > target) {
            upper_.push(lower_.top());
            lower_.pop();
        }
        while (lower_.size() < target && !upper_.empty()) {
            lower_.push(upper_.top());
            upper_.pop();
        }
    }

    std::size_t count() const { return lower_.size() + upper_.size(); }
    double value() const {
        if (lower_.empty()) throw ContractViolation("RunningQuantile: no values yet");
        return lower_.top();
    }

private:
    double q_;
    std::priority_queue<double> lower_;
    std::priority_queue<double, std::vector<double>, std::greater<>> upper_;
};

template <SearchSpace S>
struct ChainState {
    using point_type = typename S::point_type;

    std::size_t index = 0;
    Candidate<point_type> current;
    Candidate<point_type> best;
    double temperature = 1.0;
    std::size_t stagnant = 0;
    RngStream rng;
    std::vector<Event> events;

    /// Remaining per-chain evaluation quotas.
    std::size_t burn_in_quota = 0;
    std::size_t hybrid_quota = 0;
    std::size_t burn_in_iterations = 0;
    std::size_t hybrid_iterations = 0;
    std::size_t refine_cursor = 0;
    std::size_t blacklist_streak = 0;
    bool done = false;
    /// (global eval index, value) each time this chain's best improved.
    std::vector<TracePoint> improvements;
};

/// State shared by all chains of one run.
template <SearchSpace S>
class RunContext {
public:
    using point_type = typename S::point_type;

    RunContext(const Objective<S>& f, const YoConfig& cfg, BudgetLedger& ledger)
        : f_(f), cfg_(cfg), ledger_(ledger), blacklist_(f.space, cfg.blacklist_max_regions),
          history_(cfg.blacklist_quantile) {
        if constexpr (std::is_same_v<S, ContinuousBox>)
            refine_probes_ = cfg.refine_max_probes.value_or(2 * f.space.dim());
        else
            refine_probes_ = cfg.refine_max_probes.value_or(f.space.n_items());
    }

    const Objective<S>& objective() const { return f_; }
    const S& space() const { return f_.space; }
    const YoConfig& config() const { return cfg_; }
    BudgetLedger& ledger() { return ledger_; }
    std::size_t refine_probes() const { return refine_probes_; }

    /// Charged evaluation on behalf of `chain`; updates the chain's best on
    /// every evaluation and feeds the blacklist threshold history.
    std::optional<double> evaluate(ChainState<S>& chain, Phase phase, const point_type& x) {
        std::size_t& quota = phase == Phase::BurnIn ? chain.burn_in_quota : chain.hybrid_quota;
        if (quota == 0) return std::nullopt;
        const auto index = ledger_.charge(phase);
        if (!index) return std::nullopt;
        --quota;
        const double v = f_.evaluate(x);
        {
            std::lock_guard lock(history_mutex_);
            history_.add(v);
        }
        if (!chain.best.value || v < *chain.best.value) {
            chain.best = {x, v};
            chain.improvements.emplace_back(*index, v);
        }
        return v;
    }

    auto evaluator(ChainState<S>& chain, Phase phase) {
        return [this, &chain, phase](const point_type& x) { return evaluate(chain, phase, x); };
    }

    bool blacklisted(const point_type& x) const {
        std::shared_lock lock(blacklist_mutex_);
        return blacklist_.contains(x);
    }

    /// Adds a region around `x` when its value is above the threshold.
    bool maybe_blacklist(const point_type& x, double value) {
        {
            std::lock_guard lock(history_mutex_);
            if (history_.count() == 0 || history_.count() < cfg_.blacklist_warmup) return false;
            if (!(value > history_.value())) return false;
        }
        std::unique_lock lock(blacklist_mutex_);
        blacklist_.add_region(x, cfg_.blacklist_radius);
        return true;
    }

    const Blacklist<S>& blacklist() const { return blacklist_; }

private:
    const Objective<S>& f_;
    const YoConfig& cfg_;
    BudgetLedger& ledger_;
    std::size_t refine_probes_ = 1;
    Blacklist<S> blacklist_;
    mutable std::shared_mutex blacklist_mutex_;
    RunningQuantile history_;
    std::mutex history_mutex_;
};

namespace detail {

template <SearchSpace S>
CandidateOf<S> propose(const CandidateOf<S>& x, RunContext<S>& ctx, RngStream& rng) {
    if (ctx.config().disable_mcmc) return {ctx.space().random_point(rng), std::nullopt};
    return mcmc_propose(x, ctx.space(), ctx.config().proposal, rng);
}

template <SearchSpace S>
CandidateOf<S> refine(CandidateOf<S> x, RunContext<S>& ctx, ChainState<S>& chain) {
    auto eval = ctx.evaluator(chain, Phase::Hybrid);
    if (ctx.config().disable_greedy) {
        ensure_evaluated(x, eval);
        return x;
    }
    if constexpr (std::is_same_v<S, ContinuousBox>)
        return greedy_refine(std::move(x), ctx.space(), eval, ctx.refine_probes(), ctx.config().refine_scale);
    else
        return greedy_refine(std::move(x), ctx.space(), eval, ctx.refine_probes(), &chain.refine_cursor);
}

inline void cool(double& temperature, double beta) {
    temperature = std::max(temperature * beta, std::numeric_limits<double>::min());
}

/// Runs fn(i) for i in [0, count): in order, or one thread each.
template <class F>
void for_each_chain(std::size_t count, bool parallel, F&& fn) {
    if (!parallel || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    {
        std::vector<std::jthread> threads;
        threads.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            threads.emplace_back([&, i] {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Draws the chain's random start and charges its evaluation (burn-in
/// quota when it has one, hybrid otherwise).
template <SearchSpace S>
void initialize_chain(ChainState<S>& chain, RunContext<S>& ctx) {
    chain.current = {ctx.space().random_point(chain.rng), std::nullopt};
    const Phase phase = chain.burn_in_quota > 0 ? Phase::BurnIn : Phase::Hybrid;
    chain.current.value = ctx.evaluate(chain, phase, chain.current.position);
}

/// Phase 1: Metropolis sampling at the fixed temperature chain.temperature
/// until the chain's burn-in quota is spent. With disable_mcmc the chain
/// degrades to independent uniform sampling.
template <SearchSpace S>
void burn_in(ChainState<S>& chain, RunContext<S>& ctx) {
    const auto& cfg = ctx.config();
    while (chain.burn_in_quota > 0 && chain.current.value) {
        auto proposal = detail::propose(chain.current, ctx, chain.rng);
        const auto value = ctx.evaluate(chain, Phase::BurnIn, proposal.position);
        if (!value) break;
        proposal.value = value;
        const std::size_t iteration = ++chain.burn_in_iterations;
        if (cfg.disable_mcmc) {
            chain.current = std::move(proposal);
            continue;
        }
        if (metropolis_accept(*value, *chain.current.value, chain.temperature, chain.rng)) {
            chain.current = std::move(proposal);
            chain.events.push_back({EventKind::Accept, Phase::BurnIn, iteration});
        } else {
            chain.events.push_back({EventKind::Reject, Phase::BurnIn, iteration});
        }
    }
}

/// Post-burn-in selection. Ranks chains by best value (ties: lower index),
/// keeps the top_k and restarts the others round-robin from copies of
/// those bests. Every chain restarts at its assigned best with temperature
/// t0 and a cleared stagnation counter. Returns the selected indices.
template <SearchSpace S>
std::vector<std::size_t> select_best(std::vector<ChainState<S>>& chains, std::size_t top_k, double t0) {
    if (top_k == 0 || top_k > chains.size()) throw ContractViolation("select_best: top_k must lie in [1, chains]");
    std::vector<std::size_t> order(chains.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) {
        return chains[i].best.value.value_or(std::numeric_limits<double>::infinity());
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_k));

    std::vector<bool> is_selected(chains.size(), false);
    for (auto i : selected) is_selected[i] = true;
    std::size_t next = 0;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (is_selected[i]) continue;
        const auto& source = chains[selected[next++ % top_k]];
        if (source.best.value) chains[i].best = source.best;
    }
    for (auto& c : chains) {
        if (c.best.value) c.current = c.best;
        c.temperature = t0;
        c.stagnant = 0;
    }
    return selected;
}

/// One Phase-2 iteration. No-op (and marks the chain done) once its hybrid
/// quota is spent.
template <SearchSpace S>
void hybrid_step(ChainState<S>& chain, RunContext<S>& ctx) {
    const auto& cfg = ctx.config();
    if (chain.done) return;
    if (chain.hybrid_quota == 0 || !chain.current.value) {
        chain.done = true;
        return;
    }
    auto proposal = detail::propose(chain.current, ctx, chain.rng);
    const std::size_t iteration = chain.hybrid_iterations + 1;

    if (cfg.blacklist_enabled && ctx.blacklisted(proposal.position)) {
        chain.hybrid_iterations = iteration;
        chain.events.push_back({EventKind::BlacklistHit, Phase::Hybrid, iteration});
        if (!cfg.disable_sa) detail::cool(chain.temperature, cfg.beta);
        if (++chain.blacklist_streak >= cfg.blacklist_max_streak) chain.done = true;
        return;
    }
    chain.blacklist_streak = 0;

    auto refined = detail::refine(std::move(proposal), ctx, chain);
    if (!refined.value) {
        chain.done = true;
        return;
    }
    chain.hybrid_iterations = iteration;
    const double value = *refined.value;

    if (sa_accept(value, *chain.current.value, chain.temperature, chain.rng, cfg.disable_sa)) {
        chain.current = refined;
        chain.stagnant = 0;
        chain.events.push_back({EventKind::Accept, Phase::Hybrid, iteration});
    } else {
        ++chain.stagnant;
        chain.events.push_back({EventKind::Reject, Phase::Hybrid, iteration});
    }

    if (!cfg.disable_sa) {
        detail::cool(chain.temperature, cfg.beta);
        if (chain.stagnant > cfg.theta_reheat) {
            const double old_t = chain.temperature;
            chain.temperature *= cfg.gamma;
            chain.stagnant = 0;
            chain.events.push_back({EventKind::Reheat, Phase::Hybrid, iteration, old_t, chain.temperature});
        }
    }

    if (cfg.blacklist_enabled && ctx.maybe_blacklist(refined.position, value))
        chain.events.push_back({EventKind::BlacklistAdd, Phase::Hybrid, iteration});
}

/// Replays a chain's hybrid-phase events: every iteration cools by beta,
/// every Reheat multiplies by gamma. Returns the implied final temperature.
inline double reconstruct_temperature(const std::vector<Event>& events, double t0, const YoConfig& cfg) {
    double t = t0;
    if (cfg.disable_sa) return t;
    for (const auto& e : events) {
        if (e.phase != Phase::Hybrid) continue;
        switch (e.kind) {
            case EventKind::Accept:
            case EventKind::Reject:
            case EventKind::BlacklistHit: t *= cfg.beta; break;
            case EventKind::Reheat: t *= cfg.gamma; break;
            case EventKind::BlacklistAdd: break;
        }
    }
    return t;
}

/// Per-chain quotas (burn-in, hybrid). floor(B_b/C) and floor(B_h/C) with
/// remainders to the last chain. Chains left without burn-in quota take
/// their initial evaluation out of the hybrid allocation instead.
inline std::vector<std::pair<std::size_t, std::size_t>> chain_quotas(const BudgetLedger& ledger, std::size_t chains) {
    const auto burn = split_allocation(ledger.burn_in_allocation(), chains);
    const auto lacking = static_cast<std::size_t>(std::count(burn.begin(), burn.end(), std::size_t{0}));
    auto hybrid = split_allocation(ledger.hybrid_allocation() - lacking, chains);
    std::vector<std::pair<std::size_t, std::size_t>> out(chains);
    for (std::size_t c = 0; c < chains; ++c) out[c] = {burn[c], hybrid[c] + (burn[c] == 0 ? 1 : 0)};
    return out;
}

/// Full two-phase run: initialize C chains, Metropolis burn-in, select,
/// then the hybrid loop (round-robin, or one thread per chain when
/// cfg.parallel) until every chain's hybrid quota is spent.
template <SearchSpace S>
RunRecord<typename S::point_type> run(const Objective<S>& f, const YoConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    BudgetLedger ledger(cfg.budget, cfg.burn_in_fraction);
    RunContext<S> ctx(f, cfg, ledger);

    std::vector<ChainState<S>> chains(cfg.chains);
    const auto quotas = chain_quotas(ledger, cfg.chains);
    for (std::size_t c = 0; c < cfg.chains; ++c) {
        chains[c].index = c;
        chains[c].rng = RngStream(cfg.seed, c + 1);
        chains[c].burn_in_quota = quotas[c].first;
        chains[c].hybrid_quota = quotas[c].second;
    }

    detail::for_each_chain(chains.size(), cfg.parallel, [&](std::size_t c) { initialize_chain(chains[c], ctx); });

    double t0 = 1.0;
    if (cfg.t0) {
        t0 = *cfg.t0;
    } else {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& c : chains)
            if (c.current.value) {
                lo = std::min(lo, *c.current.value);
                hi = std::max(hi, *c.current.value);
            }
        if (hi >= lo) t0 = std::max(hi - lo, 1.0);
    }
    for (auto& c : chains) c.temperature = t0;

    detail::for_each_chain(chains.size(), cfg.parallel, [&](std::size_t c) { burn_in(chains[c], ctx); });

    select_best(chains, cfg.top_k, t0);

    if (cfg.parallel) {
        detail::for_each_chain(chains.size(), true, [&](std::size_t c) {
            while (!chains[c].done) hybrid_step(chains[c], ctx);
        });
    } else {
        bool active = true;
        while (active) {
            active = false;
            for (auto& c : chains) {
                hybrid_step(c, ctx);
                active = active || !c.done;
            }
        }
    }

    RunRecord<typename S::point_type> rec;
    rec.algorithm = "yo";
    rec.evaluations_used = ledger.used();
    rec.t0 = t0;
    std::vector<TracePoint> points;
    const ChainState<S>* winner = nullptr;
    for (const auto& c : chains) {
        points.insert(points.end(), c.improvements.begin(), c.improvements.end());
        if (c.best.value && (!winner || *c.best.value < *winner->best.value)) winner = &c;
        rec.chain_events.push_back(c.events);
        rec.final_temperatures.push_back(c.temperature);
    }
    if (winner) {
        rec.best = winner->best;
        rec.best_value = *winner->best.value;
    }
    rec.trace = merge_trace(std::move(points), rec.evaluations_used);
    rec.config_echo = to_json(cfg);
    rec.blacklist_additions = ctx.blacklist().additions();
    rec.blacklist_hits = ctx.blacklist().hits();
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

}  // namespace yo
