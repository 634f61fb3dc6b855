#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "yo/baselines.hpp"
#include "yo/errors.hpp"
#include "yo/experiment_spec.hpp"
#include "yo/objectives.hpp"
#include "yo/record_io.hpp"
#include "yo/stats.hpp"
#include "yo/yo.hpp"

namespace yo::harness {

namespace fs = std::filesystem;

// Formatting -----------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Problems -------------------------------------------------------------------

inline ContinuousBox continuous_space(const ProblemSpec& p) {
    switch (p.kind) {
        case ProblemKind::Composite5D: return ContinuousBox::cube(5, -5.12, 5.12);
        case ProblemKind::Rosenbrock5D: return ContinuousBox::cube(5, -5.0, 10.0);
        default: throw ConfigError("problem " + to_string(p) + " is not continuous");
    }
}

inline Objective<ContinuousBox> continuous_objective(const ProblemSpec& p, double delay_seconds) {
    Objective<ContinuousBox> f{continuous_space(p), {}, {}};
    if (p.kind == ProblemKind::Composite5D) {
        const auto w = p.weights;
        f.fn = [w](const RealVector& x) { return composite_expensive(x, w); };
    } else {
        f.fn = [](const RealVector& x) { return rosenbrock(x); };
    }
    f.delay = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(delay_seconds));
    return f;
}

inline Objective<PermutationSpace> tsp_problem(const TspInstance& inst, double delay_seconds) {
    auto f = tsp_objective(inst);
    f.delay = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(delay_seconds));
    return f;
}

// Single runs ----------------------------------------------------------------

inline YoConfig make_yo_config(const OptimizerEntry& opt, const Overrides& base, std::size_t budget,
                               std::uint64_t seed) {
    YoConfig c;
    for (const auto& [k, v] : base) apply_override(c, k, v);
    for (const auto& [k, v] : opt.overrides) apply_override(c, k, v);
    c.budget = budget;
    c.seed = seed;
    return c;
}

inline BaselineConfig make_baseline_config(const OptimizerEntry& opt, std::size_t budget, std::uint64_t seed) {
    BaselineConfig c;
    c.algorithm = opt.algorithm;
    for (const auto& [k, v] : opt.overrides) apply_override(c, k, v);
    c.budget = budget;
    c.seed = seed;
    return c;
}

/// Runs one optimizer. `pinned_t0` replaces an automatic YO temperature.
template <SearchSpace S>
RunRecord<typename S::point_type> run_optimizer(const Objective<S>& f, const OptimizerEntry& opt, const Overrides& base,
                                                std::size_t budget, std::uint64_t seed,
                                                std::optional<double> pinned_t0 = std::nullopt) {
    if (opt.algorithm == Algorithm::YO) {
        auto c = make_yo_config(opt, base, budget, seed);
        if (pinned_t0 && !c.t0) c.t0 = pinned_t0;
        return run(f, c);
    }
    return run_baseline(f, make_baseline_config(opt, budget, seed));
}

/// Optimizer seed for repetition `rep` on seed `seed`; repetition 0 uses the seed itself.
inline std::uint64_t run_seed(std::uint64_t seed, std::size_t rep) {
    if (rep == 0) return seed;
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * rep;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::string run_stem(std::uint64_t seed, std::size_t rep) {
    return "seed" + std::to_string(seed) + (rep == 0 ? "" : "_r" + std::to_string(rep));
}

/// Calls fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception stops scheduling and is rethrown.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, count); ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next.store(count);
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

// Results --------------------------------------------------------------------

/// One finished run, reduced to what the tables and files need.
struct RunOutcome {
    std::size_t variant = 0;
    std::uint64_t seed = 0;  // experiment seed (TSP: instance seed)
    std::size_t rep = 0;
    std::uint64_t optimizer_seed = 0;
    std::string algorithm;
    double best_value = 0.0;
    std::size_t evaluations_used = 0;
    std::optional<double> wall_time_ms;
    double t0 = 0.0;
    std::string json;               // serialized RunRecord
    std::string trace_csv;          // eval,best
    std::optional<Tour> tour;       // TSP only
};

template <class Point>
RunOutcome make_outcome(const RunRecord<Point>& rec, const JsonOptions& opt) {
    RunOutcome o;
    o.algorithm = rec.algorithm;
    o.best_value = rec.best_value;
    o.evaluations_used = rec.evaluations_used;
    o.wall_time_ms = rec.wall_time_ms;
    o.t0 = rec.t0;
    o.json = to_json_string(rec, opt);
    std::ostringstream trace;
    write_trace_csv(trace, rec);
    o.trace_csv = trace.str();
    if constexpr (std::is_same_v<Point, Tour>) o.tour = rec.best.position;
    return o;
}

struct ResultRow {
    std::string variant;
    std::string algorithm;
    std::vector<double> values;  // final best per run, ordered by (seed, rep)
    stats::SampleSummary summary;
    std::optional<double> runtime_mean_ms;
    std::optional<double> p_value;   // two-sided Welch vs the reference row
    std::optional<double> cohens_d;  // (this - reference) / pooled std
    std::optional<std::size_t> rank;
    bool external = false;
};

struct ResultTable {
    std::string experiment;
    std::string reference;  // variant the tests compare against
    std::vector<ResultRow> rows;

    const ResultRow& row(const std::string& variant) const {
        for (const auto& r : rows)
            if (r.variant == variant) return r;
        throw InvalidInput("no row for variant '" + variant + "'");
    }
};

/// Fills p_value and cohens_d of every row against `reference`; both stay
/// absent when either sample is too small or degenerate.
inline void compare_against(ResultTable& table, const std::string& reference) {
    table.reference = reference;
    const auto ref = table.row(reference).values;
    for (auto& r : table.rows) {
        r.p_value.reset();
        r.cohens_d.reset();
        if (r.variant == reference || r.values.size() < 2 || ref.size() < 2) continue;
        try {
            r.p_value = stats::welch_t_test(r.values, ref).p_value;
        } catch (const DegenerateInput&) {
        }
        try {
            r.cohens_d = stats::cohens_d(r.values, ref);
        } catch (const DegenerateInput&) {
        }
    }
}

inline ResultRow make_row(std::string variant, std::string algorithm, std::vector<double> values,
                          const std::vector<std::optional<double>>& runtimes) {
    ResultRow r;
    r.variant = std::move(variant);
    r.algorithm = std::move(algorithm);
    r.values = std::move(values);
    r.summary = stats::summarize(r.values);
    if (!runtimes.empty() && std::all_of(runtimes.begin(), runtimes.end(), [](const auto& t) { return t.has_value(); })) {
        double sum = 0.0;
        for (const auto& t : runtimes) sum += *t;
        r.runtime_mean_ms = sum / static_cast<double>(runtimes.size());
    }
    return r;
}

inline void write_summary_csv(std::ostream& os, const ResultTable& t) {
    os << "rank,variant,algorithm,n,mean,std,cv,min,median,max,runtime_mean_ms,p_value_vs_reference,"
          "cohens_d_vs_reference,reference\n";
    for (const auto& r : t.rows) {
        const auto& s = r.summary;
        os << (r.rank ? std::to_string(*r.rank) : "") << ',' << r.variant << ',' << r.algorithm << ',' << s.n << ','
           << format_double(s.mean) << ',' << format_double(s.std) << ',' << format_optional(s.cv) << ','
           << format_double(s.min) << ',' << format_double(s.median) << ',' << format_double(s.max) << ','
           << format_optional(r.runtime_mean_ms) << ',' << format_optional(r.p_value) << ','
           << format_optional(r.cohens_d) << ',' << t.reference << '\n';
    }
}

// Persistence ----------------------------------------------------------------

inline void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

inline void write_tour_csv(std::ostream& os, const Tour& tour) {
    os << "order,city\n";
    for (std::size_t i = 0; i < tour.size(); ++i) os << i << ',' << tour[i] << '\n';
}

inline Tour read_tour_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != "order,city") throw IngestionError("tour csv: missing header");
    Tour t;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 2) throw IngestionError("tour csv row " + std::to_string(row) + ": expected 2 fields");
        try {
            t.push_back(parse_size("city", parts[1]));
        } catch (const ConfigError& e) {
            throw IngestionError("tour csv row " + std::to_string(row) + ": " + e.what());
        }
    }
    return t;
}

/// Writes every run's JSON and trace under <out>/<experiment>/<variant>/.
inline void write_runs(const fs::path& dir, const ExperimentSpec& spec, const std::vector<RunOutcome>& runs) {
    for (const auto& o : runs) {
        const auto vdir = dir / spec.optimizers[o.variant].name;
        const auto stem = run_stem(o.seed, o.rep);
        write_file(vdir / (stem + ".json"), o.json);
        write_file(vdir / (stem + "_trace.csv"), o.trace_csv);
        if (o.tour) {
            std::ostringstream os;
            write_tour_csv(os, *o.tour);
            write_file(vdir / (stem + "_tour.csv"), os.str());
        }
    }
}

inline void write_raw_values(const fs::path& path, const ExperimentSpec& spec, const std::vector<RunOutcome>& runs) {
    std::ostringstream os;
    os << "variant,seed,rep,optimizer_seed,best_value,evaluations_used\n";
    for (const auto& o : runs)
        os << spec.optimizers[o.variant].name << ',' << o.seed << ',' << o.rep << ',' << o.optimizer_seed << ','
           << format_double(o.best_value) << ',' << o.evaluations_used << '\n';
    write_file(path, os.str());
}

inline void write_table(const fs::path& path, const ResultTable& t) {
    std::ostringstream os;
    write_summary_csv(os, t);
    write_file(path, os.str());
}

/// Sorts outcomes by (variant, seed order, rep) and builds one row per variant.
inline ResultTable tabulate(const ExperimentSpec& spec, std::vector<RunOutcome>& runs) {
    std::map<std::uint64_t, std::size_t> seed_pos;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) seed_pos[spec.seeds[i]] = i;
    std::sort(runs.begin(), runs.end(), [&](const RunOutcome& a, const RunOutcome& b) {
        return std::tuple(a.variant, seed_pos[a.seed], a.rep) < std::tuple(b.variant, seed_pos[b.seed], b.rep);
    });
    ResultTable t;
    t.experiment = spec.name;
    for (std::size_t v = 0; v < spec.optimizers.size(); ++v) {
        std::vector<double> values;
        std::vector<std::optional<double>> times;
        std::string algorithm = to_string(spec.optimizers[v].algorithm);
        for (const auto& o : runs)
            if (o.variant == v) {
                values.push_back(o.best_value);
                times.push_back(spec.include_timing ? o.wall_time_ms : std::nullopt);
            }
        t.rows.push_back(make_row(spec.optimizers[v].name, algorithm, std::move(values),
                                  spec.include_timing ? times : std::vector<std::optional<double>>{}));
    }
    return t;
}

// Experiment drivers ---------------------------------------------------------

struct ExperimentResult {
    ResultTable table;
    std::vector<RunOutcome> runs;  // sorted by (variant, seed, rep)
    fs::path directory;
};

namespace detail {

struct Job {
    std::size_t variant;
    std::uint64_t seed;
    std::size_t rep;
};

inline std::vector<Job> jobs_for(const ExperimentSpec& spec, const std::vector<std::size_t>& variants) {
    std::vector<Job> jobs;
    for (auto v : variants)
        for (auto s : spec.seeds)
            for (std::size_t r = 0; r < spec.runs_per_variant; ++r) jobs.push_back({v, s, r});
    return jobs;
}

inline JsonOptions json_options(const ExperimentSpec& spec) {
    JsonOptions o;
    o.include_timing = spec.include_timing;
    return o;
}

template <SearchSpace S, class MakeObjective>
std::vector<RunOutcome> execute(const ExperimentSpec& spec, const std::vector<Job>& jobs, MakeObjective&& objective,
                                const std::map<std::pair<std::uint64_t, std::size_t>, double>& pinned = {}) {
    std::vector<RunOutcome> out(jobs.size());
    const auto opts = json_options(spec);
    parallel_for(jobs.size(), spec.parallel, [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto& opt = spec.optimizers[job.variant];
        const auto f = objective(job.seed);
        std::optional<double> t0;
        if (auto it = pinned.find({job.seed, job.rep}); it != pinned.end()) t0 = it->second;
        const auto seed = run_seed(job.seed, job.rep);
        auto rec = run_optimizer<S>(f, opt, spec.yo_base, spec.budget, seed, t0);
        auto o = make_outcome(rec, opts);
        o.variant = job.variant;
        o.seed = job.seed;
        o.rep = job.rep;
        o.optimizer_seed = seed;
        out[i] = std::move(o);
    });
    return out;
}

inline std::vector<std::size_t> all_variants(const ExperimentSpec& spec) {
    std::vector<std::size_t> v(spec.optimizers.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
}

}  // namespace detail

/// Ablation study. The first optimizer is the reference; every YO variant
/// without an explicit t0 runs at the reference's resolved temperature for
/// the same seed, so variants differ only in their switches.
inline ExperimentResult run_ablation(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.problem.kind != ProblemKind::Composite5D) throw ConfigError("ablation requires problem composite5d");
    const auto objective = [&](std::uint64_t) { return continuous_objective(spec.problem, spec.delay_seconds); };

    auto runs = detail::execute<ContinuousBox>(spec, detail::jobs_for(spec, {0}), objective);
    std::map<std::pair<std::uint64_t, std::size_t>, double> pinned;
    if (spec.optimizers[0].algorithm == Algorithm::YO)
        for (const auto& o : runs) pinned[{o.seed, o.rep}] = o.t0;
    auto rest = detail::all_variants(spec);
    rest.erase(rest.begin());
    auto more = detail::execute<ContinuousBox>(spec, detail::jobs_for(spec, rest), objective, pinned);
    runs.insert(runs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));

    ExperimentResult r;
    r.table = tabulate(spec, runs);
    compare_against(r.table, spec.optimizers[0].name);
    r.runs = std::move(runs);
    r.directory = spec.output_dir / spec.name;
    return r;
}

inline fs::path instance_path(const fs::path& dir, std::size_t n, std::uint64_t seed) {
    return dir / "instances" / ("n" + std::to_string(n) + "_seed" + std::to_string(seed) + ".csv");
}

/// TSP suite: every optimizer on the same generated instance per seed.
/// The first optimizer is the reference.
inline ExperimentResult run_tsp_suite(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.problem.kind != ProblemKind::Tsp) throw ConfigError("tsp suite requires problem tsp(n)");
    std::map<std::uint64_t, TspInstance> instances;
    for (auto s : spec.seeds) instances.emplace(s, generate_tsp(spec.problem.n, s));
    const auto objective = [&](std::uint64_t s) { return tsp_problem(instances.at(s), spec.delay_seconds); };
    auto runs = detail::execute<PermutationSpace>(spec, detail::jobs_for(spec, detail::all_variants(spec)), objective);

    ExperimentResult r;
    r.table = tabulate(spec, runs);
    compare_against(r.table, spec.optimizers[0].name);
    r.runs = std::move(runs);
    r.directory = spec.output_dir / spec.name;
    return r;
}

/// One row per external algorithm read from `algorithm,seed,final_best` CSV.
inline std::vector<ResultRow> read_external_csv(std::istream& is, const std::string& source = "external csv") {
    std::string line;
    std::size_t row = 1;
    auto fail = [&](const std::string& msg) {
        throw IngestionError(source + " row " + std::to_string(row) + ": " + msg);
    };
    if (!std::getline(is, line)) fail("empty file, expected header algorithm,seed,final_best");
    if (trim(line) != "algorithm,seed,final_best") fail("expected header algorithm,seed,final_best");
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> values;
    std::set<std::pair<std::string, std::uint64_t>> seen;
    while (std::getline(is, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 3) fail("expected 3 fields, got " + std::to_string(parts.size()));
        if (!safe_name(parts[0])) fail("bad algorithm name '" + parts[0] + "'");
        std::uint64_t seed = 0;
        double value = 0.0;
        try {
            seed = parse_u64("seed", parts[1]);
            value = parse_double("final_best", parts[2]);
        } catch (const ConfigError& e) {
            fail(e.what());
        }
        if (!seen.emplace(parts[0], seed).second) fail("duplicate seed " + parts[1] + " for " + parts[0]);
        if (!values.count(parts[0])) order.push_back(parts[0]);
        values[parts[0]].push_back(value);
    }
    std::vector<ResultRow> rows;
    for (const auto& name : order) {
        auto r = make_row(name, "external", values[name], {});
        r.external = true;
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Continuous comparison: internal optimizers plus any external results,
/// ranked by mean; tests are against the best-ranked method.
inline ExperimentResult run_continuous_comparison(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.problem.kind == ProblemKind::Tsp) throw ConfigError("continuous comparison requires a continuous problem");
    const auto objective = [&](std::uint64_t) { return continuous_objective(spec.problem, spec.delay_seconds); };
    auto runs = detail::execute<ContinuousBox>(spec, detail::jobs_for(spec, detail::all_variants(spec)), objective);

    ExperimentResult r;
    r.table = tabulate(spec, runs);
    for (const auto& path : spec.external) {
        std::ifstream in(path);
        if (!in) throw IngestionError("cannot open external csv '" + path.string() + "'");
        for (auto& row : read_external_csv(in, path.string())) {
            for (const auto& existing : r.table.rows)
                if (existing.variant == row.variant)
                    throw IngestionError(path.string() + ": algorithm '" + row.variant + "' already present");
            r.table.rows.push_back(std::move(row));
        }
    }
    std::stable_sort(r.table.rows.begin(), r.table.rows.end(),
                     [](const ResultRow& a, const ResultRow& b) { return a.summary.mean < b.summary.mean; });
    for (std::size_t i = 0; i < r.table.rows.size(); ++i) r.table.rows[i].rank = i + 1;
    compare_against(r.table, r.table.rows.front().variant);
    r.runs = std::move(runs);
    r.directory = spec.output_dir / spec.name;
    return r;
}

// Emission -------------------------------------------------------------------

/// Pairwise tests of every row against the reference (Welch, Cohen's d,
/// one-sided Mann-Whitney that the reference is smaller).
inline void write_pairwise_csv(std::ostream& os, const ResultTable& t) {
    os << "comparison,welch_p,cohens_d,mann_whitney_p_reference_less\n";
    const auto& ref = t.row(t.reference);
    for (const auto& r : t.rows) {
        if (r.variant == t.reference) continue;
        std::optional<double> mw;
        if (!r.values.empty() && !ref.values.empty()) {
            try {
                mw = stats::mann_whitney_u(ref.values, r.values).p_less;
            } catch (const DegenerateInput&) {
            }
        }
        os << t.reference << " vs " << r.variant << ',' << format_optional(r.p_value) << ','
           << format_optional(r.cohens_d) << ',' << format_optional(mw) << '\n';
    }
}

/// Writes run files, raw_values.csv, summary.csv and, per experiment kind,
/// the TSP instance/per-seed tables or the pairwise test table.
inline void write_experiment(const ExperimentSpec& spec, const ExperimentResult& r) {
    fs::create_directories(r.directory);
    write_runs(r.directory, spec, r.runs);
    write_raw_values(r.directory / "raw_values.csv", spec, r.runs);
    write_table(r.directory / "summary.csv", r.table);

    if (spec.problem.kind == ProblemKind::Tsp) {
        for (auto s : spec.seeds) {
            std::ostringstream os;
            write_tsp_csv(os, generate_tsp(spec.problem.n, s));
            write_file(instance_path(r.directory, spec.problem.n, s), os.str());
        }
        // Per-seed detail: mean over repetitions of each optimizer's final length.
        std::ostringstream os;
        os << "seed";
        for (const auto& o : spec.optimizers) os << ',' << o.name;
        os << '\n';
        for (auto s : spec.seeds) {
            os << s;
            for (std::size_t v = 0; v < spec.optimizers.size(); ++v) {
                double sum = 0.0;
                std::size_t k = 0;
                for (const auto& o : r.runs)
                    if (o.variant == v && o.seed == s) {
                        sum += o.best_value;
                        ++k;
                    }
                os << ',' << format_double(sum / static_cast<double>(k));
            }
            os << '\n';
        }
        write_file(r.directory / "per_seed.csv", os.str());
    } else if (!r.table.rows.empty() && r.table.rows.front().rank) {
        std::ostringstream os;
        write_pairwise_csv(os, r.table);
        write_file(r.directory / "pairwise.csv", os.str());
        for (const auto& path : spec.external) {
            fs::create_directories(r.directory / "external");
            fs::copy_file(path, r.directory / "external" / path.filename(), fs::copy_options::overwrite_existing);
        }
    }
}

}  // namespace yo::harness
