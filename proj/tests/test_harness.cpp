#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "yo/harness.hpp"

using namespace yo;
using namespace yo::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("yo_harness_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentSpec parse(const std::string& text) {
    ExperimentSpec s = default_ablation_spec();
    std::istringstream in(text);
    load_spec(in, s, "test.spec");
    return s;
}

std::string config_error(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string summary_of(const ResultTable& t) {
    std::ostringstream os;
    write_summary_csv(os, t);
    return os.str();
}

}  // namespace

TEST(Parsing, Scalars) {
    EXPECT_EQ(trim("  a b \t"), "a b");
    EXPECT_EQ(split("a, b,,c", ','), (std::vector<std::string>{"a", "b", "", "c"}));
    EXPECT_EQ(parse_seed_list("seeds", "1-3,7"), (std::vector<std::uint64_t>{1, 2, 3, 7}));
    EXPECT_THROW(parse_seed_list("seeds", "5-2"), ConfigError);
    EXPECT_THROW(parse_double("x", "1.5abc"), ConfigError);
    EXPECT_THROW(parse_size("x", "-1"), ConfigError);
    EXPECT_TRUE(parse_bool("x", "yes"));
    EXPECT_FALSE(parse_bool("x", "0"));
    EXPECT_THROW(parse_bool("x", "maybe"), ConfigError);
    EXPECT_EQ(parse_problem("tsp(100)").n, 100u);
    EXPECT_EQ(parse_problem("rosenbrock5d").kind, ProblemKind::Rosenbrock5D);
    EXPECT_THROW(parse_problem("tsp(2)"), ConfigError);
    EXPECT_THROW(parse_problem("sphere"), ConfigError);
    EXPECT_EQ(parse_probe_cap("p", "unlimited"), std::numeric_limits<std::size_t>::max());
    EXPECT_EQ(parse_assignment("a = b"), (std::pair<std::string, std::string>{"a", "b"}));
    EXPECT_THROW(parse_assignment("novalue"), ConfigError);
    EXPECT_EQ(seed_range(5, 3), (std::vector<std::uint64_t>{5, 6, 7}));
}

TEST(Parsing, YoOverrides) {
    YoConfig c;
    apply_override(c, "chains", "6");
    apply_override(c, "t0", "2.5");
    apply_override(c, "blacklist", "off");
    apply_override(c, "move_mix", "0.2,0.3,0.5");
    apply_override(c, "refine_max_probes", "unlimited");
    EXPECT_EQ(c.chains, 6u);
    EXPECT_EQ(c.t0, 2.5);
    EXPECT_FALSE(c.blacklist_enabled);
    EXPECT_EQ(c.proposal.move_mix, (std::array<double, 3>{0.2, 0.3, 0.5}));
    EXPECT_EQ(c.refine_max_probes, std::numeric_limits<std::size_t>::max());
    apply_override(c, "t0", "auto");
    EXPECT_FALSE(c.t0.has_value());
    EXPECT_THROW(apply_override(c, "population_size", "10"), ConfigError);
    EXPECT_THROW(apply_override(c, "beta", "fast"), ConfigError);

    BaselineConfig b;
    apply_override(b, "population_size", "12");
    EXPECT_EQ(b.population_size, 12u);
    EXPECT_THROW(apply_override(b, "chains", "2"), ConfigError);
}

TEST(SpecFile, FullExample) {
    const auto s = parse(R"(
# comment
[experiment]
name = tsp_small
problem = tsp(20)
budget = 900
seeds = 1-3
runs = 2
parallel = 2

[yo]
beta = 0.9

[variant fast_yo]
algorithm = yo
chains = 2
top_k = 1

[variant ga]
algorithm = ga
population_size = 10
)");
    EXPECT_EQ(s.name, "tsp_small");
    EXPECT_EQ(s.problem.kind, ProblemKind::Tsp);
    EXPECT_EQ(s.problem.n, 20u);
    EXPECT_EQ(s.budget, 900u);
    EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
    EXPECT_EQ(s.runs_per_variant, 2u);
    EXPECT_EQ(s.parallel, 2u);
    ASSERT_EQ(s.optimizers.size(), 2u);
    EXPECT_EQ(s.optimizers[0].name, "fast_yo");
    EXPECT_EQ(s.optimizers[1].algorithm, Algorithm::GA);
    EXPECT_EQ(s.yo_base, (Overrides{{"beta", "0.9"}}));
    const auto yc = make_yo_config(s.optimizers[0], s.yo_base, s.budget, 4);
    EXPECT_EQ(yc.chains, 2u);
    EXPECT_EQ(yc.beta, 0.9);
    EXPECT_EQ(yc.seed, 4u);
    EXPECT_NO_THROW(s.validate());
}

TEST(SpecFile, ErrorsNameTheLine) {
    EXPECT_NE(config_error("[experiment]\nbudget = lots\n").find("test.spec:2"), std::string::npos);
    EXPECT_NE(config_error("budget = 5\n").find("test.spec:1"), std::string::npos);
    EXPECT_NE(config_error("[experiment]\n\nwhatever = 1\n").find("test.spec:3"), std::string::npos);
    EXPECT_NE(config_error("[nope]\n").find("unknown section"), std::string::npos);
    EXPECT_NE(config_error("[variant x]\nchains = 2\n").find("no algorithm"), std::string::npos);
    EXPECT_NE(config_error("[variant x]\nalgorithm = sa\nchains = 2\n").find("chains"), std::string::npos);
    EXPECT_NE(config_error("[yo]\nbeta\n").find("key = value"), std::string::npos);
    EXPECT_THROW(load_spec_file("/nonexistent/file.spec", *std::make_unique<ExperimentSpec>()), ConfigError);
}

TEST(SpecValidation, RejectsBadSpecs) {
    auto s = default_ablation_spec();
    s.optimizers.push_back(s.optimizers[0]);
    EXPECT_THROW(s.validate(), ConfigError);
    s = default_ablation_spec();
    s.seeds = {1, 1};
    EXPECT_THROW(s.validate(), ConfigError);
    s = default_ablation_spec();
    s.name = "../evil";
    EXPECT_THROW(s.validate(), ConfigError);
    s = default_ablation_spec();
    s.seeds.clear();
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Defaults, ExperimentShapes) {
    const auto a = default_ablation_spec();
    ASSERT_EQ(a.optimizers.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(a.optimizers[i].name, ablation_variants()[i]);
    EXPECT_EQ(a.seeds.size(), 30u);
    EXPECT_EQ(a.budget, 150u);
    const auto t = default_tsp_spec(100);
    EXPECT_EQ(t.problem.n, 100u);
    EXPECT_EQ(t.seeds, (std::vector<std::uint64_t>{42, 101, 202}));
    EXPECT_EQ(default_continuous_spec().problem.kind, ProblemKind::Rosenbrock5D);
}

TEST(Formatting, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 614.4712345678901, 1e-300, -2.5}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_optional(std::nullopt), "");
    EXPECT_EQ(run_stem(7, 0), "seed7");
    EXPECT_EQ(run_stem(7, 2), "seed7_r2");
    EXPECT_EQ(run_seed(7, 0), 7u);
    EXPECT_NE(run_seed(7, 1), run_seed(7, 2));
}

TEST(Ablation, SingleRunHasSixRowsAndNoTests) {
    auto s = default_ablation_spec();
    s.seeds = {1};
    const auto r = run_ablation(s);
    ASSERT_EQ(r.table.rows.size(), 6u);
    for (const auto& row : r.table.rows) {
        EXPECT_EQ(row.values.size(), 1u);
        EXPECT_FALSE(row.p_value.has_value());
        EXPECT_FALSE(row.cohens_d.has_value());
        EXPECT_FALSE(row.runtime_mean_ms.has_value());
    }
    EXPECT_EQ(r.runs.size(), 6u);
    for (const auto& o : r.runs) EXPECT_LE(o.evaluations_used, 150u);
}

TEST(Ablation, VariantsShareTheReferenceTemperature) {
    auto s = default_ablation_spec();
    s.seeds = seed_range(1, 5);
    const auto r = run_ablation(s);
    // runs are sorted by variant first; the leading five belong to A0
    for (const auto& o : r.runs) EXPECT_EQ(o.t0, r.runs[o.seed - 1].t0);
    const auto& a0 = r.table.row("A0_full");
    EXPECT_EQ(a0.values.size(), 5u);
    EXPECT_EQ(r.table.reference, "A0_full");
    EXPECT_TRUE(r.table.row("A1_no_mcmc").p_value.has_value());
}

TEST(Ablation, ParallelMatchesSequential) {
    auto s = default_ablation_spec();
    s.seeds = seed_range(1, 4);
    s.runs_per_variant = 2;
    const auto seq = run_ablation(s);
    s.parallel = 3;
    const auto par = run_ablation(s);
    EXPECT_EQ(summary_of(seq.table), summary_of(par.table));
    ASSERT_EQ(seq.runs.size(), par.runs.size());
    for (std::size_t i = 0; i < seq.runs.size(); ++i) EXPECT_EQ(seq.runs[i].json, par.runs[i].json);
}

TEST(Ablation, RequiresComposite) {
    auto s = default_ablation_spec();
    s.problem.kind = ProblemKind::Rosenbrock5D;
    EXPECT_THROW(run_ablation(s), ConfigError);
}

TEST(ExternalCsv, RowsAndErrors) {
    std::ostringstream csv;
    csv << "algorithm,seed,final_best\n";
    for (int s = 1; s <= 30; ++s) csv << "bayesopt," << s << ',' << 10.0 + s * 0.1 << '\n';
    std::istringstream in(csv.str());
    const auto rows = read_external_csv(in);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].variant, "bayesopt");
    EXPECT_EQ(rows[0].values.size(), 30u);
    EXPECT_TRUE(rows[0].external);

    auto error_of = [](const std::string& text) {
        std::istringstream is(text);
        try {
            read_external_csv(is, "ext.csv");
        } catch (const IngestionError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(error_of("algorithm,seed,final_best\nb,1,2.0\nb,2,oops\n").find("row 3"), std::string::npos);
    EXPECT_NE(error_of("algorithm,seed,final_best\nb,1\n").find("row 2"), std::string::npos);
    EXPECT_NE(error_of("algorithm,seed,final_best\nb,1,1\nb,1,2\n").find("duplicate"), std::string::npos);
    EXPECT_NE(error_of("alg,seed\n").find("header"), std::string::npos);
}

TEST(Continuous, ExternalRowsAreRanked) {
    const auto dir = scratch_dir("continuous");
    {
        std::ofstream out(dir / "bayesopt.csv");
        out << "algorithm,seed,final_best\n";
        for (int s = 1; s <= 30; ++s) out << "bayesopt," << s << ',' << 1e6 + s << '\n';
    }
    auto s = default_continuous_spec();
    s.seeds = seed_range(1, 4);
    s.external = {dir / "bayesopt.csv"};
    s.output_dir = dir / "out";
    const auto r = run_continuous_comparison(s);
    ASSERT_EQ(r.table.rows.size(), 4u);
    EXPECT_EQ(r.table.rows.back().variant, "bayesopt");
    EXPECT_EQ(*r.table.rows.back().rank, 4u);
    EXPECT_EQ(r.table.reference, r.table.rows.front().variant);
    for (std::size_t i = 1; i < r.table.rows.size(); ++i)
        EXPECT_LE(r.table.rows[i - 1].summary.mean, r.table.rows[i].summary.mean);
    EXPECT_GT(*r.table.rows.back().cohens_d, 0.0);

    write_experiment(s, r);
    EXPECT_TRUE(fs::exists(r.directory / "pairwise.csv"));
    EXPECT_TRUE(fs::exists(r.directory / "external" / "bayesopt.csv"));
    EXPECT_TRUE(fs::exists(r.directory / "yo" / "seed1.json"));
    fs::remove_all(dir);
}

TEST(Continuous, NameCollisionRejected) {
    const auto dir = scratch_dir("collision");
    {
        std::ofstream out(dir / "x.csv");
        out << "algorithm,seed,final_best\napso,1,3\n";
    }
    auto s = default_continuous_spec();
    s.seeds = {1};
    s.external = {dir / "x.csv"};
    EXPECT_THROW(run_continuous_comparison(s), IngestionError);
    fs::remove_all(dir);
}

TEST(TspSuite, WrittenToursReproduceLengths) {
    const auto dir = scratch_dir("tsp");
    auto s = default_tsp_spec(30);
    s.budget = 2000;
    s.seeds = {42, 7};
    s.output_dir = dir;
    const auto r = run_tsp_suite(s);
    write_experiment(s, r);
    EXPECT_EQ(r.table.reference, "yo");
    for (const auto& opt : s.optimizers)
        for (auto seed : s.seeds) {
            std::ifstream inst_in(instance_path(r.directory, 30, seed));
            const auto inst = read_tsp_csv(inst_in);
            std::ifstream tour_in(r.directory / opt.name / (run_stem(seed, 0) + "_tour.csv"));
            const auto tour = read_tour_csv(tour_in);
            const auto json = nlohmann::json::parse(slurp(r.directory / opt.name / (run_stem(seed, 0) + ".json")));
            EXPECT_NEAR(tour_length(inst, tour), json["best_value"].get<double>(), 1e-9) << opt.name << " " << seed;
            EXPECT_LE(json["evaluations_used"].get<std::size_t>(), 2000u);
        }
    EXPECT_TRUE(fs::exists(r.directory / "summary.csv"));
    EXPECT_TRUE(fs::exists(r.directory / "per_seed.csv"));
    EXPECT_TRUE(fs::exists(r.directory / "raw_values.csv"));
    fs::remove_all(dir);
}

TEST(Summary, ReproducibleBytes) {
    auto s = default_ablation_spec();
    s.seeds = seed_range(3, 3);
    EXPECT_EQ(summary_of(run_ablation(s).table), summary_of(run_ablation(s).table));
    const auto text = summary_of(run_ablation(s).table);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "rank,variant,algorithm,n,mean,std,cv,min,median,max,runtime_mean_ms,p_value_vs_reference,"
              "cohens_d_vs_reference,reference");
}

TEST(Summary, TimingOptIn) {
    auto s = default_ablation_spec();
    s.seeds = {1, 2};
    s.include_timing = true;
    for (const auto& row : run_ablation(s).table.rows) EXPECT_TRUE(row.runtime_mean_ms.has_value());
}

TEST(CompareAgainst, SignAndDegenerateRows) {
    ResultTable t;
    t.rows.push_back(make_row("ref", "yo", {1, 2, 3}, {}));
    t.rows.push_back(make_row("worse", "sa", {2, 3, 4}, {}));
    t.rows.push_back(make_row("flat", "ga", {5, 5, 5}, {}));
    compare_against(t, "ref");
    EXPECT_NEAR(*t.row("worse").cohens_d, 1.0, 1e-12);
    EXPECT_TRUE(t.row("flat").p_value.has_value());
    EXPECT_FALSE(t.row("ref").p_value.has_value());
    EXPECT_THROW(t.row("missing"), InvalidInput);
}
