#include <benchmark/benchmark.h>

#include <vector>

#include "fcs/dataset.hpp"
#include "fcs/fcs.hpp"
#include "fcs/learners.hpp"
#include "fcs/search.hpp"
#include "fcs/semantics.hpp"

namespace {

using namespace fcs;

Dataset synthetic(std::size_t rows, int features, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.task = Task::Regression;
    ds.columns.assign(features, {});
    for (int j = 0; j < features; ++j) ds.column_names.push_back("x" + std::to_string(j));
    for (std::size_t i = 0; i < rows; ++i) {
        for (int j = 0; j < features; ++j) ds.columns[j].push_back(rng.uniform(-1, 1));
        ds.target.push_back(ds.columns[0][i] * ds.columns[1][i] + ds.columns[2][i]);
    }
    return ds;
}

void bm_eval_tree(benchmark::State& state) {
    auto ds = synthetic(static_cast<std::size_t>(state.range(0)), 8, 1);
    Rng rng(2);
    TerminalSet terms{8, {-1.0, 1.0}};
    auto tree = sample_template_tree(InitMethod::Full, 4, 4, terms, rng);
    for (auto _ : state) benchmark::DoNotOptimize(eval_tree(tree, ds));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_eval_tree)->Arg(256)->Arg(1024)->Arg(4096);

void bm_cross_val_ols(benchmark::State& state) {
    auto ds = synthetic(static_cast<std::size_t>(state.range(0)), 3, 3);
    auto folds = make_folds(ds, 5, 1);
    LearnerSpec spec{LearnerKind::OLS};
    for (auto _ : state) benchmark::DoNotOptimize(cross_val_error(spec, ds, folds));
}
BENCHMARK(bm_cross_val_ols)->Arg(256)->Arg(1024);

void bm_cross_val_rf(benchmark::State& state) {
    auto ds = synthetic(static_cast<std::size_t>(state.range(0)), 3, 3);
    auto folds = make_folds(ds, 5, 1);
    LearnerSpec spec{LearnerKind::RF, 1, 25};
    for (auto _ : state) benchmark::DoNotOptimize(cross_val_error(spec, ds, folds));
}
BENCHMARK(bm_cross_val_rf)->Arg(256);

void bm_linkage_tree(benchmark::State& state) {
    Rng rng(4);
    TerminalSet terms{8, {-1.0, 1.0}};
    InitScheme scheme{4, 4, 1, 100};
    auto pop = init_template_population(static_cast<std::size_t>(state.range(0)),
                                        scheme, terms, rng);
    for (auto _ : state) benchmark::DoNotOptimize(build_linkage_tree(pop));
}
BENCHMARK(bm_linkage_tree)->Arg(100)->Arg(1000);

void bm_construction_round(benchmark::State& state) {
    auto ds = synthetic(250, 8, 5);
    FCSConfig config;
    config.K = 1;
    config.search.algorithm = Algorithm::GomeaRT;
    config.search.population_size = 50;
    config.search.eval_budget = static_cast<std::size_t>(state.range(0));
    config.learner.kind = LearnerKind::OLS;
    config.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(construct_features(ds, config));
}
BENCHMARK(bm_construction_round)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
