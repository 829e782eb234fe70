#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fcs/dataset.hpp"
#include "fcs/fcs.hpp"

using namespace fcs;
using doctest::Approx;

namespace {

Dataset linear_target(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.task = Task::Regression;
    ds.column_names = {"a", "b", "c"};
    ds.columns.assign(3, {});
    for (std::size_t i = 0; i < n; ++i) {
        double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
        ds.columns[0].push_back(a);
        ds.columns[1].push_back(b);
        ds.columns[2].push_back(c);
        ds.target.push_back(a);
    }
    return ds;
}

Dataset sum_target(std::size_t n, std::uint64_t seed) {
    auto ds = linear_target(n, seed);
    for (std::size_t i = 0; i < n; ++i)
        ds.target[i] = ds.columns[0][i] + ds.columns[1][i];
    return ds;
}

FCSConfig quick_config() {
    FCSConfig config;
    config.K = 1;
    config.search.algorithm = Algorithm::GomeaRT;
    config.search.population_size = 60;
    config.search.eval_budget = 1500;
    config.search.h = 2;
    config.learner.kind = LearnerKind::OLS;
    config.folds_C = 5;
    config.test_fraction = 0.2;
    config.seed = 1;
    return config;
}

}  // namespace

TEST_CASE("seed streams are distinct and stable") {
    std::set<std::uint64_t> seeds = {
        split_stream_seed(9), folds_stream_seed(9), learner_stream_seed(9),
        round_stream_seed(9, 1), round_stream_seed(9, 2)};
    CHECK(seeds.size() == 5);
    CHECK(split_stream_seed(9) == split_stream_seed(9));
    CHECK(round_stream_seed(9, 1) != round_stream_seed(10, 1));
}

TEST_CASE("an identity target is solved in one round") {
    auto ds = linear_target(200, 3);
    auto result = construct_features(ds, quick_config());
    REQUIRE(result.rounds.size() == 1);
    CHECK(result.metric == Metric::MSE);
    CHECK(result.n_train == 160);
    CHECK(result.n_test == 40);
    CHECK(result.rounds[0].valid);
    CHECK(result.rounds[0].train_cv_error < 1e-12);
    CHECK(result.rounds[0].test_error < 1e-12);
    CHECK(result.rounds[0].test_r2 == Approx(1.0).epsilon(1e-9));
    CHECK(result.rounds[0].evals_used <= 1500);
    CHECK(result.rounds[0].feature_height <= 2);
    CHECK(result.rounds[0].feature_size <= 7);
    CHECK(!result.rounds[0].expression.empty());
}

TEST_CASE("round results carry NaN r2 outside regression") {
    Dataset ds;
    ds.task = Task::Classification;
    ds.column_names = {"a", "b"};
    ds.columns.assign(2, {});
    Rng rng(5);
    for (int i = 0; i < 60; ++i) {
        double cls = i % 2 ? 1.0 : 0.0;
        ds.columns[0].push_back(cls * 4 + rng.uniform(-0.5, 0.5));
        ds.columns[1].push_back(rng.uniform(-1, 1));
        ds.target.push_back(cls);
    }
    ds.n_classes = 2;
    ds.class_labels = {"n", "y"};

    auto config = quick_config();
    config.learner.kind = LearnerKind::GNB;
    config.search.eval_budget = 300;
    auto result = construct_features(ds, config);
    CHECK(result.metric == Metric::OneMinusMacroF1);
    CHECK(std::isnan(result.rounds[0].test_r2));
    CHECK(std::isnan(result.baseline.test_r2));
    CHECK(result.rounds[0].train_cv_error >= 0.0);
    CHECK(result.rounds[0].train_cv_error <= 1.0);
}

TEST_CASE("construction is bitwise reproducible") {
    auto ds = sum_target(150, 7);
    auto config = quick_config();
    config.K = 2;
    config.search.eval_budget = 600;
    auto a = construct_features(ds, config);
    auto b = construct_features(ds, config);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (std::size_t k = 0; k < a.rounds.size(); ++k) {
        CHECK(a.rounds[k].expression == b.rounds[k].expression);
        CHECK(a.rounds[k].train_cv_error == b.rounds[k].train_cv_error);
        CHECK(a.rounds[k].test_error == b.rounds[k].test_error);
        CHECK(a.rounds[k].evals_used == b.rounds[k].evals_used);
    }
    CHECK(a.baseline.train_cv_error == b.baseline.train_cv_error);
}

TEST_CASE("baseline_scores matches the embedded baseline") {
    auto ds = sum_target(120, 11);
    auto config = quick_config();
    config.search.eval_budget = 200;
    auto result = construct_features(ds, config);
    auto baseline = baseline_scores(ds, config);
    CHECK(result.baseline.train_cv_error == baseline.train_cv_error);
    CHECK(result.baseline.test_error == baseline.test_error);
    CHECK(result.baseline.test_r2 == baseline.test_r2);
}

TEST_CASE("config validation") {
    auto ds = sum_target(50, 1);
    auto config = quick_config();
    config.K = 0;
    CHECK_THROWS_AS(construct_features(ds, config), std::invalid_argument);

    config = quick_config();
    config.learner.kind = LearnerKind::GNB;  // regression task
    CHECK_THROWS_AS(construct_features(ds, config), std::invalid_argument);
}

// ---- candidate scorer ----------------------------------------------------

namespace {

struct ScorerRig {
    Dataset train;
    FoldAssignment folds;
    LearnerSpec learner;
    std::vector<std::vector<double>> previous;

    ScorerRig() {
        train = sum_target(40, 13);
        folds = make_folds(train, 4, 2);
        learner.kind = LearnerKind::OLS;
    }

    CandidateScorer scorer(bool augment = false, bool count_skipped = false) {
        return CandidateScorer(train, previous, folds, learner, augment,
                               count_skipped, CriteriaBounds{});
    }
};

}  // namespace

TEST_CASE("valid candidates are charged and scored") {
    ScorerRig rig;
    auto scorer = rig.scorer();
    EvalBudget budget{0, 10};
    OutputCache cache;

    auto values = rig.train.columns[0];
    auto scored = scorer.score(values, cache, budget);
    REQUIRE(scored.has_value());
    CHECK(scored->verdict == Verdict::Valid);
    CHECK(budget.used == 1);
    CHECK(scored->error >= 0.0);
    CHECK_FALSE(cache.filled);  // scoring never writes the cache
}

TEST_CASE("skip verdicts cost nothing and score worst") {
    ScorerRig rig;
    rig.previous.push_back(rig.train.columns[1]);
    auto scorer = rig.scorer();
    EvalBudget budget{0, 10};
    OutputCache cache;

    std::vector<double> constant(rig.train.n_rows(), 2.5);
    auto scored = scorer.score(constant, cache, budget);
    CHECK(scored->verdict == Verdict::Constant);
    CHECK(scored->error == scorer.worst());
    CHECK(budget.used == 0);

    std::vector<double> extreme = rig.train.columns[0];
    extreme[0] = 1e12;
    CHECK(scorer.score(extreme, cache, budget)->verdict == Verdict::Extreme);

    CHECK(scorer.score(rig.train.columns[1], cache, budget)->verdict ==
          Verdict::Duplicate);
    CHECK(budget.used == 0);
}

TEST_CASE("unchanged candidates reuse the cached error for free") {
    ScorerRig rig;
    auto scorer = rig.scorer();
    EvalBudget budget{0, 10};
    OutputCache cache;

    auto values = rig.train.columns[0];
    auto first = scorer.score(values, cache, budget);
    REQUIRE(first->verdict == Verdict::Valid);
    cache.store(values, first->error);  // the search commits the cache

    auto again = scorer.score(values, cache, budget);
    CHECK(again->verdict == Verdict::Unchanged);
    CHECK(again->error == first->error);
    CHECK(budget.used == 1);
}

TEST_CASE("counting skipped evaluations charges every call") {
    ScorerRig rig;
    auto scorer = rig.scorer(false, true);
    EvalBudget budget{0, 10};
    OutputCache cache;

    std::vector<double> constant(rig.train.n_rows(), 2.5);
    scorer.score(constant, cache, budget);
    CHECK(budget.used == 1);

    budget = {10, 10};
    CHECK_FALSE(scorer.score(constant, cache, budget).has_value());
}

TEST_CASE("an exhausted budget refuses real evaluations only") {
    ScorerRig rig;
    auto scorer = rig.scorer();
    EvalBudget budget{10, 10};
    OutputCache cache;

    CHECK_FALSE(scorer.score(rig.train.columns[0], cache, budget).has_value());

    std::vector<double> constant(rig.train.n_rows(), 2.5);
    auto skipped = scorer.score(constant, cache, budget);
    REQUIRE(skipped.has_value());
    CHECK(skipped->verdict == Verdict::Constant);
    CHECK(budget.used == 10);
}

TEST_CASE("augmented scoring sees the original features") {
    // Target needs both a and b; the candidate alone only supplies a.
    ScorerRig rig;
    auto replacement = rig.scorer(false);
    auto augmented = rig.scorer(true);
    EvalBudget b1{0, 10}, b2{0, 10};
    OutputCache cache;

    auto candidate = rig.train.columns[0];
    auto lone = replacement.score(candidate, cache, b1);
    auto with_originals = augmented.score(candidate, cache, b2);
    CHECK(with_originals->error < lone->error);
    CHECK(with_originals->error == Approx(0.0).epsilon(1e-10));
    CHECK(lone->error > 0.01);
}

TEST_CASE("later rounds keep earlier features in the evaluation set") {
    // With column a already constructed, a candidate carrying b must reach a
    // near-zero error on the a+b target even though it replaces nothing else.
    ScorerRig rig;
    rig.previous.push_back(rig.train.columns[0]);
    auto scorer = rig.scorer();
    EvalBudget budget{0, 10};
    OutputCache cache;

    auto scored = scorer.score(rig.train.columns[1], cache, budget);
    CHECK(scored->verdict == Verdict::Valid);
    CHECK(scored->error == Approx(0.0).epsilon(1e-10));
}

TEST_CASE("augment flag carries through whole runs") {
    auto ds = sum_target(150, 17);
    auto config = quick_config();
    config.search.eval_budget = 400;
    config.augment = true;
    auto result = construct_features(ds, config);
    CHECK(result.rounds[0].train_cv_error <= quick_config().test_fraction + 1.0);
    CHECK(result.rounds[0].valid);
    // With the originals kept, round 1 can already fit the target exactly.
    CHECK(result.rounds[0].test_error < 1e-10);
}
