#include "fcs/fcs.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fcs {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Dataset with_columns(const Dataset& base, const std::vector<std::vector<double>>& constructed,
                     bool augment) {
    Dataset out;
    out.task = base.task;
    out.target = base.target;
    out.class_labels = base.class_labels;
    out.n_classes = base.n_classes;
    if (augment) {
        out.columns = base.columns;
        out.column_names = base.column_names;
    }
    for (std::size_t k = 0; k < constructed.size(); ++k) {
        out.columns.push_back(constructed[k]);
        out.column_names.push_back("f" + std::to_string(k + 1));
    }
    return out;
}

double safe_r2(const std::vector<double>& pred, const std::vector<double>& truth) {
    try {
        return r2(pred, truth);
    } catch (const std::invalid_argument&) {
        return kNan;
    }
}

}  // namespace

CandidateScorer::CandidateScorer(const Dataset& train,
                                 const std::vector<std::vector<double>>& previous,
                                 const FoldAssignment& folds, const LearnerSpec& learner,
                                 bool augment, bool count_skipped, CriteriaBounds bounds)
    : train_(train),
      previous_(previous),
      folds_(folds),
      learner_(learner),
      augment_(augment),
      count_skipped_(count_skipped),
      bounds_(bounds),
      worst_(worst_error(train.task)) {}

std::vector<double> CandidateScorer::outputs(const DynTree& tree) const {
    return eval_tree(tree, train_);
}

std::vector<double> CandidateScorer::outputs(const ExprTree& tree) const {
    return eval_tree(tree, train_);
}

std::optional<Scored> CandidateScorer::score(const std::vector<double>& values,
                                             const OutputCache& cache, EvalBudget& budget) {
    Verdict verdict = check_criteria(values, previous_, bounds_, &cache);
    bool spends = verdict == Verdict::Valid || count_skipped_;
    if (spends && budget.exhausted()) return std::nullopt;
    if (spends) ++budget.used;

    switch (verdict) {
        case Verdict::Constant:
        case Verdict::Extreme:
        case Verdict::Duplicate:
            return Scored{worst_, verdict};
        case Verdict::Unchanged:
            return Scored{cache.error, verdict};
        case Verdict::Valid:
            break;
    }
    Dataset cv = with_columns(train_, previous_, augment_);
    cv.columns.push_back(values);
    cv.column_names.push_back("candidate");
    return Scored{cross_val_error(learner_, cv, folds_).value, Verdict::Valid};
}

FCSResult construct_features(const Dataset& ds, const FCSConfig& config) {
    if (config.K < 1) throw std::invalid_argument("need at least one construction round");
    if (!learner_supports(config.learner.kind, ds.task))
        throw std::invalid_argument("learner does not support this task");

    Split split = split_train_test(ds, config.test_fraction, split_stream_seed(config.seed));
    FoldAssignment folds = make_folds(split.train, config.folds_C, folds_stream_seed(config.seed));
    auto [erc_lo, erc_hi] = erc_range(split.train);
    TerminalSet terminals{static_cast<int>(split.train.n_cols()), {erc_lo, erc_hi}};

    LearnerSpec learner = config.learner;
    learner.seed = learner_stream_seed(config.seed);

    FCSResult result;
    result.metric = metric_for(ds.task);
    result.n_train = split.train.n_rows();
    result.n_test = split.test.n_rows();

    std::vector<std::vector<double>> prev_train, prev_test;
    for (int k = 1; k <= config.K; ++k) {
        auto started = std::chrono::steady_clock::now();

        CandidateScorer scorer(split.train, prev_train, folds, learner, config.augment,
                               config.count_skipped_evals, config.criteria);
        SearchConfig search = config.search;
        search.seed = round_stream_seed(config.seed, k);
        SearchResult found = run_search(search, terminals, scorer);

        std::vector<double> train_col = eval_tree(found.best, split.train);
        if (found.any_valid) {
            for (const auto& prev : prev_train)
                if (prev == train_col)
                    throw std::logic_error("accepted feature duplicates an earlier round");
        }
        prev_train.push_back(std::move(train_col));
        prev_test.push_back(eval_tree(found.best, split.test));

        Dataset tr_k = with_columns(split.train, prev_train, config.augment);
        Dataset te_k = with_columns(split.test, prev_test, config.augment);
        auto model = fit(learner, tr_k);

        RoundResult round;
        round.tree = found.best;
        round.expression = to_infix(found.best, false);
        round.expression_expanded = to_infix(found.best, true);
        round.feature_size = size(found.best);
        round.feature_height = height(found.best);
        round.train_cv_error = found.best_error;
        round.train_full_error = score_error(*model, tr_k);
        round.test_error = score_error(*model, te_k);
        round.test_r2 = ds.task == Task::Regression
                            ? safe_r2(model->predict(te_k), te_k.target)
                            : kNan;
        round.evals_used = found.evals_used;
        round.valid = found.any_valid;
        round.trace = found.trace;
        round.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();
        result.rounds.push_back(std::move(round));
    }

    auto baseline_model = fit(learner, split.train);
    result.baseline.train_cv_error = cross_val_error(learner, split.train, folds).value;
    result.baseline.test_error = score_error(*baseline_model, split.test);
    result.baseline.test_r2 = ds.task == Task::Regression
                                  ? safe_r2(baseline_model->predict(split.test),
                                            split.test.target)
                                  : kNan;
    return result;
}

BaselineScores baseline_scores(const Dataset& ds, const FCSConfig& config) {
    Split split = split_train_test(ds, config.test_fraction, split_stream_seed(config.seed));
    FoldAssignment folds = make_folds(split.train, config.folds_C, folds_stream_seed(config.seed));
    LearnerSpec learner = config.learner;
    learner.seed = learner_stream_seed(config.seed);

    BaselineScores out;
    auto model = fit(learner, split.train);
    out.train_cv_error = cross_val_error(learner, split.train, folds).value;
    out.test_error = score_error(*model, split.test);
    out.test_r2 = ds.task == Task::Regression
                      ? safe_r2(model->predict(split.test), split.test.target)
                      : kNan;
    return out;
}

}  // namespace fcs
