#pragma once

#include <string>
#include <vector>

#include "fcs/dataset.hpp"
#include "fcs/learners.hpp"
#include "fcs/search.hpp"
#include "fcs/semantics.hpp"

namespace fcs {

struct FCSConfig {
    int K = 5;
    SearchConfig search;
    LearnerSpec learner;
    int folds_C = 5;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool augment = false;            // keep original columns next to constructed ones
    bool count_skipped_evals = false;
    CriteriaBounds criteria;
};

// Fitness oracle for one construction round: candidate outputs are checked
// by the skip criteria against the features constructed so far, then scored
// by cross-validated learner error on the extended training set.
class CandidateScorer final : public FitnessFn {
public:
    CandidateScorer(const Dataset& train, const std::vector<std::vector<double>>& previous,
                    const FoldAssignment& folds, const LearnerSpec& learner, bool augment,
                    bool count_skipped, CriteriaBounds bounds);

    std::vector<double> outputs(const DynTree& tree) const override;
    std::vector<double> outputs(const ExprTree& tree) const override;
    std::optional<Scored> score(const std::vector<double>& values, const OutputCache& cache,
                                EvalBudget& budget) override;
    double worst() const override { return worst_; }

private:
    const Dataset& train_;
    const std::vector<std::vector<double>>& previous_;
    const FoldAssignment& folds_;
    LearnerSpec learner_;
    bool augment_;
    bool count_skipped_;
    CriteriaBounds bounds_;
    double worst_;
};

struct RoundResult {
    DynTree tree;
    std::string expression;           // plain operators
    std::string expression_expanded;  // protected operators written out
    int feature_size = 0;
    int feature_height = 0;
    double train_cv_error = 0.0;   // fitness of the accepted feature
    double train_full_error = 0.0; // refit on the extended training set
    double test_error = 0.0;
    double test_r2 = 0.0;          // regression only, NaN otherwise
    std::size_t evals_used = 0;
    bool valid = true;             // false when no candidate survived the criteria
    std::vector<TracePoint> trace;
    double wall_ms = 0.0;          // excluded from deterministic outputs
};

struct BaselineScores {
    double train_cv_error = 0.0;
    double test_error = 0.0;
    double test_r2 = 0.0;  // regression only, NaN otherwise
};

struct FCSResult {
    Metric metric = Metric::MSE;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<RoundResult> rounds;
    BaselineScores baseline;
};

// K search rounds over one fixed train/test split; round k's candidates are
// scored with features 1..k-1 present, and the winner's column is appended
// to both sides. Constructed features replace the originals for the final
// per-round scores unless augment is set.
FCSResult construct_features(const Dataset& ds, const FCSConfig& config);

// Learner on the original features with the same split and folds.
BaselineScores baseline_scores(const Dataset& ds, const FCSConfig& config);

// Named seed streams of one run, derived from the run seed.
inline std::uint64_t split_stream_seed(std::uint64_t seed) { return derive_seed(seed, "split"); }
inline std::uint64_t folds_stream_seed(std::uint64_t seed) { return derive_seed(seed, "folds"); }
inline std::uint64_t learner_stream_seed(std::uint64_t seed) {
    return derive_seed(seed, "learner");
}
inline std::uint64_t round_stream_seed(std::uint64_t seed, int k) {
    return derive_seed(seed, "round", static_cast<std::uint64_t>(k));
}

}  // namespace fcs
