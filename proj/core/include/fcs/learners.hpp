#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fcs/dataset.hpp"

namespace fcs {

enum class LearnerKind { GNB, OLS, CART, RF };

enum class Metric { OneMinusMacroF1, MSE };

Metric metric_for(Task task);
double worst_error(Task task);  // 1.0 for classification, +inf for regression

struct LearnerSpec {
    LearnerKind kind = LearnerKind::OLS;
    std::uint64_t seed = 0;
    int rf_trees = 100;
};

bool learner_supports(LearnerKind kind, Task task);

class Model {
public:
    virtual ~Model() = default;
    // Class ids (as doubles) for classification, reals for regression.
    virtual std::vector<double> predict(const Dataset& rows) const = 0;
};

// Deterministic given (spec.seed, train), bagging included.
std::unique_ptr<Model> fit(const LearnerSpec& spec, const Dataset& train);

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth, int n_classes);
double mse(const std::vector<double>& pred, const std::vector<double>& truth);
double r2(const std::vector<double>& pred, const std::vector<double>& truth);

struct ErrorScore {
    double value = 0.0;
    Metric metric = Metric::MSE;
};

// Mean over folds of the held-out error: 1 - macro-F1 or MSE.
ErrorScore cross_val_error(const LearnerSpec& spec, const Dataset& train,
                           const FoldAssignment& folds);

// Training error of a fitted model on the given rows, same error convention.
double score_error(const Model& model, const Dataset& rows);

}  // namespace fcs
