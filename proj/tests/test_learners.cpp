#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fcs/dataset.hpp"
#include "fcs/learners.hpp"

using namespace fcs;
using doctest::Approx;

namespace {

Dataset classification_ds(const std::vector<std::vector<double>>& cols,
                          const std::vector<int>& y, int n_classes) {
    Dataset ds;
    ds.task = Task::Classification;
    for (std::size_t i = 0; i < cols.size(); ++i)
        ds.column_names.push_back("x" + std::to_string(i));
    ds.columns = cols;
    ds.target.assign(y.begin(), y.end());
    ds.n_classes = n_classes;
    for (int c = 0; c < n_classes; ++c) ds.class_labels.push_back("c" + std::to_string(c));
    return ds;
}

Dataset regression_ds(const std::vector<std::vector<double>>& cols,
                      const std::vector<double>& y) {
    Dataset ds;
    ds.task = Task::Regression;
    for (std::size_t i = 0; i < cols.size(); ++i)
        ds.column_names.push_back("x" + std::to_string(i));
    ds.columns = cols;
    ds.target = y;
    return ds;
}

std::vector<int> as_ints(const std::vector<double>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("task support matrix") {
    CHECK(learner_supports(LearnerKind::GNB, Task::Classification));
    CHECK_FALSE(learner_supports(LearnerKind::GNB, Task::Regression));
    CHECK(learner_supports(LearnerKind::OLS, Task::Regression));
    CHECK_FALSE(learner_supports(LearnerKind::OLS, Task::Classification));
    CHECK(learner_supports(LearnerKind::CART, Task::Classification));
    CHECK(learner_supports(LearnerKind::CART, Task::Regression));
    CHECK(learner_supports(LearnerKind::RF, Task::Classification));
    CHECK(learner_supports(LearnerKind::RF, Task::Regression));
}

TEST_CASE("metric and worst error per task") {
    CHECK(metric_for(Task::Classification) == Metric::OneMinusMacroF1);
    CHECK(metric_for(Task::Regression) == Metric::MSE);
    CHECK(worst_error(Task::Classification) == 1.0);
    CHECK(std::isinf(worst_error(Task::Regression)));
}

TEST_CASE("naive bayes separates well-spread classes") {
    auto ds = classification_ds({{0.0, 0.1, -0.1, 10.0, 10.1, 9.9}},
                                {0, 0, 0, 1, 1, 1}, 2);
    auto model = fit({LearnerKind::GNB}, ds);
    CHECK(model->predict(ds) == std::vector<double>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("naive bayes ties resolve to the lowest class id") {
    auto ds = classification_ds({{1.0, 1.0}}, {1, 0}, 2);
    auto model = fit({LearnerKind::GNB}, ds);
    CHECK(model->predict(ds) == std::vector<double>{0, 0});
}

TEST_CASE("naive bayes never predicts an absent class") {
    auto ds = classification_ds({{0.0, 0.1, 5.0, 5.1}}, {0, 0, 2, 2}, 3);
    auto model = fit({LearnerKind::GNB}, ds);
    auto pred = model->predict(ds);
    for (double p : pred) CHECK(p != 1.0);
    CHECK(pred == std::vector<double>{0, 0, 2, 2});
}

TEST_CASE("least squares recovers a line") {
    auto ds = regression_ds({{0, 1, 2}}, {0, 2, 4});
    auto model = fit({LearnerKind::OLS}, ds);
    auto probe = regression_ds({{3}}, {0});
    CHECK(model->predict(probe)[0] == Approx(6.0).epsilon(1e-9));

    auto affine = regression_ds({{0, 1, 2}}, {1, 3, 5});
    CHECK(fit({LearnerKind::OLS}, affine)->predict(probe)[0] ==
          Approx(7.0).epsilon(1e-9));
}

TEST_CASE("least squares survives collinear columns") {
    auto ds = regression_ds({{0, 1, 2, 3}, {0, 2, 4, 6}}, {0, 1, 2, 3});
    auto model = fit({LearnerKind::OLS}, ds);
    auto pred = model->predict(ds);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::isfinite(pred[i]));
        CHECK(pred[i] == Approx(ds.target[i]).epsilon(1e-4));
    }
}

TEST_CASE("cart memorizes xor") {
    auto ds = classification_ds({{0, 0, 1, 1}, {0, 1, 0, 1}}, {0, 1, 1, 0}, 2);
    auto model = fit({LearnerKind::CART}, ds);
    CHECK(model->predict(ds) == std::vector<double>{0, 1, 1, 0});
    CHECK(score_error(*model, ds) == 0.0);
}

TEST_CASE("cart regression splits on the obvious threshold") {
    auto ds = regression_ds({{0, 1, 2, 3, 10, 11, 12, 13, 14, 15}},
                            {0, 0, 0, 0, 5, 5, 5, 5, 5, 5});
    auto model = fit({LearnerKind::CART}, ds);
    auto pred = model->predict(ds);
    for (std::size_t i = 0; i < 4; ++i) CHECK(pred[i] == Approx(0.0));
    for (std::size_t i = 4; i < 10; ++i) CHECK(pred[i] == Approx(5.0));
}

TEST_CASE("cart is deterministic") {
    auto ds = classification_ds({{0, 1, 2, 3, 4, 5}, {5, 3, 1, 0, 2, 4}},
                                {0, 1, 0, 1, 0, 1}, 2);
    auto a = fit({LearnerKind::CART}, ds)->predict(ds);
    auto b = fit({LearnerKind::CART}, ds)->predict(ds);
    CHECK(a == b);
}

TEST_CASE("random forest is deterministic given its seed") {
    auto ds = classification_ds(
        {{0, 1, 2, 3, 4, 5, 6, 7}, {7, 6, 5, 4, 3, 2, 1, 0}},
        {0, 0, 0, 0, 1, 1, 1, 1}, 2);
    LearnerSpec spec{LearnerKind::RF, 17, 25};
    auto a = fit(spec, ds)->predict(ds);
    auto b = fit(spec, ds)->predict(ds);
    CHECK(a == b);
}

TEST_CASE("random forest fits separable data") {
    auto ds = classification_ds({{0.0, 0.2, 0.1, 9.0, 9.2, 9.1}},
                                {0, 0, 0, 1, 1, 1}, 2);
    LearnerSpec spec{LearnerKind::RF, 3, 50};
    auto model = fit(spec, ds);
    CHECK(model->predict(ds) == std::vector<double>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("fitting rejects bad input") {
    Dataset empty;
    empty.task = Task::Regression;
    empty.column_names = {"x"};
    empty.columns = {{}};
    CHECK_THROWS_AS(fit({LearnerKind::OLS}, empty), std::invalid_argument);

    auto cls = classification_ds({{0, 1}}, {0, 1}, 2);
    CHECK_THROWS_AS(fit({LearnerKind::OLS}, cls), std::invalid_argument);
    auto reg = regression_ds({{0, 1}}, {0, 1});
    CHECK_THROWS_AS(fit({LearnerKind::GNB}, reg), std::invalid_argument);
}

TEST_CASE("macro F1 oracle values") {
    CHECK(macro_f1({0, 1, 0, 1}, {0, 0, 1, 1}, 2) == Approx(0.5).epsilon(1e-12));
    CHECK(macro_f1({0, 0, 1, 1}, {0, 0, 1, 1}, 2) == 1.0);
    CHECK(macro_f1({1, 1, 0, 0}, {0, 0, 1, 1}, 2) == 0.0);
    CHECK(macro_f1({0, 0}, {0, 0}, 2) == Approx(0.5).epsilon(1e-12));
    CHECK(macro_f1({0}, {1}, 3) == 0.0);
}

TEST_CASE("mse and r2 oracle values") {
    CHECK(mse({1, 1}, {0, 2}) == 1.0);
    CHECK(mse({0, 2}, {0, 2}) == 0.0);
    CHECK(r2({0, 2}, {0, 2}) == 1.0);
    CHECK(r2({1, 1}, {0, 2}) == Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(r2({1, 1}, {2, 2}), std::invalid_argument);
}

TEST_CASE("cross validation averages per-fold errors") {
    auto ds = regression_ds({{0, 1, 2, 3}}, {0, 0, 10, 10});
    FoldAssignment folds;
    folds.fold_of_row = {0, 0, 1, 1};
    folds.C = 2;
    auto score = cross_val_error({LearnerKind::OLS}, ds, folds);
    CHECK(score.metric == Metric::MSE);
    CHECK(score.value == Approx(100.0).epsilon(1e-9));
}

TEST_CASE("cross validation on separable blobs is error free") {
    std::vector<double> x;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(0.0 + 0.01 * i);
        y.push_back(0);
        x.push_back(5.0 + 0.01 * i);
        y.push_back(1);
    }
    auto ds = classification_ds({x}, y, 2);
    auto folds = make_folds(ds, 5, 3);
    auto score = cross_val_error({LearnerKind::GNB}, ds, folds);
    CHECK(score.metric == Metric::OneMinusMacroF1);
    CHECK(score.value == 0.0);
}

TEST_CASE("score_error matches the metric convention") {
    auto cls = classification_ds({{0.0, 0.1, 9.0, 9.1}}, {0, 0, 1, 1}, 2);
    auto model = fit({LearnerKind::GNB}, cls);
    CHECK(score_error(*model, cls) == 0.0);

    auto reg = regression_ds({{0, 1, 2}}, {0, 2, 4});
    auto lin = fit({LearnerKind::OLS}, reg);
    CHECK(score_error(*lin, reg) == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("predictions round-trip through integer labels") {
    auto ds = classification_ds({{0.0, 0.1, 9.0, 9.1}}, {0, 0, 1, 1}, 2);
    auto model = fit({LearnerKind::GNB}, ds);
    auto pred = as_ints(model->predict(ds));
    CHECK(macro_f1(pred, {0, 0, 1, 1}, 2) == 1.0);
}
