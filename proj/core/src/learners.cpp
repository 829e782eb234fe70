#include "fcs/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fcs/rng.hpp"

namespace fcs {

Metric metric_for(Task task) {
    return task == Task::Classification ? Metric::OneMinusMacroF1 : Metric::MSE;
}

double worst_error(Task task) {
    return task == Task::Classification ? 1.0 : std::numeric_limits<double>::infinity();
}

bool learner_supports(LearnerKind kind, Task task) {
    if (kind == LearnerKind::GNB) return task == Task::Classification;
    if (kind == LearnerKind::OLS) return task == Task::Regression;
    return true;
}

namespace {

void require_columns(std::size_t expected, const Dataset& rows) {
    if (rows.n_cols() != expected)
        throw std::invalid_argument("expected " + std::to_string(expected) +
                                    " columns, got " + std::to_string(rows.n_cols()));
}

double population_variance(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

// ---------------------------------------------------------------- GNB

class GnbModel final : public Model {
public:
    GnbModel(const Dataset& train) {
        std::size_t n = train.n_rows();
        p_ = train.n_cols();
        int k = train.n_classes;
        if (k < 1) throw std::invalid_argument("classification data without classes");

        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) ++count[train.label(i)];

        // Smoothing: a fixed slice of the widest overall feature variance,
        // keeping class-conditional variances away from zero.
        double max_var = 0.0;
        for (const auto& col : train.columns) {
            double m = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
            max_var = std::max(max_var, population_variance(col, m));
        }
        double smoothing = 1e-9 * max_var;

        log_prior_.assign(k, -std::numeric_limits<double>::infinity());
        mean_.assign(k, std::vector<double>(p_, 0.0));
        var_.assign(k, std::vector<double>(p_, 1.0));
        for (int c = 0; c < k; ++c) {
            if (count[c] == 0) continue;  // zero prior, dummy moments
            log_prior_[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(n));
            for (std::size_t j = 0; j < p_; ++j) {
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (train.label(i) == c) sum += train.columns[j][i];
                double mu = sum / static_cast<double>(count[c]);
                double ss = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (train.label(i) == c) {
                        double d = train.columns[j][i] - mu;
                        ss += d * d;
                    }
                mean_[c][j] = mu;
                var_[c][j] = std::max(ss / static_cast<double>(count[c]) + smoothing, 1e-300);
            }
        }
    }

    std::vector<double> predict(const Dataset& rows) const override {
        require_columns(p_, rows);
        std::size_t n = rows.n_rows();
        int k = static_cast<int>(log_prior_.size());
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double s = log_prior_[c];
                for (std::size_t j = 0; j < p_; ++j) {
                    double d = rows.columns[j][i] - mean_[c][j];
                    s -= 0.5 * (std::log(2.0 * M_PI * var_[c][j]) + d * d / var_[c][j]);
                }
                if (s > best_score) {
                    best_score = s;
                    best = c;
                }
            }
            out[i] = best;
        }
        return out;
    }

private:
    std::size_t p_ = 0;
    std::vector<double> log_prior_;
    std::vector<std::vector<double>> mean_;
    std::vector<std::vector<double>> var_;
};

// ---------------------------------------------------------------- OLS

class OlsModel final : public Model {
public:
    OlsModel(const Dataset& train) {
        std::size_t n = train.n_rows();
        p_ = train.n_cols();
        Eigen::MatrixXd x(n, p_ + 1);
        Eigen::VectorXd y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p_; ++j) x(i, j) = train.columns[j][i];
            x(i, p_) = 1.0;
            y(i) = train.target[i];
        }
        Eigen::MatrixXd gram = x.transpose() * x;
        Eigen::VectorXd rhs = x.transpose() * y;
        Eigen::VectorXd w = gram.ldlt().solve(rhs);
        double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
        bool bad = !w.allFinite() ||
                   (gram * w - rhs).lpNorm<Eigen::Infinity>() > 1e-6 * scale;
        if (bad) {
            Eigen::MatrixXd ridged = gram;
            ridged.diagonal().array() += 1e-8;
            w = ridged.ldlt().solve(rhs);
        }
        weights_.assign(w.data(), w.data() + w.size());
    }

    std::vector<double> predict(const Dataset& rows) const override {
        require_columns(p_, rows);
        std::size_t n = rows.n_rows();
        std::vector<double> out(n, weights_[p_]);
        for (std::size_t j = 0; j < p_; ++j)
            for (std::size_t i = 0; i < n; ++i) out[i] += weights_[j] * rows.columns[j][i];
        return out;
    }

private:
    std::size_t p_ = 0;
    std::vector<double> weights_;
};

// ---------------------------------------------------------------- trees

struct DtNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct DtParams {
    int min_node_size = 1;  // nodes this small or smaller become leaves
    int mtry = 0;           // 0 = consider all features
};

class DecisionTree {
public:
    // rng drives the per-node feature sample; null means all features.
    DecisionTree(const Dataset& train, const std::vector<std::size_t>& rows,
                 const DtParams& params, Rng* rng) {
        task_ = train.task;
        n_classes_ = train.n_classes;
        build(train, rows, params, rng);
    }

    double predict_row(const Dataset& rows, std::size_t i) const {
        int node = 0;
        while (nodes_[node].feature >= 0) {
            node = rows.columns[nodes_[node].feature][i] <= nodes_[node].threshold
                       ? nodes_[node].left
                       : nodes_[node].right;
        }
        return nodes_[node].value;
    }

private:
    double leaf_value(const Dataset& train, const std::vector<std::size_t>& rows) const {
        if (task_ == Task::Classification) {
            std::vector<std::size_t> count(n_classes_, 0);
            for (std::size_t r : rows) ++count[train.label(r)];
            int best = 0;
            for (int c = 1; c < n_classes_; ++c)
                if (count[c] > count[best]) best = c;
            return best;
        }
        double s = 0.0;
        for (std::size_t r : rows) s += train.target[r];
        return s / static_cast<double>(rows.size());
    }

    bool is_pure(const Dataset& train, const std::vector<std::size_t>& rows) const {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (train.target[rows[i]] != train.target[rows[0]]) return false;
        return true;
    }

    // Weighted child impurity of the split at sorted position s (first s rows
    // left): Gini for classification, summed squared error for regression.
    // Lower is better; parent impurity is constant per node so comparing the
    // child sum picks the same split as comparing gains.

    int build(const Dataset& train, const std::vector<std::size_t>& rows,
              const DtParams& params, Rng* rng) {
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(DtNode{});
        nodes_[id].value = leaf_value(train, rows);

        std::size_t n = rows.size();
        if (n < 2 || static_cast<int>(n) <= params.min_node_size || is_pure(train, rows))
            return id;

        std::vector<int> features = candidate_features(train.n_cols(), params, rng);

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = std::numeric_limits<double>::infinity();

        std::vector<std::pair<double, std::size_t>> sorted(n);
        for (int f : features) {
            for (std::size_t i = 0; i < n; ++i)
                sorted[i] = {train.columns[f][rows[i]], rows[i]};
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (sorted.front().first == sorted.back().first) continue;

            if (task_ == Task::Classification) {
                std::vector<double> left_count(n_classes_, 0.0), right_count(n_classes_, 0.0);
                for (std::size_t i = 0; i < n; ++i) right_count[train.label(sorted[i].second)] += 1.0;
                for (std::size_t s = 1; s < n; ++s) {
                    int c = train.label(sorted[s - 1].second);
                    left_count[c] += 1.0;
                    right_count[c] -= 1.0;
                    double a = sorted[s - 1].first, b = sorted[s].first;
                    if (a == b) continue;
                    double t = a + (b - a) / 2.0;
                    if (!(a <= t && t < b)) continue;
                    double nl = static_cast<double>(s), nr = static_cast<double>(n - s);
                    double gl = 1.0, gr = 1.0;
                    for (int k = 0; k < n_classes_; ++k) {
                        gl -= (left_count[k] / nl) * (left_count[k] / nl);
                        gr -= (right_count[k] / nr) * (right_count[k] / nr);
                    }
                    double imp = nl * gl + nr * gr;
                    if (imp < best_impurity) {
                        best_impurity = imp;
                        best_feature = f;
                        best_threshold = t;
                    }
                }
            } else {
                double right_sum = 0.0, right_sq = 0.0, left_sum = 0.0, left_sq = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double y = train.target[sorted[i].second];
                    right_sum += y;
                    right_sq += y * y;
                }
                for (std::size_t s = 1; s < n; ++s) {
                    double y = train.target[sorted[s - 1].second];
                    left_sum += y;
                    left_sq += y * y;
                    right_sum -= y;
                    right_sq -= y * y;
                    double a = sorted[s - 1].first, b = sorted[s].first;
                    if (a == b) continue;
                    double t = a + (b - a) / 2.0;
                    if (!(a <= t && t < b)) continue;
                    double nl = static_cast<double>(s), nr = static_cast<double>(n - s);
                    double imp = (left_sq - left_sum * left_sum / nl) +
                                 (right_sq - right_sum * right_sum / nr);
                    if (imp < best_impurity) {
                        best_impurity = imp;
                        best_feature = f;
                        best_threshold = t;
                    }
                }
            }
        }

        if (best_feature < 0) return id;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (train.columns[best_feature][r] <= best_threshold ? left_rows : right_rows)
                .push_back(r);
        if (left_rows.empty() || right_rows.empty()) return id;

        nodes_[id].feature = best_feature;
        nodes_[id].threshold = best_threshold;
        nodes_[id].left = build(train, left_rows, params, rng);
        nodes_[id].right = build(train, right_rows, params, rng);
        return id;
    }

    static std::vector<int> candidate_features(std::size_t p, const DtParams& params, Rng* rng) {
        std::vector<int> all(p);
        for (std::size_t j = 0; j < p; ++j) all[j] = static_cast<int>(j);
        if (!rng || params.mtry <= 0 || static_cast<std::size_t>(params.mtry) >= p) return all;
        for (int i = 0; i < params.mtry; ++i) {
            std::size_t j = i + rng->index(p - i);
            std::swap(all[i], all[j]);
        }
        all.resize(params.mtry);
        std::sort(all.begin(), all.end());
        return all;
    }

    Task task_;
    int n_classes_ = 0;
    std::vector<DtNode> nodes_;
};

int default_min_node(Task task) { return task == Task::Classification ? 1 : 5; }

class CartModel final : public Model {
public:
    CartModel(const Dataset& train) : task_(train.task), p_(train.n_cols()) {
        std::vector<std::size_t> rows(train.n_rows());
        std::iota(rows.begin(), rows.end(), 0);
        DtParams params;
        params.min_node_size = default_min_node(train.task);
        tree_ = std::make_unique<DecisionTree>(train, rows, params, nullptr);
    }

    std::vector<double> predict(const Dataset& rows) const override {
        require_columns(p_, rows);
        std::vector<double> out(rows.n_rows());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = tree_->predict_row(rows, i);
        return out;
    }

private:
    Task task_;
    std::size_t p_;
    std::unique_ptr<DecisionTree> tree_;
};

class ForestModel final : public Model {
public:
    ForestModel(const LearnerSpec& spec, const Dataset& train)
        : task_(train.task), n_classes_(train.n_classes), p_(train.n_cols()) {
        std::size_t n = train.n_rows();
        DtParams params;
        params.min_node_size = default_min_node(train.task);
        params.mtry = train.task == Task::Classification
                          ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p_))))
                          : std::max(1, static_cast<int>(p_) / 3);
        trees_.reserve(spec.rf_trees);
        for (int t = 0; t < spec.rf_trees; ++t) {
            Rng rng(derive_seed(spec.seed, "rf-tree", static_cast<std::uint64_t>(t)));
            std::vector<std::size_t> bag(n);
            for (std::size_t i = 0; i < n; ++i) bag[i] = rng.index(n);
            trees_.push_back(std::make_unique<DecisionTree>(train, bag, params, &rng));
        }
    }

    std::vector<double> predict(const Dataset& rows) const override {
        require_columns(p_, rows);
        std::size_t n = rows.n_rows();
        std::vector<double> out(n, 0.0);
        if (task_ == Task::Classification) {
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<int> votes(n_classes_, 0);
                for (const auto& t : trees_) ++votes[static_cast<int>(t->predict_row(rows, i))];
                int best = 0;
                for (int c = 1; c < n_classes_; ++c)
                    if (votes[c] > votes[best]) best = c;
                out[i] = best;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (const auto& t : trees_) s += t->predict_row(rows, i);
                out[i] = s / static_cast<double>(trees_.size());
            }
        }
        return out;
    }

private:
    Task task_;
    int n_classes_;
    std::size_t p_;
    std::vector<std::unique_ptr<DecisionTree>> trees_;
};

}  // namespace

std::unique_ptr<Model> fit(const LearnerSpec& spec, const Dataset& train) {
    if (train.n_rows() == 0) throw std::invalid_argument("empty training set");
    if (!learner_supports(spec.kind, train.task))
        throw std::invalid_argument("learner does not support this task");
    switch (spec.kind) {
        case LearnerKind::GNB:
            return std::make_unique<GnbModel>(train);
        case LearnerKind::OLS:
            return std::make_unique<OlsModel>(train);
        case LearnerKind::CART:
            return std::make_unique<CartModel>(train);
        case LearnerKind::RF:
            return std::make_unique<ForestModel>(spec, train);
    }
    throw std::logic_error("unknown learner");
}

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth, int n_classes) {
    if (pred.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (pred.empty()) throw std::invalid_argument("empty input");
    if (n_classes < 1) throw std::invalid_argument("need at least one class");
    std::vector<double> tp(n_classes, 0.0), fp(n_classes, 0.0), fn(n_classes, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        int p = pred[i], t = truth[i];
        if (p < 0 || p >= n_classes || t < 0 || t >= n_classes)
            throw std::invalid_argument("class id out of range");
        if (p == t) {
            tp[t] += 1.0;
        } else {
            fp[p] += 1.0;
            fn[t] += 1.0;
        }
    }
    double sum = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        double precision = tp[c] + fp[c] > 0.0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
        double recall = tp[c] + fn[c] > 0.0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
        double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        sum += f1;
    }
    return sum / static_cast<double>(n_classes);
}

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (pred.empty()) throw std::invalid_argument("empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

double r2(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (truth.size() < 2) throw std::invalid_argument("need at least two rows");
    double mean = std::accumulate(truth.begin(), truth.end(), 0.0) /
                  static_cast<double>(truth.size());
    double var = population_variance(truth, mean);
    if (var == 0.0) throw std::invalid_argument("zero-variance target");
    return 1.0 - mse(pred, truth) / var;
}

double score_error(const Model& model, const Dataset& rows) {
    std::vector<double> pred = model.predict(rows);
    if (rows.task == Task::Classification) {
        std::vector<int> p(pred.size()), t(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i) {
            p[i] = static_cast<int>(pred[i]);
            t[i] = rows.label(i);
        }
        return 1.0 - macro_f1(p, t, rows.n_classes);
    }
    return mse(pred, rows.target);
}

ErrorScore cross_val_error(const LearnerSpec& spec, const Dataset& train,
                           const FoldAssignment& folds) {
    if (folds.fold_of_row.size() != train.n_rows())
        throw std::invalid_argument("fold assignment does not match training rows");
    auto per_fold = folds.fold_rows();
    double total = 0.0;
    for (int c = 0; c < folds.C; ++c) {
        std::vector<std::size_t> fit_rows;
        fit_rows.reserve(train.n_rows() - per_fold[c].size());
        for (std::size_t i = 0; i < train.n_rows(); ++i)
            if (folds.fold_of_row[i] != c) fit_rows.push_back(i);
        Dataset fit_part = train.select_rows(fit_rows);
        Dataset val_part = train.select_rows(per_fold[c]);
        auto model = fit(spec, fit_part);
        total += score_error(*model, val_part);
    }
    return ErrorScore{total / static_cast<double>(folds.C), metric_for(train.task)};
}

}  // namespace fcs
