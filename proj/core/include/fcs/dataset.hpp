#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fcs {

enum class Task { Classification, Regression };

// Tabular dataset, column-major. For classification the target holds dense
// class ids 0..n_classes-1 (stored as doubles, exact for any realistic class
// count); n_classes is fixed when the file is loaded and survives splitting,
// so downstream metrics always score against the full class set.
struct Dataset {
    Task task = Task::Regression;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;
    std::vector<double> target;
    std::vector<std::string> class_labels;  // classification: index = class id
    int n_classes = 0;

    std::size_t n_rows() const { return target.size(); }
    std::size_t n_cols() const { return columns.size(); }
    int label(std::size_t row) const { return static_cast<int>(target[row]); }

    Dataset select_rows(const std::vector<std::size_t>& rows) const;
};

// target_column: a column name, or a 0-based index in decimal, or "" for the
// last column. A name always wins over an index reading.
Dataset load_csv(const std::string& path, const std::string& target_column, Task task);

struct Split {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
};

// Uniform random row partition with |test| = round(fraction * n).
Split split_train_test(const Dataset& ds, double fraction, std::uint64_t seed);

struct FoldAssignment {
    std::vector<int> fold_of_row;  // length |train|, values in 0..C-1
    int C = 0;

    std::vector<std::vector<std::size_t>> fold_rows() const;
};

// Stratified for classification, plain otherwise. Fold sizes differ by at
// most one; per-class counts across folds differ by at most one.
FoldAssignment make_folds(const Dataset& train, int C, std::uint64_t seed);

Dataset append_feature(const Dataset& ds, const std::vector<double>& values,
                       const std::string& name);

// Global min/max over all feature cells; the ERC sampling interval.
std::pair<double, double> erc_range(const Dataset& train);

}  // namespace fcs
