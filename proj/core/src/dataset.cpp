#include "fcs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "fcs/rng.hpp"

namespace fcs {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("unparseable cell '" + cell + "' at data row " +
                                 std::to_string(row + 1) + ", column '" + col + "'");
    }
}

}  // namespace

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.task = task;
    out.column_names = column_names;
    out.class_labels = class_labels;
    out.n_classes = n_classes;
    out.columns.resize(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.columns[j].reserve(rows.size());
        for (std::size_t r : rows) out.columns[j].push_back(columns[j][r]);
    }
    out.target.reserve(rows.size());
    for (std::size_t r : rows) out.target.push_back(target[r]);
    return out;
}

Dataset load_csv(const std::string& path, const std::string& target_column, Task task) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
    std::vector<std::string> header = split_line(line);
    if (header.size() < 2)
        throw std::runtime_error("'" + path + "' needs at least two columns");

    std::size_t target_idx = header.size() - 1;
    if (!target_column.empty()) {
        auto it = std::find(header.begin(), header.end(), target_column);
        if (it != header.end()) {
            target_idx = static_cast<std::size_t>(it - header.begin());
        } else if (!target_column.empty() &&
                   target_column.find_first_not_of("0123456789") == std::string::npos) {
            target_idx = std::stoul(target_column);
            if (target_idx >= header.size())
                throw std::runtime_error("target index " + target_column +
                                         " out of range for " +
                                         std::to_string(header.size()) + " columns");
        } else {
            throw std::runtime_error("no column named '" + target_column + "'");
        }
    }

    Dataset ds;
    ds.task = task;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != target_idx) ds.column_names.push_back(header[j]);
    ds.columns.resize(ds.column_names.size());

    std::unordered_map<std::string, int> label_ids;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            ++row;
            continue;
        }
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("data row " + std::to_string(row + 1) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        bool missing = std::any_of(cells.begin(), cells.end(), is_missing);
        if (missing) {
            ++row;
            continue;
        }
        std::size_t k = 0;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == target_idx) continue;
            ds.columns[k].push_back(parse_cell(cells[j], row, header[j]));
            ++k;
        }
        const std::string& t = cells[target_idx];
        if (task == Task::Classification) {
            auto [it, inserted] = label_ids.try_emplace(t, static_cast<int>(ds.class_labels.size()));
            if (inserted) ds.class_labels.push_back(t);
            ds.target.push_back(it->second);
        } else {
            ds.target.push_back(parse_cell(t, row, header[target_idx]));
        }
        ++row;
    }
    if (ds.target.size() < 2) throw std::runtime_error("empty dataset after dropping rows");
    ds.n_classes = static_cast<int>(ds.class_labels.size());
    return ds;
}

Split split_train_test(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("test fraction must be in (0,1)");
    std::size_t n = ds.n_rows();
    std::size_t n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test == n)
        throw std::invalid_argument("test fraction yields an empty part");

    Rng rng(seed);
    std::vector<std::size_t> perm = rng.permutation(n);
    std::vector<std::size_t> test_rows(perm.begin(), perm.begin() + n_test);
    std::vector<std::size_t> train_rows(perm.begin() + n_test, perm.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    Split s;
    s.seed = seed;
    s.train = ds.select_rows(train_rows);
    s.test = ds.select_rows(test_rows);
    return s;
}

std::vector<std::vector<std::size_t>> FoldAssignment::fold_rows() const {
    std::vector<std::vector<std::size_t>> rows(C);
    for (std::size_t i = 0; i < fold_of_row.size(); ++i)
        rows[fold_of_row[i]].push_back(i);
    return rows;
}

FoldAssignment make_folds(const Dataset& train, int C, std::uint64_t seed) {
    std::size_t n = train.n_rows();
    if (C < 2) throw std::invalid_argument("fold count must be at least 2");
    if (static_cast<std::size_t>(C) > n)
        throw std::invalid_argument("fold count exceeds training rows");

    Rng rng(seed);
    FoldAssignment fa;
    fa.C = C;
    fa.fold_of_row.assign(n, 0);

    // Group rows by class (one group total for regression), shuffle within
    // each group, then deal groups over folds. Each group's r extra rows go
    // to the folds with the fewest extras so far, so overall fold sizes stay
    // within one of each other too.
    std::vector<std::vector<std::size_t>> groups;
    if (train.task == Task::Classification && train.n_classes > 0) {
        groups.resize(train.n_classes);
        for (std::size_t i = 0; i < n; ++i) groups[train.label(i)].push_back(i);
    } else {
        groups.emplace_back();
        for (std::size_t i = 0; i < n; ++i) groups[0].push_back(i);
    }

    std::vector<std::size_t> extras(C, 0);
    for (auto& g : groups) {
        if (g.empty()) continue;
        rng.shuffle(g);
        std::size_t q = g.size() / C;
        int r = static_cast<int>(g.size() % C);
        std::vector<std::size_t> take(C, q);
        for (int e = 0; e < r; ++e) {
            int best = 0;
            for (int f = 1; f < C; ++f)
                if (extras[f] < extras[best]) best = f;
            ++take[best];
            ++extras[best];
        }
        std::size_t pos = 0;
        for (int f = 0; f < C; ++f)
            for (std::size_t t = 0; t < take[f]; ++t) fa.fold_of_row[g[pos++]] = f;
    }

    for (const auto& rows : fa.fold_rows())
        if (rows.empty()) throw std::logic_error("empty fold produced");
    return fa;
}

Dataset append_feature(const Dataset& ds, const std::vector<double>& values,
                       const std::string& name) {
    if (values.size() != ds.n_rows())
        throw std::invalid_argument("feature length " + std::to_string(values.size()) +
                                    " does not match " + std::to_string(ds.n_rows()) + " rows");
    Dataset out = ds;
    out.columns.push_back(values);
    out.column_names.push_back(name);
    return out;
}

std::pair<double, double> erc_range(const Dataset& train) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& col : train.columns)
        for (double v : col) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(lo <= hi)) throw std::invalid_argument("empty training set");
    return {lo, hi};
}

}  // namespace fcs
