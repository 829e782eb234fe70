#pragma once

#include <limits>
#include <vector>

#include "fcs/dataset.hpp"
#include "fcs/exprtree.hpp"

namespace fcs {

double apply_primitive(Op op, double a, double b = 0.0);

// Row-wise evaluation over the dataset's columns (expressed nodes only).
std::vector<double> eval_tree(const ExprTree& tree, const Dataset& ds);
std::vector<double> eval_tree(const DynTree& tree, const Dataset& ds);

enum class Verdict {
    Valid,
    Constant,   // all entries equal
    Extreme,    // non-finite, or magnitude outside [beta_lo, beta_hi] (zeros exempt)
    Duplicate,  // exactly equals a previously constructed feature
    Unchanged,  // exactly equals this slot's cached output
};

struct CriteriaBounds {
    double beta_lo = 1e-10;
    double beta_hi = 1e10;
};

// Last evaluated output and its fitness for one individual slot. The pair is
// written only by actual fitness evaluations, so values and error always
// belong together.
struct OutputCache {
    std::vector<double> values;
    double error = std::numeric_limits<double>::quiet_NaN();
    bool filled = false;

    void store(const std::vector<double>& v, double e) {
        values = v;
        error = e;
        filled = true;
    }
};

// The four skip checks, applied in order: constant, extreme, duplicate
// against previously constructed features, unchanged against the cache.
Verdict check_criteria(const std::vector<double>& v,
                       const std::vector<std::vector<double>>& previous,
                       const CriteriaBounds& bounds, const OutputCache* cache);

}  // namespace fcs
