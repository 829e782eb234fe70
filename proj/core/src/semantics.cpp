#include "fcs/semantics.hpp"

#include <cmath>
#include <stdexcept>

namespace fcs {

double apply_primitive(Op op, double a, double b) {
    switch (op) {
        case Op::Add:
            return a + b;
        case Op::Sub:
            return a - b;
        case Op::Mul:
            return a * b;
        case Op::AqDiv:
            return a / std::sqrt(1.0 + b * b);
        case Op::Square:
            return a * a;
        case Op::SqrtP:
            return std::sqrt(std::fabs(a));
        case Op::LogP:
            return a == 0.0 ? 0.0 : std::log(std::fabs(a));
        case Op::Exp:
            return std::exp(a);
        case Op::Feature:
        case Op::Const:
            throw std::invalid_argument("terminal primitive has no operands");
    }
    return 0.0;
}

namespace {

std::vector<double> eval_terminal(const Primitive& p, const Dataset& ds) {
    if (p.op == Op::Feature) {
        if (p.feature < 0 || static_cast<std::size_t>(p.feature) >= ds.n_cols())
            throw std::out_of_range("feature index " + std::to_string(p.feature) +
                                    " out of range for " + std::to_string(ds.n_cols()) +
                                    " columns");
        return ds.columns[p.feature];
    }
    return std::vector<double>(ds.n_rows(), p.value);
}

std::vector<double> eval_template_at(const ExprTree& tree, std::size_t pos, const Dataset& ds) {
    const Primitive& p = tree.nodes[pos];
    int a = arity(p.op);
    if (a == 0) return eval_terminal(p, ds);
    std::vector<double> left = eval_template_at(tree, 2 * pos + 1, ds);
    if (a == 1) {
        for (double& v : left) v = apply_primitive(p.op, v);
        return left;
    }
    std::vector<double> right = eval_template_at(tree, 2 * pos + 2, ds);
    for (std::size_t i = 0; i < left.size(); ++i)
        left[i] = apply_primitive(p.op, left[i], right[i]);
    return left;
}

std::vector<double> eval_dyn(const DynTree& tree, const Dataset& ds) {
    int a = arity(tree.prim.op);
    if (a == 0) return eval_terminal(tree.prim, ds);
    std::vector<double> left = eval_dyn(tree.children[0], ds);
    if (a == 1) {
        for (double& v : left) v = apply_primitive(tree.prim.op, v);
        return left;
    }
    std::vector<double> right = eval_dyn(tree.children[1], ds);
    for (std::size_t i = 0; i < left.size(); ++i)
        left[i] = apply_primitive(tree.prim.op, left[i], right[i]);
    return left;
}

}  // namespace

std::vector<double> eval_tree(const ExprTree& tree, const Dataset& ds) {
    return eval_template_at(tree, 0, ds);
}

std::vector<double> eval_tree(const DynTree& tree, const Dataset& ds) {
    return eval_dyn(tree, ds);
}

Verdict check_criteria(const std::vector<double>& v,
                       const std::vector<std::vector<double>>& previous,
                       const CriteriaBounds& bounds, const OutputCache* cache) {
    bool constant = true;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) {
            constant = false;
            break;
        }
    if (constant && !v.empty() && v[0] == v[0]) return Verdict::Constant;

    for (double x : v) {
        if (!std::isfinite(x)) return Verdict::Extreme;
        double m = std::fabs(x);
        if ((x != 0.0 && m < bounds.beta_lo) || m > bounds.beta_hi) return Verdict::Extreme;
    }

    for (const auto& prev : previous) {
        if (prev.size() != v.size())
            throw std::invalid_argument("constructed feature length mismatch");
        bool equal = true;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] != prev[i]) {
                equal = false;
                break;
            }
        if (equal) return Verdict::Duplicate;
    }

    if (cache && cache->filled && cache->values.size() == v.size()) {
        bool equal = true;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] != cache->values[i]) {
                equal = false;
                break;
            }
        if (equal) return Verdict::Unchanged;
    }
    return Verdict::Valid;
}

}  // namespace fcs
