#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcs/rng.hpp"

namespace fcs {

enum class Op : std::uint8_t {
    Add,
    Sub,
    Mul,
    AqDiv,   // analytic quotient a / sqrt(1 + b^2)
    Square,
    SqrtP,   // sqrt(|a|)
    LogP,    // log(|a|), log_p(0) = 0
    Exp,
    Feature,
    Const,
};

int arity(Op op);

struct Primitive {
    Op op = Op::Const;
    std::int32_t feature = -1;  // Feature only
    double value = 0.0;         // Const only

    bool operator==(const Primitive& other) const;
};

Primitive prim_op(Op op);
Primitive prim_feature(std::int32_t index);
Primitive prim_const(double value);

// Fixed-height template: a complete binary heap of 2^(h+1)-1 primitives.
// Node i has children 2i+1 and 2i+2; positions not reached through expressed
// child links are introns and still hold primitives.
struct ExprTree {
    int h = 0;
    std::vector<Primitive> nodes;

    static std::size_t template_size(int h) { return (std::size_t{2} << h) - 1; }
};

// Unbounded tree for subtree-swap GP.
struct DynTree {
    Primitive prim;
    std::vector<DynTree> children;
};

enum class InitMethod { Grow, Full };

struct ErcBounds {
    double lo = 0.0;
    double hi = 0.0;
};

struct TerminalSet {
    int n_features = 0;
    ErcBounds erc;
};

DynTree sample_dyn_tree(InitMethod method, int min_height, int max_height,
                        const TerminalSet& terminals, Rng& rng);
ExprTree sample_template_tree(InitMethod method, int min_height, int h,
                              const TerminalSet& terminals, Rng& rng);

// HH: all trees at one height; RHH: heights cycle over [h_lo, h_hi]. Half
// grow, half full at every height. Trees syntactically equal to an earlier
// one are re-sampled up to uniqueness_tries times, then kept as-is.
struct InitScheme {
    int h_lo = 0;
    int h_hi = 0;  // == h_lo for HH
    int min_height_grow = 1;
    int uniqueness_tries = 100;
};

std::vector<DynTree> init_dyn_population(std::size_t size, const InitScheme& scheme,
                                         const TerminalSet& terminals, Rng& rng);
std::vector<ExprTree> init_template_population(std::size_t size, const InitScheme& scheme,
                                               const TerminalSet& terminals, Rng& rng);

// Preorder template positions reachable through expressed links; unary
// primitives express only the left child.
std::vector<std::size_t> expressed_positions(const ExprTree& tree);

int height(const ExprTree& tree);
int height(const DynTree& tree);
int size(const ExprTree& tree);  // expressed nodes only
int size(const DynTree& tree);

// Key identifying the expressed structure, including exact constant bits.
std::string structure_key(const ExprTree& tree);
std::string structure_key(const DynTree& tree);

DynTree to_dyn(const ExprTree& tree);

// Parenthesized infix. expand_protected replaces the analytic quotient and
// the protected log by their defining formulas. Features print as x1..xp,
// constants with six significant digits.
std::string to_infix(const DynTree& tree, bool expand_protected = false);
std::string to_infix(const ExprTree& tree, bool expand_protected = false);

}  // namespace fcs
