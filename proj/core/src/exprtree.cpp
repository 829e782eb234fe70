#include "fcs/exprtree.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace fcs {

int arity(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::AqDiv:
            return 2;
        case Op::Square:
        case Op::SqrtP:
        case Op::LogP:
        case Op::Exp:
            return 1;
        case Op::Feature:
        case Op::Const:
            return 0;
    }
    return 0;
}

bool Primitive::operator==(const Primitive& other) const {
    if (op != other.op) return false;
    if (op == Op::Feature) return feature == other.feature;
    if (op == Op::Const)
        return std::bit_cast<std::uint64_t>(value) == std::bit_cast<std::uint64_t>(other.value);
    return true;
}

Primitive prim_op(Op op) { return Primitive{op, -1, 0.0}; }
Primitive prim_feature(std::int32_t index) { return Primitive{Op::Feature, index, 0.0}; }
Primitive prim_const(double value) { return Primitive{Op::Const, -1, value}; }

namespace {

constexpr Op kFunctions[] = {Op::Add, Op::Sub, Op::Mul, Op::AqDiv,
                             Op::Square, Op::SqrtP, Op::LogP, Op::Exp};
constexpr std::size_t kNumFunctions = 8;

Primitive random_terminal(const TerminalSet& t, Rng& rng) {
    std::size_t pick = rng.index(static_cast<std::size_t>(t.n_features) + 1);
    if (pick < static_cast<std::size_t>(t.n_features))
        return prim_feature(static_cast<std::int32_t>(pick));
    return prim_const(rng.uniform(t.erc.lo, t.erc.hi));
}

Primitive random_function(Rng& rng) { return prim_op(kFunctions[rng.index(kNumFunctions)]); }

// One primitive per the grow/full rules. `must_extend` forces a function so
// that some path still reaches the minimum height.
Primitive pick_primitive(InitMethod method, int depth, int max_height, bool must_extend,
                         const TerminalSet& t, Rng& rng) {
    if (depth == max_height) return random_terminal(t, rng);
    if (method == InitMethod::Full || must_extend) return random_function(rng);
    std::size_t pool = kNumFunctions + static_cast<std::size_t>(t.n_features) + 1;
    std::size_t pick = rng.index(pool);
    if (pick < kNumFunctions) return prim_op(kFunctions[pick]);
    if (pick < kNumFunctions + static_cast<std::size_t>(t.n_features))
        return prim_feature(static_cast<std::int32_t>(pick - kNumFunctions));
    return prim_const(rng.uniform(t.erc.lo, t.erc.hi));
}

DynTree sample_dyn_node(InitMethod method, int depth, int min_height, int max_height,
                        bool must_extend, const TerminalSet& t, Rng& rng) {
    DynTree node;
    node.prim = pick_primitive(method, depth, max_height,
                               must_extend && depth < min_height, t, rng);
    int a = arity(node.prim.op);
    if (a == 0) return node;
    bool child_must = must_extend && depth + 1 < min_height;
    int must_child = 0;
    if (child_must && a == 2) must_child = static_cast<int>(rng.index(2));
    node.children.reserve(a);
    for (int c = 0; c < a; ++c)
        node.children.push_back(sample_dyn_node(method, depth + 1, min_height, max_height,
                                                child_must && c == must_child, t, rng));
    return node;
}

void fill_template(ExprTree& tree, std::size_t pos, InitMethod method, int depth,
                   int min_height, bool must_extend, const TerminalSet& t, Rng& rng) {
    Primitive prim = pick_primitive(method, depth, tree.h,
                                    must_extend && depth < min_height, t, rng);
    tree.nodes[pos] = prim;
    if (depth == tree.h) return;
    // Every slot is filled; slots below a terminal become introns.
    bool child_must = must_extend && depth + 1 < min_height && arity(prim.op) > 0;
    int must_child = 0;
    if (child_must && arity(prim.op) == 2) must_child = static_cast<int>(rng.index(2));
    fill_template(tree, 2 * pos + 1, method, depth + 1, min_height,
                  child_must && must_child == 0, t, rng);
    fill_template(tree, 2 * pos + 2, method, depth + 1, min_height,
                  child_must && must_child == 1, t, rng);
}

}  // namespace

DynTree sample_dyn_tree(InitMethod method, int min_height, int max_height,
                        const TerminalSet& terminals, Rng& rng) {
    if (min_height < 0 || min_height > max_height)
        throw std::invalid_argument("bad height range");
    return sample_dyn_node(method, 0, min_height, max_height, true, terminals, rng);
}

ExprTree sample_template_tree(InitMethod method, int min_height, int h,
                              const TerminalSet& terminals, Rng& rng) {
    if (min_height < 0 || min_height > h) throw std::invalid_argument("bad height range");
    ExprTree tree;
    tree.h = h;
    tree.nodes.resize(ExprTree::template_size(h));
    fill_template(tree, 0, method, 0, min_height, true, terminals, rng);
    return tree;
}

namespace {

template <typename TreeT, typename SampleFn>
std::vector<TreeT> init_population(std::size_t size, const InitScheme& scheme,
                                   Rng& rng, SampleFn sample) {
    if (scheme.h_lo > scheme.h_hi || scheme.h_lo < 0)
        throw std::invalid_argument("bad init height range");
    std::size_t levels = static_cast<std::size_t>(scheme.h_hi - scheme.h_lo) + 1;
    std::vector<TreeT> pop;
    pop.reserve(size);
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < size; ++i) {
        int h = scheme.h_lo + static_cast<int>(i % levels);
        InitMethod method = ((i / levels) % 2 == 0) ? InitMethod::Grow : InitMethod::Full;
        int min_h = (method == InitMethod::Grow) ? std::min(scheme.min_height_grow, h) : h;
        TreeT tree = sample(method, min_h, h, rng);
        for (int attempt = 0; attempt < scheme.uniqueness_tries; ++attempt) {
            if (seen.insert(structure_key(tree)).second) break;
            tree = sample(method, min_h, h, rng);
        }
        pop.push_back(std::move(tree));
    }
    return pop;
}

}  // namespace

std::vector<DynTree> init_dyn_population(std::size_t size, const InitScheme& scheme,
                                         const TerminalSet& terminals, Rng& rng) {
    return init_population<DynTree>(size, scheme, rng,
                                    [&](InitMethod m, int lo, int h, Rng& r) {
                                        return sample_dyn_tree(m, lo, h, terminals, r);
                                    });
}

std::vector<ExprTree> init_template_population(std::size_t size, const InitScheme& scheme,
                                               const TerminalSet& terminals, Rng& rng) {
    return init_population<ExprTree>(size, scheme, rng,
                                     [&](InitMethod m, int lo, int h, Rng& r) {
                                         return sample_template_tree(m, lo, h, terminals, r);
                                     });
}

std::vector<std::size_t> expressed_positions(const ExprTree& tree) {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        std::size_t pos = stack.back();
        stack.pop_back();
        out.push_back(pos);
        int a = arity(tree.nodes[pos].op);
        if (a == 0) continue;
        if (2 * pos + 2 >= tree.nodes.size())
            throw std::logic_error("function primitive at leaf depth");
        if (a == 2) stack.push_back(2 * pos + 2);
        stack.push_back(2 * pos + 1);
    }
    return out;
}

int height(const ExprTree& tree) {
    int h = 0;
    for (std::size_t pos : expressed_positions(tree)) {
        int depth = 0;
        for (std::size_t q = pos; q > 0; q = (q - 1) / 2) ++depth;
        h = std::max(h, depth);
    }
    return h;
}

int height(const DynTree& tree) {
    int h = 0;
    for (const DynTree& c : tree.children) h = std::max(h, 1 + height(c));
    return h;
}

int size(const ExprTree& tree) { return static_cast<int>(expressed_positions(tree).size()); }

int size(const DynTree& tree) {
    int s = 1;
    for (const DynTree& c : tree.children) s += size(c);
    return s;
}

namespace {

void key_of(const Primitive& p, std::string& out) {
    char buf[32];
    if (p.op == Op::Feature) {
        std::snprintf(buf, sizeof buf, "f%d,", p.feature);
    } else if (p.op == Op::Const) {
        std::snprintf(buf, sizeof buf, "c%016llx,",
                      static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(p.value)));
    } else {
        std::snprintf(buf, sizeof buf, "o%d,", static_cast<int>(p.op));
    }
    out += buf;
}

void key_walk(const DynTree& t, std::string& out) {
    key_of(t.prim, out);
    for (const DynTree& c : t.children) key_walk(c, out);
}

}  // namespace

std::string structure_key(const ExprTree& tree) {
    std::string out;
    for (std::size_t pos : expressed_positions(tree)) key_of(tree.nodes[pos], out);
    return out;
}

std::string structure_key(const DynTree& tree) {
    std::string out;
    key_walk(tree, out);
    return out;
}

namespace {

DynTree to_dyn_at(const ExprTree& tree, std::size_t pos) {
    DynTree node;
    node.prim = tree.nodes[pos];
    int a = arity(node.prim.op);
    for (int c = 0; c < a; ++c) node.children.push_back(to_dyn_at(tree, 2 * pos + c + 1));
    return node;
}

std::string const_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Operator strength used for parenthesization: additive 1, multiplicative 2,
// squaring 3, atoms 4. Negative constants bind like an additive expression.
int strength(const DynTree& t) {
    switch (t.prim.op) {
        case Op::Add:
        case Op::Sub:
            return 1;
        case Op::Mul:
        case Op::AqDiv:
            return 2;
        case Op::Square:
            return 3;
        case Op::Const:
            return t.prim.value < 0 ? 1 : 4;
        default:
            return 4;
    }
}

std::string render(const DynTree& t, bool expand);

std::string wrap(const DynTree& t, bool expand, bool parens) {
    std::string s = render(t, expand);
    return parens ? "(" + s + ")" : s;
}

std::string render(const DynTree& t, bool expand) {
    switch (t.prim.op) {
        case Op::Add:
        case Op::Sub:
        case Op::Mul: {
            int q = strength(t);
            const char* op = t.prim.op == Op::Add ? " + " : t.prim.op == Op::Sub ? " - " : " * ";
            return wrap(t.children[0], expand, strength(t.children[0]) < q) + op +
                   wrap(t.children[1], expand, strength(t.children[1]) <= q);
        }
        case Op::AqDiv:
            if (expand)
                return wrap(t.children[0], expand, strength(t.children[0]) < 2) + " / sqrt(1 + " +
                       wrap(t.children[1], expand, strength(t.children[1]) < 4) + "^2)";
            return wrap(t.children[0], expand, strength(t.children[0]) < 2) + " div " +
                   wrap(t.children[1], expand, strength(t.children[1]) <= 2);
        case Op::Square:
            return wrap(t.children[0], expand, strength(t.children[0]) < 4) + "^2";
        case Op::SqrtP:
            return "sqrt(" + render(t.children[0], expand) + ")";
        case Op::LogP:
            if (expand) return "log(|" + render(t.children[0], expand) + "|)";
            return "log(" + render(t.children[0], expand) + ")";
        case Op::Exp:
            return "exp(" + render(t.children[0], expand) + ")";
        case Op::Feature:
            return "x" + std::to_string(t.prim.feature + 1);
        case Op::Const:
            return const_text(t.prim.value);
    }
    return "";
}

}  // namespace

DynTree to_dyn(const ExprTree& tree) { return to_dyn_at(tree, 0); }

std::string to_infix(const DynTree& tree, bool expand_protected) {
    return render(tree, expand_protected);
}

std::string to_infix(const ExprTree& tree, bool expand_protected) {
    return to_infix(to_dyn(tree), expand_protected);
}

}  // namespace fcs
