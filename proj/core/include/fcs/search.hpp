#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fcs/exprtree.hpp"
#include "fcs/semantics.hpp"

namespace fcs {

enum class Algorithm { RS, SGP, SGPB, GomeaRT, GomeaLT };

struct SgpParams {
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;
    int tournament_size = 7;
    int elitism = 1;
    int max_height = 17;
};

struct SearchConfig {
    Algorithm algorithm = Algorithm::GomeaRT;
    std::size_t population_size = 100;
    std::size_t eval_budget = 10000;
    int h = 2;
    SgpParams sgp;
    std::uint64_t seed = 0;
};

struct EvalBudget {
    std::size_t used = 0;
    std::size_t limit = 0;
    bool exhausted() const { return used >= limit; }
};

struct Scored {
    double error = 0.0;
    Verdict verdict = Verdict::Valid;
};

// Fitness oracle given to a search run. outputs() computes candidate values
// (free); score() runs the skip criteria and, for valid candidates, the
// cross-validated learner error, charging the budget. A nullopt result means
// the evaluation was refused because the budget is spent. score() never
// writes the cache; the search commits it after accepted real evaluations.
class FitnessFn {
public:
    virtual ~FitnessFn() = default;
    virtual std::vector<double> outputs(const DynTree& tree) const = 0;
    virtual std::vector<double> outputs(const ExprTree& tree) const = 0;
    virtual std::optional<Scored> score(const std::vector<double>& values,
                                        const OutputCache& cache, EvalBudget& budget) = 0;
    virtual double worst() const = 0;
};

struct TracePoint {
    std::size_t evals_used = 0;
    double best_error = 0.0;
};

struct SearchResult {
    DynTree best;
    double best_error = 0.0;
    bool any_valid = false;  // at least one candidate received a real evaluation
    std::size_t evals_used = 0;
    std::vector<TracePoint> trace;
};

SearchResult run_search(const SearchConfig& config, const TerminalSet& terminals,
                        FitnessFn& fitness);

// ---- pieces below are the building blocks, exposed for direct testing ----

// Uniform draws with replacement; lowest error wins, ties uniform among the
// drawn entries. Returns the winner's index.
std::size_t tournament_select(const std::vector<double>& errors, int tournament_size,
                              Rng& rng);

// Swap a uniformly chosen subtree of a copy of `a` (depth level first, then
// node within the level) for one chosen the same way in `b`. A child taller
// than max_height is rejected: the copy of `a` comes back unchanged.
DynTree subtree_crossover(const DynTree& a, const DynTree& b, int max_height, Rng& rng);

// Same node choice; the subtree is replaced by a fresh grown one that fits
// under max_height.
DynTree subtree_mutation(const DynTree& a, int max_height, const TerminalSet& terminals,
                         Rng& rng);

using Subset = std::vector<std::size_t>;

// Family of subsets from hierarchically clustering template positions by
// mutual information over the population's symbols (average linkage; all
// constants share one symbol). Singletons plus every merge except the root:
// 2n-2 subsets for n positions.
std::vector<Subset> build_linkage_tree(const std::vector<ExprTree>& population);

// Same hierarchy shape, uniformly random merge order.
std::vector<Subset> build_random_tree(std::size_t n_positions, Rng& rng);

void apply_subset(ExprTree& dst, const ExprTree& donor, const Subset& positions);

struct TemplateIndividual {
    ExprTree tree;
    double error = 0.0;
    OutputCache cache;
};

struct GomStep {
    bool genotype_changed = false;  // donor differed at the subset, swap attempted
    bool evaluated = false;         // spent a budget unit
    bool accepted = false;          // change kept (reverted otherwise)
    bool budget_refused = false;
};

// One mixing step: copy donor genes at the subset, keep the change when the
// error does not worsen, revert otherwise. Output-preserving changes are
// kept for free.
GomStep gom_step(TemplateIndividual& ind, const ExprTree& donor, const Subset& subset,
                 FitnessFn& fitness, EvalBudget& budget);

// Full pass over the FOS in shuffled order with uniform donors. Returns
// false when the budget refused an evaluation mid-pass.
bool gom_pass(TemplateIndividual& ind, const std::vector<ExprTree>& donors,
              const std::vector<Subset>& fos, FitnessFn& fitness, EvalBudget& budget,
              Rng& rng);

}  // namespace fcs
