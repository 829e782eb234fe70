#include "fcs/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace fcs {

std::size_t tournament_select(const std::vector<double>& errors, int tournament_size,
                              Rng& rng) {
    if (errors.empty()) throw std::invalid_argument("empty population");
    std::size_t best = rng.index(errors.size());
    std::size_t ties = 1;
    for (int d = 1; d < tournament_size; ++d) {
        std::size_t i = rng.index(errors.size());
        if (errors[i] < errors[best]) {
            best = i;
            ties = 1;
        } else if (errors[i] == errors[best]) {
            ++ties;
            if (rng.below(ties) == 0) best = i;
        }
    }
    return best;
}

namespace {

void collect_by_depth(DynTree& t, int depth, std::vector<std::vector<DynTree*>>& levels) {
    if (static_cast<std::size_t>(depth) >= levels.size()) levels.resize(depth + 1);
    levels[depth].push_back(&t);
    for (DynTree& c : t.children) collect_by_depth(c, depth + 1, levels);
}

// Uniform depth level, then uniform node at that level.
std::pair<DynTree*, int> pick_node(DynTree& t, Rng& rng) {
    std::vector<std::vector<DynTree*>> levels;
    collect_by_depth(t, 0, levels);
    std::size_t depth = rng.index(levels.size());
    return {levels[depth][rng.index(levels[depth].size())], static_cast<int>(depth)};
}

}  // namespace

DynTree subtree_crossover(const DynTree& a, const DynTree& b, int max_height, Rng& rng) {
    DynTree child = a;
    auto [target, target_depth] = pick_node(child, rng);
    DynTree donor_copy = b;
    auto [donor, donor_depth] = pick_node(donor_copy, rng);
    *target = std::move(*donor);
    if (height(child) > max_height) return a;
    return child;
}

DynTree subtree_mutation(const DynTree& a, int max_height, const TerminalSet& terminals,
                         Rng& rng) {
    DynTree child = a;
    auto [target, target_depth] = pick_node(child, rng);
    *target = sample_dyn_tree(InitMethod::Grow, 0, max_height - target_depth, terminals, rng);
    return child;
}

// ---------------------------------------------------------------- FOS

namespace {

// Merge hierarchy over cluster ids; initial clusters are the singletons
// 0..n-1, merged clusters get fresh ids. The subset list holds singletons
// first, then each merge in creation order, root excluded.
struct Hierarchy {
    std::vector<Subset> subsets;      // by cluster id
    std::vector<std::size_t> active;  // cluster ids still mergeable
};

Hierarchy singletons(std::size_t n) {
    Hierarchy h;
    h.subsets.reserve(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        h.subsets.push_back({i});
        h.active.push_back(i);
    }
    return h;
}

std::size_t merge_clusters(Hierarchy& h, std::size_t ai, std::size_t bi) {
    Subset merged = h.subsets[h.active[ai]];
    const Subset& other = h.subsets[h.active[bi]];
    merged.insert(merged.end(), other.begin(), other.end());
    std::sort(merged.begin(), merged.end());
    std::size_t id = h.subsets.size();
    h.subsets.push_back(std::move(merged));
    if (ai > bi) std::swap(ai, bi);
    h.active.erase(h.active.begin() + bi);
    h.active[ai] = id;
    return id;
}

std::vector<Subset> finished_fos(Hierarchy&& h, std::size_t n) {
    if (n > 1) h.subsets.pop_back();  // drop the root (full set)
    return std::move(h.subsets);
}

double entropy(const std::vector<double>& counts, double total) {
    double e = 0.0;
    for (double c : counts)
        if (c > 0.0) {
            double p = c / total;
            e -= p * std::log(p);
        }
    return e;
}

}  // namespace

std::vector<Subset> build_linkage_tree(const std::vector<ExprTree>& population) {
    if (population.size() < 2) throw std::invalid_argument("population too small");
    std::size_t n = population[0].nodes.size();
    std::size_t m = population.size();

    // Symbol id per position: one id per function kind, one per feature
    // index, a single shared id for all constants.
    std::vector<std::vector<int>> sym(n, std::vector<int>(m));
    std::unordered_map<std::int64_t, int> ids;
    for (std::size_t i = 0; i < m; ++i) {
        if (population[i].nodes.size() != n)
            throw std::invalid_argument("mixed template sizes");
        for (std::size_t pos = 0; pos < n; ++pos) {
            const Primitive& p = population[i].nodes[pos];
            std::int64_t key = p.op == Op::Feature
                                   ? 1000 + p.feature
                                   : static_cast<std::int64_t>(p.op);
            auto [it, inserted] = ids.try_emplace(key, static_cast<int>(ids.size()));
            sym[pos][i] = it->second;
        }
    }
    int n_sym = static_cast<int>(ids.size());

    std::vector<double> marginal_entropy(n);
    std::vector<std::vector<double>> mi(n, std::vector<double>(n, 0.0));
    double total = static_cast<double>(m);
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<double> counts(n_sym, 0.0);
        for (std::size_t i = 0; i < m; ++i) counts[sym[a][i]] += 1.0;
        marginal_entropy[a] = entropy(counts, total);
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            std::unordered_map<std::int64_t, double> joint;
            for (std::size_t i = 0; i < m; ++i)
                joint[static_cast<std::int64_t>(sym[a][i]) * n_sym + sym[b][i]] += 1.0;
            double hj = 0.0;
            for (const auto& [k, c] : joint) {
                double p = c / total;
                hj -= p * std::log(p);
            }
            mi[a][b] = mi[b][a] = marginal_entropy[a] + marginal_entropy[b] - hj;
        }

    // Average-linkage agglomeration on MI similarity; ties toward the
    // lexicographically first active pair, so the order is deterministic.
    Hierarchy h = singletons(n);
    std::vector<std::vector<double>> sim(2 * n - 1, std::vector<double>(2 * n - 1, 0.0));
    std::vector<std::size_t> csize(2 * n - 1, 1);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b) sim[a][b] = mi[a][b];

    while (h.active.size() > 1) {
        std::size_t best_a = 0, best_b = 1;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t ai = 0; ai < h.active.size(); ++ai)
            for (std::size_t bi = ai + 1; bi < h.active.size(); ++bi) {
                double s = sim[h.active[ai]][h.active[bi]];
                if (s > best) {
                    best = s;
                    best_a = ai;
                    best_b = bi;
                }
            }
        std::size_t ida = h.active[best_a], idb = h.active[best_b];
        std::size_t id = merge_clusters(h, best_a, best_b);
        csize[id] = csize[ida] + csize[idb];
        for (std::size_t other : h.active) {
            if (other == id) continue;
            double s = (csize[ida] * sim[ida][other] + csize[idb] * sim[idb][other]) /
                       static_cast<double>(csize[id]);
            sim[id][other] = sim[other][id] = s;
        }
    }
    return finished_fos(std::move(h), n);
}

std::vector<Subset> build_random_tree(std::size_t n_positions, Rng& rng) {
    if (n_positions == 0) throw std::invalid_argument("need at least one position");
    Hierarchy h = singletons(n_positions);
    while (h.active.size() > 1) {
        std::size_t ai = rng.index(h.active.size());
        std::size_t bi = rng.index(h.active.size() - 1);
        if (bi >= ai) ++bi;
        merge_clusters(h, ai, bi);
    }
    return finished_fos(std::move(h), n_positions);
}

void apply_subset(ExprTree& dst, const ExprTree& donor, const Subset& positions) {
    if (dst.nodes.size() != donor.nodes.size())
        throw std::invalid_argument("template size mismatch");
    for (std::size_t pos : positions) dst.nodes[pos] = donor.nodes[pos];
}

GomStep gom_step(TemplateIndividual& ind, const ExprTree& donor, const Subset& subset,
                 FitnessFn& fitness, EvalBudget& budget) {
    GomStep step;
    bool differs = false;
    for (std::size_t pos : subset)
        if (!(ind.tree.nodes[pos] == donor.nodes[pos])) {
            differs = true;
            break;
        }
    if (!differs) return step;

    std::vector<Primitive> saved(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) saved[i] = ind.tree.nodes[subset[i]];
    apply_subset(ind.tree, donor, subset);
    step.genotype_changed = true;

    std::vector<double> values = fitness.outputs(ind.tree);
    std::optional<Scored> scored = fitness.score(values, ind.cache, budget);
    if (!scored) {
        for (std::size_t i = 0; i < subset.size(); ++i) ind.tree.nodes[subset[i]] = saved[i];
        step.budget_refused = true;
        return step;
    }
    step.evaluated = scored->verdict == Verdict::Valid;
    if (scored->verdict == Verdict::Unchanged) {
        // Semantics intact (intron churn): keep the change, nothing to score.
        step.accepted = true;
        return step;
    }
    if (scored->error <= ind.error) {
        ind.error = scored->error;
        if (scored->verdict == Verdict::Valid) ind.cache.store(values, scored->error);
        step.accepted = true;
    } else {
        for (std::size_t i = 0; i < subset.size(); ++i) ind.tree.nodes[subset[i]] = saved[i];
    }
    return step;
}

bool gom_pass(TemplateIndividual& ind, const std::vector<ExprTree>& donors,
              const std::vector<Subset>& fos, FitnessFn& fitness, EvalBudget& budget,
              Rng& rng) {
    std::vector<std::size_t> order = rng.permutation(fos.size());
    for (std::size_t k : order) {
        const ExprTree& donor = donors[rng.index(donors.size())];
        GomStep step = gom_step(ind, donor, fos[k], fitness, budget);
        if (step.budget_refused) return false;
    }
    return true;
}

// ---------------------------------------------------------------- driver

namespace {

constexpr int kStagnantGenerations = 50;
constexpr std::size_t kStagnantCandidates = 100000;

struct BestTracker {
    SearchResult result;
    bool seeded = false;

    template <typename TreeT>
    void consider(const TreeT& tree, double error, bool valid, const EvalBudget& budget) {
        if (valid) result.any_valid = true;
        if (!seeded || error < result.best_error) {
            seeded = true;
            result.best_error = error;
            if constexpr (std::is_same_v<TreeT, DynTree>)
                result.best = tree;
            else
                result.best = to_dyn(tree);
            result.trace.push_back({budget.used, error});
        }
    }
};

struct DynIndividual {
    DynTree tree;
    double error = 0.0;
    OutputCache cache;
};

// Shared init-and-score; returns false when the budget refused an evaluation.
template <typename IndT>
bool score_individual(IndT& ind, FitnessFn& fitness, EvalBudget& budget, BestTracker& best) {
    std::vector<double> values = fitness.outputs(ind.tree);
    std::optional<Scored> scored = fitness.score(values, ind.cache, budget);
    if (!scored) return false;
    ind.error = scored->error;
    if (scored->verdict == Verdict::Valid) ind.cache.store(values, scored->error);
    best.consider(ind.tree, ind.error, scored->verdict == Verdict::Valid, budget);
    return true;
}

SearchResult finish(BestTracker&& best, const EvalBudget& budget, const TerminalSet& terminals,
                    Rng& rng) {
    if (!best.seeded) {
        // Nothing was scored at all (budget 0): fall back to a random tree.
        best.result.best = sample_dyn_tree(InitMethod::Grow, 0, 1, terminals, rng);
        best.result.best_error = std::numeric_limits<double>::infinity();
    }
    best.result.evals_used = budget.used;
    return std::move(best.result);
}

SearchResult run_rs(const SearchConfig& config, const TerminalSet& terminals,
                    FitnessFn& fitness, Rng& rng) {
    EvalBudget budget{0, config.eval_budget};
    BestTracker best;
    int h_lo = std::min(2, config.h);
    std::size_t levels = static_cast<std::size_t>(config.h - h_lo) + 1;
    std::size_t idle = 0;
    for (std::size_t i = 0;; ++i) {
        int h = h_lo + static_cast<int>(i % levels);
        InitMethod method = ((i / levels) % 2 == 0) ? InitMethod::Grow : InitMethod::Full;
        DynIndividual cand;
        cand.tree = sample_dyn_tree(method, std::min(1, h), h, terminals, rng);
        std::size_t before = budget.used;
        if (!score_individual(cand, fitness, budget, best)) break;
        idle = budget.used == before ? idle + 1 : 0;
        if (idle >= kStagnantCandidates) break;
    }
    return finish(std::move(best), budget, terminals, rng);
}

SearchResult run_sgp(const SearchConfig& config, const TerminalSet& terminals,
                     FitnessFn& fitness, Rng& rng, bool bounded) {
    if (config.population_size < 2)
        throw std::invalid_argument("population size must be at least 2");
    if (std::fabs(config.sgp.crossover_rate + config.sgp.mutation_rate - 1.0) > 1e-12)
        throw std::invalid_argument("crossover and mutation rates must sum to 1");
    int max_h = bounded ? config.h : config.sgp.max_height;
    InitScheme scheme{2, bounded ? config.h : 6, 1, 100};
    scheme.h_lo = std::min(scheme.h_lo, scheme.h_hi);

    EvalBudget budget{0, config.eval_budget};
    BestTracker best;

    std::vector<DynTree> trees = init_dyn_population(config.population_size, scheme,
                                                     terminals, rng);
    std::vector<DynIndividual> pop(config.population_size);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i].tree = std::move(trees[i]);
        if (!score_individual(pop[i], fitness, budget, best))
            return finish(std::move(best), budget, terminals, rng);
    }

    int stagnant = 0;
    while (true) {
        std::size_t spent_before = budget.used;
        std::vector<double> errors(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) errors[i] = pop[i].error;

        std::size_t elite = 0;
        for (std::size_t i = 1; i < pop.size(); ++i)
            if (pop[i].error < pop[elite].error) elite = i;
        DynIndividual elite_copy = pop[elite];

        std::vector<DynIndividual> offspring(pop.size());
        for (std::size_t j = 0; j < pop.size(); ++j) {
            if (rng.chance(config.sgp.crossover_rate)) {
                std::size_t rec = tournament_select(errors, config.sgp.tournament_size, rng);
                std::size_t don = tournament_select(errors, config.sgp.tournament_size, rng);
                offspring[j].tree = subtree_crossover(pop[rec].tree, pop[don].tree, max_h, rng);
                offspring[j].cache = pop[rec].cache;
            } else {
                std::size_t rec = tournament_select(errors, config.sgp.tournament_size, rng);
                offspring[j].tree = subtree_mutation(pop[rec].tree, max_h, terminals, rng);
                offspring[j].cache = pop[rec].cache;
            }
            if (!score_individual(offspring[j], fitness, budget, best))
                return finish(std::move(best), budget, terminals, rng);
        }

        std::size_t worst = 0;
        for (std::size_t i = 1; i < offspring.size(); ++i)
            if (offspring[i].error > offspring[worst].error) worst = i;
        offspring[worst] = std::move(elite_copy);
        pop = std::move(offspring);

        stagnant = budget.used == spent_before ? stagnant + 1 : 0;
        if (stagnant >= kStagnantGenerations) break;
    }
    return finish(std::move(best), budget, terminals, rng);
}

SearchResult run_gomea(const SearchConfig& config, const TerminalSet& terminals,
                       FitnessFn& fitness, Rng& rng, bool linkage) {
    if (config.population_size < 2)
        throw std::invalid_argument("population size must be at least 2");
    EvalBudget budget{0, config.eval_budget};
    BestTracker best;

    InitScheme scheme{config.h, config.h, 1, 100};
    std::vector<ExprTree> trees = init_template_population(config.population_size, scheme,
                                                           terminals, rng);
    std::vector<TemplateIndividual> pop(config.population_size);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i].tree = std::move(trees[i]);
        if (!score_individual(pop[i], fitness, budget, best))
            return finish(std::move(best), budget, terminals, rng);
    }

    std::size_t n_positions = ExprTree::template_size(config.h);
    int stagnant = 0;
    while (true) {
        std::size_t spent_before = budget.used;
        std::vector<ExprTree> donors(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) donors[i] = pop[i].tree;
        std::vector<Subset> fos = linkage ? build_linkage_tree(donors)
                                          : build_random_tree(n_positions, rng);

        for (std::size_t i = 0; i < pop.size(); ++i) {
            std::vector<std::size_t> order = rng.permutation(fos.size());
            bool refused = false;
            for (std::size_t k : order) {
                const ExprTree& donor = donors[rng.index(donors.size())];
                GomStep step = gom_step(pop[i], donor, fos[k], fitness, budget);
                if (step.budget_refused) {
                    refused = true;
                    break;
                }
                if (step.accepted)
                    best.consider(pop[i].tree, pop[i].error, step.evaluated, budget);
            }
            if (refused) return finish(std::move(best), budget, terminals, rng);
        }

        stagnant = budget.used == spent_before ? stagnant + 1 : 0;
        if (stagnant >= kStagnantGenerations) break;
    }
    return finish(std::move(best), budget, terminals, rng);
}

}  // namespace

SearchResult run_search(const SearchConfig& config, const TerminalSet& terminals,
                        FitnessFn& fitness) {
    Rng rng(config.seed);
    switch (config.algorithm) {
        case Algorithm::RS:
            return run_rs(config, terminals, fitness, rng);
        case Algorithm::SGP:
            return run_sgp(config, terminals, fitness, rng, false);
        case Algorithm::SGPB:
            return run_sgp(config, terminals, fitness, rng, true);
        case Algorithm::GomeaRT:
            return run_gomea(config, terminals, fitness, rng, false);
        case Algorithm::GomeaLT:
            return run_gomea(config, terminals, fitness, rng, true);
    }
    throw std::logic_error("unknown algorithm");
}

}  // namespace fcs
