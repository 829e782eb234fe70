#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include "fcs/experiment.hpp"
#include "fcs/version.hpp"

namespace {

const std::map<std::string, fcs::Task> kTasks = {
    {"classification", fcs::Task::Classification},
    {"regression", fcs::Task::Regression},
};

const std::map<std::string, fcs::LearnerKind> kLearners = {
    {"gnb", fcs::LearnerKind::GNB},
    {"ols", fcs::LearnerKind::OLS},
    {"cart", fcs::LearnerKind::CART},
    {"rf", fcs::LearnerKind::RF},
};

const std::map<std::string, fcs::Algorithm> kSearches = {
    {"rs", fcs::Algorithm::RS},
    {"sgp", fcs::Algorithm::SGP},
    {"sgpb", fcs::Algorithm::SGPB},
    {"gomea-rt", fcs::Algorithm::GomeaRT},
    {"gomea-lt", fcs::Algorithm::GomeaLT},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative feature construction by program search"};
    app.set_version_flag("--version", fcs::kVersion);

    fcs::ExperimentConfig cfg;
    std::string task = "regression";
    std::string learner = "ols";
    std::string search = "gomea-rt";
    std::uint64_t seed = 1;
    std::uint64_t budget = 10000;
    std::size_t pop = 100;

    app.add_option("--data", cfg.data_path, "CSV file with a header row")
        ->required();
    app.add_option("--target", cfg.target_column,
                   "target column name or 0-based index (default: last column)");
    app.add_option("--task", task, "prediction task")
        ->check(CLI::IsMember({"classification", "regression"}))
        ->capture_default_str();
    app.add_option("--learner", learner, "wrapped learner")
        ->check(CLI::IsMember({"gnb", "ols", "cart", "rf"}))
        ->capture_default_str();
    app.add_option("--search", search, "feature search algorithm")
        ->check(CLI::IsMember({"rs", "sgp", "sgpb", "gomea-rt", "gomea-lt"}))
        ->capture_default_str();
    app.add_option("--height", cfg.fcs.search.h, "height budget h")
        ->check(CLI::Range(1, 10))
        ->capture_default_str();
    app.add_option("--k", cfg.fcs.K, "number of constructed features")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--pop", pop, "population size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--budget", budget, "fitness evaluations per round")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--folds", cfg.fcs.folds_C, "cross-validation folds")
        ->check(CLI::Range(2, 1000))
        ->capture_default_str();
    app.add_option("--test-fraction", cfg.fcs.test_fraction,
                   "held-out test fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_option("--seed", seed, "base seed; run i uses seed + i")
        ->capture_default_str();
    app.add_option("--repeats", cfg.repeats, "independent runs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--jobs", cfg.jobs, "runs executed in parallel")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--augment", cfg.fcs.augment,
                 "keep original features next to constructed ones");
    app.add_flag("--count-skipped-evals", cfg.fcs.count_skipped_evals,
                 "charge skipped candidates against the budget");
    app.add_option("--out", cfg.out_dir, "output directory")
        ->capture_default_str();
    app.add_option("--export-grid", cfg.grid_resolution,
                   "write a prediction grid at this resolution")
        ->check(CLI::Range(2, 10000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    cfg.task = kTasks.at(task);
    cfg.fcs.learner.kind = kLearners.at(learner);
    cfg.fcs.search.algorithm = kSearches.at(search);
    cfg.fcs.search.population_size = pop;
    cfg.fcs.search.eval_budget = static_cast<std::size_t>(budget);
    cfg.fcs.seed = seed;

    if (!fcs::learner_supports(cfg.fcs.learner.kind, cfg.task)) {
        std::cerr << "error: learner '" << learner
                  << "' does not support task '" << task << "'\n";
        return 2;
    }
    if (cfg.grid_resolution > 0 && cfg.fcs.K < 2) {
        std::cerr << "error: grid export requires two constructed features"
                  << " (--k >= 2)\n";
        return 2;
    }
    if (cfg.fcs.search.algorithm == fcs::Algorithm::GomeaLT && pop < 1000) {
        std::cerr << "warning: linkage estimation is unreliable below"
                  << " 1000 individuals (population is " << pop << ")\n";
    }

    try {
        fcs::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
