#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcs/fcs.hpp"

namespace fcs {

struct ExperimentConfig {
    std::string data_path;
    std::string target_column;  // "" = last column
    Task task = Task::Regression;
    FCSConfig fcs;              // fcs.seed is the base seed; run i uses seed + i
    int repeats = 1;
    int jobs = 1;
    std::string out_dir = ".";
    int grid_resolution = 0;    // 0 = no grid export
};

std::string learner_name(LearnerKind kind);
std::string search_name(Algorithm algorithm);
std::string task_name(Task task);

// One run's results.jsonl payload. Wall-clock times are deliberately absent:
// identical configs must serialize to identical bytes.
std::string result_line(const ExperimentConfig& cfg, std::uint64_t seed,
                        const FCSResult& result);

std::string median_line(const ExperimentConfig& cfg,
                        const std::vector<FCSResult>& results);

struct GridExport {
    int resolution = 0;
    double lo1 = 0.0, hi1 = 0.0, lo2 = 0.0, hi2 = 0.0;
    std::vector<double> axis1, axis2;      // per cell, row-major, res^2 entries
    std::vector<double> prediction;
    struct Point {
        double f1 = 0.0, f2 = 0.0, target = 0.0;
        bool test = false;
    };
    std::vector<Point> points;             // train rows first, then test rows
};

// Prediction surface of the learner fitted on the first two constructed
// features, over their observed range on both splits plus a 5% margin.
GridExport export_grid(const Dataset& ds, const FCSConfig& run_config,
                       const FCSResult& result, int resolution);

// Runs the batch, writes results.jsonl, expressions.txt, manifest.json and,
// when a grid resolution is set, grid.csv + points.csv for the run with the
// median final test error.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace fcs
