#include "fcs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <thread>

#include "fcs/version.hpp"

namespace fcs {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
    std::erase_if(v, [](double x) { return std::isnan(x); });
    if (v.empty()) return kNan;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string hash_hex(const Dataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const unsigned char* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& name : ds.column_names) feed(name.data(), name.size());
    for (const auto& col : ds.columns) feed(col.data(), col.size() * sizeof(double));
    feed(ds.target.data(), ds.target.size() * sizeof(double));
    for (const auto& label : ds.class_labels) feed(label.data(), label.size());
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json config_echo(const ExperimentConfig& cfg) {
    return json{{"data", cfg.data_path},
                {"target", cfg.target_column},
                {"task", task_name(cfg.task)},
                {"learner", learner_name(cfg.fcs.learner.kind)},
                {"search", search_name(cfg.fcs.search.algorithm)},
                {"height", cfg.fcs.search.h},
                {"k", cfg.fcs.K},
                {"pop", cfg.fcs.search.population_size},
                {"budget", cfg.fcs.search.eval_budget},
                {"folds", cfg.fcs.folds_C},
                {"test_fraction", cfg.fcs.test_fraction},
                {"augment", cfg.fcs.augment},
                {"count_skipped_evals", cfg.fcs.count_skipped_evals}};
}

json round_json(const RoundResult& round, int k, bool regression) {
    json trace = json::array();
    for (const TracePoint& t : round.trace)
        trace.push_back(json::array({t.evals_used, t.best_error}));
    json j{{"k", k},
           {"expression", round.expression},
           {"expression_expanded", round.expression_expanded},
           {"size", round.feature_size},
           {"height", round.feature_height},
           {"train_cv_error", round.train_cv_error},
           {"train_full_error", round.train_full_error},
           {"test_error", round.test_error}};
    if (regression) j["test_r2"] = round.test_r2;
    j["evals"] = round.evals_used;
    j["valid"] = round.valid;
    j["trace"] = std::move(trace);
    return j;
}

}  // namespace

std::string learner_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::GNB: return "gnb";
        case LearnerKind::OLS: return "ols";
        case LearnerKind::CART: return "cart";
        case LearnerKind::RF: return "rf";
    }
    return "?";
}

std::string search_name(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::RS: return "rs";
        case Algorithm::SGP: return "sgp";
        case Algorithm::SGPB: return "sgpb";
        case Algorithm::GomeaRT: return "gomea-rt";
        case Algorithm::GomeaLT: return "gomea-lt";
    }
    return "?";
}

std::string task_name(Task task) {
    return task == Task::Classification ? "classification" : "regression";
}

std::string result_line(const ExperimentConfig& cfg, std::uint64_t seed,
                        const FCSResult& result) {
    bool regression = cfg.task == Task::Regression;
    json j = config_echo(cfg);
    j["seed"] = seed;
    j["n_train"] = result.n_train;
    j["n_test"] = result.n_test;
    j["metric"] = result.metric == Metric::OneMinusMacroF1 ? "one_minus_macro_f1" : "mse";
    json baseline{{"train_cv_error", result.baseline.train_cv_error},
                  {"test_error", result.baseline.test_error}};
    if (regression) baseline["test_r2"] = result.baseline.test_r2;
    j["baseline"] = std::move(baseline);
    json rounds = json::array();
    for (std::size_t k = 0; k < result.rounds.size(); ++k)
        rounds.push_back(round_json(result.rounds[k], static_cast<int>(k) + 1, regression));
    j["rounds"] = std::move(rounds);
    return j.dump();
}

std::string median_line(const ExperimentConfig& cfg,
                        const std::vector<FCSResult>& results) {
    bool regression = cfg.task == Task::Regression;
    json j{{"type", "median"}, {"runs", results.size()}};
    auto collect = [&](auto&& get) {
        std::vector<double> v;
        for (const FCSResult& r : results) v.push_back(get(r));
        return median(std::move(v));
    };
    json baseline{{"train_cv_error",
                   collect([](const FCSResult& r) { return r.baseline.train_cv_error; })},
                  {"test_error",
                   collect([](const FCSResult& r) { return r.baseline.test_error; })}};
    if (regression)
        baseline["test_r2"] = collect([](const FCSResult& r) { return r.baseline.test_r2; });
    j["baseline"] = std::move(baseline);

    std::size_t n_rounds = 0;
    for (const FCSResult& r : results) n_rounds = std::max(n_rounds, r.rounds.size());
    json rounds = json::array();
    for (std::size_t k = 0; k < n_rounds; ++k) {
        auto per_round = [&](auto&& get) {
            std::vector<double> v;
            for (const FCSResult& r : results)
                if (k < r.rounds.size()) v.push_back(get(r.rounds[k]));
            return median(std::move(v));
        };
        json rj{{"k", k + 1},
                {"train_cv_error",
                 per_round([](const RoundResult& r) { return r.train_cv_error; })},
                {"train_full_error",
                 per_round([](const RoundResult& r) { return r.train_full_error; })},
                {"test_error", per_round([](const RoundResult& r) { return r.test_error; })}};
        if (regression)
            rj["test_r2"] = per_round([](const RoundResult& r) { return r.test_r2; });
        rj["size"] = per_round(
            [](const RoundResult& r) { return static_cast<double>(r.feature_size); });
        rounds.push_back(std::move(rj));
    }
    j["rounds"] = std::move(rounds);
    return j.dump();
}

GridExport export_grid(const Dataset& ds, const FCSConfig& run_config,
                       const FCSResult& result, int resolution) {
    if (result.rounds.size() < 2)
        throw std::runtime_error("grid export requires two constructed features");
    if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");

    Split split = split_train_test(ds, run_config.test_fraction,
                                   split_stream_seed(run_config.seed));
    std::vector<double> f1_train = eval_tree(result.rounds[0].tree, split.train);
    std::vector<double> f2_train = eval_tree(result.rounds[1].tree, split.train);
    std::vector<double> f1_test = eval_tree(result.rounds[0].tree, split.test);
    std::vector<double> f2_test = eval_tree(result.rounds[1].tree, split.test);

    Dataset tr2;
    tr2.task = split.train.task;
    tr2.target = split.train.target;
    tr2.class_labels = split.train.class_labels;
    tr2.n_classes = split.train.n_classes;
    tr2.columns = {f1_train, f2_train};
    tr2.column_names = {"f1", "f2"};
    LearnerSpec learner = run_config.learner;
    learner.seed = learner_stream_seed(run_config.seed);
    auto model = fit(learner, tr2);

    auto axis_range = [](const std::vector<double>& a, const std::vector<double>& b) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (double v : a) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double v : b) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double margin = hi > lo ? 0.05 * (hi - lo) : 0.5;
        return std::pair{lo - margin, hi + margin};
    };

    GridExport grid;
    grid.resolution = resolution;
    std::tie(grid.lo1, grid.hi1) = axis_range(f1_train, f1_test);
    std::tie(grid.lo2, grid.hi2) = axis_range(f2_train, f2_test);

    std::size_t cells = static_cast<std::size_t>(resolution) * resolution;
    Dataset probe;
    probe.task = tr2.task;
    probe.class_labels = tr2.class_labels;
    probe.n_classes = tr2.n_classes;
    probe.column_names = tr2.column_names;
    probe.columns.resize(2);
    probe.columns[0].reserve(cells);
    probe.columns[1].reserve(cells);
    for (int i = 0; i < resolution; ++i) {
        double a1 = grid.lo1 + (grid.hi1 - grid.lo1) * i / (resolution - 1);
        for (int jj = 0; jj < resolution; ++jj) {
            double a2 = grid.lo2 + (grid.hi2 - grid.lo2) * jj / (resolution - 1);
            probe.columns[0].push_back(a1);
            probe.columns[1].push_back(a2);
        }
    }
    probe.target.assign(cells, 0.0);
    grid.prediction = model->predict(probe);
    grid.axis1 = std::move(probe.columns[0]);
    grid.axis2 = std::move(probe.columns[1]);

    for (std::size_t i = 0; i < split.train.n_rows(); ++i)
        grid.points.push_back({f1_train[i], f2_train[i], split.train.target[i], false});
    for (std::size_t i = 0; i < split.test.n_rows(); ++i)
        grid.points.push_back({f1_test[i], f2_test[i], split.test.target[i], true});
    return grid;
}

namespace {

std::string num_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_grid_files(const std::filesystem::path& dir, const GridExport& grid) {
    std::ofstream gout(dir / "grid.csv");
    gout << "axis1,axis2,prediction\n";
    for (std::size_t i = 0; i < grid.prediction.size(); ++i)
        gout << num_text(grid.axis1[i]) << ',' << num_text(grid.axis2[i]) << ','
             << num_text(grid.prediction[i]) << '\n';
    std::ofstream pout(dir / "points.csv");
    pout << "f1,f2,target,split\n";
    for (const GridExport::Point& p : grid.points)
        pout << num_text(p.f1) << ',' << num_text(p.f2) << ',' << num_text(p.target) << ','
             << (p.test ? "test" : "train") << '\n';
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
    if (cfg.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
    if (cfg.grid_resolution != 0) {
        if (cfg.fcs.K < 2)
            throw std::runtime_error("grid export requires two constructed features");
        if (cfg.grid_resolution < 2)
            throw std::invalid_argument("grid resolution must be at least 2");
    }

    Dataset ds = load_csv(cfg.data_path, cfg.target_column, cfg.task);
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);

    std::size_t repeats = static_cast<std::size_t>(cfg.repeats);
    std::vector<std::optional<FCSResult>> results(repeats);
    std::vector<std::string> failures(repeats);
    std::atomic<std::size_t> next_run{0};
    std::mutex mu;
    std::condition_variable done_cv;
    std::vector<char> done(repeats, 0);

    auto worker = [&]() {
        while (true) {
            std::size_t i = next_run.fetch_add(1);
            if (i >= repeats) return;
            FCSConfig run_cfg = cfg.fcs;
            run_cfg.seed = cfg.fcs.seed + i;
            try {
                FCSResult r = construct_features(ds, run_cfg);
                std::lock_guard lock(mu);
                results[i] = std::move(r);
                done[i] = 1;
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                failures[i] = e.what();
                done[i] = 1;
            }
            done_cv.notify_all();
        }
    };

    std::size_t n_workers = std::min<std::size_t>(std::max(cfg.jobs, 1), repeats);
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);

    // Stream lines in run order as soon as each prefix is complete, so an
    // interrupted batch loses at most the in-flight runs.
    std::ofstream rout(dir / "results.jsonl");
    std::ofstream xout(dir / "expressions.txt");
    for (std::size_t i = 0; i < repeats; ++i) {
        {
            std::unique_lock lock(mu);
            done_cv.wait(lock, [&] { return done[i] != 0; });
        }
        std::uint64_t seed = cfg.fcs.seed + i;
        if (results[i]) {
            rout << result_line(cfg, seed, *results[i]) << '\n' << std::flush;
            xout << "# seed " << seed << '\n';
            for (std::size_t k = 0; k < results[i]->rounds.size(); ++k) {
                const RoundResult& round = results[i]->rounds[k];
                xout << "round " << k + 1 << ": " << round.expression << "   [size "
                     << round.feature_size << ", height " << round.feature_height << "]\n";
            }
            xout << std::flush;
        } else {
            json ej{{"seed", seed}, {"error", failures[i]}};
            rout << ej.dump() << '\n' << std::flush;
        }
    }
    for (std::thread& t : threads) t.join();

    std::vector<FCSResult> ok;
    std::vector<std::uint64_t> ok_seeds;
    for (std::size_t i = 0; i < repeats; ++i)
        if (results[i]) {
            ok.push_back(*results[i]);
            ok_seeds.push_back(cfg.fcs.seed + i);
        }
    if (!ok.empty()) rout << median_line(cfg, ok) << '\n';
    rout.close();
    xout.close();

    json manifest{{"version", kVersion},
                  {"data", json{{"path", cfg.data_path},
                                {"rows", ds.n_rows()},
                                {"features", ds.n_cols()},
                                {"classes", ds.n_classes},
                                {"hash", hash_hex(ds)}}},
                  {"config", config_echo(cfg)}};
    manifest["config"]["seed"] = cfg.fcs.seed;
    manifest["config"]["repeats"] = cfg.repeats;
    manifest["config"]["jobs"] = cfg.jobs;
    manifest["config"]["grid_resolution"] = cfg.grid_resolution;
    json runs = json::array();
    for (std::size_t i = 0; i < repeats; ++i) {
        json rj{{"seed", cfg.fcs.seed + i}};
        if (results[i]) {
            json wall = json::array();
            for (const RoundResult& round : results[i]->rounds) wall.push_back(round.wall_ms);
            rj["wall_ms_per_round"] = std::move(wall);
        } else {
            rj["error"] = failures[i];
        }
        runs.push_back(std::move(rj));
    }
    manifest["runs"] = std::move(runs);
    std::ofstream mout(dir / "manifest.json");
    mout << manifest.dump(2) << '\n';

    if (cfg.grid_resolution != 0 && !ok.empty()) {
        // Export the run with the median final test error (ties: lowest seed).
        std::vector<std::size_t> order(ok.size());
        for (std::size_t i = 0; i < ok.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double ea = ok[a].rounds.back().test_error;
            double eb = ok[b].rounds.back().test_error;
            if (ea != eb) return ea < eb;
            return ok_seeds[a] < ok_seeds[b];
        });
        std::size_t chosen = order[(order.size() - 1) / 2];
        FCSConfig run_cfg = cfg.fcs;
        run_cfg.seed = ok_seeds[chosen];
        GridExport grid = export_grid(ds, run_cfg, ok[chosen], cfg.grid_resolution);
        write_grid_files(dir, grid);
    }
}

}  // namespace fcs
