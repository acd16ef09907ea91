#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "annsim/config.hpp"
#include "annsim/evalmodels.hpp"
#include "annsim/looprunner.hpp"
#include "annsim/metrics.hpp"
#include "annsim/svg.hpp"

namespace annsim {

// One results.csv line; `rep` fills the seed column.
struct MetricRow {
    std::string dataset;
    std::string strategy;
    std::size_t budget = 0;
    double beta = 0.0;
    double gamma = 0.0;
    std::size_t rep = 0;
    std::string metric;
    double value = 0.0;
};

inline constexpr const char* kResultsHeader = "dataset,strategy,B,beta,gamma,seed,metric,value";

// Metrics emitted per grid point, in row order.
inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"train_f1s", "train_f1e", "test_f1s_protonet",
                                                "test_f1s_mlp"};
    return names;
}

inline const std::vector<Strategy>& strategy_order() {
    static const std::vector<Strategy> order{Strategy::acpd, Strategy::fcpd, Strategy::fix,
                                             Strategy::orc};
    return order;
}

inline std::string to_csv(const MetricRow& r) {
    std::string line;
    line += r.dataset;
    line += ',';
    line += r.strategy;
    line += ',';
    line += std::to_string(r.budget);
    line += ',';
    line += io::format_exact(r.beta);
    line += ',';
    line += io::format_exact(r.gamma);
    line += ',';
    line += std::to_string(r.rep);
    line += ',';
    line += r.metric;
    line += ',';
    line += io::format_exact(r.value);
    return line;
}

inline std::string to_json(const MetricRow& r) {
    std::string line = "{\"dataset\":\"" + r.dataset + "\",\"strategy\":\"" + r.strategy +
                       "\",\"B\":" + std::to_string(r.budget) + ",\"beta\":" +
                       io::format_exact(r.beta) + ",\"gamma\":" + io::format_exact(r.gamma) +
                       ",\"seed\":" + std::to_string(r.rep) + ",\"metric\":\"" + r.metric +
                       "\",\"value\":" + io::format_exact(r.value) + "}";
    return line;
}

inline MetricRow row_from_csv(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    f.push_back(cur);
    if (f.size() != 8) throw std::runtime_error("results row must have 8 fields: " + line);
    MetricRow r;
    r.dataset = f[0];
    r.strategy = f[1];
    r.budget = static_cast<std::size_t>(std::stoull(f[2]));
    r.beta = io::detail::parse_double(f[3], "beta");
    r.gamma = io::detail::parse_double(f[4], "gamma");
    r.rep = static_cast<std::size_t>(std::stoull(f[5]));
    r.metric = f[6];
    r.value = io::detail::parse_double(f[7], "value");
    return r;
}

inline std::vector<MetricRow> load_results(const std::filesystem::path& path) {
    std::vector<MetricRow> rows;
    if (!std::filesystem::exists(path)) return rows;
    auto in = io::detail::open_in(path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == kResultsHeader) continue;
        }
        rows.push_back(row_from_csv(line));
    }
    return rows;
}

// --- deterministic seed plumbing ---

// Annotation-session seed for one grid point. Beta is deliberately excluded:
// the annotator draws one uniform per query either way, so sessions at
// different noise levels stay paired.
inline std::uint64_t grid_seed(std::uint64_t base, std::size_t dataset_idx, Strategy s,
                               std::size_t budget, std::size_t rep) {
    std::uint64_t h = rng::derive(base, rng::Stream::run, dataset_idx);
    h = rng::derive(h, rng::Stream::run, static_cast<std::uint64_t>(s) + 1);
    h = rng::derive(h, rng::Stream::run, budget);
    h = rng::derive(h, rng::Stream::run, rep);
    return h;
}

// Train and test specs for one configured dataset; the test split gets a
// disjoint derived seed.
inline std::pair<DatasetSpec, DatasetSpec> dataset_specs(const ExperimentConfig& cfg,
                                                         std::size_t idx) {
    DatasetSpec train = apply_overrides(preset(cfg.datasets[idx]), cfg.dataset_overrides);
    train.seed = rng::derive(cfg.base_seed, rng::Stream::directions, idx);
    DatasetSpec test = train;
    test.seed = train.seed + 10000;
    try {
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("dataset '") + cfg.datasets[idx] + "': " + e.what());
    }
    return {train, test};
}

struct DatasetPair {
    std::string name;
    DatasetSpec spec;  // train split spec
    std::vector<Recording> train;
    std::vector<Recording> test;
};

namespace expdetail {

// Index-chunked worker pool. Exceptions are captured per task and the
// lowest-index one is rethrown after all workers join, so failures do not
// depend on scheduling.
inline void parallel_for(std::size_t n, std::size_t jobs,
                         const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    std::vector<std::exception_ptr> errors(n);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> threads;
        threads.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::filesystem::path dataset_dir(const ExperimentConfig& cfg, const std::string& name) {
    return cfg.out / "datasets" / name;
}

// Loads one dataset pair, generating it first when absent. Data always comes
// back from disk so in-memory and reloaded runs see identical (float32)
// embeddings. Rejects on-disk data generated with different parameters.
inline DatasetPair ensure_dataset(const ExperimentConfig& cfg, std::size_t idx,
                                  std::ostream& out) {
    const auto [train_spec, test_spec] = dataset_specs(cfg, idx);
    const auto dir = dataset_dir(cfg, cfg.datasets[idx]);
    for (const auto& [split, spec] : {std::pair{std::string("train"), train_spec},
                                      std::pair{std::string("test"), test_spec}}) {
        if (!std::filesystem::exists(dir / split / "meta")) {
            out << "generating dataset " << cfg.datasets[idx] << '/' << split << '\n';
            save_dataset(dir / split, spec, generate_dataset(spec), /*force=*/false);
        }
    }
    DatasetPair pair;
    pair.name = cfg.datasets[idx];
    auto [loaded_train, train_recs] = load_dataset(dir / "train");
    auto [loaded_test, test_recs] = load_dataset(dir / "test");
    if (spec_to_keyvalue(loaded_train) != spec_to_keyvalue(train_spec) ||
        spec_to_keyvalue(loaded_test) != spec_to_keyvalue(test_spec))
        throw ConfigError("dataset '" + pair.name +
                          "' on disk was generated with different parameters; rerun generate "
                          "with force");
    pair.spec = loaded_train;
    pair.train = std::move(train_recs);
    pair.test = std::move(test_recs);
    return pair;
}

inline std::string beta_tag(double beta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", beta);
    return buf;
}

inline std::string point_key(const std::string& dataset, const std::string& strategy,
                             std::size_t budget, double beta, double gamma, std::size_t rep) {
    return dataset + '|' + strategy + '|' + std::to_string(budget) + '|' +
           io::format_value(beta) + '|' + io::format_value(gamma) + '|' + std::to_string(rep);
}

struct GridPoint {
    std::size_t dataset_idx = 0;
    Strategy strategy = Strategy::acpd;
    std::size_t budget = 0;
    double beta = 0.0;
    std::size_t rep = 0;
};

inline std::vector<GridPoint> build_grid(const ExperimentConfig& cfg) {
    std::vector<GridPoint> grid;
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
        for (const Strategy s : cfg.strategies)
            for (const std::size_t b : cfg.budgets)
                for (const double beta : cfg.betas)
                    for (std::size_t rep = 0; rep < cfg.n_seeds; ++rep)
                        grid.push_back({d, s, b, beta, rep});
    return grid;
}

// Runs one grid point end to end. Returns no rows when the oracle strategy
// cannot cover some recording within the budget.
inline std::vector<MetricRow> run_grid_point(const ExperimentConfig& cfg, const DatasetPair& data,
                                             const GridPoint& g) {
    LoopConfig lc;
    lc.strategy = g.strategy;
    lc.budget = g.budget;
    lc.seed = grid_seed(cfg.base_seed, g.dataset_idx, g.strategy, g.budget, g.rep);
    lc.annotator.gamma = cfg.gamma;
    lc.annotator.beta = g.beta;
    lc.annotator.seed = lc.seed;

    SessionResult session;
    try {
        session = run_session(data.train, data.spec, lc);
    } catch (const UnsupportedBudgetError&) {
        return {};
    }

    if (cfg.save_annotations) {
        char sub[96];
        std::snprintf(sub, sizeof(sub), "%s_B%zu_beta%s_s%zu", to_string(g.strategy), g.budget,
                      beta_tag(g.beta).c_str(), g.rep);
        save_session(cfg.out / "sessions" / data.name / sub, session, data.spec, lc);
    }

    std::vector<EventList> preds, gts;
    preds.reserve(data.train.size());
    gts.reserve(data.train.size());
    for (std::size_t i = 0; i < data.train.size(); ++i) {
        preds.push_back(merge_positive(session.annotations[i]));
        gts.push_back(data.train[i].ground_truth);
    }
    const double train_f1s = pooled_segment_f1(preds, gts).f1;
    const double train_f1e = pooled_event_f1(preds, gts, 0.5, cfg.relative_offset_collar).f1;

    const auto training_set = build_training_set(session, data.train);
    const auto proto = train_protonet_eval(training_set);
    const double proto_f1 = evaluate_model(proto, data.test).f1;
    TrainConfig tc;
    tc.seed = lc.seed;
    const auto mlp = train_mlp(training_set, tc);
    const double mlp_f1 = evaluate_model(mlp, data.test).f1;

    std::vector<MetricRow> rows;
    const double values[] = {train_f1s, train_f1e, proto_f1, mlp_f1};
    for (std::size_t m = 0; m < metric_names().size(); ++m)
        rows.push_back({data.name, to_string(g.strategy), g.budget, g.beta, cfg.gamma, g.rep,
                        metric_names()[m], values[m]});
    return rows;
}

inline void append_rows(const ExperimentConfig& cfg, const std::vector<MetricRow>& rows) {
    const auto csv_path = cfg.out / "results.csv";
    const bool fresh = !std::filesystem::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    std::ofstream jsonl(cfg.out / "results.jsonl", std::ios::app);
    if (!csv || !jsonl) throw std::runtime_error("cannot open results files for append");
    if (fresh) csv << kResultsHeader << '\n';
    for (const auto& r : rows) {
        csv << to_csv(r) << '\n';
        jsonl << to_json(r) << '\n';
    }
}

inline void run_impl(const ExperimentConfig& cfg, std::ostream& out) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out);

    std::vector<DatasetPair> datasets;
    datasets.reserve(cfg.datasets.size());
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
        datasets.push_back(ensure_dataset(cfg, d, out));

    // A grid point is done once every metric row for its key is on disk.
    std::map<std::string, std::set<std::string>> done;
    for (const auto& r : load_results(cfg.out / "results.csv"))
        done[point_key(r.dataset, r.strategy, r.budget, r.beta, r.gamma, r.rep)].insert(r.metric);

    const auto grid = build_grid(cfg);
    std::vector<const GridPoint*> todo;
    for (const auto& g : grid) {
        const auto key = point_key(cfg.datasets[g.dataset_idx], to_string(g.strategy), g.budget,
                                   g.beta, cfg.gamma, g.rep);
        const auto it = done.find(key);
        if (it == done.end() || it->second.size() < metric_names().size()) todo.push_back(&g);
    }
    out << "grid points: " << grid.size() << ", to compute: " << todo.size() << '\n';

    std::vector<std::vector<MetricRow>> slots(todo.size());
    parallel_for(todo.size(), cfg.jobs, [&](std::size_t i) {
        slots[i] = run_grid_point(cfg, datasets[todo[i]->dataset_idx], *todo[i]);
    });

    std::vector<MetricRow> fresh_rows;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& g = *todo[i];
        const auto key = point_key(cfg.datasets[g.dataset_idx], to_string(g.strategy), g.budget,
                                   g.beta, cfg.gamma, g.rep);
        const auto it = done.find(key);
        for (const auto& r : slots[i])
            if (it == done.end() || !it->second.count(r.metric)) fresh_rows.push_back(r);
    }
    append_rows(cfg, fresh_rows);
    out << "appended " << fresh_rows.size() << " rows to "
        << (cfg.out / "results.csv").string() << '\n';
}

// --- aggregation shared by plot and report ---

struct MeanKey {
    std::string dataset;
    std::size_t budget;
    double beta;
    std::string strategy;
    std::string metric;

    bool operator<(const MeanKey& o) const {
        return std::tie(dataset, budget, beta, strategy, metric) <
               std::tie(o.dataset, o.budget, o.beta, o.strategy, o.metric);
    }
};

struct MeanValue {
    double sum = 0.0;
    std::size_t count = 0;
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

inline std::map<MeanKey, MeanValue> mean_over_seeds(const std::vector<MetricRow>& rows) {
    std::map<MeanKey, MeanValue> means;
    for (const auto& r : rows) {
        auto& m = means[{r.dataset, r.budget, r.beta, r.strategy, r.metric}];
        m.sum += r.value;
        ++m.count;
    }
    return means;
}

inline void plot_impl(const ExperimentConfig& cfg, std::ostream& out) {
    const auto rows = load_results(cfg.out / "results.csv");
    if (rows.empty()) throw std::runtime_error("no results to plot in " +
                                               (cfg.out / "results.csv").string());
    const auto means = mean_over_seeds(rows);
    const auto plot_dir = cfg.out / "plots";
    std::filesystem::create_directories(plot_dir);
    std::size_t written = 0;

    // One F1s-vs-budget chart per (dataset, beta); one line per strategy.
    std::set<std::pair<std::string, double>> charts;
    for (const auto& r : rows)
        if (r.metric == "train_f1s") charts.insert({r.dataset, r.beta});
    for (const auto& [dataset, beta] : charts) {
        svg::Panel panel;
        panel.title = dataset + "  (beta " + beta_tag(beta) + ", weak-label F1s)";
        panel.xlabel = "queries per recording B";
        panel.ylabel = "mean train F1s";
        panel.y_range = {{0.0, 1.0}};
        for (const Strategy s : strategy_order()) {
            svg::Series series;
            series.label = to_string(s);
            series.markers = true;
            for (const auto& [key, val] : means) {
                if (key.dataset != dataset || key.beta != beta || key.metric != "train_f1s" ||
                    key.strategy != to_string(s))
                    continue;
                series.x.push_back(static_cast<double>(key.budget));
                series.y.push_back(val.mean());
            }
            if (!series.x.empty()) panel.series.push_back(std::move(series));
        }
        char name[96];
        std::snprintf(name, sizeof(name), "f1s_%s_beta%s.svg", dataset.c_str(),
                      beta_tag(beta).c_str());
        svg::write_chart(plot_dir / name, {panel});
        ++written;
    }

    // Per-recording snapshot: probability curve, distance curve, detected
    // peaks and the resulting query boundaries for one training recording.
    const auto data = expdetail::ensure_dataset(cfg, 0, out);
    if (cfg.snapshot_recording >= data.train.size())
        throw ConfigError("snapshot_recording out of range");
    const auto& rec = data.train[cfg.snapshot_recording];
    LoopConfig lc;
    const auto model = init_loop_model(data.spec, lc);
    const auto curve = probability_curve(model, rec.stream);
    const auto dist = acpd_curve(curve, rec.stream.hop);
    const auto peaks = find_peaks(dist);
    const std::size_t budget = cfg.budgets.front() >= 2 ? cfg.budgets.front() : 2;
    const auto boundaries = select_boundaries(peaks, budget, rec.stream.duration);

    svg::Panel top;
    top.title = data.name + " " + recording_name(rec.id) + ": presence probability";
    top.xlabel = "time [s]";
    top.ylabel = "p(t)";
    top.y_range = {{0.0, 1.0}};
    top.series.push_back({"p(t)", curve.timestamps, curve.values, false});
    for (const auto& e : rec.ground_truth.events) top.bands.push_back({e.start, e.end});
    for (const double b : boundaries) top.vlines.push_back({b});

    svg::Panel bottom;
    bottom.title = "distance curve and selected boundaries (B=" + std::to_string(budget) + ")";
    bottom.xlabel = "time [s]";
    bottom.ylabel = "g(t)";
    bottom.series.push_back({"g(t)", dist.timestamps, dist.values, false});
    svg::PointSet ps;
    ps.label = "peaks";
    for (const auto& p : peaks) {
        ps.x.push_back(p.time);
        ps.y.push_back(dist.values[p.index]);
    }
    bottom.points.push_back(std::move(ps));
    for (const double b : boundaries) bottom.vlines.push_back({b});

    char name[96];
    std::snprintf(name, sizeof(name), "snapshot_%s_rec%04zu.svg", data.name.c_str(),
                  cfg.snapshot_recording);
    svg::write_chart(plot_dir / name, {top, bottom});
    ++written;
    out << "wrote " << written << " plot files to " << plot_dir.string() << '\n';
}

inline void report_impl(const ExperimentConfig& cfg, std::ostream& out) {
    const auto rows = load_results(cfg.out / "results.csv");
    if (rows.empty())
        throw std::runtime_error("no results to report in " + (cfg.out / "results.csv").string());
    const auto means = mean_over_seeds(rows);

    std::set<std::tuple<std::string, std::size_t, double>> blocks;
    for (const auto& r : rows) blocks.insert({r.dataset, r.budget, r.beta});

    for (const auto& [dataset, budget, beta] : blocks) {
        char head[128];
        std::snprintf(head, sizeof(head), "== dataset %s  B=%zu  beta=%s ==", dataset.c_str(),
                      budget, expdetail::beta_tag(beta).c_str());
        out << head << '\n';
        out << "strategy    train_f1s  train_f1e  test_protonet   test_mlp  seeds\n";
        for (const Strategy s : strategy_order()) {
            double v[4];
            std::size_t count = 0;
            bool present = true;
            for (std::size_t m = 0; m < metric_names().size(); ++m) {
                const auto it = means.find({dataset, budget, beta, to_string(s),
                                            metric_names()[m]});
                if (it == means.end()) {
                    present = false;
                    break;
                }
                v[m] = it->second.mean();
                count = it->second.count;
            }
            if (!present) continue;
            char line[160];
            std::snprintf(line, sizeof(line), "%-10s  %9.4f  %9.4f  %13.4f  %9.4f  %5zu",
                          to_string(s), v[0], v[1], v[2], v[3], count);
            out << line << '\n';
        }
        out << '\n';
    }
}

}  // namespace expdetail

// --- CLI entry points: 0 = success, 2 = config error, 3 = data error ---

namespace expdetail {

template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
    try {
        fn();
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace expdetail

inline int cmd_generate(const ExperimentConfig& cfg, bool force, std::ostream& out,
                        std::ostream& err) {
    return expdetail::guarded(
        [&] {
            cfg.validate();
            for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
                const auto [train_spec, test_spec] = dataset_specs(cfg, d);
                const auto dir = expdetail::dataset_dir(cfg, cfg.datasets[d]);
                if (!force && (std::filesystem::exists(dir / "train" / "meta") ||
                               std::filesystem::exists(dir / "test" / "meta")))
                    throw ConfigError("dataset '" + cfg.datasets[d] +
                                      "' already exists under " + dir.string() +
                                      " (pass force to regenerate)");
                save_dataset(dir / "train", train_spec, generate_dataset(train_spec), force);
                save_dataset(dir / "test", test_spec, generate_dataset(test_spec), force);
                out << "generated " << cfg.datasets[d] << ": " << train_spec.n_recordings
                    << " train + " << test_spec.n_recordings << " test recordings\n";
            }
        },
        err);
}

inline int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return expdetail::guarded([&] { expdetail::run_impl(cfg, out); }, err);
}

inline int cmd_plot(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return expdetail::guarded([&] { expdetail::plot_impl(cfg, out); }, err);
}

inline int cmd_report(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return expdetail::guarded([&] { expdetail::report_impl(cfg, out); }, err);
}

}  // namespace annsim
