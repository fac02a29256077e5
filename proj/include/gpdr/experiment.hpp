#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpdr/dataset.hpp"
#include "gpdr/evaluation.hpp"
#include "gpdr/evolution.hpp"
#include "gpdr/gp/infix.hpp"
#include "gpdr/neural.hpp"
#include "gpdr/stats.hpp"

namespace gpdr {

enum class Method { Pca, Isomap, MtDistEuclidean, MtDistGeodesic, MtRankEuclidean, MtRankGeodesic, MtTeacher, AmtGp };

inline constexpr std::array<Method, 8> kAllMethods{Method::Pca,           Method::Isomap,          Method::MtDistEuclidean,
                                                   Method::MtDistGeodesic, Method::MtRankEuclidean, Method::MtRankGeodesic,
                                                   Method::MtTeacher,      Method::AmtGp};

inline std::string_view method_name(Method m) {
    switch (m) {
        case Method::Pca: return "pca";
        case Method::Isomap: return "isomap";
        case Method::MtDistEuclidean: return "mt_dist_euclidean";
        case Method::MtDistGeodesic: return "mt_dist_geodesic";
        case Method::MtRankEuclidean: return "mt_rank_euclidean";
        case Method::MtRankGeodesic: return "mt_rank_geodesic";
        case Method::MtTeacher: return "mt_teacher";
        case Method::AmtGp: return "amt_gp";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    for (Method m : kAllMethods)
        if (method_name(m) == s) return m;
    throw InvalidInput("unknown method '" + std::string(s) + "'");
}

inline bool is_gp(Method m) { return m != Method::Pca && m != Method::Isomap; }

/// Fitness objective behind a multi-tree method.
inline FitnessSpec method_spec(Method m, std::size_t n_neighbors) {
    FitnessSpec s;
    s.n_neighbors = n_neighbors;
    switch (m) {
        case Method::MtDistEuclidean: s.objective = Objective::Dist; break;
        case Method::MtDistGeodesic: s.objective = Objective::Dist; s.metric = Metric::Geodesic; break;
        case Method::MtRankEuclidean: s.objective = Objective::Rank; break;
        case Method::MtRankGeodesic: s.objective = Objective::Rank; s.metric = Metric::Geodesic; break;
        case Method::MtTeacher: s.objective = Objective::Teacher; break;
        case Method::AmtGp: s.objective = Objective::GpAutoencoder; break;
        default: throw InvalidInput("method_spec: " + std::string(method_name(m)) + " is not a GP method");
    }
    return s;
}

struct ExperimentConfig {
    std::string dataset_path;
    std::string label_column = "class";
    bool header = true;
    std::vector<std::size_t> ks{2, 3};
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    std::size_t runs = 30;
    GpRunConfig gp{};
    TrainConfig teacher{};
    EvalConfig eval{};
    double dr_fraction = 0.5;
    double variance_fraction = 0.99;
    std::size_t n_neighbors = 10;
    std::uint64_t master_seed = 0;
    std::string output_dir = "results";
    std::size_t workers = 1;  // concurrent runs

    /// P=200, G=30, 10 runs, b=100.
    void apply_desk_scale() {
        gp.population = 200;
        gp.generations = 30;
        gp.batch_size = 100;
        runs = 10;
    }

    void validate() const {
        if (methods.empty()) throw InvalidInput("ExperimentConfig: no methods");
        if (ks.empty() || std::find(ks.begin(), ks.end(), std::size_t{0}) != ks.end())
            throw InvalidInput("ExperimentConfig: k values must be >= 1");
        if (runs < 1) throw InvalidInput("ExperimentConfig: runs must be >= 1");
        if (!(dr_fraction > 0.0 && dr_fraction < 1.0)) throw InvalidInput("ExperimentConfig: dr_fraction must lie in (0,1)");
        if (!(variance_fraction > 0.0 && variance_fraction <= 1.0))
            throw InvalidInput("ExperimentConfig: variance_fraction must lie in (0,1]");
        gp.validate();
        teacher.validate();
    }
};

inline std::uint64_t run_seed(std::uint64_t master, Method m, std::size_t k, std::size_t run) {
    return derive_seed({master, static_cast<std::uint64_t>(m), k, run});
}

inline constexpr std::string_view kRecordFormat = "gpdr.run-record";
inline constexpr int kRecordVersion = 1;
inline constexpr std::size_t kProbeRows = 10;

/// One (method, k, run) cell of a sweep.
struct RunRecord {
    Method method = Method::Pca;
    std::size_t k = 0;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double balanced_accuracy = std::numeric_limits<double>::quiet_NaN();
    double reconstruction_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t input_dims = 0;
    std::vector<std::string> expressions;  // full precision
    std::vector<std::string> decoder_expressions;
    Matrix probe_inputs;  // standardised held-out rows
    Matrix probe_latent;  // the model's output on them
    nlohmann::json json;  // the stored record, verbatim
};

namespace detail {

inline nlohmann::json to_json(const Matrix& m) {
    auto out = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    return out;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) rows.push_back(r.get<std::vector<double>>());
    return rows.empty() ? Matrix() : Matrix::from_rows(rows);
}

inline nlohmann::json to_json(const Mlp& m) {
    nlohmann::json out;
    out["latent_layer"] = m.latent_layer;
    for (const auto& l : m.layers)
        out["layers"].push_back({{"activation", l.activation == Activation::Tanh ? "tanh" : "linear"},
                                 {"weights", to_json(l.weights)},
                                 {"bias", l.bias}});
    return out;
}

inline double number_or_nan(const nlohmann::json& j) {
    return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

inline std::string record_stem(Method m, std::size_t k, std::size_t run) {
    std::string r = std::to_string(run);
    if (r.size() < 3) r.insert(0, 3 - r.size(), '0');
    return std::string(method_name(m)) + "-k" + std::to_string(k) + "-run" + r;
}

/// Writes through a temporary file and a rename, so readers never see a partial file.
inline void write_atomically(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::filesystem::path record_path(const std::string& dir, Method m, std::size_t k, std::size_t run) {
    return std::filesystem::path(dir) / "records" / (detail::record_stem(m, k, run) + ".jsonl");
}

inline RunRecord parse_record(const nlohmann::json& j) {
    RunRecord r;
    r.json = j;
    r.method = parse_method(j.at("method").get<std::string>());
    r.k = j.at("k").get<std::size_t>();
    r.run = j.at("run").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ok = j.at("status").get<std::string>() == "ok";
    r.error = j.value("error", "");
    if (!r.ok) return r;
    const auto& m = j.at("metrics");
    r.balanced_accuracy = detail::number_or_nan(m.at("balanced_accuracy"));
    r.reconstruction_error = detail::number_or_nan(m.at("reconstruction_error"));
    r.input_dims = j.at("input_dims").get<std::size_t>();
    if (j.contains("gp")) {
        r.expressions = j["gp"].at("expressions").get<std::vector<std::string>>();
        r.decoder_expressions = j["gp"].value("decoder_expressions", std::vector<std::string>{});
    }
    r.probe_inputs = detail::matrix_from_json(j.at("probe").at("inputs"));
    r.probe_latent = detail::matrix_from_json(j.at("probe").at("latent"));
    return r;
}

/// Reads a record file: a versioned header line, then the record line.
inline RunRecord read_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string header, body;
    if (!std::getline(in, header) || !std::getline(in, body)) throw IngestionError("truncated record " + path.string());
    const auto h = nlohmann::json::parse(header);
    if (h.value("format", "") != kRecordFormat || h.value("version", 0) != kRecordVersion)
        throw IngestionError("unsupported record header in " + path.string());
    return parse_record(nlohmann::json::parse(body));
}

inline void write_record(const std::string& dir, const RunRecord& r, double wall_seconds) {
    const auto path = record_path(dir, r.method, r.k, r.run);
    std::filesystem::create_directories(path.parent_path());
    const nlohmann::json header{{"format", kRecordFormat}, {"version", kRecordVersion}};
    detail::write_atomically(path, header.dump() + "\n" + r.json.dump() + "\n");
    auto timing = path;
    timing.replace_extension(".timing.json");
    detail::write_atomically(timing, nlohmann::json{{"wall_seconds", wall_seconds}}.dump() + "\n");
}

struct ResultStore {
    std::string dir;
    std::vector<RunRecord> records;

    static ResultStore load(const std::string& dir) {
        ResultStore s{dir, {}};
        const auto rec = std::filesystem::path(dir) / "records";
        if (!std::filesystem::exists(rec)) return s;
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(rec))
            if (e.path().extension() == ".jsonl") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) s.records.push_back(read_record(f));
        s.sort();
        return s;
    }

    void sort() {
        std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
            return std::tie(a.method, a.k, a.run) < std::tie(b.method, b.k, b.run);
        });
    }

    /// Successful records for one cell, in run order.
    std::vector<const RunRecord*> cell(Method m, std::size_t k) const {
        std::vector<const RunRecord*> out;
        for (const auto& r : records)
            if (r.method == m && r.k == k && r.ok) out.push_back(&r);
        return out;
    }
};

namespace detail {

inline Dataset with_features(const Dataset& d, Matrix features) {
    Dataset out = d;
    out.features = std::move(features);
    return out;
}

template <class G>
void store_gp(nlohmann::json& j, const RunResult<G>& r) {
    j["gp"] = {{"train_fitness", r.best_fitness},
               {"history", r.history},
               {"expressions", r.expressions},
               {"variation",
                {{"crossover_opportunities", r.variation.crossover_opportunities},
                 {"crossover_attempts", r.variation.crossover_attempts},
                 {"crossover_rejections", r.variation.crossover_rejections},
                 {"subtree_mutations", r.variation.subtree_mutations},
                 {"one_point_mutations", r.variation.one_point_mutations}}}};
    if (!r.decoder_expressions.empty()) j["gp"]["decoder_expressions"] = r.decoder_expressions;
}

}  // namespace detail

/// split -> standardise -> PCA target -> (teacher) -> fit -> evaluate, for one cell.
/// Returns the record and the wall time; failures are captured in the record.
inline RunRecord run_single(const ExperimentConfig& cfg, const Dataset& data, Method method, std::size_t k,
                            std::size_t run) {
    RunRecord rec;
    rec.method = method;
    rec.k = k;
    rec.run = run;
    rec.seed = run_seed(cfg.master_seed, method, k, run);
    nlohmann::json j{{"method", method_name(method)}, {"k", k}, {"run", run}, {"seed", rec.seed}};
    try {
        const SplitPlan plan = split(data, cfg.dr_fraction, derive_seed({rec.seed, 10}));
        const Standardizer standardizer = Standardizer::fit(data.features.select_rows(plan.dr_train));
        const Dataset z = detail::with_features(data, standardizer.transform(data.features));
        const Dataset z_train = z.subset(plan.dr_train);
        const PcaTarget target = pca_target(z_train, cfg.variance_fraction);
        j["input_dims"] = data.p();
        j["pca_components"] = target.components_retained;
        j["split"] = {{"dr_train", plan.dr_train.size()}, {"dr_heldout", plan.dr_heldout.size()}};
        j["standardizer"] = {{"mean", standardizer.mean}, {"stddev", standardizer.stddev}};

        std::optional<DrModel> model;
        GpRunConfig gp = cfg.gp;
        gp.seed = derive_seed({rec.seed, 20});
        switch (method) {
            case Method::Pca: model = pca_fit(z_train.features, k); break;
            case Method::Isomap: model = isomap_fit(z_train.features, k, cfg.n_neighbors); break;
            case Method::AmtGp: {
                const auto problem = FitnessProblem::make(method_spec(method, cfg.n_neighbors), z_train.features,
                                                          target.transformed);
                auto result = evolve<gp::AutoencoderMultiTree>(problem, k, gp);
                detail::store_gp(j, result);
                model = std::move(result.best);
                break;
            }
            default: {
                std::optional<Matrix> teacher_latent;
                if (method == Method::MtTeacher) {
                    TrainConfig tc = cfg.teacher;
                    tc.seed = derive_seed({rec.seed, 30});
                    const auto teacher = train_autoencoder(target.transformed, k, tc);
                    teacher_latent = latent(teacher.model, target.transformed);
                    j["teacher"] = detail::to_json(teacher.model);
                    j["teacher"]["final_loss"] = teacher.loss_history.back();
                    j["teacher"]["learning_rate"] = teacher.learning_rate;
                }
                const auto problem = FitnessProblem::make(method_spec(method, cfg.n_neighbors), z_train.features,
                                                          target.transformed, std::move(teacher_latent));
                auto result = evolve<gp::MultiTree>(problem, k, gp);
                detail::store_gp(j, result);
                model = std::move(result.best);
                break;
            }
        }

        const Evaluation ev = evaluate(*model, z, plan, target, cfg.eval, derive_seed({rec.seed, 40}));
        j["metrics"] = {{"balanced_accuracy", ev.balanced_accuracy},
                        {"reconstruction_error", ev.reconstruction_error},
                        {"folds", ev.folds},
                        {"fold_accuracy", ev.fold_accuracy},
                        {"fold_reconstruction", ev.fold_reconstruction}};
        j["warnings"] = ev.warnings;

        const std::size_t probe_n = std::min(kProbeRows, plan.dr_heldout.size());
        const std::vector<std::size_t> probe(plan.dr_heldout.begin(),
                                             plan.dr_heldout.begin() + static_cast<std::ptrdiff_t>(probe_n));
        const Matrix probe_inputs = z.features.select_rows(probe);
        j["probe"] = {{"rows", probe},
                      {"inputs", detail::to_json(probe_inputs)},
                      {"latent", detail::to_json(transform(*model, probe_inputs))}};
        j["status"] = "ok";
    } catch (const std::exception& e) {
        j["status"] = "error";
        j["error"] = e.what();
    }
    return parse_record(j);
}

using ProgressLog = std::function<void(const std::string&)>;

/// Runs every missing (method, k, run) cell and returns the full store.
/// Existing record files are kept, so an interrupted sweep resumes where it stopped.
inline ResultStore run_experiment(const ExperimentConfig& cfg, const ProgressLog& log = {}) {
    cfg.validate();
    std::optional<LabelColumn> label;
    if (!cfg.label_column.empty()) label = LabelColumn{cfg.label_column};
    const Dataset data = load_csv(cfg.dataset_path, label, cfg.header);
    struct Job {
        Method method;
        std::size_t k, run;
    };
    std::vector<Job> jobs;
    for (Method m : cfg.methods)
        for (std::size_t k : cfg.ks)
            for (std::size_t r = 0; r < cfg.runs; ++r)
                if (!std::filesystem::exists(record_path(cfg.output_dir, m, k, r))) jobs.push_back({m, k, r});

    std::mutex log_mutex;
    std::size_t done = 0;
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        const auto start = std::chrono::steady_clock::now();
        const RunRecord rec = run_single(cfg, data, job.method, job.k, job.run);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_record(cfg.output_dir, rec, secs);
        if (log) {
            std::lock_guard lock(log_mutex);
            ++done;
            std::ostringstream msg;
            msg << '[' << done << '/' << jobs.size() << "] " << method_name(job.method) << " k=" << job.k
                << " run=" << job.run << ' ';
            if (rec.ok)
                msg << "acc=" << rec.balanced_accuracy << " rec=" << rec.reconstruction_error;
            else
                msg << "FAILED: " << rec.error;
            msg << " (" << secs << " s)";
            log(msg.str());
        }
    });
    return ResultStore::load(cfg.output_dir);
}

// ---- summary tables ----

struct SummaryCell {
    Method method = Method::Pca;
    std::size_t samples = 0;
    std::size_t failed = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double p_value = std::numeric_limits<double>::quiet_NaN();  // against the best; NaN if untested
    std::string stars;
    bool best = false;
    bool bold = false;
};

struct SummaryTable {
    std::string metric;
    bool higher_is_better = false;
    std::size_t k = 0;
    std::vector<SummaryCell> cells;
};

inline std::vector<double> metric_samples(const std::vector<const RunRecord*>& recs, const std::string& metric) {
    std::vector<double> out;
    for (const auto* r : recs) {
        const double v = metric == "balanced_accuracy" ? r->balanced_accuracy : r->reconstruction_error;
        if (std::isfinite(v)) out.push_back(v);
    }
    return out;
}

/// Per metric and k: mean and std per method, the best method (best mean, lowest
/// std on ties), U-test p-values of the rest against it, stars, and bold marks for
/// the best and for every method with p >= 0.1.
inline std::vector<SummaryTable> summarize(const ResultStore& store) {
    if (store.records.empty()) throw InvalidInput("summarize: empty result store");
    std::vector<Method> methods;
    std::vector<std::size_t> ks;
    for (const auto& r : store.records) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
    }
    std::sort(methods.begin(), methods.end());
    std::sort(ks.begin(), ks.end());

    std::vector<SummaryTable> tables;
    for (const auto& [metric, higher] : {std::pair<std::string, bool>{"balanced_accuracy", true},
                                        std::pair<std::string, bool>{"reconstruction_error", false}}) {
        for (std::size_t k : ks) {
            SummaryTable t{metric, higher, k, {}};
            std::vector<std::vector<double>> samples;
            for (Method m : methods) {
                std::size_t total = 0;
                for (const auto& r : store.records)
                    if (r.method == m && r.k == k) ++total;
                if (total == 0) continue;
                auto s = metric_samples(store.cell(m, k), metric);
                SummaryCell c;
                c.method = m;
                c.samples = s.size();
                c.failed = total - store.cell(m, k).size();
                if (!s.empty()) {
                    c.mean = mean(s);
                    c.stddev = stddev(s);
                }
                t.cells.push_back(c);
                samples.push_back(std::move(s));
            }
            std::optional<std::size_t> best;
            for (std::size_t i = 0; i < t.cells.size(); ++i) {
                if (samples[i].empty()) continue;
                if (!best) {
                    best = i;
                    continue;
                }
                const auto& b = t.cells[*best];
                const auto& c = t.cells[i];
                const bool better = higher ? c.mean > b.mean : c.mean < b.mean;
                if (better || (c.mean == b.mean && c.stddev < b.stddev)) best = i;
            }
            if (best) {
                t.cells[*best].best = t.cells[*best].bold = true;
                for (std::size_t i = 0; i < t.cells.size(); ++i) {
                    if (i == *best || samples[i].size() < 3 || samples[*best].size() < 3) continue;
                    const double p = mann_whitney_u(samples[i], samples[*best]).p;
                    t.cells[i].p_value = p;
                    t.cells[i].stars = significance_stars(p);
                    t.cells[i].bold = p >= 0.1;
                }
            }
            if (!t.cells.empty() && best) tables.push_back(std::move(t));
        }
    }
    return tables;
}

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    return std::string(buf, r.ptr);
}

}  // namespace detail

/// Plain-text rendering: methods as rows, k as columns; "[...]" marks bold cells.
inline std::string render_summary(const std::vector<SummaryTable>& tables) {
    std::ostringstream out;
    std::vector<std::string> metrics;
    for (const auto& t : tables)
        if (std::find(metrics.begin(), metrics.end(), t.metric) == metrics.end()) metrics.push_back(t.metric);
    for (const auto& metric : metrics) {
        std::vector<const SummaryTable*> cols;
        std::vector<Method> methods;
        for (const auto& t : tables) {
            if (t.metric != metric) continue;
            cols.push_back(&t);
            for (const auto& c : t.cells)
                if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);
        }
        std::sort(methods.begin(), methods.end());
        out << metric << (cols.front()->higher_is_better ? " (higher is better)" : " (lower is better)") << "\n";
        out << std::string(20, ' ');
        for (const auto* t : cols) {
            std::string h = "k=" + std::to_string(t->k);
            out << "  " << h << std::string(h.size() < 22 ? 22 - h.size() : 0, ' ');
        }
        out << "\n";
        for (Method m : methods) {
            std::string name(method_name(m));
            out << name << std::string(name.size() < 20 ? 20 - name.size() : 0, ' ');
            for (const auto* t : cols) {
                std::string cell = "-";
                for (const auto& c : t->cells) {
                    if (c.method != m) continue;
                    if (c.samples == 0) {
                        cell = "n/a";
                        break;
                    }
                    cell = detail::fixed(c.mean, 2) + " +- " + detail::fixed(c.stddev, 2);
                    if (c.bold) cell = "[" + cell + "]";
                    cell += c.stars;
                    if (c.failed > 0) cell += " (n=" + std::to_string(c.samples) + ")";
                }
                out << "  " << cell << std::string(cell.size() < 22 ? 22 - cell.size() : 0, ' ');
            }
            out << "\n";
        }
        out << "\n";
    }
    out << "[ ] best or not significantly different from the best (p >= 0.1); "
           "*, **, *** p < 0.1, 0.05, 0.01 (Mann-Whitney U vs best)\n";
    return out.str();
}

inline nlohmann::json summary_json(const std::vector<SummaryTable>& tables) {
    auto out = nlohmann::json::array();
    for (const auto& t : tables) {
        nlohmann::json jt{{"metric", t.metric}, {"k", t.k}, {"higher_is_better", t.higher_is_better}};
        jt["methods"] = nlohmann::json::array();
        for (const auto& c : t.cells)
            jt["methods"].push_back({{"method", method_name(c.method)},
                                     {"samples", c.samples},
                                     {"failed", c.failed},
                                     {"mean", c.mean},
                                     {"std", c.stddev},
                                     {"p_value", std::isfinite(c.p_value) ? nlohmann::json(c.p_value) : nlohmann::json()},
                                     {"stars", c.stars},
                                     {"best", c.best},
                                     {"bold", c.bold}});
        out.push_back(std::move(jt));
    }
    return out;
}

// ---- expression export ----

enum class SelectCriterion { BestReconstruction, BestAccuracy };

/// The run of a cell with the lowest reconstruction error or highest balanced
/// accuracy (ties to the lowest run index).
inline const RunRecord& select_run(const ResultStore& store, Method m, std::size_t k, SelectCriterion criterion) {
    const auto recs = store.cell(m, k);
    const RunRecord* best = nullptr;
    for (const auto* r : recs) {
        const double v = criterion == SelectCriterion::BestReconstruction ? r->reconstruction_error : r->balanced_accuracy;
        if (!std::isfinite(v)) continue;
        if (!best) {
            best = r;
            continue;
        }
        const double b = criterion == SelectCriterion::BestReconstruction ? best->reconstruction_error : best->balanced_accuracy;
        if (criterion == SelectCriterion::BestReconstruction ? v < b : v > b) best = r;
    }
    if (!best)
        throw LookupError("no successful run for " + std::string(method_name(m)) + " k=" + std::to_string(k));
    return *best;
}

/// Lines "X~<j> = <infix>" (j from 1) for the selected run's latent expressions.
/// `precision` < 0 keeps the stored full-precision constants.
inline std::string export_expressions(const ResultStore& store, Method m, std::size_t k, SelectCriterion criterion,
                                      int precision = 3, const std::vector<std::string>& feature_names = {}) {
    if (!is_gp(m)) throw LookupError(std::string(method_name(m)) + " has no expressions");
    const RunRecord& r = select_run(store, m, k, criterion);
    std::string out;
    for (std::size_t j = 0; j < r.expressions.size(); ++j) {
        const gp::Tree t = gp::parse_infix(r.expressions[j], r.input_dims);
        out += "X~" + std::to_string(j + 1) + " = " + gp::to_infix(t, feature_names, precision) + "\n";
    }
    return out;
}

}  // namespace gpdr
