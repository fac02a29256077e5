// gpdr: sweeps, summary tables and expression export for GP dimensionality reduction.
//
//   gpdr run --data data/segmentation.csv --k 2 --k 3 --desk-scale --out results
//   gpdr summarize --out results
//   gpdr export-expr --out results --method mt_rank_euclidean --k 2 --data data/segmentation.csv
//   gpdr validate-data --data data/segmentation.csv
//
// Any option may also come from a config file (--config, INI/TOML sections per
// subcommand); flags given on the command line take precedence.

#include <CLI11.hpp>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "gpdr/experiment.hpp"

namespace {

using namespace gpdr;

struct DataArgs {
    std::string path;
    std::string label = "class";
    bool no_header = false;

    std::optional<LabelColumn> label_column() const {
        if (label.empty()) return std::nullopt;
        return LabelColumn{label};
    }
};

void add_data_options(CLI::App* app, DataArgs& d, bool required) {
    auto* o = app->add_option("--data", d.path, "CSV dataset");
    if (required) o->required();
    app->add_option("--label", d.label, "label column name or 0-based index; empty for none")->capture_default_str();
    app->add_flag("--no-header", d.no_header, "first row is data, not column names");
}

/// Options for `run`; each overrides the desk-scale preset or default when given.
struct RunArgs {
    DataArgs data;
    ExperimentConfig cfg;
    std::vector<std::string> methods;
    std::string function_set = "polynomial";
    bool desk_scale = false;
    bool quiet = false;
};

template <class T>
CLI::Option* opt(CLI::App* app, const std::string& name, T& target, const std::string& help) {
    return app->add_option(name, target, help)->capture_default_str();
}

void setup_run(CLI::App* app, RunArgs& a) {
    auto& c = a.cfg;
    add_data_options(app, a.data, true);
    opt(app, "--k", c.ks, "latent dimensionalities")->expected(1, -1);
    opt(app, "--methods", a.methods, "methods (default: all)")->expected(1, -1);
    opt(app, "--runs", c.runs, "independent runs per cell");
    opt(app, "--seed", c.master_seed, "master seed");
    opt(app, "--out", c.output_dir, "result directory");
    opt(app, "--workers", c.workers, "concurrent runs");
    app->add_flag("--desk-scale", a.desk_scale, "P=200, G=30, runs=10, b=100 (explicit flags still win)");
    opt(app, "--population", c.gp.population, "population size");
    opt(app, "--generations", c.gp.generations, "generations");
    opt(app, "--batch-size", c.gp.batch_size, "rows per fitness batch");
    opt(app, "--depth-min", c.gp.depth_min, "initial tree depth lower bound");
    opt(app, "--depth-max", c.gp.depth_max, "initial tree depth upper bound");
    opt(app, "--threads", c.gp.threads, "threads for genome scoring");
    opt(app, "--crossover-rate", c.gp.variation.crossover_rate, "per tree index");
    opt(app, "--subtree-mutation-rate", c.gp.variation.subtree_mutation_rate, "per tree");
    opt(app, "--one-point-mutation-rate", c.gp.variation.one_point_mutation_rate, "per tree");
    opt(app, "--tournament-size", c.gp.variation.tournament_size, "tournament size");
    opt(app, "--elitism", c.gp.variation.elitism, "elite genomes copied per generation");
    opt(app, "--max-depth", c.gp.variation.max_depth, "depth limit after variation");
    opt(app, "--function-set", a.function_set, "polynomial or extended")
        ->check(CLI::IsMember({"polynomial", "extended"}));
    opt(app, "--variable-probability", c.gp.variation.primitives.variable_probability, "terminal is a variable");
    opt(app, "--n-neighbors", c.n_neighbors, "k-NN graph size for geodesic distances and isomap");
    opt(app, "--dr-fraction", c.dr_fraction, "fraction of rows used to fit the reduction");
    opt(app, "--variance-fraction", c.variance_fraction, "variance retained by the PCA target");
    opt(app, "--teacher-epochs", c.teacher.epochs, "autoencoder teacher epochs");
    opt(app, "--teacher-lr", c.teacher.learning_rate, "autoencoder teacher learning rate");
    opt(app, "--folds", c.eval.folds, "cross-validation folds");
    opt(app, "--forest-trees", c.eval.forest.trees, "random forest size");
    opt(app, "--decoder-epochs", c.eval.decoder.epochs, "evaluation decoder epochs");
    opt(app, "--eval-threads", c.eval.threads, "folds evaluated concurrently");
    app->add_flag("--quiet", a.quiet, "no per-run progress lines");
}

/// Builds the config: defaults, then the desk-scale preset, then every option that was set.
ExperimentConfig build_config(CLI::App* app, const RunArgs& a) {
    ExperimentConfig c;
    if (a.desk_scale) c.apply_desk_scale();
    const auto given = [&](const std::string& name) { return app->get_option(name)->count() > 0; };
    const auto& s = a.cfg;
    c.dataset_path = a.data.path;
    c.label_column = a.data.label;
    c.header = !a.data.no_header;
    if (given("--k")) c.ks = s.ks;
    if (given("--methods")) {
        c.methods.clear();
        for (const auto& m : a.methods) c.methods.push_back(parse_method(m));
    }
    if (given("--runs")) c.runs = s.runs;
    c.master_seed = s.master_seed;
    c.output_dir = s.output_dir;
    c.workers = s.workers;
    if (given("--population")) c.gp.population = s.gp.population;
    if (given("--generations")) c.gp.generations = s.gp.generations;
    if (given("--batch-size")) c.gp.batch_size = s.gp.batch_size;
    c.gp.depth_min = s.gp.depth_min;
    c.gp.depth_max = s.gp.depth_max;
    c.gp.threads = s.gp.threads;
    c.gp.variation = s.gp.variation;
    c.gp.variation.primitives.functions =
        a.function_set == "extended" ? gp::FunctionSet::Extended : gp::FunctionSet::Polynomial;
    c.n_neighbors = s.n_neighbors;
    c.dr_fraction = s.dr_fraction;
    c.variance_fraction = s.variance_fraction;
    c.teacher = s.teacher;
    c.eval = s.eval;
    c.validate();
    return c;
}

int cmd_run(CLI::App* app, const RunArgs& a) {
    const ExperimentConfig cfg = build_config(app, a);
    const auto store = run_experiment(cfg, [&](const std::string& line) {
        if (!a.quiet) std::cerr << line << '\n';
    });
    std::size_t failed = 0;
    for (const auto& r : store.records) failed += r.ok ? 0 : 1;
    std::cout << store.records.size() << " records in " << cfg.output_dir << " (" << failed << " failed)\n";
    if (failed < store.records.size()) std::cout << '\n' << render_summary(summarize(store));
    return 0;
}

int cmd_summarize(const std::string& dir, const std::string& json_path) {
    const auto store = ResultStore::load(dir);
    if (store.records.empty()) throw LookupError("no records under " + dir);
    const auto tables = summarize(store);
    std::cout << render_summary(tables);
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("cannot write " + json_path);
        out << summary_json(tables).dump(2) << '\n';
    }
    return 0;
}

int cmd_export(const std::string& dir, const std::string& method, std::size_t k, const std::string& criterion,
               int precision, const DataArgs& data) {
    const auto store = ResultStore::load(dir);
    std::vector<std::string> names;
    if (!data.path.empty()) names = load_csv(data.path, data.label_column(), !data.no_header).feature_names;
    // Names like "exred-mean" would read as subtractions.
    for (auto& n : names)
        for (char& c : n)
            if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    const auto crit = criterion == "accuracy" ? SelectCriterion::BestAccuracy : SelectCriterion::BestReconstruction;
    const Method m = parse_method(method);
    const std::string text = export_expressions(store, m, k, crit, precision, names);
    const auto& run = select_run(store, m, k, crit);
    std::cout << "# " << method << " k=" << k << " run=" << run.run << " reconstruction_error="
              << run.reconstruction_error << " balanced_accuracy=" << run.balanced_accuracy << '\n';
    std::cout << text;
    return 0;
}

int cmd_validate(const DataArgs& d) {
    const Dataset data = load_csv(d.path, d.label_column(), !d.no_header);
    std::cout << "rows " << data.n() << "\nfeatures " << data.p() << '\n';
    const Standardizer s = Standardizer::fit(data.features);
    for (std::size_t j = 0; j < data.p(); ++j)
        if (s.stddev[j] == 0.0)
            std::cout << "constant feature " << (j < data.feature_names.size() ? data.feature_names[j] : std::to_string(j))
                      << '\n';
    if (data.has_labels()) {
        std::vector<std::size_t> counts(data.class_count, 0);
        for (int c : *data.labels) ++counts[static_cast<std::size_t>(c)];
        std::cout << "classes " << data.class_count << '\n';
        for (std::size_t c = 0; c < data.class_count; ++c)
            std::cout << "  " << (c < data.class_names.size() ? data.class_names[c] : std::to_string(c)) << ' '
                      << counts[c] << '\n';
    } else {
        std::cout << "no labels\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GP dimensionality reduction experiments"};
    app.set_config("--config", "", "config file (INI or TOML)");
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run (or resume) a sweep");
    setup_run(run_cmd, run);

    std::string dir = "results", json_path;
    auto* sum_cmd = app.add_subcommand("summarize", "mean/std tables with significance marks");
    sum_cmd->add_option("--out", dir, "result directory")->capture_default_str();
    sum_cmd->add_option("--json", json_path, "also write the tables as JSON");

    std::string method, criterion = "reconstruction";
    std::size_t k = 2;
    int precision = 3;
    DataArgs names;
    auto* exp_cmd = app.add_subcommand("export-expr", "expressions of the best run of a cell");
    exp_cmd->add_option("--out", dir, "result directory")->capture_default_str();
    exp_cmd->add_option("--method", method, "GP method")->required();
    exp_cmd->add_option("--k", k, "latent dimensionality")->capture_default_str();
    exp_cmd->add_option("--criterion", criterion, "reconstruction or accuracy")
        ->check(CLI::IsMember({"reconstruction", "accuracy"}))
        ->capture_default_str();
    exp_cmd->add_option("--precision", precision, "decimals for constants; -1 for full precision")
        ->capture_default_str();
    add_data_options(exp_cmd, names, false);

    DataArgs validate;
    auto* val_cmd = app.add_subcommand("validate-data", "load a dataset and report its shape");
    add_data_options(val_cmd, validate, true);

    CLI11_PARSE(app, argc, argv);
    try {
        if (run_cmd->parsed()) return cmd_run(run_cmd, run);
        if (sum_cmd->parsed()) return cmd_summarize(dir, json_path);
        if (exp_cmd->parsed()) return cmd_export(dir, method, k, criterion, precision, names);
        if (val_cmd->parsed()) return cmd_validate(validate);
    } catch (const std::exception& e) {
        std::cerr << "gpdr: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
