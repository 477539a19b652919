// Command-line front end: generate / train / erase / recover / analyze /
// sweep / tune. A JSON config file supplies defaults per subcommand; flags
// given on the command line override it, and ERASELAB_SEED overrides any
// configured seed.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "eraselab/analysis.hpp"
#include "eraselab/dnf.hpp"
#include "eraselab/erasure.hpp"
#include "eraselab/errors.hpp"
#include "eraselab/harness.hpp"
#include "eraselab/io.hpp"
#include "eraselab/net.hpp"
#include "eraselab/recovery.hpp"

#include "CLI11.hpp"
#include "json.hpp"

using namespace eraselab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartialFailure = 2;
constexpr int kExitInfeasible = 3;

// "1,3,5-7" -> {1,3,5,6,7}
std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string item = s.substr(pos, comma - pos);
        const std::size_t dash = item.find('-');
        if (dash != std::string::npos && dash > 0) {
            const int lo = std::stoi(item.substr(0, dash));
            const int hi = std::stoi(item.substr(dash + 1));
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else if (!item.empty()) {
            out.push_back(std::stoi(item));
        }
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> parse_str_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        if (comma > pos) out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

// Applies config-file values to bound variables before CLI11 parses the
// command line, so explicit flags win.
class ConfigFile {
public:
    void load(const std::string& path) {
        if (!path.empty()) data_ = json::parse(read_text_file(path));
    }

    template <typename T>
    void apply(const char* section, const char* key, T& var) const {
        if (data_.contains(section) && data_[section].contains(key))
            var = data_[section][key].get<T>();
    }

    const json* section(const char* name) const {
        if (data_.contains(name)) return &data_[name];
        return nullptr;
    }

private:
    json data_;
};

GenConfig gen_config_from_formula(const Formula& f, int min_extra, int window) {
    GenConfig cfg;
    cfg.num_clauses = f.num_clauses();
    cfg.clause_size = f.clauses.front().size();
    cfg.min_extra_active = min_extra;
    cfg.active_window = window;
    bool shared = false;
    for (const auto& entries : f.shared_map) shared = shared || !entries.empty();
    cfg.shared = shared;
    return cfg;
}

void apply_pipeline_section(const json* sec, PipelineConfig& cfg) {
    if (!sec) return;
    const json& j = *sec;
    auto get = [&](const char* key, auto& var) {
        if (j.contains(key)) var = j[key].get<std::decay_t<decltype(var)>>();
    };
    get("hidden_per_clause", cfg.hidden_per_clause);
    get("base_dataset_size", cfg.base_dataset_size);
    get("base_learning_rate", cfg.base_learning_rate);
    get("base_steps", cfg.base_steps);
    get("base_batch_size", cfg.base_batch_size);
    get("base_momentum", cfg.base_momentum);
    get("base_stop_tpr", cfg.base_stop_tpr);
    get("base_stop_tnr", cfg.base_stop_tnr);
    get("base_check_every", cfg.base_check_every);
    get("verify_samples", cfg.verify_samples);
    if (j.contains("ga")) {
        const json& g = j["ga"];
        if (g.contains("learning_rate")) cfg.ga.learning_rate = g["learning_rate"].get<double>();
        if (g.contains("steps")) cfg.ga.steps = g["steps"].get<int>();
        if (g.contains("target_dataset_size"))
            cfg.ga.target_dataset_size = g["target_dataset_size"].get<int>();
        if (g.contains("batch_size")) cfg.ga.batch_size = g["batch_size"].get<int>();
    }
    if (j.contains("tv")) {
        const json& g = j["tv"];
        if (g.contains("learning_rate")) cfg.tv.learning_rate = g["learning_rate"].get<double>();
        if (g.contains("steps")) cfg.tv.steps = g["steps"].get<int>();
        if (g.contains("scale")) cfg.tv.scale = g["scale"].get<double>();
        if (g.contains("target_dataset_size"))
            cfg.tv.target_dataset_size = g["target_dataset_size"].get<int>();
        if (g.contains("batch_size")) cfg.tv.batch_size = g["batch_size"].get<int>();
    }
    if (j.contains("ppd")) {
        const json& g = j["ppd"];
        if (g.contains("learning_rate")) cfg.ppd.learning_rate = g["learning_rate"].get<double>();
        if (g.contains("steps")) cfg.ppd.steps = g["steps"].get<int>();
        if (g.contains("temperature")) cfg.ppd.temperature = g["temperature"].get<double>();
        if (g.contains("distill_dataset_size"))
            cfg.ppd.distill_dataset_size = g["distill_dataset_size"].get<int>();
        if (g.contains("batch_size")) cfg.ppd.batch_size = g["batch_size"].get<int>();
    }
    if (j.contains("recovery")) {
        const json& g = j["recovery"];
        if (g.contains("learning_rate"))
            cfg.recovery.learning_rate = g["learning_rate"].get<double>();
        if (g.contains("epochs")) cfg.recovery.epochs = g["epochs"].get<int>();
        if (g.contains("dataset_size")) cfg.recovery.dataset_size = g["dataset_size"].get<int>();
        if (g.contains("eval_samples_per_class"))
            cfg.recovery.eval_samples_per_class = g["eval_samples_per_class"].get<int>();
        if (g.contains("tpr_threshold"))
            cfg.recovery.tpr_threshold = g["tpr_threshold"].get<double>();
        if (g.contains("batch_size")) cfg.recovery.batch_size = g["batch_size"].get<int>();
    }
}

void apply_grid_section(const json* sec, GridSpec& grid) {
    if (!sec) return;
    const json& j = *sec;
    if (j.contains("learning_rates"))
        grid.learning_rates = j["learning_rates"].get<std::vector<double>>();
    if (j.contains("steps")) grid.steps = j["steps"].get<std::vector<int>>();
    if (j.contains("tv_scales")) grid.tv_scales = j["tv_scales"].get<std::vector<double>>();
    if (j.contains("ppd_temperatures"))
        grid.ppd_temperatures = j["ppd_temperatures"].get<std::vector<double>>();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"eraselab: concept erasure and recovery experiments on two-layer DNF networks"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; CLI flags override its values");

    // Pre-scan argv for --config so config values become defaults.
    ConfigFile config;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    try {
        config.load(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot load config file: " << e.what() << "\n";
        return kExitUsage;
    }

    // ---- generate ----------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("generate", "Generate a DNF formula (and optionally a dataset)");
    struct {
        int num_clauses = 4, clause_size = 4;
        std::string targets = "0";
        bool shared = false;
        int overlap = 2, num_sharing = 2, min_extra = 1, window = 3;
        std::uint64_t seed = 0;
        std::string out = "formula.json";
        std::string dataset_out;
        int dataset_size = 10000;
        double pos_fraction = 0.5;
        std::string source_clauses = "all";
    } g;
    config.apply("generate", "num_clauses", g.num_clauses);
    config.apply("generate", "clause_size", g.clause_size);
    config.apply("generate", "targets", g.targets);
    config.apply("generate", "shared", g.shared);
    config.apply("generate", "overlap_per_clause", g.overlap);
    config.apply("generate", "num_sharing_clauses", g.num_sharing);
    config.apply("generate", "min_extra_active", g.min_extra);
    config.apply("generate", "active_window", g.window);
    config.apply("generate", "seed", g.seed);
    gen_cmd->add_option("--num-clauses", g.num_clauses, "Number of clauses");
    gen_cmd->add_option("--clause-size", g.clause_size, "Variables per clause");
    gen_cmd->add_option("--targets", g.targets, "Clauses to erase, e.g. 0 or 0,1");
    gen_cmd->add_flag("--shared", g.shared, "Share variables between targets and some controls");
    gen_cmd->add_option("--overlap", g.overlap, "Shared variables per sharing control");
    gen_cmd->add_option("--num-sharing", g.num_sharing, "Number of sharing controls");
    gen_cmd->add_option("--min-extra", g.min_extra, "Minimum extra active variables");
    gen_cmd->add_option("--window", g.window, "Width of the extra-actives window");
    gen_cmd->add_option("--seed", g.seed, "Random seed");
    gen_cmd->add_option("--out", g.out, "Formula output path");
    gen_cmd->add_option("--dataset-out", g.dataset_out, "Also write a dataset CSV here");
    gen_cmd->add_option("--dataset-size", g.dataset_size, "Dataset size");
    gen_cmd->add_option("--pos-fraction", g.pos_fraction, "Positive fraction");
    gen_cmd->add_option("--source-clauses", g.source_clauses, "Positive source clauses or 'all'");

    // ---- train -------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train a base model on a formula");
    struct {
        std::string formula;
        std::string out = "base.json";
        std::uint64_t seed = 0;
        int hidden = 0;  // 0 = 2 * num_clauses
        int dataset_size = 10000;
        double lr = 0.01;
        int steps = 2000, batch = 64;
        double momentum = 0.9, stop_tpr = 0.99, stop_tnr = 0.99;
        int check_every = 50;
    } t;
    config.apply("train", "seed", t.seed);
    config.apply("train", "hidden", t.hidden);
    config.apply("train", "dataset_size", t.dataset_size);
    config.apply("train", "learning_rate", t.lr);
    config.apply("train", "steps", t.steps);
    config.apply("train", "batch_size", t.batch);
    config.apply("train", "momentum", t.momentum);
    config.apply("train", "stop_tpr", t.stop_tpr);
    config.apply("train", "stop_tnr", t.stop_tnr);
    train_cmd->add_option("--formula", t.formula, "Formula JSON path")->required();
    train_cmd->add_option("--out", t.out, "Snapshot output path");
    train_cmd->add_option("--seed", t.seed, "Random seed");
    train_cmd->add_option("--hidden", t.hidden, "Hidden width (default 2 x num_clauses)");
    train_cmd->add_option("--dataset-size", t.dataset_size, "Training set size");
    train_cmd->add_option("--lr", t.lr, "Learning rate");
    train_cmd->add_option("--steps", t.steps, "Step budget");
    train_cmd->add_option("--batch", t.batch, "Batch size");
    train_cmd->add_option("--momentum", t.momentum, "Momentum");
    train_cmd->add_option("--stop-tpr", t.stop_tpr, "Early-stop train TPR");
    train_cmd->add_option("--stop-tnr", t.stop_tnr, "Early-stop train TNR");
    train_cmd->add_option("--check-every", t.check_every, "Early-stop check cadence");

    // ---- erase -------------------------------------------------------------
    auto* erase_cmd = app.add_subcommand("erase", "Apply an unlearning method to a trained model");
    struct {
        std::string method;
        std::string formula, base;
        std::string targets = "0";
        std::string out = "erased.json";
        std::string manifest;
        std::string task_vector_out;
        double lr = -1.0;  // -1 = per-method default
        int steps = -1;
        double scale = 1.0, temperature = 1.5;
        int dataset_size = -1, batch = 64;
        std::uint64_t seed = 0;
        int verify_samples = 2000;
    } e;
    config.apply("erase", "seed", e.seed);
    config.apply("erase", "learning_rate", e.lr);
    config.apply("erase", "steps", e.steps);
    config.apply("erase", "scale", e.scale);
    config.apply("erase", "temperature", e.temperature);
    config.apply("erase", "dataset_size", e.dataset_size);
    config.apply("erase", "batch_size", e.batch);
    config.apply("erase", "verify_samples", e.verify_samples);
    erase_cmd->add_option("--method", e.method, "ga, tv, or ppd")->required();
    erase_cmd->add_option("--formula", e.formula, "Formula JSON path")->required();
    erase_cmd->add_option("--base", e.base, "Base snapshot path")->required();
    erase_cmd->add_option("--targets", e.targets, "Target clauses");
    erase_cmd->add_option("--out", e.out, "Erased snapshot output path");
    erase_cmd->add_option("--manifest", e.manifest, "Erasure manifest output path");
    erase_cmd->add_option("--task-vector-out", e.task_vector_out, "Task vector output (tv only)");
    erase_cmd->add_option("--lr", e.lr, "Learning rate (default per method)");
    erase_cmd->add_option("--steps", e.steps, "Steps (default per method)");
    erase_cmd->add_option("--scale", e.scale, "Task-vector scale");
    erase_cmd->add_option("--temperature", e.temperature, "Distillation temperature");
    erase_cmd->add_option("--dataset-size", e.dataset_size, "Erasure dataset size");
    erase_cmd->add_option("--batch", e.batch, "Batch size");
    erase_cmd->add_option("--seed", e.seed, "Random seed");
    erase_cmd->add_option("--verify-samples", e.verify_samples, "Eval samples per class");

    // ---- recover -----------------------------------------------------------
    auto* recover_cmd = app.add_subcommand("recover", "Fine-tune an erased model and trace recovery");
    struct {
        std::string formula, erased;
        std::string targets = "0";
        std::string regime;
        std::uint64_t seed = 0;
        int epochs = 60;
        double lr = 0.0002;
        int dataset_size = 10000, eval_samples = 2000;
        double threshold = 0.8;
        int batch = 64;
        std::string out_trace = "trace.csv";
        std::string out_snapshot = "recovered.json";
        std::string clauses;  // explicit override of the regime clause set
    } r;
    config.apply("recover", "seed", r.seed);
    config.apply("recover", "epochs", r.epochs);
    config.apply("recover", "learning_rate", r.lr);
    config.apply("recover", "dataset_size", r.dataset_size);
    config.apply("recover", "eval_samples_per_class", r.eval_samples);
    config.apply("recover", "tpr_threshold", r.threshold);
    config.apply("recover", "batch_size", r.batch);
    recover_cmd->add_option("--formula", r.formula, "Formula JSON path")->required();
    recover_cmd->add_option("--erased", r.erased, "Erased snapshot path")->required();
    recover_cmd->add_option("--targets", r.targets, "Target clauses");
    recover_cmd
        ->add_option("--regime", r.regime, "target, nontarget, all, related, or unrelated")
        ->required();
    recover_cmd->add_option("--seed", r.seed, "Random seed");
    recover_cmd->add_option("--epochs", r.epochs, "Fine-tuning epochs");
    recover_cmd->add_option("--lr", r.lr, "Learning rate");
    recover_cmd->add_option("--dataset-size", r.dataset_size, "Fine-tuning dataset size");
    recover_cmd->add_option("--eval-samples", r.eval_samples, "Eval samples per class");
    recover_cmd->add_option("--threshold", r.threshold, "Recovery TPR threshold");
    recover_cmd->add_option("--batch", r.batch, "Batch size");
    recover_cmd->add_option("--out-trace", r.out_trace, "Trace CSV output path");
    recover_cmd->add_option("--out-snapshot", r.out_snapshot, "Recovered snapshot output path");
    recover_cmd->add_option("--clauses", r.clauses, "Override the regime clause set");

    // ---- analyze -----------------------------------------------------------
    auto* analyze_cmd = app.add_subcommand("analyze", "Distance/decomposition analysis or sweep aggregation");
    struct {
        std::string sweep_dir;
        std::string formula, base, erased, recovered;
        std::string targets = "0";
        std::string out_dir;
    } a;
    analyze_cmd->add_option("--sweep-dir", a.sweep_dir, "Recompute aggregate tables for a sweep dir");
    analyze_cmd->add_option("--formula", a.formula, "Formula JSON path");
    analyze_cmd->add_option("--base", a.base, "Original snapshot");
    analyze_cmd->add_option("--erased", a.erased, "Erased snapshot");
    analyze_cmd->add_option("--recovered", a.recovered, "Recovered snapshot (optional)");
    analyze_cmd->add_option("--targets", a.targets, "Target clauses");
    analyze_cmd->add_option("--out-dir", a.out_dir, "Where to write distances/decomposition CSVs");

    // ---- sweep -------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the scenario sweep and emit paper tables");
    struct {
        std::string scenarios = "1";
        std::string kinds = "plain";
        std::string methods = "ga,tv,ppd";
        std::string regimes = "target,nontarget,all";
        int reps = 20;
        std::uint64_t seed = 0;
        int parallelism = 1;
        std::string out;
    } s;
    config.apply("sweep", "scenarios", s.scenarios);
    config.apply("sweep", "kinds", s.kinds);
    config.apply("sweep", "methods", s.methods);
    config.apply("sweep", "regimes", s.regimes);
    config.apply("sweep", "repetitions", s.reps);
    config.apply("sweep", "seed", s.seed);
    config.apply("sweep", "parallelism", s.parallelism);
    sweep_cmd->add_option("--scenarios", s.scenarios, "Scenario ids, e.g. 1,3 or 1-13");
    sweep_cmd->add_option("--kinds", s.kinds, "plain, shared, or plain,shared");
    sweep_cmd->add_option("--methods", s.methods, "Comma list of ga,tv,ppd");
    sweep_cmd->add_option("--regimes", s.regimes, "Comma list of regimes");
    sweep_cmd->add_option("--reps", s.reps, "Repetitions per cell");
    sweep_cmd->add_option("--seed", s.seed, "Base seed");
    sweep_cmd->add_option("--parallelism", s.parallelism, "Concurrent cells");
    sweep_cmd->add_option("--out", s.out, "Output directory")->required();

    // ---- tune --------------------------------------------------------------
    auto* tune_cmd = app.add_subcommand("tune", "Grid-search erasure hyperparameters");
    struct {
        std::string method;
        std::uint64_t seed = 0;
        std::string out = ".";
        double target_tpr_max = kEraseTargetTprMax;
    } u;
    config.apply("tune", "seed", u.seed);
    config.apply("tune", "target_tpr_max", u.target_tpr_max);
    tune_cmd->add_option("--method", u.method, "ga, tv, or ppd")->required();
    tune_cmd->add_option("--seed", u.seed, "Random seed");
    tune_cmd->add_option("--out", u.out, "Directory for the score table");
    tune_cmd->add_option("--target-tpr-max", u.target_tpr_max, "Feasibility bound on target TPR");

    CLI11_PARSE(app, argc, argv);

    // Highest-priority seed source.
    if (const char* env_seed = std::getenv("ERASELAB_SEED")) {
        const std::uint64_t v = std::strtoull(env_seed, nullptr, 10);
        g.seed = t.seed = e.seed = r.seed = s.seed = u.seed = v;
    }

    try {
        if (gen_cmd->parsed()) {
            GenConfig cfg;
            cfg.num_clauses = g.num_clauses;
            cfg.clause_size = g.clause_size;
            cfg.clauses_to_erase = parse_int_list(g.targets);
            cfg.shared = g.shared;
            cfg.overlap_per_clause = g.overlap;
            cfg.num_sharing_clauses = g.num_sharing;
            cfg.min_extra_active = g.min_extra;
            cfg.active_window = g.window;
            Rng rng(derive_seed(g.seed, "formula"));
            const Formula f = generate_formula(cfg, rng);
            save_formula(g.out, f);
            std::cout << "wrote " << g.out << " (" << f.num_clauses() << " clauses, "
                      << f.num_vars << " vars)\n";
            if (!g.dataset_out.empty()) {
                std::vector<int> sources;
                if (g.source_clauses == "all")
                    for (int c = 0; c < f.num_clauses(); ++c) sources.push_back(c);
                else
                    sources = parse_int_list(g.source_clauses);
                Rng data_rng(derive_seed(g.seed, "dataset"));
                const Dataset ds =
                    build_dataset(f, sources, g.dataset_size, g.pos_fraction, cfg, data_rng);
                save_dataset_csv(g.dataset_out, ds);
                std::cout << "wrote " << g.dataset_out << " (" << ds.size() << " samples)\n";
            }
        } else if (train_cmd->parsed()) {
            const Formula f = load_formula(t.formula);
            const GenConfig gen = gen_config_from_formula(f, 1, 3);
            std::vector<int> all;
            for (int c = 0; c < f.num_clauses(); ++c) all.push_back(c);
            Rng data_rng(derive_seed(t.seed, "base-data"));
            const Dataset ds = build_dataset(f, all, t.dataset_size, 0.5, gen, data_rng);
            const int hidden = t.hidden > 0 ? t.hidden : 2 * f.num_clauses();
            TrainConfig tc;
            tc.learning_rate = t.lr;
            tc.steps = t.steps;
            tc.batch_size = t.batch;
            tc.momentum = t.momentum;
            tc.seed = derive_seed(t.seed, "base-train");
            const BaseTrainResult res =
                train_base(init_weights(hidden, f.num_vars, derive_seed(t.seed, "init")), ds, tc,
                           t.stop_tpr, t.stop_tnr, t.check_every);
            save_snapshot(t.out, res.weights, {t.seed, res.steps_run});
            std::cout << "trained " << res.steps_run << " steps (train TPR "
                      << format_double(res.train_tpr) << ", TNR " << format_double(res.train_tnr)
                      << "); wrote " << t.out << "\n";
        } else if (erase_cmd->parsed()) {
            const Method method = method_from_name(e.method);
            const Formula f = load_formula(e.formula);
            const GenConfig gen = gen_config_from_formula(f, 1, 3);
            const auto [base, base_meta] = load_snapshot(e.base);
            const std::vector<int> targets = parse_int_list(e.targets);
            Rng rng(derive_seed(e.seed, "erase"));

            NetworkWeights erased;
            json config_json;
            switch (method) {
                case Method::GradientAscent: {
                    GAConfig c;
                    if (e.lr > 0) c.learning_rate = e.lr;
                    if (e.steps >= 0) c.steps = e.steps;
                    if (e.dataset_size > 0) c.target_dataset_size = e.dataset_size;
                    c.batch_size = e.batch;
                    erased = erase_gradient_ascent(base, f, targets, c, gen, rng);
                    config_json = {{"learning_rate", c.learning_rate},
                                   {"steps", c.steps},
                                   {"target_dataset_size", c.target_dataset_size}};
                    break;
                }
                case Method::TaskVector: {
                    TVConfig c;
                    if (e.lr > 0) c.learning_rate = e.lr;
                    if (e.steps >= 0) c.steps = e.steps;
                    if (e.dataset_size > 0) c.target_dataset_size = e.dataset_size;
                    c.scale = e.scale;
                    c.batch_size = e.batch;
                    TaskVectorResult tv = erase_task_vector(base, f, targets, c, gen, rng);
                    erased = std::move(tv.erased);
                    if (!e.task_vector_out.empty())
                        save_snapshot(e.task_vector_out, tv.task_vector, {e.seed, 0});
                    config_json = {{"learning_rate", c.learning_rate},
                                   {"steps", c.steps},
                                   {"scale", c.scale},
                                   {"target_dataset_size", c.target_dataset_size}};
                    break;
                }
                case Method::Ppd: {
                    PPDConfig c;
                    if (e.lr > 0) c.learning_rate = e.lr;
                    if (e.steps >= 0) c.steps = e.steps;
                    if (e.dataset_size > 0) c.distill_dataset_size = e.dataset_size;
                    c.temperature = e.temperature;
                    c.batch_size = e.batch;
                    c.student_seed = derive_seed(e.seed, "student");
                    erased = erase_ppd(base, f, targets, c, gen, rng);
                    config_json = {{"learning_rate", c.learning_rate},
                                   {"steps", c.steps},
                                   {"temperature", c.temperature},
                                   {"distill_dataset_size", c.distill_dataset_size}};
                    break;
                }
            }

            Rng verify_rng(derive_seed(e.seed, "verify"));
            const ErasureOutcome o =
                verify_erasure(erased, method, f, targets, e.verify_samples, verify_rng);
            save_snapshot(e.out, erased, {e.seed, 0});
            std::cout << "erased with " << method_name(method) << ": target TPR "
                      << format_double(o.target_tpr) << ", control TPR "
                      << format_double(o.control_tpr)
                      << (erasure_succeeded(o) ? "" : " (thresholds unmet)") << "\n";

            if (!e.manifest.empty()) {
                json m{{"method", method_name(method)},
                       {"config", config_json},
                       {"base_snapshot_path", e.base},
                       {"erased_snapshot_path", e.out},
                       {"target_tpr", o.target_tpr},
                       {"control_tpr", o.control_tpr},
                       {"seed", e.seed}};
                if (method == Method::TaskVector && !e.task_vector_out.empty())
                    m["task_vector_path"] = e.task_vector_out;
                write_text_file(e.manifest, m.dump(2) + "\n");
            }
        } else if (recover_cmd->parsed()) {
            const Formula f = load_formula(r.formula);
            const GenConfig gen = gen_config_from_formula(f, 1, 3);
            const auto [erased, meta] = load_snapshot(r.erased);
            const std::vector<int> targets = parse_int_list(r.targets);

            RecoveryConfig rc;
            rc.regime = regime_from_name(r.regime);
            rc.learning_rate = r.lr;
            rc.epochs = r.epochs;
            rc.dataset_size = r.dataset_size;
            rc.eval_samples_per_class = r.eval_samples;
            rc.tpr_threshold = r.threshold;
            rc.batch_size = r.batch;
            rc.snapshot_epochs = {0, r.epochs};
            if (!r.clauses.empty()) rc.clause_override = parse_int_list(r.clauses);

            const RecoveryResult res =
                run_recovery(erased, f, targets, rc, gen, derive_seed(r.seed, "recovery"));
            save_trace_csv(r.out_trace, res.trace);
            save_snapshot(r.out_snapshot, res.weights, {r.seed, 0});
            const RecoveryTime time = recovery_time(res.trace, rc.tpr_threshold);
            if (time.reached)
                std::cout << "recovered at epoch " << *time.epoch << "\n";
            else
                std::cout << "threshold not reached within " << rc.epochs << " epochs\n";
        } else if (analyze_cmd->parsed()) {
            if (!a.sweep_dir.empty()) {
                aggregate_sweep(a.sweep_dir);
                std::cout << "aggregated tables under " << a.sweep_dir << "\n";
            } else {
                if (a.formula.empty() || a.base.empty() || a.erased.empty()) {
                    std::cerr << "error: analyze needs either --sweep-dir or --formula/--base/--erased\n";
                    return kExitUsage;
                }
                const Formula f = load_formula(a.formula);
                const auto [base, m1] = load_snapshot(a.base);
                const auto [erased, m2] = load_snapshot(a.erased);
                const std::vector<int> targets = parse_int_list(a.targets);
                const auto signs = neuron_signs(base);
                const ClauseStructureDistance d = clause_structure_distance(base, erased, f, signs);
                std::cout << "dist_pos " << format_double(d.dist_pos) << ", dist_neg "
                          << format_double(d.dist_neg) << "\n";
                if (!a.recovered.empty()) {
                    const auto [recovered, m3] = load_snapshot(a.recovered);
                    const auto decomp =
                        decompose_recovery(base, erased, recovered, f, targets, signs);
                    std::vector<double> pf;
                    for (const auto& row : decomp)
                        if (!row.excluded) pf.push_back(row.parallel_fraction);
                    const AggregateStats st = aggregate_values(pf);
                    std::cout << "parallel fraction mean " << format_double(st.mean) << " (n="
                              << st.n << ")\n";
                    if (!a.out_dir.empty()) {
                        // reuse the pipeline CSV shapes
                        std::ostringstream out;
                        out << "neuron,clause,clause_type,neuron_sign,magnitude,"
                               "parallel_fraction,excluded\n";
                        for (const auto& row : decomp) {
                            out << row.neuron << ',' << row.clause << ','
                                << (row.clause_type == ClauseType::Target ? "target" : "control")
                                << ','
                                << (row.neuron_sign == NeuronSign::Positive ? "positive"
                                                                            : "negative")
                                << ',' << format_double(row.magnitude) << ','
                                << (row.excluded ? "" : format_double(row.parallel_fraction))
                                << ',' << (row.excluded ? 1 : 0) << '\n';
                        }
                        write_text_file(std::filesystem::path(a.out_dir) / "decomposition.csv",
                                        out.str());
                    }
                }
            }
        } else if (sweep_cmd->parsed()) {
            SweepOptions opts;
            opts.scenario_ids = parse_int_list(s.scenarios);
            opts.kinds.clear();
            for (const auto& k : parse_str_list(s.kinds)) opts.kinds.push_back(dnf_kind_from_name(k));
            opts.methods.clear();
            for (const auto& m : parse_str_list(s.methods)) opts.methods.push_back(method_from_name(m));
            opts.regimes.clear();
            for (const auto& rg : parse_str_list(s.regimes)) opts.regimes.push_back(regime_from_name(rg));
            opts.repetitions = s.reps;
            opts.base_seed = s.seed;
            opts.parallelism = s.parallelism;
            opts.out_dir = s.out;
            apply_pipeline_section(config.section("pipeline"), opts.pipeline);

            const SweepReport rep = run_sweep(opts);
            std::cout << "sweep: " << rep.cells_total << " cells (" << rep.cells_run << " run, "
                      << rep.cells_resumed << " resumed), " << rep.cells_ok << " ok, "
                      << rep.cells_erasure_failed << " erasure-failed, " << rep.cells_error
                      << " errors\n";
            for (const std::string& fail : rep.failures) std::cout << "  failed " << fail << "\n";
            if (rep.cells_erasure_failed > 0 || rep.cells_error > 0) return kExitPartialFailure;
        } else if (tune_cmd->parsed()) {
            GridSpec grid;
            apply_grid_section(config.section("grid"), grid);
            const Method method = method_from_name(u.method);
            const TuneResult res = tune_erasure(method, grid, u.seed, u.target_tpr_max, u.out);
            if (!res.feasible) {
                std::cout << "no feasible grid point for " << method_name(method) << "\n";
                return kExitInfeasible;
            }
            std::cout << "best " << method_name(method) << ": lr "
                      << format_double(res.best.learning_rate) << ", steps " << res.best.steps;
            if (method == Method::TaskVector)
                std::cout << ", scale " << format_double(res.best.scale);
            if (method == Method::Ppd)
                std::cout << ", temperature " << format_double(res.best.temperature);
            std::cout << " (target TPR " << format_double(res.best.target_tpr) << ", control TPR "
                      << format_double(res.best.control_tpr) << ")\n";
        }
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
