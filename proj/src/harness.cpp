#include "eraselab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "eraselab/errors.hpp"
#include "eraselab/io.hpp"

#include "json.hpp"

namespace eraselab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string dnf_kind_name(DnfKind k) {
    return k == DnfKind::Plain ? "plain" : "shared";
}

DnfKind dnf_kind_from_name(const std::string& s) {
    if (s == "plain") return DnfKind::Plain;
    if (s == "shared") return DnfKind::Shared;
    throw ConfigError("unknown dnf kind '" + s + "' (expected plain or shared)");
}

GenConfig ScenarioSpec::gen_config() const {
    GenConfig cfg;
    cfg.num_clauses = num_clauses;
    cfg.clause_size = clause_size;
    cfg.clauses_to_erase = clauses_to_erase;
    cfg.shared = kind == DnfKind::Shared;
    return cfg;
}

namespace {

struct ScenarioRow {
    int num_clauses;
    int clause_size;
    std::vector<int> targets;
};

const std::vector<ScenarioRow>& scenario_rows() {
    static const std::vector<ScenarioRow> rows = {
        {4, 4, {0}},    // 1
        {4, 5, {0}},    // 2
        {5, 5, {0}},    // 3
        {5, 6, {0}},    // 4
        {6, 6, {0}},    // 5
        {6, 6, {0, 1}}, // 6
        {7, 7, {0}},    // 7
        {7, 7, {0, 1}}, // 8
        {8, 8, {0}},    // 9
        {8, 8, {0, 1}}, // 10
        {5, 4, {0}},    // 11
        {5, 4, {0, 1}}, // 12
        {6, 4, {0}},    // 13
    };
    return rows;
}

} // namespace

int scenario_count() {
    return static_cast<int>(scenario_rows().size());
}

ScenarioSpec scenario_from_table(int scenario_id, DnfKind kind) {
    if (scenario_id < 1 || scenario_id > scenario_count())
        throw ConfigError("scenario id " + std::to_string(scenario_id) + " out of range 1.." +
                          std::to_string(scenario_count()));
    const ScenarioRow& row = scenario_rows()[static_cast<std::size_t>(scenario_id - 1)];
    ScenarioSpec spec;
    spec.scenario_id = scenario_id;
    spec.num_clauses = row.num_clauses;
    spec.clause_size = row.clause_size;
    spec.clauses_to_erase = row.targets;
    spec.kind = kind;
    return spec;
}

bool CellKey::operator<(const CellKey& o) const {
    return std::tie(scenario_id, kind, method, regime, repetition) <
           std::tie(o.scenario_id, o.kind, o.method, o.regime, o.repetition);
}

std::string cell_id(const CellKey& key) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "s%02d_%s_%s_%s_r%03d", key.scenario_id,
                  dnf_kind_name(key.kind).c_str(), method_name(key.method).c_str(),
                  regime_name(key.regime).c_str(), key.repetition);
    return buf;
}

std::uint64_t cell_seed(std::uint64_t base_seed, const CellKey& key) {
    return derive_seed(base_seed, cell_id(key));
}

// ---------------------------------------------------------------------------
// Config serialization (manifests and config hashing)
// ---------------------------------------------------------------------------

namespace {

json to_json(const ScenarioSpec& s) {
    return json{{"scenario_id", s.scenario_id},
                {"num_clauses", s.num_clauses},
                {"clause_size", s.clause_size},
                {"clauses_to_erase", s.clauses_to_erase},
                {"kind", dnf_kind_name(s.kind)}};
}

json to_json(const PipelineConfig& c) {
    return json{
        {"hidden_per_clause", c.hidden_per_clause},
        {"base_dataset_size", c.base_dataset_size},
        {"base_learning_rate", c.base_learning_rate},
        {"base_steps", c.base_steps},
        {"base_batch_size", c.base_batch_size},
        {"base_momentum", c.base_momentum},
        {"base_stop_tpr", c.base_stop_tpr},
        {"base_stop_tnr", c.base_stop_tnr},
        {"base_check_every", c.base_check_every},
        {"ga", {{"learning_rate", c.ga.learning_rate},
                {"steps", c.ga.steps},
                {"target_dataset_size", c.ga.target_dataset_size},
                {"batch_size", c.ga.batch_size}}},
        {"tv", {{"learning_rate", c.tv.learning_rate},
                {"steps", c.tv.steps},
                {"scale", c.tv.scale},
                {"target_dataset_size", c.tv.target_dataset_size},
                {"batch_size", c.tv.batch_size}}},
        {"ppd", {{"learning_rate", c.ppd.learning_rate},
                 {"steps", c.ppd.steps},
                 {"temperature", c.ppd.temperature},
                 {"distill_dataset_size", c.ppd.distill_dataset_size},
                 {"batch_size", c.ppd.batch_size}}},
        {"verify_samples", c.verify_samples},
        {"recovery", {{"learning_rate", c.recovery.learning_rate},
                      {"epochs", c.recovery.epochs},
                      {"dataset_size", c.recovery.dataset_size},
                      {"eval_samples_per_class", c.recovery.eval_samples_per_class},
                      {"tpr_threshold", c.recovery.tpr_threshold},
                      {"batch_size", c.recovery.batch_size}}}};
}

std::string config_hash(const ScenarioSpec& spec, const CellKey& key, std::uint64_t seed,
                        const PipelineConfig& cfg) {
    json j{{"scenario", to_json(spec)},
           {"method", method_name(key.method)},
           {"regime", regime_name(key.regime)},
           {"repetition", key.repetition},
           {"seed", seed},
           {"pipeline", to_json(cfg)}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string clause_type_name(ClauseType t) {
    return t == ClauseType::Target ? "target" : "control";
}

std::string sign_name(NeuronSign s) {
    return s == NeuronSign::Positive ? "positive" : "negative";
}

// ---------------------------------------------------------------------------
// Per-cell artifact writers
// ---------------------------------------------------------------------------

void save_distances_csv(const fs::path& path, const std::vector<DistancePair>& pairs) {
    std::ostringstream out;
    out << "neuron,clause,clause_type,neuron_sign,cosine_distance,excluded\n";
    for (const DistancePair& p : pairs) {
        out << p.neuron << ',' << p.clause << ',' << (p.target_clause ? "target" : "control")
            << ',' << sign_name(p.sign) << ',' << (p.excluded ? "" : format_double(p.distance))
            << ',' << (p.excluded ? 1 : 0) << '\n';
    }
    write_text_file(path, out.str());
}

void save_decomposition_csv(const fs::path& path,
                            const std::vector<RecoveryDecomposition>& rows) {
    std::ostringstream out;
    out << "neuron,clause,clause_type,neuron_sign,magnitude,parallel_fraction,excluded\n";
    for (const RecoveryDecomposition& d : rows) {
        out << d.neuron << ',' << d.clause << ',' << clause_type_name(d.clause_type) << ','
            << sign_name(d.neuron_sign) << ',' << format_double(d.magnitude) << ','
            << (d.excluded ? "" : format_double(d.parallel_fraction)) << ','
            << (d.excluded ? 1 : 0) << '\n';
    }
    write_text_file(path, out.str());
}

json manifest_from_result(const PipelineResult& r, const ScenarioSpec& spec,
                          const std::string& hash, const std::string& started,
                          const json& paths) {
    json metrics;
    if (r.erase_target_tpr) metrics["erase_target_tpr"] = *r.erase_target_tpr;
    if (r.erase_control_tpr) metrics["erase_control_tpr"] = *r.erase_control_tpr;
    if (r.dist_pos) metrics["dist_pos"] = *r.dist_pos;
    if (r.dist_neg) metrics["dist_neg"] = *r.dist_neg;
    if (r.recovery) {
        metrics["reached"] = r.recovery->reached;
        if (r.recovery->epoch) metrics["recovery_epoch"] = *r.recovery->epoch;
    }
    return json{{"cell_id", cell_id(r.key)},
                {"scenario", to_json(spec)},
                {"method", method_name(r.key.method)},
                {"regime", regime_name(r.key.regime)},
                {"repetition", r.key.repetition},
                {"seed", r.seed},
                {"config_hash", hash},
                {"status", r.status},
                {"failed_stage", r.failed_stage},
                {"error", r.error_message},
                {"metrics", metrics},
                {"paths", paths},
                {"timestamps", {{"started", started}, {"finished", now_iso8601()}}}};
}

PipelineResult result_from_manifest(const json& m) {
    PipelineResult r;
    const json& sc = m.at("scenario");
    r.key.scenario_id = sc.at("scenario_id").get<int>();
    r.key.kind = dnf_kind_from_name(sc.at("kind").get<std::string>());
    r.key.method = method_from_name(m.at("method").get<std::string>());
    r.key.regime = regime_from_name(m.at("regime").get<std::string>());
    r.key.repetition = m.at("repetition").get<int>();
    r.seed = m.at("seed").get<std::uint64_t>();
    r.status = m.at("status").get<std::string>();
    r.failed_stage = m.value("failed_stage", std::string{});
    r.error_message = m.value("error", std::string{});
    const json& metrics = m.at("metrics");
    if (metrics.contains("erase_target_tpr"))
        r.erase_target_tpr = metrics.at("erase_target_tpr").get<double>();
    if (metrics.contains("erase_control_tpr"))
        r.erase_control_tpr = metrics.at("erase_control_tpr").get<double>();
    if (metrics.contains("dist_pos")) r.dist_pos = metrics.at("dist_pos").get<double>();
    if (metrics.contains("dist_neg")) r.dist_neg = metrics.at("dist_neg").get<double>();
    if (metrics.contains("reached")) {
        RecoveryTime t;
        t.reached = metrics.at("reached").get<bool>();
        if (metrics.contains("recovery_epoch")) t.epoch = metrics.at("recovery_epoch").get<int>();
        r.recovery = t;
    }
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

PipelineResult run_pipeline(const ScenarioSpec& spec, Method method, Regime regime,
                            int repetition, std::uint64_t base_seed, const PipelineConfig& cfg,
                            const fs::path& out_dir) {
    PipelineResult res;
    res.key = CellKey{spec.scenario_id, spec.kind, method, regime, repetition};
    res.seed = cell_seed(base_seed, res.key);

    const fs::path cell_dir = out_dir / "cells" / cell_id(res.key);
    fs::create_directories(cell_dir);
    const std::string hash = config_hash(spec, res.key, res.seed, cfg);
    const std::string started = now_iso8601();

    json paths;
    std::string stage = "generate";
    try {
        const GenConfig gen = spec.gen_config();
        Rng formula_rng(derive_seed(res.seed, "formula"));
        const Formula f = generate_formula(gen, formula_rng);
        save_formula(cell_dir / "formula.json", f);
        paths["formula"] = "formula.json";

        stage = "train_base";
        std::vector<int> all_clauses(static_cast<std::size_t>(spec.num_clauses));
        for (int c = 0; c < spec.num_clauses; ++c) all_clauses[static_cast<std::size_t>(c)] = c;
        Rng base_data_rng(derive_seed(res.seed, "base-data"));
        const Dataset base_data =
            build_dataset(f, all_clauses, cfg.base_dataset_size, 0.5, gen, base_data_rng);
        const int hidden = cfg.hidden_per_clause * spec.num_clauses;
        const NetworkWeights init =
            init_weights(hidden, f.num_vars, derive_seed(res.seed, "init"));
        TrainConfig btc;
        btc.learning_rate = cfg.base_learning_rate;
        btc.steps = cfg.base_steps;
        btc.batch_size = cfg.base_batch_size;
        btc.momentum = cfg.base_momentum;
        btc.seed = derive_seed(res.seed, "base-train");
        const BaseTrainResult base =
            train_base(init, base_data, btc, cfg.base_stop_tpr, cfg.base_stop_tnr,
                       cfg.base_check_every);
        save_snapshot(cell_dir / "base.json", base.weights, {res.seed, base.steps_run});
        paths["base"] = "base.json";

        stage = "erase";
        Rng erase_rng(derive_seed(res.seed, "erase"));
        NetworkWeights erased;
        switch (method) {
            case Method::GradientAscent:
                erased = erase_gradient_ascent(base.weights, f, spec.clauses_to_erase, cfg.ga,
                                               gen, erase_rng);
                break;
            case Method::TaskVector: {
                TaskVectorResult tv =
                    erase_task_vector(base.weights, f, spec.clauses_to_erase, cfg.tv, gen,
                                      erase_rng);
                save_snapshot(cell_dir / "task_vector.json", tv.task_vector, {res.seed, 0});
                paths["task_vector"] = "task_vector.json";
                erased = std::move(tv.erased);
                break;
            }
            case Method::Ppd: {
                PPDConfig ppd = cfg.ppd;
                ppd.student_seed = derive_seed(res.seed, "student");
                erased = erase_ppd(base.weights, f, spec.clauses_to_erase, ppd, gen, erase_rng);
                break;
            }
        }
        save_snapshot(cell_dir / "erased.json", erased, {res.seed, 0});
        paths["erased"] = "erased.json";

        stage = "distances";
        const std::vector<NeuronSign> signs = neuron_signs(base.weights);
        const auto pairs =
            clause_structure_pairs(base.weights, erased, f, spec.clauses_to_erase, signs);
        const ClauseStructureDistance dist =
            clause_structure_distance(base.weights, erased, f, signs);
        save_distances_csv(cell_dir / "distances.csv", pairs);
        paths["distances"] = "distances.csv";
        res.dist_pos = dist.dist_pos;
        res.dist_neg = dist.dist_neg;

        stage = "verify";
        Rng verify_rng(derive_seed(res.seed, "verify"));
        const ErasureOutcome outcome = verify_erasure(erased, method, f, spec.clauses_to_erase,
                                                      cfg.verify_samples, verify_rng);
        res.erase_target_tpr = outcome.target_tpr;
        res.erase_control_tpr = outcome.control_tpr;
        if (!erasure_succeeded(outcome)) {
            res.status = "erasure_failed";
            res.failed_stage = "verify";
            write_text_file(cell_dir / "manifest.json",
                            manifest_from_result(res, spec, hash, started, paths).dump(2) + "\n");
            return res;
        }

        stage = "recover";
        RecoveryConfig rc = cfg.recovery;
        rc.regime = regime;
        rc.snapshot_epochs = {0, rc.epochs};
        const RecoveryResult rec = run_recovery(erased, f, spec.clauses_to_erase, rc, gen,
                                                derive_seed(res.seed, "recovery"));
        save_trace_csv(cell_dir / "trace.csv", rec.trace);
        save_snapshot(cell_dir / "recovered.json", rec.weights, {res.seed, 0});
        paths["trace"] = "trace.csv";
        paths["recovered"] = "recovered.json";
        res.recovery = recovery_time(rec.trace, rc.tpr_threshold);

        if (method != Method::Ppd) {
            stage = "decompose";
            const auto decomp = decompose_recovery(base.weights, erased, rec.weights, f,
                                                   spec.clauses_to_erase, signs);
            save_decomposition_csv(cell_dir / "decomposition.csv", decomp);
            paths["decomposition"] = "decomposition.csv";
        }

        res.status = "ok";
    } catch (const std::exception& e) {
        res.status = "error";
        res.failed_stage = stage;
        res.error_message = e.what();
    }
    write_text_file(cell_dir / "manifest.json",
                    manifest_from_result(res, spec, hash, started, paths).dump(2) + "\n");
    return res;
}

// ---------------------------------------------------------------------------
// Sweep + aggregation
// ---------------------------------------------------------------------------

namespace {

std::optional<PipelineResult> try_load_result(const fs::path& cell_dir,
                                              const std::string& expected_hash) {
    const fs::path manifest = cell_dir / "manifest.json";
    if (!fs::exists(manifest)) return std::nullopt;
    try {
        const json m = json::parse(read_text_file(manifest));
        if (m.value("config_hash", std::string{}) != expected_hash) return std::nullopt;
        return result_from_manifest(m);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

// One row per cell in the consolidated recovery CSV.
void write_raw_recovery(const fs::path& out_dir, const std::vector<PipelineResult>& results) {
    std::ostringstream out;
    out << "scenario_id,dnf_kind,method,regime,repetition,seed,status,failed_stage,"
           "erase_target_tpr,erase_control_tpr,dist_pos,dist_neg,reached,recovery_epoch\n";
    for (const PipelineResult& r : results) {
        out << r.key.scenario_id << ',' << dnf_kind_name(r.key.kind) << ','
            << method_name(r.key.method) << ',' << regime_name(r.key.regime) << ','
            << r.key.repetition << ',' << r.seed << ',' << r.status << ',' << r.failed_stage
            << ',' << opt_str(r.erase_target_tpr) << ',' << opt_str(r.erase_control_tpr) << ','
            << opt_str(r.dist_pos) << ',' << opt_str(r.dist_neg) << ',';
        if (r.recovery) out << (r.recovery->reached ? 1 : 0);
        out << ',';
        if (r.recovery && r.recovery->epoch) out << *r.recovery->epoch;
        out << '\n';
    }
    write_text_file(out_dir / "raw_recovery.csv", out.str());
}

struct DecompRow {
    CellKey key;
    std::uint64_t seed = 0;
    int neuron = 0;
    int clause = 0;
    std::string clause_type;
    std::string neuron_sign;
    double magnitude = 0.0;
    std::optional<double> parallel_fraction;
    bool excluded = false;
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

void append_cell_decomposition(const fs::path& cell_dir, const PipelineResult& r,
                               std::ostringstream& out) {
    const fs::path csv = cell_dir / "decomposition.csv";
    if (!fs::exists(csv)) return;
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        out << r.key.scenario_id << ',' << r.seed << ',' << method_name(r.key.method) << ','
            << regime_name(r.key.regime) << ',' << f[0] << ',' << f[1] << ',' << f[2] << ','
            << f[3] << ',' << f[4] << ',' << f[5] << ',' << f[6] << ','
            << dnf_kind_name(r.key.kind) << ',' << r.key.repetition << '\n';
    }
}

void append_cell_distances(const fs::path& cell_dir, const PipelineResult& r,
                           std::ostringstream& out) {
    const fs::path csv = cell_dir / "distances.csv";
    if (!fs::exists(csv)) return;
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        out << r.key.scenario_id << ',' << r.seed << ',' << method_name(r.key.method) << ','
            << f[0] << ',' << f[1] << ',' << f[2] << ',' << f[3] << ',' << f[4] << ',' << f[5]
            << ',' << dnf_kind_name(r.key.kind) << ',' << r.key.repetition << ','
            << regime_name(r.key.regime) << '\n';
    }
}

std::vector<PipelineResult> load_all_results(const fs::path& out_dir) {
    std::vector<std::string> ids;
    const fs::path cells = out_dir / "cells";
    if (fs::exists(cells))
        for (const auto& entry : fs::directory_iterator(cells))
            if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
                ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end());

    std::vector<PipelineResult> results;
    for (const std::string& id : ids) {
        const json m = json::parse(read_text_file(cells / id / "manifest.json"));
        results.push_back(result_from_manifest(m));
    }
    return results;
}

// Recovery-table rows pooled over scenarios and repetitions, one table per
// formula kind (plain -> table1, shared -> table3). Dist columns are pooled
// per method across every valid erasure of that kind, as in the paper.
void write_recovery_table(const fs::path& path, const std::vector<PipelineResult>& results,
                          DnfKind kind) {
    const std::vector<Method> method_order = {Method::GradientAscent, Method::Ppd,
                                              Method::TaskVector};
    const std::vector<Regime> regime_order = {Regime::Target, Regime::NonTarget, Regime::All};

    std::ostringstream out;
    out << "method,regime,n_runs,n_reached,median_epoch,q25,q75,not_reached_pct,"
           "dist_pos,dist_neg,n_erasure_failed\n";
    bool any = false;
    for (Method m : method_order) {
        double dist_pos_sum = 0.0, dist_neg_sum = 0.0;
        int dist_n = 0;
        for (const PipelineResult& r : results) {
            if (r.key.kind != kind || r.key.method != m) continue;
            if (r.status != "ok" || !r.dist_pos || !r.dist_neg) continue;
            dist_pos_sum += *r.dist_pos;
            dist_neg_sum += *r.dist_neg;
            ++dist_n;
        }
        for (Regime reg : regime_order) {
            std::vector<RecoveryTime> times;
            int erasure_failed = 0;
            for (const PipelineResult& r : results) {
                if (r.key.kind != kind || r.key.method != m || r.key.regime != reg) continue;
                if (r.status == "erasure_failed") {
                    ++erasure_failed;
                } else if (r.status == "ok" && r.recovery) {
                    times.push_back(*r.recovery);
                }
            }
            if (times.empty() && erasure_failed == 0) continue;
            any = true;
            out << method_name(m) << ',' << regime_name(reg) << ',' << times.size() << ',';
            if (!times.empty()) {
                const AggregateStats st = aggregate_recovery_stats(times);
                out << st.n << ',' << (st.median ? format_double(*st.median) : "") << ','
                    << (st.q25 ? format_double(*st.q25) : "") << ','
                    << (st.q75 ? format_double(*st.q75) : "") << ','
                    << format_double(st.not_reached_pct) << ',';
            } else {
                out << ",,,,,";
            }
            out << (dist_n ? format_double(dist_pos_sum / dist_n) : "") << ','
                << (dist_n ? format_double(dist_neg_sum / dist_n) : "") << ',' << erasure_failed
                << '\n';
        }
    }
    if (any) write_text_file(path, out.str());
}

std::vector<DecompRow> load_decomp_rows(const fs::path& out_dir) {
    std::vector<DecompRow> rows;
    const fs::path raw = out_dir / "raw_decomposition.csv";
    if (!fs::exists(raw)) return rows;
    std::ifstream in(raw);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        DecompRow r;
        r.key.scenario_id = std::stoi(f[0]);
        r.seed = std::stoull(f[1]);
        r.key.method = method_from_name(f[2]);
        r.key.regime = regime_from_name(f[3]);
        r.neuron = std::stoi(f[4]);
        r.clause = std::stoi(f[5]);
        r.clause_type = f[6];
        r.neuron_sign = f[7];
        r.magnitude = std::stod(f[8]);
        if (!f[9].empty()) r.parallel_fraction = std::stod(f[9]);
        r.excluded = f[10] == "1";
        r.key.kind = dnf_kind_from_name(f[11]);
        r.key.repetition = std::stoi(f[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// Decomposition table pooled across scenarios and repetitions for one method,
// mirroring the paper layout: rows are regime x neuron sign x clause type,
// columns split by formula kind.
void write_decomposition_table(const fs::path& path, const std::vector<DecompRow>& rows,
                               Method method) {
    struct RegimeRow {
        Regime regime;
        const char* label;
    };
    const std::vector<RegimeRow> regime_order = {
        {Regime::All, "original_data"}, {Regime::Related, "related"},
        {Regime::Unrelated, "unrelated"}};
    const std::vector<std::string> signs = {"negative", "positive"};
    const std::vector<std::string> types = {"control", "target"};
    const std::vector<DnfKind> kinds = {DnfKind::Plain, DnfKind::Shared};

    std::ostringstream out;
    out << "regime,neuron_sign,clause_type,"
           "magnitude_mean_dnf,magnitude_std_dnf,magnitude_mean_dnf_shared,"
           "magnitude_std_dnf_shared,parallel_mean_dnf,parallel_std_dnf,"
           "parallel_mean_dnf_shared,parallel_std_dnf_shared,"
           "n_dnf,n_dnf_shared,excluded_dnf,excluded_dnf_shared\n";
    bool any = false;
    for (const RegimeRow& reg : regime_order) {
        for (const std::string& sign : signs) {
            for (const std::string& type : types) {
                std::vector<double> mag[2], par[2];
                int excluded[2] = {0, 0};
                for (const DecompRow& r : rows) {
                    if (r.key.method != method || r.key.regime != reg.regime) continue;
                    if (r.neuron_sign != sign || r.clause_type != type) continue;
                    const int k = r.key.kind == DnfKind::Plain ? 0 : 1;
                    if (r.excluded || !r.parallel_fraction) {
                        ++excluded[k];
                        continue;
                    }
                    mag[k].push_back(r.magnitude);
                    par[k].push_back(*r.parallel_fraction);
                }
                if (mag[0].empty() && mag[1].empty() && !excluded[0] && !excluded[1]) continue;
                any = true;
                out << reg.label << ',' << sign << ',' << type;
                for (std::size_t k = 0; k < kinds.size(); ++k) {
                    const AggregateStats st = aggregate_values(mag[k]);
                    out << ',' << (st.n ? format_double(st.mean) : "") << ','
                        << (st.n ? format_double(st.std_dev) : "");
                }
                for (std::size_t k = 0; k < kinds.size(); ++k) {
                    const AggregateStats st = aggregate_values(par[k]);
                    out << ',' << (st.n ? format_double(st.mean) : "") << ','
                        << (st.n ? format_double(st.std_dev) : "");
                }
                out << ',' << mag[0].size() << ',' << mag[1].size() << ',' << excluded[0] << ','
                    << excluded[1] << '\n';
            }
        }
    }
    if (any) write_text_file(path, out.str());
}

} // namespace

void aggregate_sweep(const fs::path& out_dir) {
    const std::vector<PipelineResult> results = load_all_results(out_dir);

    write_raw_recovery(out_dir, results);

    std::ostringstream decomp_out;
    decomp_out << "scenario_id,seed,method,regime,neuron,clause,clause_type,neuron_sign,"
                  "magnitude,parallel_fraction,excluded,dnf_kind,repetition\n";
    std::ostringstream dist_out;
    dist_out << "scenario_id,seed,method,neuron,clause,clause_type,neuron_sign,"
                "cosine_distance,excluded,dnf_kind,repetition,regime\n";
    for (const PipelineResult& r : results) {
        const fs::path cell_dir = out_dir / "cells" / cell_id(r.key);
        if (r.status == "ok") append_cell_decomposition(cell_dir, r, decomp_out);
        if (r.status == "ok" || r.status == "erasure_failed")
            append_cell_distances(cell_dir, r, dist_out);
    }
    write_text_file(out_dir / "raw_decomposition.csv", decomp_out.str());
    write_text_file(out_dir / "raw_distance.csv", dist_out.str());

    write_recovery_table(out_dir / "table1.csv", results, DnfKind::Plain);
    write_recovery_table(out_dir / "table3.csv", results, DnfKind::Shared);

    const std::vector<DecompRow> decomp_rows = load_decomp_rows(out_dir);
    write_decomposition_table(out_dir / "table2.csv", decomp_rows, Method::TaskVector);
    write_decomposition_table(out_dir / "table5.csv", decomp_rows, Method::GradientAscent);

    std::ostringstream failures;
    failures << "cell_id,status,stage,detail\n";
    for (const PipelineResult& r : results)
        if (r.status != "ok")
            failures << cell_id(r.key) << ',' << r.status << ',' << r.failed_stage << ",\""
                     << r.error_message << "\"\n";
    write_text_file(out_dir / "failures.csv", failures.str());
}

SweepReport run_sweep(const SweepOptions& opts) {
    if (opts.scenario_ids.empty() || opts.kinds.empty() || opts.methods.empty() ||
        opts.regimes.empty())
        throw ConfigError("sweep needs nonempty scenario, kind, method, and regime lists");
    if (opts.repetitions < 1) throw ConfigError("sweep needs repetitions >= 1");
    if (opts.parallelism < 1) throw ConfigError("sweep needs parallelism >= 1");
    if (opts.out_dir.empty()) throw ConfigError("sweep needs an output directory");

    std::vector<CellKey> cells;
    for (int sid : opts.scenario_ids)
        for (DnfKind kind : opts.kinds)
            for (Method m : opts.methods)
                for (Regime reg : opts.regimes)
                    for (int rep = 0; rep < opts.repetitions; ++rep)
                        cells.push_back(CellKey{sid, kind, m, reg, rep});
    std::sort(cells.begin(), cells.end());

    SweepReport report;
    report.cells_total = static_cast<int>(cells.size());

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            const CellKey& key = cells[i];
            const ScenarioSpec spec = scenario_from_table(key.scenario_id, key.kind);
            const std::uint64_t seed = cell_seed(opts.base_seed, key);
            const std::string hash = config_hash(spec, key, seed, opts.pipeline);

            bool resumed = false;
            PipelineResult result;
            if (auto cached = try_load_result(opts.out_dir / "cells" / cell_id(key), hash)) {
                result = std::move(*cached);
                resumed = true;
            } else {
                result = run_pipeline(spec, key.method, key.regime, key.repetition,
                                      opts.base_seed, opts.pipeline, opts.out_dir);
            }

            std::lock_guard<std::mutex> lock(mu);
            if (resumed)
                ++report.cells_resumed;
            else
                ++report.cells_run;
            if (result.status == "ok") {
                ++report.cells_ok;
            } else if (result.status == "erasure_failed") {
                ++report.cells_erasure_failed;
                report.failures.push_back(cell_id(key) + ": verify: erasure thresholds unmet");
            } else {
                ++report.cells_error;
                report.failures.push_back(cell_id(key) + ": " + result.failed_stage + ": " +
                                          result.error_message);
            }
        }
    };

    const int n_threads = std::min<int>(opts.parallelism, static_cast<int>(cells.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::sort(report.failures.begin(), report.failures.end());
    aggregate_sweep(opts.out_dir);
    return report;
}

// ---------------------------------------------------------------------------
// Hyperparameter tuning
// ---------------------------------------------------------------------------

TuneResult tune_erasure(Method method, const GridSpec& grid, std::uint64_t seed,
                        double target_tpr_max, const fs::path& out_dir) {
    if (grid.learning_rates.empty() || grid.steps.empty())
        throw ConfigError("tune grid needs learning rates and step counts");
    if (method == Method::TaskVector && grid.tv_scales.empty())
        throw ConfigError("tune grid needs TV scales");
    if (method == Method::Ppd && grid.ppd_temperatures.empty())
        throw ConfigError("tune grid needs PPD temperatures");

    // Fixed tuning setting: four clauses of size four, one target, plain DNF.
    const ScenarioSpec spec = scenario_from_table(1, DnfKind::Plain);
    const GenConfig gen = spec.gen_config();
    const PipelineConfig cfg;

    Rng formula_rng(derive_seed(seed, "tune-formula"));
    const Formula f = generate_formula(gen, formula_rng);
    Rng data_rng(derive_seed(seed, "tune-data"));
    const Dataset base_data = build_dataset(f, {0, 1, 2, 3}, cfg.base_dataset_size, 0.5, gen,
                                            data_rng);
    TrainConfig btc;
    btc.learning_rate = cfg.base_learning_rate;
    btc.steps = cfg.base_steps;
    btc.batch_size = cfg.base_batch_size;
    btc.momentum = cfg.base_momentum;
    btc.seed = derive_seed(seed, "tune-train");
    const NetworkWeights base =
        train_base(init_weights(cfg.hidden_per_clause * spec.num_clauses, f.num_vars,
                                derive_seed(seed, "tune-init")),
                   base_data, btc, cfg.base_stop_tpr, cfg.base_stop_tnr, cfg.base_check_every)
            .weights;

    // Third grid axis: TV scale or PPD temperature; GA has none.
    std::vector<double> third = {0.0};
    if (method == Method::TaskVector) third = grid.tv_scales;
    if (method == Method::Ppd) third = grid.ppd_temperatures;

    TuneResult res;
    double best_score = -1.0;
    for (double lr : grid.learning_rates) {
        for (int steps : grid.steps) {
            for (double extra : third) {
                const std::string tag = "lr=" + format_double(lr) +
                                        "|steps=" + std::to_string(steps) +
                                        "|extra=" + format_double(extra);
                Rng point_rng(derive_seed(seed, "tune-point", fnv1a(tag)));

                GridPoint p;
                p.learning_rate = lr;
                p.steps = steps;
                NetworkWeights erased;
                switch (method) {
                    case Method::GradientAscent: {
                        GAConfig c;
                        c.learning_rate = lr;
                        c.steps = steps;
                        erased = erase_gradient_ascent(base, f, spec.clauses_to_erase, c, gen,
                                                       point_rng);
                        break;
                    }
                    case Method::TaskVector: {
                        TVConfig c;
                        c.learning_rate = lr;
                        c.steps = steps;
                        c.scale = extra;
                        p.scale = extra;
                        erased =
                            erase_task_vector(base, f, spec.clauses_to_erase, c, gen, point_rng)
                                .erased;
                        break;
                    }
                    case Method::Ppd: {
                        PPDConfig c;
                        c.learning_rate = lr;
                        c.steps = steps;
                        c.temperature = extra;
                        c.student_seed = derive_seed(seed, "tune-student", fnv1a(tag));
                        p.temperature = extra;
                        erased = erase_ppd(base, f, spec.clauses_to_erase, c, gen, point_rng);
                        break;
                    }
                }
                Rng verify_rng(derive_seed(seed, "tune-verify", fnv1a(tag)));
                const ErasureOutcome o = verify_erasure(erased, method, f, spec.clauses_to_erase,
                                                        cfg.verify_samples, verify_rng);
                p.target_tpr = o.target_tpr;
                p.control_tpr = o.control_tpr;
                p.feasible = o.target_tpr <= target_tpr_max;
                res.table.push_back(p);

                if (p.feasible && p.control_tpr > best_score) {
                    best_score = p.control_tpr;
                    res.best = p;
                    res.feasible = true;
                }
            }
        }
    }

    if (!out_dir.empty()) {
        std::ostringstream out;
        out << "learning_rate,steps,scale,temperature,target_tpr,control_tpr,feasible\n";
        for (const GridPoint& p : res.table) {
            out << format_double(p.learning_rate) << ',' << p.steps << ','
                << (method == Method::TaskVector ? format_double(p.scale) : "") << ','
                << (method == Method::Ppd ? format_double(p.temperature) : "") << ','
                << format_double(p.target_tpr) << ',' << format_double(p.control_tpr) << ','
                << (p.feasible ? 1 : 0) << '\n';
        }
        write_text_file(out_dir / ("tune_" + method_name(method) + ".csv"), out.str());
    }
    return res;
}

} // namespace eraselab
