#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eraselab/dnf.hpp"
#include "eraselab/erasure.hpp"
#include "eraselab/net.hpp"
#include "eraselab/recovery.hpp"

namespace eraselab {

enum class DnfKind : std::uint8_t { Plain, Shared };

std::string dnf_kind_name(DnfKind k);  // "plain", "shared"
DnfKind dnf_kind_from_name(const std::string& s);

struct ScenarioSpec {
    int scenario_id = 0;
    int num_clauses = 0;
    int clause_size = 0;
    std::vector<int> clauses_to_erase;
    DnfKind kind = DnfKind::Plain;

    int num_vars() const { return num_clauses * clause_size; }
    GenConfig gen_config() const;
};

// The 13 experimental scenarios; id is 1-based.
int scenario_count();
ScenarioSpec scenario_from_table(int scenario_id, DnfKind kind = DnfKind::Plain);

struct CellKey {
    int scenario_id = 1;
    DnfKind kind = DnfKind::Plain;
    Method method = Method::GradientAscent;
    Regime regime = Regime::Target;
    int repetition = 0;

    bool operator<(const CellKey& o) const;
};

std::string cell_id(const CellKey& key);

// Deterministic per-cell seed; changing any coordinate changes the stream.
std::uint64_t cell_seed(std::uint64_t base_seed, const CellKey& key);

// Everything a pipeline cell needs besides its coordinates. The erasure and
// recovery defaults are the tuned hyperparameters; base training runs
// momentum descent with early stopping on train TPR/TNR.
struct PipelineConfig {
    int hidden_per_clause = 2;         // hidden_dim = hidden_per_clause * num_clauses
    int base_dataset_size = 10000;
    double base_learning_rate = 0.01;
    int base_steps = 2000;
    int base_batch_size = 64;
    double base_momentum = 0.9;
    double base_stop_tpr = 0.99;
    double base_stop_tnr = 0.99;
    int base_check_every = 50;

    GAConfig ga;
    TVConfig tv;
    PPDConfig ppd;
    int verify_samples = 2000;

    RecoveryConfig recovery;  // regime is overwritten per cell
};

struct PipelineResult {
    CellKey key;
    std::uint64_t seed = 0;
    std::string status;         // "ok", "erasure_failed", or "error"
    std::string failed_stage;   // set for erasure_failed / error
    std::string error_message;  // set for error
    std::optional<double> erase_target_tpr;
    std::optional<double> erase_control_tpr;
    std::optional<double> dist_pos;
    std::optional<double> dist_neg;
    std::optional<RecoveryTime> recovery;
};

// generate -> train base -> erase -> verify -> recover -> decompose (GA/TV),
// persisting snapshots, metric CSVs, and a manifest under
// out_dir/cells/<cell_id>/. Stage errors are recorded, never thrown.
PipelineResult run_pipeline(const ScenarioSpec& spec, Method method, Regime regime,
                            int repetition, std::uint64_t base_seed, const PipelineConfig& cfg,
                            const std::filesystem::path& out_dir);

struct SweepOptions {
    std::vector<int> scenario_ids = {1};
    std::vector<DnfKind> kinds = {DnfKind::Plain};
    std::vector<Method> methods = {Method::GradientAscent, Method::TaskVector, Method::Ppd};
    std::vector<Regime> regimes = {Regime::Target, Regime::NonTarget, Regime::All};
    int repetitions = 20;
    std::uint64_t base_seed = 0;
    int parallelism = 1;
    std::filesystem::path out_dir;
    PipelineConfig pipeline;
};

struct SweepReport {
    int cells_total = 0;
    int cells_run = 0;
    int cells_resumed = 0;
    int cells_ok = 0;
    int cells_erasure_failed = 0;
    int cells_error = 0;
    std::vector<std::string> failures;  // "<cell_id>: <stage>: <detail>"
};

// Runs every cell (skipping ones whose manifest already matches the config
// hash), then consolidates per-cell artifacts into raw CSVs and aggregate
// tables. Aggregates are computed purely from the raw CSVs, in a fixed cell
// order, so they are byte-identical for any parallelism.
SweepReport run_sweep(const SweepOptions& opts);

// Rebuilds raw CSVs and tables from the per-cell artifacts in out_dir.
void aggregate_sweep(const std::filesystem::path& out_dir);

struct GridSpec {
    std::vector<double> learning_rates = {0.001, 0.002, 0.005, 0.01, 0.02};
    std::vector<int> steps = {30, 50, 70, 100, 150};
    std::vector<double> tv_scales = {0.5, 1.0, 1.5};
    std::vector<double> ppd_temperatures = {1.0, 1.5, 2.0, 3.0};
};

struct GridPoint {
    double learning_rate = 0.0;
    int steps = 0;
    double scale = 1.0;        // TV only
    double temperature = 1.5;  // PPD only
    double target_tpr = 0.0;
    double control_tpr = 0.0;
    bool feasible = false;
};

struct TuneResult {
    bool feasible = false;
    GridPoint best;
    std::vector<GridPoint> table;
};

// Grid search on the fixed tuning setting (4 clauses of size 4, one target,
// plain DNF). Score is control TPR subject to target TPR <= target_tpr_max;
// ties break toward the lexicographically earliest grid point.
TuneResult tune_erasure(Method method, const GridSpec& grid, std::uint64_t seed,
                        double target_tpr_max = kEraseTargetTprMax,
                        const std::filesystem::path& out_dir = {});

} // namespace eraselab
