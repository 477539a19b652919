#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eraselab/analysis.hpp"
#include "eraselab/dnf.hpp"
#include "eraselab/net.hpp"

namespace eraselab {

enum class Regime : std::uint8_t { Target, NonTarget, All, Related, Unrelated };

std::string regime_name(Regime r);   // "target", "nontarget", "all", "related", "unrelated"
Regime regime_from_name(const std::string& s);

struct RecoveryConfig {
    Regime regime = Regime::Target;
    double learning_rate = 0.0002;
    int epochs = 60;
    int dataset_size = 10000;
    int eval_samples_per_class = 2000;
    double tpr_threshold = 0.8;
    std::vector<int> snapshot_epochs = {0, 60};  // must include the final epoch
    int batch_size = 64;
    std::optional<std::vector<int>> clause_override;  // bypasses regime selection
};

// Clause set each regime fine-tunes on. Related means clauses sharing a
// variable with a target when the formula has sharing structure; for plain
// DNF it falls back to the first half (round up) of the controls by index,
// with Unrelated taking the complement in both cases.
std::vector<int> select_regime_clauses(const Formula& f, const std::vector<int>& targets,
                                       Regime regime);

struct RecoveryTrace {
    std::vector<double> target_tpr;  // entry e-1 is the evaluation after epoch e
    std::vector<double> control_tpr;
    std::vector<double> target_fpr;
    std::vector<double> control_fpr;
    std::map<int, NetworkWeights> snapshots;

    int epochs() const { return static_cast<int>(target_tpr.size()); }
};

struct RecoveryResult {
    NetworkWeights weights;
    RecoveryTrace trace;
};

// Builds one dataset from the regime clauses, then fine-tunes one full pass
// per epoch (plain descent) and evaluates target/control TPR and FPR on fresh
// samples after each epoch. All randomness is derived from (seed, epoch), so
// resuming from a snapshot at epoch e reproduces the remaining trace exactly.
RecoveryResult run_recovery(const NetworkWeights& erased, const Formula& f,
                            const std::vector<int>& targets, const RecoveryConfig& cfg,
                            const GenConfig& gen, std::uint64_t seed, int start_epoch = 0);

// First 1-based epoch whose target TPR meets the threshold.
RecoveryTime recovery_time(const RecoveryTrace& trace, double threshold);

} // namespace eraselab
