#pragma once

#include <optional>
#include <vector>

#include "eraselab/dnf.hpp"
#include "eraselab/net.hpp"
#include "eraselab/rng.hpp"

namespace eraselab {

// (neuron, clause) pairs whose vectors fall below this norm are excluded from
// distance and decomposition statistics.
inline constexpr double kDegenerateNorm = 1e-8;

struct ClauseEval {
    double tpr = 0.0;
    double fpr = 0.0;
};

struct EvalMetrics {
    std::vector<double> tpr;  // per clause
    std::vector<double> fpr;
    double target_tpr = 0.0;
    double target_fpr = 0.0;
    double control_tpr = 0.0;
    double control_fpr = 0.0;
};

// TPR over n_per_class fresh assignments satisfying only this clause, FPR over
// n_per_class satisfying none, decision threshold 0.5.
ClauseEval evaluate(const NetworkWeights& w, const Formula& f, int clause_idx, int n_per_class,
                    Rng& rng, SampleWindow win = {});

// Per-clause evaluation plus means over targets and controls.
EvalMetrics evaluate_all(const NetworkWeights& w, const Formula& f,
                         const std::vector<int>& targets, int n_per_class, Rng& rng,
                         SampleWindow win = {});

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b);

struct ClauseStructureDistance {
    double dist_pos = 0.0;  // mean cosine distance over positive neurons
    double dist_neg = 0.0;
    int pairs_pos = 0;      // (neuron, clause) pairs that entered each mean
    int pairs_neg = 0;
    int excluded = 0;       // pairs dropped for near-zero vectors
};

// Per-pair rows backing the means, emitted to the raw CSV so target-only
// averages stay recoverable.
struct DistancePair {
    int neuron = 0;
    int clause = 0;
    bool target_clause = false;
    NeuronSign sign = NeuronSign::Positive;
    double distance = 0.0;
    bool excluded = false;
};

// Cosine distance between original and erased clause vectors for every
// (neuron, clause) pair, averaged over all clauses within each neuron-sign
// group. Signs come from the original model.
ClauseStructureDistance clause_structure_distance(const NetworkWeights& original,
                                                  const NetworkWeights& erased, const Formula& f,
                                                  const std::vector<NeuronSign>& signs);
std::vector<DistancePair> clause_structure_pairs(const NetworkWeights& original,
                                                 const NetworkWeights& erased, const Formula& f,
                                                 const std::vector<int>& targets,
                                                 const std::vector<NeuronSign>& signs);

enum class ClauseType : std::uint8_t { Target, Control };

// Displacements of one (neuron, clause) weight slice:
//   d0 = erased - original   (erasure displacement)
//   df = recovered - erased  (recovery displacement)
// with df split into components parallel and orthogonal to d0.
struct RecoveryDecomposition {
    int neuron = 0;
    int clause = 0;
    ClauseType clause_type = ClauseType::Control;
    NeuronSign neuron_sign = NeuronSign::Positive;
    std::vector<double> d0;
    std::vector<double> df;
    double magnitude = 0.0;          // ||df||
    double parallel_fraction = 0.0;  // ||df_par|| / ||df||
    bool excluded = false;           // ||d0|| or ||df|| below kDegenerateNorm
};

std::vector<RecoveryDecomposition> decompose_recovery(const NetworkWeights& original,
                                                      const NetworkWeights& erased,
                                                      const NetworkWeights& recovered,
                                                      const Formula& f,
                                                      const std::vector<int>& targets,
                                                      const std::vector<NeuronSign>& signs);

struct RecoveryTime {
    bool reached = false;
    std::optional<int> epoch;  // 1-based first epoch at or above threshold
};

struct AggregateStats {
    int n = 0;                    // values that entered the statistics
    int n_total = 0;              // including not-reached / excluded
    std::optional<double> median;
    std::optional<double> q25;
    std::optional<double> q75;
    double not_reached_pct = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;         // population standard deviation
};

// Median and linear-interpolation IQR over reached runs; not_reached_pct over
// all runs. All runs unreached leaves the quantiles absent.
AggregateStats aggregate_recovery_stats(const std::vector<RecoveryTime>& times);

// Mean and population std over a plain sample (used per decomposition metric).
AggregateStats aggregate_values(const std::vector<double>& values);

double quantile(std::vector<double> sorted_values, double p);

} // namespace eraselab
