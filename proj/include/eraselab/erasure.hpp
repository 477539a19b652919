#pragma once

#include <string>
#include <vector>

#include "eraselab/analysis.hpp"
#include "eraselab/dnf.hpp"
#include "eraselab/net.hpp"
#include "eraselab/rng.hpp"

namespace eraselab {

enum class Method : std::uint8_t { GradientAscent, TaskVector, Ppd };

std::string method_name(Method m);   // "ga", "tv", "ppd"
Method method_from_name(const std::string& s);

struct GAConfig {
    double learning_rate = 0.005;
    int steps = 70;
    int target_dataset_size = 2000;
    int batch_size = 64;
};

struct TVConfig {
    double learning_rate = 0.005;
    int steps = 50;
    double scale = 1.0;
    int target_dataset_size = 2000;
    int batch_size = 64;
};

struct PPDConfig {
    double learning_rate = 0.01;
    int steps = 100;
    double temperature = 1.5;
    int distill_dataset_size = 10000;
    std::uint64_t student_seed = 0;
    int batch_size = 64;
};

struct ErasureOutcome {
    NetworkWeights erased_weights;
    Method method = Method::GradientAscent;
    double target_tpr = 0.0;
    double control_tpr = 0.0;
};

// Thresholds for a valid erasure: the paper's "TPR of 0" objective read as
// target <= 0.05 with controls preserved at >= 0.9.
inline constexpr double kEraseTargetTprMax = 0.05;
inline constexpr double kEraseControlTprMin = 0.9;

// Loss ascent on target-clause data: positives satisfying only target clauses
// plus an equal count of negatives, truthful labels, gradient sign flipped.
NetworkWeights erase_gradient_ascent(const NetworkWeights& model, const Formula& f,
                                     const std::vector<int>& targets, const GAConfig& cfg,
                                     const GenConfig& gen, Rng& rng);

struct TaskVectorResult {
    NetworkWeights erased;
    NetworkWeights task_vector;  // fine-tuned minus base, all parameter groups
};

// Fine-tunes a copy on target-clause data to strengthen it, then subtracts
// scale * (fine-tuned - base) from the base.
TaskVectorResult erase_task_vector(const NetworkWeights& model, const Formula& f,
                                   const std::vector<int>& targets, const TVConfig& cfg,
                                   const GenConfig& gen, Rng& rng);

// Fresh student distilled on non-target data against the teacher's
// temperature-softened probabilities sigmoid(teacher_logit / T).
NetworkWeights erase_ppd(const NetworkWeights& teacher, const Formula& f,
                         const std::vector<int>& targets, const PPDConfig& cfg,
                         const GenConfig& gen, Rng& rng);

ErasureOutcome verify_erasure(const NetworkWeights& model, Method method, const Formula& f,
                              const std::vector<int>& targets, int n_eval, Rng& rng);

inline bool erasure_succeeded(const ErasureOutcome& o) {
    return o.target_tpr <= kEraseTargetTprMax && o.control_tpr >= kEraseControlTprMin;
}

} // namespace eraselab
