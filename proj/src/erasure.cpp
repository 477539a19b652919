#include "eraselab/erasure.hpp"

#include <algorithm>
#include <set>

#include "eraselab/errors.hpp"

namespace eraselab {

std::string method_name(Method m) {
    switch (m) {
        case Method::GradientAscent: return "ga";
        case Method::TaskVector: return "tv";
        case Method::Ppd: return "ppd";
    }
    throw ConfigError("unknown method");
}

Method method_from_name(const std::string& s) {
    if (s == "ga") return Method::GradientAscent;
    if (s == "tv") return Method::TaskVector;
    if (s == "ppd") return Method::Ppd;
    throw ConfigError("unknown erasure method '" + s + "' (expected ga, tv, or ppd)");
}

namespace {

void check_targets(const Formula& f, const std::vector<int>& targets) {
    if (targets.empty()) throw ConfigError("erasure needs at least one target clause");
    for (int t : targets)
        if (t < 0 || t >= f.num_clauses())
            throw ConfigError("target clause " + std::to_string(t) + " out of range");
}

std::vector<int> control_clauses(const Formula& f, const std::vector<int>& targets) {
    const std::set<int> target_set(targets.begin(), targets.end());
    std::vector<int> controls;
    for (int c = 0; c < f.num_clauses(); ++c)
        if (!target_set.count(c)) controls.push_back(c);
    return controls;
}

} // namespace

NetworkWeights erase_gradient_ascent(const NetworkWeights& model, const Formula& f,
                                     const std::vector<int>& targets, const GAConfig& cfg,
                                     const GenConfig& gen, Rng& rng) {
    check_targets(f, targets);
    Rng data_rng = rng.child("ga-data");
    const Dataset target_data =
        build_dataset(f, targets, cfg.target_dataset_size, 0.5, gen, data_rng);

    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.steps = cfg.steps;
    tc.batch_size = cfg.batch_size;
    tc.loss_sign = -1;
    tc.momentum = 0.0;
    tc.seed = derive_seed(rng.seed(), "ga-train");
    return train(model, target_data, tc);
}

TaskVectorResult erase_task_vector(const NetworkWeights& model, const Formula& f,
                                   const std::vector<int>& targets, const TVConfig& cfg,
                                   const GenConfig& gen, Rng& rng) {
    check_targets(f, targets);
    if (!(cfg.scale >= 0.0)) throw ConfigError("task-vector scale must be nonnegative");
    Rng data_rng = rng.child("tv-data");
    const Dataset target_data =
        build_dataset(f, targets, cfg.target_dataset_size, 0.5, gen, data_rng);

    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.steps = cfg.steps;
    tc.batch_size = cfg.batch_size;
    tc.loss_sign = +1;
    tc.momentum = 0.0;
    tc.seed = derive_seed(rng.seed(), "tv-train");
    const NetworkWeights fine_tuned = train(model, target_data, tc);

    TaskVectorResult res;
    res.task_vector = fine_tuned - model;
    res.erased = model - res.task_vector * cfg.scale;
    return res;
}

NetworkWeights erase_ppd(const NetworkWeights& teacher, const Formula& f,
                         const std::vector<int>& targets, const PPDConfig& cfg,
                         const GenConfig& gen, Rng& rng) {
    check_targets(f, targets);
    if (!(cfg.temperature > 0.0)) throw ConfigError("distillation temperature must be positive");
    const std::vector<int> controls = control_clauses(f, targets);
    if (controls.empty()) throw ConfigError("PPD needs at least one control clause");

    Rng data_rng = rng.child("ppd-data");
    const Dataset distill =
        build_dataset(f, controls, cfg.distill_dataset_size, 0.5, gen, data_rng);

    // Soft targets: the teacher's temperature-softened probabilities.
    TrainData data = TrainData::from(distill);
    data.temperature = cfg.temperature;
    for (int i = 0; i < data.size(); ++i) {
        const double t_logit =
            forward_logit(teacher, std::span<const int>(data.actives[static_cast<std::size_t>(i)]));
        data.targets[static_cast<std::size_t>(i)] = sigmoid(t_logit / cfg.temperature);
    }

    NetworkWeights student = init_weights(teacher.hidden_dim, teacher.num_vars, cfg.student_seed);
    if (cfg.steps == 0) return student;

    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.steps = cfg.steps;
    tc.batch_size = cfg.batch_size;
    tc.loss_sign = +1;
    tc.momentum = 0.0;
    tc.seed = derive_seed(rng.seed(), "ppd-train");
    return train(student, data, tc);
}

ErasureOutcome verify_erasure(const NetworkWeights& model, Method method, const Formula& f,
                              const std::vector<int>& targets, int n_eval, Rng& rng) {
    const EvalMetrics m = evaluate_all(model, f, targets, n_eval, rng);
    ErasureOutcome o;
    o.erased_weights = model;
    o.method = method;
    o.target_tpr = m.target_tpr;
    o.control_tpr = m.control_tpr;
    return o;
}

} // namespace eraselab
