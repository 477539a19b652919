#include "eraselab/recovery.hpp"

#include <algorithm>
#include <set>

#include "eraselab/errors.hpp"

namespace eraselab {

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Target: return "target";
        case Regime::NonTarget: return "nontarget";
        case Regime::All: return "all";
        case Regime::Related: return "related";
        case Regime::Unrelated: return "unrelated";
    }
    throw ConfigError("unknown regime");
}

Regime regime_from_name(const std::string& s) {
    if (s == "target") return Regime::Target;
    if (s == "nontarget") return Regime::NonTarget;
    if (s == "all") return Regime::All;
    if (s == "related") return Regime::Related;
    if (s == "unrelated") return Regime::Unrelated;
    throw ConfigError("unknown recovery regime '" + s +
                      "' (expected target, nontarget, all, related, or unrelated)");
}

std::vector<int> select_regime_clauses(const Formula& f, const std::vector<int>& targets,
                                       Regime regime) {
    const std::set<int> target_set(targets.begin(), targets.end());
    for (int t : targets)
        if (t < 0 || t >= f.num_clauses())
            throw ConfigError("target clause " + std::to_string(t) + " out of range");

    std::vector<int> non_targets;
    for (int c = 0; c < f.num_clauses(); ++c)
        if (!target_set.count(c)) non_targets.push_back(c);

    std::vector<int> out;
    switch (regime) {
        case Regime::Target:
            out = targets;
            std::sort(out.begin(), out.end());
            break;
        case Regime::NonTarget:
            out = non_targets;
            break;
        case Regime::All:
            for (int c = 0; c < f.num_clauses(); ++c) out.push_back(c);
            break;
        case Regime::Related:
        case Regime::Unrelated: {
            // Controls that share a variable with a target, per shared_map.
            std::set<int> related;
            for (int t : targets)
                if (static_cast<std::size_t>(t) < f.shared_map.size())
                    for (const SharedEntry& e : f.shared_map[static_cast<std::size_t>(t)])
                        if (!target_set.count(e.first)) related.insert(e.first);
            if (related.empty() && !non_targets.empty()) {
                // Plain DNF has no sharing; split the controls by index instead.
                const std::size_t half = (non_targets.size() + 1) / 2;
                related.insert(non_targets.begin(),
                               non_targets.begin() + static_cast<std::ptrdiff_t>(half));
            }
            for (int c : non_targets)
                if ((regime == Regime::Related) == (related.count(c) > 0)) out.push_back(c);
            break;
        }
    }
    if (out.empty())
        throw ConfigError("regime '" + regime_name(regime) + "' selects no clauses");
    return out;
}

RecoveryResult run_recovery(const NetworkWeights& erased, const Formula& f,
                            const std::vector<int>& targets, const RecoveryConfig& cfg,
                            const GenConfig& gen, std::uint64_t seed, int start_epoch) {
    if (cfg.epochs < 1) throw ConfigError("recovery needs at least one epoch");
    if (!(cfg.tpr_threshold > 0.0 && cfg.tpr_threshold < 1.0))
        throw ConfigError("tpr_threshold must be in (0, 1)");
    if (std::find(cfg.snapshot_epochs.begin(), cfg.snapshot_epochs.end(), cfg.epochs) ==
        cfg.snapshot_epochs.end())
        throw ConfigError("snapshot_epochs must include the final epoch");
    if (start_epoch < 0 || start_epoch >= cfg.epochs)
        throw ConfigError("start_epoch out of range");

    const std::vector<int> clauses =
        cfg.clause_override ? *cfg.clause_override : select_regime_clauses(f, targets, cfg.regime);
    if (clauses.empty()) throw ConfigError("recovery clause set is empty");
    Rng data_rng(derive_seed(seed, "recovery-data"));
    const Dataset ds = build_dataset(f, clauses, cfg.dataset_size, 0.5, gen, data_rng);
    const TrainData data = TrainData::from(ds);
    const int steps_per_epoch = (data.size() + cfg.batch_size - 1) / cfg.batch_size;

    const std::set<int> snapshot_at(cfg.snapshot_epochs.begin(), cfg.snapshot_epochs.end());

    RecoveryResult res;
    res.weights = erased;
    if (snapshot_at.count(start_epoch)) res.trace.snapshots.emplace(start_epoch, res.weights);

    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.steps = steps_per_epoch;
    tc.batch_size = cfg.batch_size;
    tc.loss_sign = +1;
    tc.momentum = 0.0;

    for (int epoch = start_epoch + 1; epoch <= cfg.epochs; ++epoch) {
        tc.seed = derive_seed(seed, "recovery-epoch", static_cast<std::uint64_t>(epoch));
        res.weights = train(res.weights, data, tc);

        Rng eval_rng(derive_seed(seed, "recovery-eval", static_cast<std::uint64_t>(epoch)));
        const EvalMetrics m =
            evaluate_all(res.weights, f, targets, cfg.eval_samples_per_class, eval_rng,
                         gen.window());
        res.trace.target_tpr.push_back(m.target_tpr);
        res.trace.control_tpr.push_back(m.control_tpr);
        res.trace.target_fpr.push_back(m.target_fpr);
        res.trace.control_fpr.push_back(m.control_fpr);

        if (snapshot_at.count(epoch)) res.trace.snapshots.emplace(epoch, res.weights);
    }
    return res;
}

RecoveryTime recovery_time(const RecoveryTrace& trace, double threshold) {
    if (trace.epochs() == 0) throw StructuralError("recovery_time needs a nonempty trace");
    RecoveryTime t;
    for (int e = 0; e < trace.epochs(); ++e) {
        if (trace.target_tpr[static_cast<std::size_t>(e)] >= threshold) {
            t.reached = true;
            t.epoch = e + 1;
            break;
        }
    }
    return t;
}

} // namespace eraselab
