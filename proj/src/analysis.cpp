#include "eraselab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "eraselab/errors.hpp"

namespace eraselab {

ClauseEval evaluate(const NetworkWeights& w, const Formula& f, int clause_idx, int n_per_class,
                    Rng& rng, SampleWindow win) {
    if (clause_idx < 0 || clause_idx >= f.num_clauses())
        throw StructuralError("clause index " + std::to_string(clause_idx) + " out of range");
    if (n_per_class < 1) throw ConfigError("n_per_class must be >= 1");

    AssignmentSampler sampler(f, win);
    const int anchor = f.clauses[static_cast<std::size_t>(clause_idx)].size();

    int tp = 0;
    for (int k = 0; k < n_per_class; ++k) {
        const Assignment a = sampler.positive(clause_idx, rng);
        const auto active = a.active_indices();
        tp += sigmoid(forward_logit(w, std::span<const int>(active))) > 0.5;
    }
    int fp = 0;
    for (int k = 0; k < n_per_class; ++k) {
        const Assignment a = sampler.negative(anchor, rng);
        const auto active = a.active_indices();
        fp += sigmoid(forward_logit(w, std::span<const int>(active))) > 0.5;
    }
    return {static_cast<double>(tp) / n_per_class, static_cast<double>(fp) / n_per_class};
}

EvalMetrics evaluate_all(const NetworkWeights& w, const Formula& f,
                         const std::vector<int>& targets, int n_per_class, Rng& rng,
                         SampleWindow win) {
    const std::set<int> target_set(targets.begin(), targets.end());
    EvalMetrics m;
    double t_tpr = 0.0, t_fpr = 0.0, c_tpr = 0.0, c_fpr = 0.0;
    int n_t = 0, n_c = 0;
    for (int c = 0; c < f.num_clauses(); ++c) {
        const ClauseEval e = evaluate(w, f, c, n_per_class, rng, win);
        m.tpr.push_back(e.tpr);
        m.fpr.push_back(e.fpr);
        if (target_set.count(c)) {
            t_tpr += e.tpr;
            t_fpr += e.fpr;
            ++n_t;
        } else {
            c_tpr += e.tpr;
            c_fpr += e.fpr;
            ++n_c;
        }
    }
    if (n_t > 0) {
        m.target_tpr = t_tpr / n_t;
        m.target_fpr = t_fpr / n_t;
    }
    if (n_c > 0) {
        m.control_tpr = c_tpr / n_c;
        m.control_fpr = c_fpr / n_c;
    }
    return m;
}

namespace {

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw StructuralError("cosine_distance: length mismatch");
    return 1.0 - dot(a, b) / (norm(a) * norm(b));
}

std::vector<DistancePair> clause_structure_pairs(const NetworkWeights& original,
                                                 const NetworkWeights& erased, const Formula& f,
                                                 const std::vector<int>& targets,
                                                 const std::vector<NeuronSign>& signs) {
    if (!original.same_shape(erased))
        throw StructuralError("clause_structure_pairs: model shapes differ");
    const std::set<int> target_set(targets.begin(), targets.end());

    std::vector<DistancePair> out;
    out.reserve(static_cast<std::size_t>(original.hidden_dim) * f.clauses.size());
    for (int j = 0; j < original.hidden_dim; ++j) {
        for (int c = 0; c < f.num_clauses(); ++c) {
            const Clause& clause = f.clauses[static_cast<std::size_t>(c)];
            const auto u = clause_vector(original, j, clause);
            const auto v = clause_vector(erased, j, clause);
            DistancePair p;
            p.neuron = j;
            p.clause = c;
            p.target_clause = target_set.count(c) > 0;
            p.sign = signs[static_cast<std::size_t>(j)];
            if (norm(u) < kDegenerateNorm || norm(v) < kDegenerateNorm) {
                p.excluded = true;
            } else {
                p.distance = cosine_distance(u, v);
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

ClauseStructureDistance clause_structure_distance(const NetworkWeights& original,
                                                  const NetworkWeights& erased, const Formula& f,
                                                  const std::vector<NeuronSign>& signs) {
    const auto pairs = clause_structure_pairs(original, erased, f, {}, signs);
    ClauseStructureDistance d;
    double sum_pos = 0.0, sum_neg = 0.0;
    for (const DistancePair& p : pairs) {
        if (p.excluded) {
            ++d.excluded;
            continue;
        }
        if (p.sign == NeuronSign::Positive) {
            sum_pos += p.distance;
            ++d.pairs_pos;
        } else {
            sum_neg += p.distance;
            ++d.pairs_neg;
        }
    }
    if (d.pairs_pos > 0) d.dist_pos = sum_pos / d.pairs_pos;
    if (d.pairs_neg > 0) d.dist_neg = sum_neg / d.pairs_neg;
    return d;
}

std::vector<RecoveryDecomposition> decompose_recovery(const NetworkWeights& original,
                                                      const NetworkWeights& erased,
                                                      const NetworkWeights& recovered,
                                                      const Formula& f,
                                                      const std::vector<int>& targets,
                                                      const std::vector<NeuronSign>& signs) {
    if (!original.same_shape(erased) || !original.same_shape(recovered))
        throw StructuralError("decompose_recovery: model shapes differ");
    const std::set<int> target_set(targets.begin(), targets.end());

    std::vector<RecoveryDecomposition> out;
    out.reserve(static_cast<std::size_t>(original.hidden_dim) * f.clauses.size());
    for (int j = 0; j < original.hidden_dim; ++j) {
        for (int c = 0; c < f.num_clauses(); ++c) {
            const Clause& clause = f.clauses[static_cast<std::size_t>(c)];
            RecoveryDecomposition d;
            d.neuron = j;
            d.clause = c;
            d.clause_type = target_set.count(c) ? ClauseType::Target : ClauseType::Control;
            d.neuron_sign = signs[static_cast<std::size_t>(j)];

            const auto orig = clause_vector(original, j, clause);
            const auto eras = clause_vector(erased, j, clause);
            const auto reco = clause_vector(recovered, j, clause);
            d.d0.resize(orig.size());
            d.df.resize(orig.size());
            for (std::size_t i = 0; i < orig.size(); ++i) {
                d.d0[i] = eras[i] - orig[i];
                d.df[i] = reco[i] - eras[i];
            }

            const double n0 = norm(d.d0);
            const double nf = norm(d.df);
            d.magnitude = nf;
            if (n0 < kDegenerateNorm || nf < kDegenerateNorm) {
                d.excluded = true;
            } else {
                // df_par = (df.d0 / ||d0||^2) d0; fraction = ||df_par|| / ||df||
                const double coeff = dot(d.df, d.d0) / (n0 * n0);
                d.parallel_fraction = std::abs(coeff) * n0 / nf;
            }
            out.push_back(std::move(d));
        }
    }
    return out;
}

double quantile(std::vector<double> sorted_values, double p) {
    if (sorted_values.empty()) throw StructuralError("quantile of empty sample");
    const double h = p * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted_values.size()) return sorted_values.back();
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

AggregateStats aggregate_recovery_stats(const std::vector<RecoveryTime>& times) {
    if (times.empty()) throw StructuralError("aggregate_recovery_stats needs at least one run");
    AggregateStats s;
    s.n_total = static_cast<int>(times.size());

    std::vector<double> reached;
    for (const RecoveryTime& t : times)
        if (t.reached) reached.push_back(static_cast<double>(*t.epoch));
    s.n = static_cast<int>(reached.size());
    s.not_reached_pct = 100.0 * static_cast<double>(s.n_total - s.n) / s.n_total;

    if (!reached.empty()) {
        std::sort(reached.begin(), reached.end());
        s.median = quantile(reached, 0.5);
        s.q25 = quantile(reached, 0.25);
        s.q75 = quantile(reached, 0.75);
        double sum = 0.0;
        for (double v : reached) sum += v;
        s.mean = sum / s.n;
        double ss = 0.0;
        for (double v : reached) ss += (v - s.mean) * (v - s.mean);
        s.std_dev = std::sqrt(ss / s.n);
    }
    return s;
}

AggregateStats aggregate_values(const std::vector<double>& values) {
    AggregateStats s;
    s.n = s.n_total = static_cast<int>(values.size());
    if (values.empty()) return s;

    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / s.n);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.median = quantile(sorted, 0.5);
    s.q25 = quantile(sorted, 0.25);
    s.q75 = quantile(sorted, 0.75);
    return s;
}

} // namespace eraselab
