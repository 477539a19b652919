#include "eraselab/dnf.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "eraselab/errors.hpp"

namespace eraselab {

bool Clause::contains(int v) const {
    return std::binary_search(vars.begin(), vars.end(), v);
}

int Assignment::count_active() const {
    int n = 0;
    for (auto v : values) n += (v != 0);
    return n;
}

std::vector<int> Assignment::active_indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (values[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
}

void check_formula(const Formula& f) {
    if (f.num_vars <= 0) throw StructuralError("formula has no variables");
    if (!f.shared_map.empty() && f.shared_map.size() != f.clauses.size())
        throw StructuralError("shared_map size does not match clause count");
    for (std::size_t ci = 0; ci < f.clauses.size(); ++ci) {
        const Clause& c = f.clauses[ci];
        if (c.vars.empty())
            throw StructuralError("clause " + std::to_string(ci) + " is empty");
        if (!std::is_sorted(c.vars.begin(), c.vars.end()))
            throw StructuralError("clause " + std::to_string(ci) + " is not sorted");
        if (std::adjacent_find(c.vars.begin(), c.vars.end()) != c.vars.end())
            throw StructuralError("clause " + std::to_string(ci) + " has duplicate variables");
        if (c.vars.front() < 0 || c.vars.back() >= f.num_vars)
            throw StructuralError("clause " + std::to_string(ci) + " has out-of-range variable");
    }
}

bool clause_satisfied(const Clause& c, const Assignment& a) {
    for (int v : c.vars) {
        if (v < 0 || v >= a.size())
            throw StructuralError("clause variable " + std::to_string(v) +
                                  " out of range for assignment of size " +
                                  std::to_string(a.size()));
        if (!a.is_true(v)) return false;
    }
    return true;
}

bool formula_satisfied(const Formula& f, const Assignment& a) {
    if (a.size() != f.num_vars)
        throw StructuralError("assignment length " + std::to_string(a.size()) +
                              " != formula num_vars " + std::to_string(f.num_vars));
    for (const Clause& c : f.clauses)
        if (clause_satisfied(c, a)) return true;
    return false;
}

int count_satisfied(const Formula& f, const Assignment& a) {
    int n = 0;
    for (const Clause& c : f.clauses) n += clause_satisfied(c, a);
    return n;
}

std::optional<int> unique_satisfied(const Formula& f, const Assignment& a) {
    std::optional<int> hit;
    for (int i = 0; i < f.num_clauses(); ++i) {
        if (clause_satisfied(f.clauses[static_cast<std::size_t>(i)], a)) {
            if (hit) return std::nullopt;
            hit = i;
        }
    }
    return hit;
}

namespace {

void check_gen_config(const GenConfig& cfg) {
    if (cfg.num_clauses < 1 || cfg.clause_size < 1)
        throw ConfigError("num_clauses and clause_size must be positive");
    if (cfg.clauses_to_erase.empty())
        throw ConfigError("clauses_to_erase must not be empty");
    for (int t : cfg.clauses_to_erase)
        if (t < 0 || t >= cfg.num_clauses)
            throw ConfigError("target clause index " + std::to_string(t) + " out of range");
    if (cfg.min_extra_active < 1 || cfg.active_window < 1)
        throw ConfigError("active window must have min_extra_active >= 1 and width >= 1");
    if (cfg.shared) {
        if (cfg.overlap_per_clause < 1 || cfg.overlap_per_clause >= cfg.clause_size)
            throw ConfigError("overlap_per_clause must be in [1, clause_size)");
        const int controls = cfg.num_clauses - static_cast<int>(cfg.clauses_to_erase.size());
        if (cfg.num_sharing_clauses < 1 || cfg.num_sharing_clauses > controls)
            throw ConfigError("num_sharing_clauses must be in [1, number of control clauses]");
    }
}

} // namespace

Formula generate_formula(const GenConfig& cfg, Rng& rng) {
    check_gen_config(cfg);

    const int n = cfg.num_vars();
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    Formula f;
    f.num_vars = n;
    f.clauses.resize(static_cast<std::size_t>(cfg.num_clauses));
    f.shared_map.assign(static_cast<std::size_t>(cfg.num_clauses), {});
    for (int i = 0; i < cfg.num_clauses; ++i) {
        auto first = perm.begin() + static_cast<std::ptrdiff_t>(i) * cfg.clause_size;
        f.clauses[static_cast<std::size_t>(i)].vars.assign(first, first + cfg.clause_size);
        std::sort(f.clauses[static_cast<std::size_t>(i)].vars.begin(),
                  f.clauses[static_cast<std::size_t>(i)].vars.end());
    }

    if (cfg.shared) {
        const std::set<int> targets(cfg.clauses_to_erase.begin(), cfg.clauses_to_erase.end());
        std::vector<int> controls;
        for (int i = 0; i < cfg.num_clauses; ++i)
            if (!targets.count(i)) controls.push_back(i);

        for (int k = 0; k < cfg.num_sharing_clauses; ++k) {
            const int c = controls[static_cast<std::size_t>(k)];
            const int t = cfg.clauses_to_erase[static_cast<std::size_t>(k) %
                                               cfg.clauses_to_erase.size()];
            Clause& control = f.clauses[static_cast<std::size_t>(c)];
            const Clause& target = f.clauses[static_cast<std::size_t>(t)];

            std::vector<int> borrowed = rng.sample(target.vars, cfg.overlap_per_clause);
            std::vector<int> dropped = rng.sample(control.vars, cfg.overlap_per_clause);

            std::vector<int> vars;
            for (int v : control.vars)
                if (std::find(dropped.begin(), dropped.end(), v) == dropped.end())
                    vars.push_back(v);
            vars.insert(vars.end(), borrowed.begin(), borrowed.end());
            std::sort(vars.begin(), vars.end());
            control.vars = std::move(vars);

            std::sort(borrowed.begin(), borrowed.end());
            f.shared_map[static_cast<std::size_t>(c)].emplace_back(t, borrowed);
            f.shared_map[static_cast<std::size_t>(t)].emplace_back(c, borrowed);
        }
    }

    check_formula(f);
    return f;
}

AssignmentSampler::AssignmentSampler(const Formula& f, SampleWindow win) : f_(&f), win_(win) {
    all_vars_.resize(static_cast<std::size_t>(f.num_vars));
    std::iota(all_vars_.begin(), all_vars_.end(), 0);
    complement_.reserve(f.clauses.size());
    for (const Clause& c : f.clauses) {
        std::vector<int> comp;
        comp.reserve(static_cast<std::size_t>(f.num_vars - c.size()));
        for (int v = 0; v < f.num_vars; ++v)
            if (!c.contains(v)) comp.push_back(v);
        complement_.push_back(std::move(comp));
    }
}

Assignment AssignmentSampler::positive(int clause_idx, Rng& rng, int budget) {
    if (clause_idx < 0 || clause_idx >= f_->num_clauses())
        throw StructuralError("clause index " + std::to_string(clause_idx) + " out of range");
    const Clause& clause = f_->clauses[static_cast<std::size_t>(clause_idx)];
    const std::vector<int>& pool = complement_[static_cast<std::size_t>(clause_idx)];

    Assignment a;
    for (int attempt = 0; attempt < budget; ++attempt) {
        const int extras = win_.min_extra_active + rng.below_int(win_.active_window);
        a.values.assign(static_cast<std::size_t>(f_->num_vars), 0);
        for (int v : clause.vars) a.values[static_cast<std::size_t>(v)] = 1;

        // partial Fisher-Yates over the complement pool
        scratch_ = pool;
        for (int i = 0; i < extras; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) + rng.below(scratch_.size() - static_cast<std::size_t>(i));
            std::swap(scratch_[static_cast<std::size_t>(i)], scratch_[j]);
            a.values[static_cast<std::size_t>(scratch_[static_cast<std::size_t>(i)])] = 1;
        }

        bool other = false;
        for (int i = 0; i < f_->num_clauses() && !other; ++i)
            if (i != clause_idx && clause_satisfied(f_->clauses[static_cast<std::size_t>(i)], a))
                other = true;
        if (!other) return a;
    }
    throw GenerationError("positive sampling for clause " + std::to_string(clause_idx) +
                          " exhausted " + std::to_string(budget) +
                          " attempts; formula is over-constrained");
}

Assignment AssignmentSampler::negative(int anchor_clause_size, Rng& rng, int budget) {
    Assignment a;
    for (int attempt = 0; attempt < budget; ++attempt) {
        const int actives =
            anchor_clause_size + win_.min_extra_active + rng.below_int(win_.active_window);
        a.values.assign(static_cast<std::size_t>(f_->num_vars), 0);

        scratch_ = all_vars_;
        for (int i = 0; i < actives; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) + rng.below(scratch_.size() - static_cast<std::size_t>(i));
            std::swap(scratch_[static_cast<std::size_t>(i)], scratch_[j]);
            a.values[static_cast<std::size_t>(scratch_[static_cast<std::size_t>(i)])] = 1;
        }

        bool any = false;
        for (const Clause& c : f_->clauses)
            if (clause_satisfied(c, a)) { any = true; break; }
        if (!any) return a;
    }
    throw GenerationError("negative sampling exhausted " + std::to_string(budget) +
                          " attempts; formula is over-constrained");
}

Assignment sample_positive(const Formula& f, int clause_idx, const GenConfig& cfg, Rng& rng) {
    AssignmentSampler sampler(f, cfg.window());
    return sampler.positive(clause_idx, rng);
}

Assignment sample_negative(const Formula& f, const GenConfig& cfg, Rng& rng) {
    AssignmentSampler sampler(f, cfg.window());
    return sampler.negative(cfg.clause_size, rng);
}

Dataset build_dataset(const Formula& f, const std::vector<int>& source_clauses, int n,
                      double pos_fraction, const GenConfig& cfg, Rng& rng) {
    if (source_clauses.empty()) throw ConfigError("source_clauses must not be empty");
    if (!(pos_fraction > 0.0 && pos_fraction < 1.0))
        throw ConfigError("pos_fraction must be in (0, 1)");
    for (int c : source_clauses)
        if (c < 0 || c >= f.num_clauses())
            throw ConfigError("source clause " + std::to_string(c) + " out of range");

    AssignmentSampler sampler(f, cfg.window());
    const int n_pos = static_cast<int>(n * pos_fraction);

    Dataset ds;
    ds.num_vars = f.num_vars;
    ds.source_clauses = source_clauses;
    ds.samples.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n_pos; ++k) {
        const int c = source_clauses[static_cast<std::size_t>(k) % source_clauses.size()];
        ds.samples.push_back({sampler.positive(c, rng), true, c});
    }
    for (int k = n_pos; k < n; ++k)
        ds.samples.push_back({sampler.negative(cfg.clause_size, rng), false, std::nullopt});
    return ds;
}

} // namespace eraselab
