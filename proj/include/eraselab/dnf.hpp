#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "eraselab/rng.hpp"

namespace eraselab {

// One conjunction of positive literals. vars is sorted ascending, no duplicates.
struct Clause {
    std::vector<int> vars;

    int size() const { return static_cast<int>(vars.size()); }
    bool contains(int v) const;
};

// Boolean input vector; values[i] is the truth value of variable i.
struct Assignment {
    std::vector<std::uint8_t> values;

    int size() const { return static_cast<int>(values.size()); }
    bool is_true(int i) const { return values[static_cast<std::size_t>(i)] != 0; }
    int count_active() const;
    std::vector<int> active_indices() const;
};

// A pair (other clause index, variables shared with it).
using SharedEntry = std::pair<int, std::vector<int>>;

// Disjunction of clauses over num_vars boolean variables. shared_map[i] lists
// the clauses clause i shares variables with (empty everywhere for plain DNF).
struct Formula {
    int num_vars = 0;
    std::vector<Clause> clauses;
    std::vector<std::vector<SharedEntry>> shared_map;

    int num_clauses() const { return static_cast<int>(clauses.size()); }
};

// Throws StructuralError if the formula breaks its invariants.
void check_formula(const Formula& f);

// Width of the allowed active-variable count band for generated assignments:
// total actives land in [clause_size + min_extra_active,
//                        clause_size + min_extra_active + active_window - 1].
struct SampleWindow {
    int min_extra_active = 1;
    int active_window = 3;
};

struct GenConfig {
    int num_clauses = 4;
    int clause_size = 4;
    std::vector<int> clauses_to_erase = {0};
    bool shared = false;
    int overlap_per_clause = 2;    // variables a sharing control borrows from a target
    int num_sharing_clauses = 2;   // controls that share variables with targets
    int min_extra_active = 1;
    int active_window = 3;

    int num_vars() const { return num_clauses * clause_size; }
    SampleWindow window() const { return {min_extra_active, active_window}; }
};

struct LabeledSample {
    Assignment assignment;
    bool label = false;
    std::optional<int> satisfying_clause;  // set iff exactly one clause satisfied
};

struct Dataset {
    int num_vars = 0;
    std::vector<LabeledSample> samples;
    std::vector<int> source_clauses;  // clause indices the positives draw from

    int size() const { return static_cast<int>(samples.size()); }
};

bool clause_satisfied(const Clause& c, const Assignment& a);
bool formula_satisfied(const Formula& f, const Assignment& a);

// Number of satisfied clauses; index of the satisfied clause when exactly one.
int count_satisfied(const Formula& f, const Assignment& a);
std::optional<int> unique_satisfied(const Formula& f, const Assignment& a);

// Plain DNF: a random permutation of 0..num_vars-1 split into disjoint blocks
// of clause_size. Shared DNF additionally rewires the first
// num_sharing_clauses control clauses to borrow overlap_per_clause variables
// from the targets (round-robin across targets), recorded in shared_map.
Formula generate_formula(const GenConfig& cfg, Rng& rng);

inline constexpr int kRejectionBudget = 10000;

// Rejection sampler with per-formula precomputation reused across draws.
class AssignmentSampler {
public:
    AssignmentSampler(const Formula& f, SampleWindow win);

    // Satisfies clause_idx and no other clause; active count inside the window.
    Assignment positive(int clause_idx, Rng& rng, int budget = kRejectionBudget);

    // Satisfies no clause; active count window anchored at anchor_clause_size.
    Assignment negative(int anchor_clause_size, Rng& rng, int budget = kRejectionBudget);

private:
    const Formula* f_;
    SampleWindow win_;
    std::vector<std::vector<int>> complement_;  // per clause: variables outside it
    std::vector<int> all_vars_;
    std::vector<int> scratch_;
};

Assignment sample_positive(const Formula& f, int clause_idx, const GenConfig& cfg, Rng& rng);
Assignment sample_negative(const Formula& f, const GenConfig& cfg, Rng& rng);

// floor(n * pos_fraction) positives round-robin across source_clauses, the
// rest negatives anchored at cfg.clause_size. Order: positives then negatives.
Dataset build_dataset(const Formula& f, const std::vector<int>& source_clauses, int n,
                      double pos_fraction, const GenConfig& cfg, Rng& rng);

} // namespace eraselab
