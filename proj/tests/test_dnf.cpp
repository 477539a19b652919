#include "doctest.h"

#include <algorithm>
#include <set>

#include "eraselab/dnf.hpp"
#include "eraselab/errors.hpp"
#include "eraselab/rng.hpp"

using namespace eraselab;

namespace {

Assignment make_assignment(int num_vars, const std::vector<int>& active) {
    Assignment a;
    a.values.assign(static_cast<std::size_t>(num_vars), 0);
    for (int v : active) a.values[static_cast<std::size_t>(v)] = 1;
    return a;
}

// The four-clause example formula over 16 variables.
Formula example_formula() {
    Formula f;
    f.num_vars = 16;
    for (auto vars : {std::vector<int>{6, 10, 11, 15}, std::vector<int>{0, 3, 7, 9},
                      std::vector<int>{2, 4, 5, 12}, std::vector<int>{1, 8, 13, 14}}) {
        Clause c;
        c.vars = vars;
        f.clauses.push_back(c);
    }
    f.shared_map.resize(4);
    return f;
}

// Independent truth oracle: an assignment satisfies a clause iff the clause's
// variable bitmask is a subset of the assignment's bitmask.
bool mask_oracle(const Formula& f, std::uint32_t assignment_mask) {
    for (const Clause& c : f.clauses) {
        std::uint32_t cm = 0;
        for (int v : c.vars) cm |= 1u << v;
        if ((assignment_mask & cm) == cm) return true;
    }
    return false;
}

Assignment from_mask(int num_vars, std::uint32_t mask) {
    Assignment a;
    a.values.resize(static_cast<std::size_t>(num_vars));
    for (int v = 0; v < num_vars; ++v) a.values[static_cast<std::size_t>(v)] = (mask >> v) & 1u;
    return a;
}

} // namespace

TEST_SUITE("dnf") {

TEST_CASE("clause_satisfied on the example clause") {
    const Formula f = example_formula();
    const Assignment a = make_assignment(16, {6, 15, 11, 10});
    CHECK(clause_satisfied(f.clauses[0], a));
    CHECK_FALSE(clause_satisfied(f.clauses[1], a));
}

TEST_CASE("clause_satisfied is false on the all-false assignment") {
    const Formula f = example_formula();
    const Assignment a = make_assignment(16, {});
    for (const Clause& c : f.clauses) CHECK_FALSE(clause_satisfied(c, a));
}

TEST_CASE("clause_satisfied matches the conjunction truth table exhaustively") {
    Clause c;
    c.vars = {0, 1};
    for (std::uint32_t mask = 0; mask < 16; ++mask) {
        const Assignment a = from_mask(4, mask);
        const bool expected = ((mask >> 0) & 1u) && ((mask >> 1) & 1u);
        CHECK_EQ(clause_satisfied(c, a), expected);
    }
}

TEST_CASE("clause_satisfied rejects out-of-range indices") {
    Clause c;
    c.vars = {0, 9};
    const Assignment a = make_assignment(4, {0});
    CHECK_THROWS_AS(clause_satisfied(c, a), StructuralError);
}

TEST_CASE("formula_satisfied on the example formula") {
    const Formula f = example_formula();
    CHECK(formula_satisfied(f, make_assignment(16, {9, 3, 0, 7})));
    CHECK(formula_satisfied(f, make_assignment(16, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12,
                                                    13, 14, 15})));
    CHECK_FALSE(formula_satisfied(f, make_assignment(16, {6, 15, 11})));
}

TEST_CASE("formula_satisfied rejects length mismatch") {
    const Formula f = example_formula();
    CHECK_THROWS_AS(formula_satisfied(f, make_assignment(8, {})), StructuralError);
}

TEST_CASE("formula_satisfied agrees with the exhaustive mask oracle") {
    GenConfig cfg;
    cfg.num_clauses = 3;
    cfg.clause_size = 3;
    cfg.clauses_to_erase = {0};
    Rng rng(7);
    const Formula f = generate_formula(cfg, rng);
    REQUIRE_EQ(f.num_vars, 9);
    for (std::uint32_t mask = 0; mask < (1u << 9); ++mask)
        CHECK_EQ(formula_satisfied(f, from_mask(9, mask)), mask_oracle(f, mask));
}

TEST_CASE("generate_formula plain partitions all variables into disjoint clauses") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    Rng rng(11);
    const Formula f = generate_formula(cfg, rng);
    REQUIRE_EQ(f.num_clauses(), 4);
    std::set<int> seen;
    for (const Clause& c : f.clauses) {
        CHECK_EQ(c.size(), 4);
        for (int v : c.vars) CHECK(seen.insert(v).second);  // no variable reused
    }
    CHECK_EQ(static_cast<int>(seen.size()), 16);
    for (const auto& entries : f.shared_map) CHECK(entries.empty());
}

TEST_CASE("generate_formula shared has exact declared overlaps and no others") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    cfg.clauses_to_erase = {0};
    cfg.shared = true;
    cfg.overlap_per_clause = 2;
    cfg.num_sharing_clauses = 2;
    Rng rng(5);
    const Formula f = generate_formula(cfg, rng);

    auto overlap = [&](int i, int j) {
        std::vector<int> out;
        std::set_intersection(f.clauses[static_cast<std::size_t>(i)].vars.begin(),
                              f.clauses[static_cast<std::size_t>(i)].vars.end(),
                              f.clauses[static_cast<std::size_t>(j)].vars.begin(),
                              f.clauses[static_cast<std::size_t>(j)].vars.end(),
                              std::back_inserter(out));
        return static_cast<int>(out.size());
    };

    // Controls 1 and 2 each share exactly two variables with the target.
    CHECK_EQ(overlap(0, 1), 2);
    CHECK_EQ(overlap(0, 2), 2);
    CHECK_EQ(overlap(0, 3), 0);
    CHECK_EQ(overlap(1, 3), 0);
    CHECK_EQ(overlap(2, 3), 0);
    CHECK_EQ(f.shared_map[0].size(), 2);
    CHECK_EQ(f.shared_map[1].size(), 1);
    CHECK_EQ(f.shared_map[2].size(), 1);
    CHECK(f.shared_map[3].empty());
    for (const Clause& c : f.clauses) CHECK_EQ(c.size(), 4);
}

TEST_CASE("generate_formula is deterministic in the seed") {
    GenConfig cfg;
    cfg.num_clauses = 5;
    cfg.clause_size = 4;
    Rng a(99), b(99);
    const Formula fa = generate_formula(cfg, a);
    const Formula fb = generate_formula(cfg, b);
    REQUIRE_EQ(fa.num_clauses(), fb.num_clauses());
    for (int i = 0; i < fa.num_clauses(); ++i)
        CHECK_EQ(fa.clauses[static_cast<std::size_t>(i)].vars,
                 fb.clauses[static_cast<std::size_t>(i)].vars);
}

TEST_CASE("generate_formula rejects infeasible overlap configs") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    cfg.shared = true;
    cfg.overlap_per_clause = 4;  // must be < clause_size
    Rng rng(1);
    CHECK_THROWS_AS(generate_formula(cfg, rng), ConfigError);

    cfg.overlap_per_clause = 2;
    cfg.num_sharing_clauses = 4;  // only 3 controls exist
    CHECK_THROWS_AS(generate_formula(cfg, rng), ConfigError);
}

TEST_CASE("sample_positive satisfies exactly the requested clause inside the window") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    Rng rng(3);
    const Formula f = generate_formula(cfg, rng);
    AssignmentSampler sampler(f, cfg.window());

    for (int k = 0; k < 1000; ++k) {
        const Assignment a = sampler.positive(0, rng);
        const int active = a.count_active();
        CHECK_GE(active, 5);  // clause_size + min_extra
        CHECK_LE(active, 7);  // clause_size + min_extra + window - 1
        CHECK(clause_satisfied(f.clauses[0], a));
        for (int c = 1; c < 4; ++c)
            CHECK_FALSE(clause_satisfied(f.clauses[static_cast<std::size_t>(c)], a));
    }
}

TEST_CASE("sample_negative satisfies no clause inside the window") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    Rng rng(4);
    const Formula f = generate_formula(cfg, rng);
    AssignmentSampler sampler(f, cfg.window());

    for (int k = 0; k < 1000; ++k) {
        const Assignment a = sampler.negative(cfg.clause_size, rng);
        const int active = a.count_active();
        CHECK_GE(active, 5);
        CHECK_LE(active, 7);
        CHECK_EQ(count_satisfied(f, a), 0);
    }
}

TEST_CASE("build_dataset balances positives round-robin and labels correctly") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    Rng rng(8);
    const Formula f = generate_formula(cfg, rng);
    const Dataset ds = build_dataset(f, {0, 1, 2, 3}, 10000, 0.5, cfg, rng);

    REQUIRE_EQ(ds.size(), 10000);
    int per_clause[4] = {0, 0, 0, 0};
    int positives = 0;
    for (const LabeledSample& s : ds.samples) {
        CHECK_EQ(s.label, formula_satisfied(f, s.assignment));
        if (s.label) {
            ++positives;
            REQUIRE(s.satisfying_clause.has_value());
            ++per_clause[*s.satisfying_clause];
            CHECK_EQ(unique_satisfied(f, s.assignment), s.satisfying_clause);
        } else {
            CHECK_FALSE(s.satisfying_clause.has_value());
        }
    }
    CHECK_EQ(positives, 5000);
    for (int c = 0; c < 4; ++c) CHECK_EQ(per_clause[c], 1250);
}

TEST_CASE("build_dataset single source, tiny n") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    Rng rng(8);
    const Formula f = generate_formula(cfg, rng);
    const Dataset ds = build_dataset(f, {2}, 4, 0.5, cfg, rng);
    REQUIRE_EQ(ds.size(), 4);
    int positives = 0;
    for (const LabeledSample& s : ds.samples)
        if (s.label) {
            ++positives;
            CHECK_EQ(*s.satisfying_clause, 2);
        }
    CHECK_EQ(positives, 2);
}

TEST_CASE("build_dataset is deterministic in the seed") {
    GenConfig cfg;
    cfg.num_clauses = 4;
    cfg.clause_size = 4;
    Rng fr(8);
    const Formula f = generate_formula(cfg, fr);
    Rng a(21), b(21);
    const Dataset d1 = build_dataset(f, {0, 1}, 100, 0.5, cfg, a);
    const Dataset d2 = build_dataset(f, {0, 1}, 100, 0.5, cfg, b);
    REQUIRE_EQ(d1.size(), d2.size());
    for (int i = 0; i < d1.size(); ++i)
        CHECK_EQ(d1.samples[static_cast<std::size_t>(i)].assignment.values,
                 d2.samples[static_cast<std::size_t>(i)].assignment.values);
}

TEST_CASE("formula truth table matches oracle on random small formulas") {
    // Property over several shapes with num_vars <= 16.
    const std::vector<std::pair<int, int>> shapes = {{2, 2}, {3, 3}, {4, 4}, {2, 5}};
    for (auto [clauses, size] : shapes) {
        GenConfig cfg;
        cfg.num_clauses = clauses;
        cfg.clause_size = size;
        Rng rng(static_cast<std::uint64_t>(clauses * 100 + size));
        const Formula f = generate_formula(cfg, rng);
        const auto n = static_cast<std::uint32_t>(f.num_vars);
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
            CHECK_EQ(formula_satisfied(f, from_mask(f.num_vars, mask)), mask_oracle(f, mask));
    }
}

} // TEST_SUITE
