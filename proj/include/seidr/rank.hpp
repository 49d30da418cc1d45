#pragma once

#include <cstdint>
#include <vector>

#include "seidr/core.hpp"

namespace seidr {

// Top-w candidates by average validation score, descending, ties broken by
// lower id (older first). The population itself is not modified.
std::vector<Candidate> tournament_select(const std::vector<Candidate>& population, int w);

// The randomness one lexicase round consumes: a shuffled test order plus one
// draw used to break a tie that survives every test. Derived from
// (seed, round) so runs replay exactly; the brute-force reference in the test
// suite consumes the same plan.
struct LexicaseRound {
  std::vector<std::size_t> test_order;
  std::uint64_t tie_draw = 0;
};

LexicaseRound lexicase_round_plan(std::size_t num_tests, std::uint64_t seed, std::size_t round);

// One lexicase filtering pass over an explicit test order: keep the best
// scorers on test_order[0], break ties on test_order[1], and so on. Returns
// the indices of the survivors (more than one only when candidates tie on
// every test).
std::vector<std::size_t> lexicase_filter(const std::vector<Candidate>& population,
                                         const std::vector<std::size_t>& candidate_pool,
                                         const std::vector<std::size_t>& test_order);

// Repeats shuffled-order filtering until min(w, |population|) distinct
// candidates are selected (without replacement). Per-test scores are compared
// as-is, fractions included. Requires every candidate to carry score vectors
// of one common length T >= 1.
std::vector<Candidate> lexicase_select(const std::vector<Candidate>& population, int w,
                                       std::uint64_t seed);

}  // namespace seidr
