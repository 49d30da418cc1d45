#include "seidr/rank.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "seidr/errors.hpp"

namespace seidr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_scored(const std::vector<Candidate>& population) {
  if (population.empty()) throw EmptyPopulation("selection over an empty population");
  for (const auto& candidate : population) {
    if (!candidate.avg_score || !candidate.per_test_scores) {
      throw EmptyScores("candidate " + std::to_string(candidate.id) + " is not evaluated");
    }
  }
}

}  // namespace

std::vector<Candidate> tournament_select(const std::vector<Candidate>& population, int w) {
  require_scored(population);
  std::vector<Candidate> sorted = population;
  std::sort(sorted.begin(), sorted.end(), [](const Candidate& a, const Candidate& b) {
    if (*a.avg_score != *b.avg_score) return *a.avg_score > *b.avg_score;
    return a.id < b.id;
  });
  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, w)), sorted.size());
  sorted.resize(keep);
  return sorted;
}

LexicaseRound lexicase_round_plan(std::size_t num_tests, std::uint64_t seed, std::size_t round) {
  // mt19937_64 output is pinned by the standard; index draws use plain modulo
  // so the plan is identical on every platform.
  std::mt19937_64 engine(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(round) + 1)));
  LexicaseRound plan;
  plan.test_order.resize(num_tests);
  std::iota(plan.test_order.begin(), plan.test_order.end(), std::size_t{0});
  for (std::size_t i = num_tests; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(engine() % i);
    std::swap(plan.test_order[i - 1], plan.test_order[j]);
  }
  plan.tie_draw = engine();
  return plan;
}

std::vector<std::size_t> lexicase_filter(const std::vector<Candidate>& population,
                                         const std::vector<std::size_t>& candidate_pool,
                                         const std::vector<std::size_t>& test_order) {
  std::vector<std::size_t> pool = candidate_pool;
  for (std::size_t test : test_order) {
    if (pool.size() <= 1) break;
    double best = -1.0;
    for (std::size_t idx : pool) {
      best = std::max(best, (*population[idx].per_test_scores)[test]);
    }
    std::vector<std::size_t> survivors;
    for (std::size_t idx : pool) {
      if ((*population[idx].per_test_scores)[test] == best) survivors.push_back(idx);
    }
    pool = std::move(survivors);
  }
  return pool;
}

std::vector<Candidate> lexicase_select(const std::vector<Candidate>& population, int w,
                                       std::uint64_t seed) {
  require_scored(population);
  const std::size_t num_tests = population.front().per_test_scores->size();
  if (num_tests == 0) throw ScoreLengthMismatch("candidates carry empty score vectors");
  for (const auto& candidate : population) {
    if (candidate.per_test_scores->size() != num_tests) {
      throw ScoreLengthMismatch("candidate " + std::to_string(candidate.id) +
                                " has a score vector of different length");
    }
  }

  std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, w)),
                                           population.size());
  std::vector<std::size_t> remaining(population.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});

  std::vector<Candidate> selected;
  selected.reserve(want);
  for (std::size_t round = 0; selected.size() < want; ++round) {
    LexicaseRound plan = lexicase_round_plan(num_tests, seed, round);
    std::vector<std::size_t> survivors = lexicase_filter(population, remaining, plan.test_order);
    std::size_t pick = survivors.size() == 1
                           ? survivors.front()
                           : survivors[static_cast<std::size_t>(plan.tie_draw % survivors.size())];
    selected.push_back(population[pick]);
    remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
  }
  return selected;
}

}  // namespace seidr
