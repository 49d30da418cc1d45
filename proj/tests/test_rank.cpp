#include <doctest.h>

#include <map>

#include "seidr/rank.hpp"

using namespace seidr;

namespace {

Candidate scored(int id, std::vector<double> per_test) {
  Candidate candidate;
  candidate.id = id;
  candidate.per_test_scores = per_test;
  double total = 0;
  for (double s : per_test) total += s;
  candidate.avg_score = per_test.empty() ? 0.0 : total / static_cast<double>(per_test.size());
  return candidate;
}

std::vector<int> ids(const std::vector<Candidate>& candidates) {
  std::vector<int> out;
  for (const auto& candidate : candidates) out.push_back(candidate.id);
  return out;
}

}  // namespace

TEST_CASE("tournament keeps the top-w by average score") {
  std::vector<Candidate> population{
      scored(0, {0.9}), scored(1, {0.5}), scored(2, {0.1})};
  CHECK(ids(tournament_select(population, 2)) == std::vector<int>{0, 1});
}

TEST_CASE("tournament returns the whole population in score order when w is large") {
  std::vector<Candidate> population{scored(0, {0.2}), scored(1, {0.8}), scored(2, {0.5})};
  CHECK(ids(tournament_select(population, 10)) == std::vector<int>{1, 2, 0});
}

TEST_CASE("tournament breaks ties by creation order") {
  std::vector<Candidate> population{scored(3, {0.5}), scored(1, {0.5}), scored(2, {0.5})};
  CHECK(ids(tournament_select(population, 1)) == std::vector<int>{1});
}

TEST_CASE("tournament leaves the input unmodified and rejects empties") {
  std::vector<Candidate> population{scored(0, {0.1}), scored(1, {0.9})};
  auto copy_ids = ids(population);
  tournament_select(population, 1);
  CHECK(ids(population) == copy_ids);

  std::vector<Candidate> empty;
  CHECK_THROWS_AS(tournament_select(empty, 1), EmptyPopulation);
}

TEST_CASE("lexicase filter follows the ordered-test elimination") {
  // A wins on test 0, B wins on test 1, C is the averager.
  std::vector<Candidate> population{
      scored(0, {1.0, 0.0}), scored(1, {0.0, 1.0}), scored(2, {0.5, 0.5})};
  std::vector<std::size_t> pool{0, 1, 2};

  CHECK(lexicase_filter(population, pool, {0, 1}) == std::vector<std::size_t>{0});
  CHECK(lexicase_filter(population, pool, {1, 0}) == std::vector<std::size_t>{1});
}

TEST_CASE("lexicase with one test behaves like repeated argmax") {
  std::vector<Candidate> population{
      scored(0, {0.3}), scored(1, {0.9}), scored(2, {0.6})};
  auto selected = lexicase_select(population, 3, 123);
  CHECK(ids(selected) == std::vector<int>{1, 2, 0});
}

TEST_CASE("lexicase compares fractional scores directly") {
  std::vector<Candidate> population{scored(0, {0.5, 0.4}), scored(1, {0.6, 0.1})};
  // candidate 1 wins any ordering that starts with test 0; candidate 0
  // wins orderings starting with test 1
  CHECK(lexicase_filter(population, {0, 1}, {0}) == std::vector<std::size_t>{1});
  CHECK(lexicase_filter(population, {0, 1}, {1}) == std::vector<std::size_t>{0});
}

TEST_CASE("lexicase selects distinct candidates without replacement") {
  std::vector<Candidate> population{
      scored(0, {1.0, 0.0}), scored(1, {0.0, 1.0}), scored(2, {0.5, 0.5})};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto selected = lexicase_select(population, 3, seed);
    auto selected_ids = ids(selected);
    std::sort(selected_ids.begin(), selected_ids.end());
    CHECK(selected_ids == std::vector<int>{0, 1, 2});
  }
}

TEST_CASE("lexicase final ties are resolved approximately uniformly") {
  std::vector<Candidate> population;
  for (int i = 0; i < 4; ++i) population.push_back(scored(i, {0.5, 0.5}));

  std::map<int, int> first_pick_counts;
  const int trials = 1000;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    auto selected = lexicase_select(population, 2, seed);
    REQUIRE(selected.size() == 2);
    CHECK(selected[0].id != selected[1].id);
    for (const auto& candidate : selected) first_pick_counts[candidate.id]++;
  }
  for (int i = 0; i < 4; ++i) {
    double freq = first_pick_counts[i] / static_cast<double>(trials);
    CHECK(freq == doctest::Approx(0.5).epsilon(0.1));  // 2 of 4 selected => 0.5 each
  }
}

TEST_CASE("lexicase selection is replayable from its seed") {
  std::vector<Candidate> population{
      scored(0, {1.0, 0.0, 0.5}), scored(1, {0.0, 1.0, 0.5}), scored(2, {0.5, 0.5, 0.5}),
      scored(3, {1.0, 1.0, 0.0})};
  CHECK(ids(lexicase_select(population, 2, 99)) == ids(lexicase_select(population, 2, 99)));
}

TEST_CASE("lexicase validates the score vectors") {
  std::vector<Candidate> empty;
  CHECK_THROWS_AS(lexicase_select(empty, 1, 0), EmptyPopulation);

  std::vector<Candidate> mismatched{scored(0, {1.0, 0.0}), scored(1, {1.0})};
  CHECK_THROWS_AS(lexicase_select(mismatched, 1, 0), ScoreLengthMismatch);
}

TEST_CASE("scaling all scores by a positive constant changes nothing") {
  std::vector<Candidate> population{
      scored(0, {1.0, 0.0, 0.5}), scored(1, {0.0, 1.0, 1.0}), scored(2, {0.5, 0.5, 0.0})};
  std::vector<Candidate> scaled = population;
  for (auto& candidate : scaled) {
    for (auto& score : *candidate.per_test_scores) score *= 0.25;
    *candidate.avg_score *= 0.25;
  }
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CHECK(ids(lexicase_select(population, 2, seed)) == ids(lexicase_select(scaled, 2, seed)));
  }
  CHECK(ids(tournament_select(population, 2)) == ids(tournament_select(scaled, 2)));
}
