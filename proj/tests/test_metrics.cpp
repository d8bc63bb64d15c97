#include "pbeval/metrics.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace pbeval;
using test_support::fixture;
using test_support::make_instance;
using test_support::make_profile;
using test_support::rat;

TEST_CASE("voter representation in points and count mode") {
  Ballot ballot;
  ballot.voter_id = "v";
  ballot.entries = {{"A", 7}, {"B", 3}};

  CHECK(voter_representation(ballot, {"A"}, RepresentationMode::points) == rat(7, 10));
  CHECK(voter_representation(ballot, {"A", "B"}, RepresentationMode::points) == rat(1));
  CHECK(voter_representation(ballot, {"A"}, RepresentationMode::count) == rat(1, 2));
  CHECK(voter_representation(ballot, {}, RepresentationMode::points) == rat(0));

  Ballot empty;
  CHECK_FALSE(voter_representation(empty, {"A"}, RepresentationMode::points).has_value());
}

TEST_CASE("points mode equals count mode on approval ballots") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Ballot ballot;
    std::set<std::string> winners;
    for (int p = 0; p < 6; ++p) {
      std::string id = "P" + std::to_string(p);
      if (coin(rng)) ballot.entries.push_back({id, 1});
      if (coin(rng)) winners.insert(id);
    }
    auto points = voter_representation(ballot, winners, RepresentationMode::points);
    auto count = voter_representation(ballot, winners, RepresentationMode::count);
    CHECK(points == count);
  }
}

TEST_CASE("representation curve counts voters at or above each threshold") {
  auto profile = make_profile({{"v1", {{"A", 1}, {"B", 1}}}, {"v2", {{"A", 1}}}});
  // v1 is at 1/2, v2 at 1.
  std::vector<Rational> thresholds = {rat(1, 10), rat(6, 10)};
  auto curve = representation_curve(profile, {"A"}, thresholds, RepresentationMode::points);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].second == rat(1));
  CHECK(curve[1].second == rat(1, 2));
}

TEST_CASE("fully represented voters sit at share one everywhere") {
  auto profile = make_profile({{"v1", {{"A", 5}}}, {"v2", {{"A", 2}}}});
  auto thresholds = default_thresholds();
  auto curve = representation_curve(profile, {"A"}, thresholds, RepresentationMode::points);
  for (const auto& [t, share] : curve) CHECK(share == rat(1));
}

TEST_CASE("curve is non-increasing and hits 1 below the minimum score") {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> points_dist(1, 9);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    Profile profile;
    std::set<std::string> winners;
    for (int p = 0; p < 5; ++p) {
      if (coin(rng)) winners.insert("P" + std::to_string(p));
    }
    for (int v = 0; v < 6; ++v) {
      Ballot ballot;
      ballot.voter_id = "v" + std::to_string(v);
      for (int p = 0; p < 5; ++p) {
        if (coin(rng)) ballot.entries.push_back({"P" + std::to_string(p), points_dist(rng)});
      }
      profile.ballots.push_back(std::move(ballot));
    }
    auto thresholds = default_thresholds();
    auto curve = representation_curve(profile, winners, thresholds, RepresentationMode::points);
    for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second <= curve[i - 1].second);

    std::optional<Rational> smallest;
    for (const auto& ballot : profile.ballots) {
      auto r = voter_representation(ballot, winners, RepresentationMode::points);
      if (r && (!smallest || *r < *smallest)) smallest = r;
    }
    if (smallest) {
      for (const auto& [t, share] : curve) {
        if (t <= *smallest) CHECK(share == rat(1));
      }
    }
  }
}

TEST_CASE("representation stats expose mean and excluded voters") {
  auto profile = make_profile({{"v1", {{"A", 7}, {"B", 3}}}, {"v2", {{"B", 10}}}});
  Ballot empty;
  empty.voter_id = "ghost";
  profile.ballots.push_back(empty);

  auto stats = representation_stats(profile, {"A"}, RepresentationMode::points,
                                    default_thresholds());
  CHECK(stats.defined_voters == 2);
  CHECK(stats.excluded_voters == 1);
  CHECK(stats.mean == rat(7, 20));  // (7/10 + 0)/2
}

TEST_CASE("exclusive representation scores only the winner-set difference") {
  auto profile = make_profile({{"v1", {{"A", 5}, {"B", 5}}}});
  auto stats = exclusive_representation(profile, {"A", "B"}, {"A"}, RepresentationMode::points,
                                        default_thresholds());
  CHECK(stats.per_voter[0].second == rat(1, 2));  // only B is exclusive

  auto identical = exclusive_representation(profile, {"A"}, {"A"}, RepresentationMode::points,
                                            default_thresholds());
  CHECK(identical.per_voter[0].second == rat(0));
}

TEST_CASE("index of dispersion") {
  std::vector<Rational> constant = {rat(1, 2), rat(1, 2), rat(1, 2)};
  CHECK(index_of_dispersion(constant) == rat(0));

  std::vector<Rational> simple = {rat(0), rat(1)};
  CHECK(index_of_dispersion(simple) == rat(1, 2));

  std::vector<Rational> permuted = {rat(1), rat(0)};
  CHECK(index_of_dispersion(permuted) == rat(1, 2));

  std::vector<Rational> zeros = {rat(0), rat(0)};
  CHECK_THROWS_AS(index_of_dispersion(zeros), std::invalid_argument);
  CHECK_THROWS_AS(index_of_dispersion(std::vector<Rational>{}), std::invalid_argument);
}

TEST_CASE("district tallies and spatial fairness gain") {
  std::ifstream in(fixture("districts.pb"), std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  auto parsed = parse_pb(buffer.str());

  auto tally = district_tally(parsed.instance, {"p1", "p3", "p4"});
  CHECK(tally.per_district.at("d1") == std::pair<long long, long long>{2, 1});
  CHECK(tally.per_district.at("d2") == std::pair<long long, long long>{2, 2});
  CHECK(tally.per_district.at("d3") == std::pair<long long, long long>{2, 0});
  CHECK(dispersion(tally) == rat(1, 3));  // variance 1/6 over mean 1/2

  SUBCASE("identical tallies have zero gain") {
    CHECK(spatial_fairness_gain(tally, tally) == rat(0));
  }
  SUBCASE("hand-derived gain: dispersions 1/4 vs 1/2 reduce by 1/2") {
    // Ratio lists (0, 1/2) and (0, 1) have dispersions 1/4 and 1/2.
    DistrictTally fair;
    fair.per_district["x"] = {2, 0};
    fair.per_district["y"] = {2, 1};
    fair.ratios["x"] = rat(0);
    fair.ratios["y"] = rat(1, 2);
    DistrictTally baseline;
    baseline.per_district["x"] = {2, 0};
    baseline.per_district["y"] = {2, 2};
    baseline.ratios["x"] = rat(0);
    baseline.ratios["y"] = rat(1);
    CHECK(dispersion(fair) == rat(1, 4));
    CHECK(dispersion(baseline) == rat(1, 2));
    CHECK(spatial_fairness_gain(fair, baseline) == rat(1, 2));
  }
  SUBCASE("mismatched district sets are rejected") {
    DistrictTally other = tally;
    other.per_district.erase("d3");
    CHECK_THROWS_AS(spatial_fairness_gain(other, tally), std::invalid_argument);
  }
}

TEST_CASE("category shares normalize incidences") {
  std::vector<Project> projects(2);
  projects[0].categories = {"health"};
  projects[1].categories = {"health", "sport"};
  auto shares = category_shares(projects);
  CHECK(shares.at("health") == rat(2, 3));
  CHECK(shares.at("sport") == rat(1, 3));

  CHECK(category_shares(std::vector<Project>{}).empty());

  std::vector<Project> untagged(1);
  auto with_untagged = category_shares(untagged);
  CHECK(with_untagged.at("uncategorized") == rat(1));

  SUBCASE("shares sum to one whenever an incidence exists") {
    Rational sum = 0;
    for (const auto& [tag, share] : shares) sum += share;
    CHECK(sum == rat(1));
  }
}

TEST_CASE("budget statistics") {
  auto instance = make_instance(100, {{"A", 50}, {"B", 50}});
  auto stats = budget_stats(instance);
  CHECK(stats.relative_budget_allocation == rat(1));
  CHECK(stats.project_budget_share == rat(1, 2));
  CHECK(stats.mean_budget_share == stats.project_budget_share);

  auto single = make_instance(100, {{"A", 100}});
  auto single_stats = budget_stats(single);
  CHECK(single_stats.relative_budget_allocation == rat(1));
  CHECK(single_stats.project_budget_share == rat(1));

  CHECK_THROWS_AS(budget_stats(make_instance(100, {})), std::invalid_argument);
}

TEST_CASE("support coverage") {
  auto profile = make_profile({{"v1", {{"A", 5}}}, {"v2", {{"B", 5}}}, {"v3", {{"C", 5}}}});
  CHECK(support_coverage(profile, {"A", "B"}) == rat(2, 3));
  CHECK(support_coverage(profile, {}) == rat(0));
}

namespace {

ElectionSummary sample_summary(const std::string& id, long long projects, long long budget,
                               long long total) {
  ElectionSummary s;
  s.id = id;
  s.ok = true;
  s.num_projects = projects;
  s.budget = Money::from_major(Rational(budget));
  s.total_cost = Money::from_major(Rational(total));
  s.mean_cost = s.total_cost.value() / Rational(projects);
  return s;
}

}  // namespace

TEST_CASE("quartile matching") {
  std::vector<ElectionSummary> corpus;
  for (int i = 1; i <= 8; ++i) {
    corpus.push_back(sample_summary("c" + std::to_string(i), i, 100, 100));
  }

  SUBCASE("no criteria keeps the whole corpus") {
    auto match = quartile_match(corpus, std::vector<MatchCriterion>{});
    CHECK(match.matched.size() == 8);
  }
  SUBCASE("top quartile of 8 distinct project counts is the top 2") {
    std::vector<MatchCriterion> criteria = {MatchCriterion::num_projects_q4};
    auto match = quartile_match(corpus, criteria);
    CHECK(match.matched == std::vector<std::string>{"c7", "c8"});
  }
  SUBCASE("a tie block straddling a boundary takes the lower quartile") {
    std::vector<Rational> values = {rat(1), rat(2), rat(2), rat(2), rat(5), rat(6), rat(7), rat(8)};
    // ranks 2..4 all hold value 2; rank 2 is Q1, so the whole block is Q1
    CHECK(quartile_of(rat(2), values) == 1);
    CHECK(quartile_of(rat(1), values) == 1);
    CHECK(quartile_of(rat(5), values) == 3);
    CHECK(quartile_of(rat(8), values) == 4);
  }
}

TEST_CASE("quartile matching on the frozen fixture corpus") {
  CorpusScan scan = scan_corpus(fixture("corpus_frozen"));
  REQUIRE(scan.summaries.size() == 16);
  REQUIRE(scan.failures.empty());

  std::vector<MatchCriterion> all = {MatchCriterion::num_projects_q4,
                                     MatchCriterion::relative_budget_allocation_q1,
                                     MatchCriterion::project_budget_share_q1};

  // Frozen expectations, computed independently from the fixture definitions.
  auto match_p = quartile_match(scan.summaries, std::vector<MatchCriterion>{all[0]});
  CHECK(match_p.matched == std::vector<std::string>{"e13", "e14", "e15", "e16"});
  auto match_rba = quartile_match(scan.summaries, std::vector<MatchCriterion>{all[1]});
  CHECK(match_rba.matched ==
        std::vector<std::string>{"e03", "e05", "e06", "e09", "e11", "e13", "e14", "e15", "e16"});
  auto match_pbs = quartile_match(scan.summaries, std::vector<MatchCriterion>{all[2]});
  CHECK(match_pbs.matched == std::vector<std::string>{"e07", "e10", "e12", "e16"});
  auto match_all = quartile_match(scan.summaries, all);
  CHECK(match_all.matched == std::vector<std::string>{"e16"});

  SUBCASE("adding criteria can only shrink the match") {
    for (size_t mask = 0; mask < 8; ++mask) {
      std::vector<MatchCriterion> subset;
      for (size_t i = 0; i < 3; ++i) {
        if (mask & (size_t{1} << i)) subset.push_back(all[i]);
      }
      auto narrow = quartile_match(scan.summaries, subset);
      std::set<std::string> narrow_set(narrow.matched.begin(), narrow.matched.end());
      for (const auto& id : match_all.matched) CHECK(narrow_set.count(id) == 1);
      CHECK(narrow.matched.size() >= match_all.matched.size());
    }
  }
}

TEST_CASE("pairwise win ranking") {
  std::vector<PairwiseComparison> records = {{"a", "b", "a"}, {"a", "c", "a"}, {"b", "c", "tie"}};
  auto ranking = pairwise_win_ranking(records);
  REQUIRE(ranking.size() == 3);
  CHECK(ranking[0].project == "a");
  CHECK(ranking[0].wins == 2);
  CHECK(ranking[0].rank == 1);
  CHECK(ranking[1].wins == 0);
  CHECK(ranking[1].rank == 2);
  CHECK(ranking[2].wins == 0);
  CHECK(ranking[2].rank == 2);

  CHECK(pairwise_win_ranking(std::vector<PairwiseComparison>{}).empty());

  std::vector<PairwiseComparison> self = {{"a", "a", "a"}};
  CHECK_THROWS_AS(pairwise_win_ranking(self), std::invalid_argument);
  std::vector<PairwiseComparison> alien = {{"a", "b", "z"}};
  CHECK_THROWS_AS(pairwise_win_ranking(alien), std::invalid_argument);
}
