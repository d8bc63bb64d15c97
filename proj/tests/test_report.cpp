#include "pbeval/report.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace pbeval;
using test_support::fixture;
using test_support::make_instance;
using test_support::make_profile;
using test_support::rat;

namespace {

ParseResult load(const char* name) {
  std::ifstream in(fixture(name), std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pb(buffer.str());
}

RuleConfig mes_config(Completion completion = Completion::none) {
  RuleConfig config;
  config.completion = completion;
  return config;
}

RuleConfig greedy_config() {
  RuleConfig config;
  config.rule = Rule::greedy;
  return config;
}

}  // namespace

TEST_CASE("a single-project election is won under both rules") {
  auto instance = make_instance(100, {{"only", 80}});
  auto profile = make_profile({{"v1", {{"only", 1}}}});
  auto mes = evaluate_rule(instance, profile, mes_config(Completion::add1u));
  auto greedy = evaluate_rule(instance, profile, greedy_config());
  CHECK(mes.allocation.winners == std::vector<std::string>{"only"});
  CHECK(greedy.allocation.winners == std::vector<std::string>{"only"});
}

TEST_CASE("comparison report on the four-voter election") {
  auto parsed = load("fourvoters.pb");
  auto report = compare("fourvoters", parsed.instance, parsed.profile, mes_config(),
                        greedy_config());

  CHECK(report.a.allocation.winners == std::vector<std::string>{"A"});
  CHECK(report.b.allocation.winners == std::vector<std::string>{"A", "C"});
  CHECK(report.exclusive_a.empty());
  CHECK(report.exclusive_b == std::vector<std::string>{"C"});

  // Exclusive representation against {C}: only v1 supports it.
  CHECK(report.exclusive_rep_b.per_voter[0].second == rat(1, 2));
  CHECK(report.exclusive_rep_b.per_voter[1].second == rat(0));

  // Proposed category shares: health 2, sport 1, uncategorized 1.
  CHECK(report.proposed_category_shares.at("health") == rat(1, 2));
  CHECK(report.proposed_category_shares.at("sport") == rat(1, 4));
  CHECK(report.proposed_category_shares.at("uncategorized") == rat(1, 4));

  CHECK(report.budget_stats.relative_budget_allocation == rat(100, 150));
  CHECK(report.budget_stats.project_budget_share == rat(1, 2));

  SUBCASE("per-rule coverage") {
    // mes winners {A}: v1,v2,v3 support it; greedy winners {A,C}: same voters.
    CHECK(report.a.coverage == rat(3, 4));
    CHECK(report.b.coverage == rat(3, 4));
  }
  SUBCASE("JSON rendering is deterministic") {
    auto j1 = to_json(parsed.instance, report).dump(2);
    auto report2 = compare("fourvoters", parsed.instance, parsed.profile, mes_config(),
                           greedy_config());
    auto j2 = to_json(parsed.instance, report2).dump(2);
    CHECK(j1 == j2);
  }
  SUBCASE("CSV panels carry one row per project and threshold") {
    auto winners = winners_csv(parsed.instance, parsed.profile, report);
    CHECK(std::count(winners.begin(), winners.end(), '\n') == 4);  // header + 3 projects
    auto curve = curve_csv(report);
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 10);  // header + 9 thresholds
    auto categories = categories_csv(report);
    CHECK(categories.find("health") != std::string::npos);
  }
}

TEST_CASE("identical configs produce zero deltas") {
  auto parsed = load("fourvoters.pb");
  auto report = compare("fourvoters", parsed.instance, parsed.profile, greedy_config(),
                        greedy_config());
  CHECK(report.exclusive_a.empty());
  CHECK(report.exclusive_b.empty());
  CHECK(report.a.allocation.winners == report.b.allocation.winners);
  for (const auto& [voter, score] : report.exclusive_rep_a.per_voter) {
    if (score) CHECK(*score == rat(0));
  }
}

TEST_CASE("district election report includes the spatial gain") {
  auto parsed = load("districts.pb");
  auto report = compare("districts", parsed.instance, parsed.profile,
                        mes_config(Completion::add1u), greedy_config());
  // Both rules end on the same winner set here, so the gain is exactly 0.
  CHECK(report.a.allocation.winner_set() == report.b.allocation.winner_set());
  REQUIRE(report.spatial_fairness_gain_ab.has_value());
  CHECK(*report.spatial_fairness_gain_ab == rat(0));
  auto csv = districts_csv(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 districts
}

TEST_CASE("corpus analysis over the frozen fixture corpus") {
  CorpusOptions options;
  options.criteria = {MatchCriterion::num_projects_q4,
                      MatchCriterion::relative_budget_allocation_q1,
                      MatchCriterion::project_budget_share_q1};
  options.config_a = mes_config(Completion::add1u);
  options.config_b = greedy_config();

  CorpusReport report = corpus_analyze(fixture("corpus_frozen"), options);
  CHECK(report.elections.size() == 16);
  CHECK(report.skipped.empty());
  CHECK_FALSE(report.content_hash.empty());
  REQUIRE(report.aggregates.size() == 8);  // all subsets of three criteria

  SUBCASE("per-election values are in id order") {
    for (size_t i = 1; i < report.elections.size(); ++i) {
      CHECK(report.elections[i - 1].summary.id < report.elections[i].summary.id);
    }
  }

  SUBCASE("aggregates equal the recomputed mean of their matched elections") {
    for (const auto& aggregate : report.aggregates) {
      std::set<std::string> matched(aggregate.matched.begin(), aggregate.matched.end());
      Rational sum = 0;
      long long count = 0;
      for (const auto& e : report.elections) {
        if (matched.count(e.summary.id) == 0) continue;
        REQUIRE(e.mean_rep_a.has_value());
        REQUIRE(e.mean_rep_b.has_value());
        sum += *e.mean_rep_a - *e.mean_rep_b;
        ++count;
      }
      if (count == 0) {
        CHECK_FALSE(aggregate.mean_rep_gain.has_value());
      } else {
        REQUIRE(aggregate.mean_rep_gain.has_value());
        CHECK(*aggregate.mean_rep_gain == sum / Rational(count));
      }
    }
  }

  SUBCASE("the full-criteria aggregate matches the frozen set") {
    const CorpusAggregate* full = nullptr;
    for (const auto& aggregate : report.aggregates) {
      if (aggregate.criteria.size() == 3) full = &aggregate;
    }
    REQUIRE(full != nullptr);
    CHECK(full->matched == std::vector<std::string>{"e16"});
  }

  SUBCASE("scheduling does not change the report") {
    CorpusOptions parallel = options;
    parallel.jobs = 4;
    CorpusReport threaded = corpus_analyze(fixture("corpus_frozen"), parallel);
    CHECK(to_json(report).dump() == to_json(threaded).dump());
  }

  SUBCASE("a reference election yields curve gains") {
    CorpusOptions with_reference = options;
    with_reference.reference = fixture("corpus_frozen") / "e16.pb";
    CorpusReport ref_report = corpus_analyze(fixture("corpus_frozen"), with_reference);
    REQUIRE(ref_report.reference.has_value());
    for (const auto& aggregate : ref_report.aggregates) {
      if (!aggregate.matched.empty()) {
        CHECK(aggregate.reference_gain_vs_b.has_value());
        CHECK(aggregate.reference_gain_vs_a.has_value());
      }
    }
    auto csv = aggregates_csv(ref_report);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);  // header + 8 subsets
  }
}

TEST_CASE("a corpus of one election aggregates to that election's values") {
  auto dir = std::filesystem::temp_directory_path() / "pbeval_corpus_one";
  std::filesystem::create_directories(dir);
  {
    auto parsed = load("fourvoters.pb");
    write_pb_file(dir / "only.pb", parsed.instance, parsed.profile);
  }
  CorpusOptions options;
  options.config_a = mes_config(Completion::add1u);
  options.config_b = greedy_config();
  CorpusReport report = corpus_analyze(dir, options);
  REQUIRE(report.elections.size() == 1);
  REQUIRE(report.aggregates.size() == 1);
  const auto& aggregate = report.aggregates[0];
  CHECK(aggregate.matched == std::vector<std::string>{"only"});
  CHECK(aggregate.mean_rep_a == report.elections[0].mean_rep_a);
  CHECK(aggregate.mean_rep_b == report.elections[0].mean_rep_b);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ordinal and out-of-format elections are skipped with reasons") {
  auto dir = std::filesystem::temp_directory_path() / "pbeval_corpus_mixed";
  std::filesystem::create_directories(dir);
  {
    auto approval = load("fourvoters.pb");
    write_pb_file(dir / "a.pb", approval.instance, approval.profile);
    auto cumulative = load("cumulative.pb");
    write_pb_file(dir / "b.pb", cumulative.instance, cumulative.profile);
    auto ordinal = load("ordinal.pb");
    write_pb_file(dir / "c.pb", ordinal.instance, ordinal.profile);
  }
  CorpusOptions options;
  options.format = BallotFormat::approval;
  options.config_a = mes_config(Completion::add1u);
  options.config_b = greedy_config();
  CorpusReport report = corpus_analyze(dir, options);
  REQUIRE(report.elections.size() == 1);
  CHECK(report.elections[0].summary.id == "a");
  CHECK(report.skipped.size() == 2);
  std::filesystem::remove_all(dir);
}
