#include "pbeval/pabulib.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace pbeval;
using test_support::fixture;
using test_support::instances_equal;
using test_support::profiles_equal;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("minimal document parses to the expected model") {
  auto result = parse_pb(slurp(fixture("minimal.pb")));
  const Instance& instance = result.instance;
  CHECK(instance.budget == Money::from_major(Rational(1000)));
  CHECK(instance.vote_type == VoteType::approval);
  REQUIRE(instance.projects.size() == 2);
  CHECK(instance.projects[0].id == "p1");
  CHECK(instance.projects[0].cost == Money::from_major(Rational(600)));
  CHECK(instance.projects[1].cost == Money::from_major(Rational(500)));
  REQUIRE(result.profile.size() == 1);
  const Ballot& ballot = result.profile.ballots[0];
  CHECK(ballot.voter_id == "v1");
  CHECK(ballot.points_for("p1") == 1);
  CHECK(ballot.points_for("p2") == 1);
}

TEST_CASE("cumulative points align positionally with the vote list") {
  std::string text =
      "META\nbudget;100\nvote_type;cumulative\nPROJECTS\nproject_id;cost\np1;10\np3;20\n"
      "VOTES\nvoter_id;vote;points\nv9;p1,p3;7,3\n";
  auto result = parse_pb(text);
  const Ballot& ballot = result.profile.ballots[0];
  CHECK(ballot.points_for("p1") == 7);
  CHECK(ballot.points_for("p3") == 3);
}

TEST_CASE("passthrough fixture round-trips field for field") {
  std::string original = slurp(fixture("passthrough.pb"));
  auto first = parse_pb(original);

  CHECK(first.instance.meta_value("fully_funded") == std::string("yes"));
  CHECK(first.instance.ballot_rules.total_points == 10);
  CHECK(first.instance.ballot_rules.min_projects == 2);
  CHECK(first.instance.projects[0].district == std::string("north"));
  CHECK(first.instance.projects[0].categories == std::vector<std::string>{"green", "social"});
  CHECK(first.instance.projects[0].extra ==
        std::vector<std::pair<std::string, std::string>>{{"target", "families"}});
  CHECK(first.profile.ballots[0].voter_meta ==
        std::vector<std::pair<std::string, std::string>>{{"age", "34"}, {"sex", "f"}});

  std::string emitted = serialize_pb(first.instance, first.profile);
  auto second = parse_pb(emitted);
  CHECK(instances_equal(first.instance, second.instance));
  CHECK(profiles_equal(first.profile, second.profile));
  // Serialization is a fixed point after one pass.
  CHECK(serialize_pb(second.instance, second.profile) == emitted);
}

TEST_CASE("every fixture round-trips") {
  for (const char* name :
       {"minimal.pb", "fourvoters.pb", "cumulative.pb", "districts.pb", "passthrough.pb",
        "ordinal.pb"}) {
    CAPTURE(name);
    auto first = parse_pb(slurp(fixture(name)));
    auto second = parse_pb(serialize_pb(first.instance, first.profile));
    CHECK(instances_equal(first.instance, second.instance));
    CHECK(profiles_equal(first.profile, second.profile));
  }
}

TEST_CASE("ordinal ballots preserve rank order through round-trips") {
  auto result = parse_pb(slurp(fixture("ordinal.pb")));
  REQUIRE(result.profile.ballots.size() == 2);
  CHECK(result.profile.ballots[0].entries[0].project_id == "y");
  CHECK(result.profile.ballots[0].entries[1].project_id == "x");
  auto again = parse_pb(serialize_pb(result.instance, result.profile));
  CHECK(again.profile.ballots[0].entries[0].project_id == "y");
}

TEST_CASE("META key order does not matter") {
  std::string a = "META\nbudget;10\nvote_type;approval\nPROJECTS\nproject_id;cost\np;5\n"
                  "VOTES\nvoter_id;vote\nv;p\n";
  std::string b = "META\nvote_type;approval\nbudget;10\nPROJECTS\nproject_id;cost\np;5\n"
                  "VOTES\nvoter_id;vote\nv;p\n";
  auto ra = parse_pb(a);
  auto rb = parse_pb(b);
  CHECK(ra.instance.budget == rb.instance.budget);
  CHECK(ra.instance.vote_type == rb.instance.vote_type);
  CHECK(profiles_equal(ra.profile, rb.profile));
}

TEST_CASE("a UTF-8 byte-order mark is tolerated") {
  std::string text = "\xEF\xBB\xBFMETA\nbudget;10\nvote_type;approval\nPROJECTS\n"
                     "project_id;cost\na;5\nVOTES\nvoter_id;vote\nv;a\n";
  auto result = parse_pb(text);
  CHECK(result.instance.budget == Money::from_major(Rational(10)));
}

TEST_CASE("CRLF line endings are tolerated") {
  std::string text = "META\r\nbudget;10\r\nvote_type;approval\r\nPROJECTS\r\n"
                     "project_id;cost\r\na;5\r\nVOTES\r\nvoter_id;vote\r\nv;a\r\n";
  auto result = parse_pb(text);
  CHECK(result.instance.projects.size() == 1);
}

TEST_CASE("META values may contain the field separator") {
  std::string text = "META\nbudget;10\nvote_type;approval\ndescription;a;b;c\nPROJECTS\n"
                     "project_id;cost\na;5\nVOTES\nvoter_id;vote\nv;a\n";
  auto result = parse_pb(text);
  CHECK(result.instance.meta_value("description") == std::string("a;b;c"));
  auto again = parse_pb(serialize_pb(result.instance, result.profile));
  CHECK(instances_equal(result.instance, again.instance));
}

TEST_CASE("structural errors are fatal with line numbers") {
  SUBCASE("missing VOTES section") {
    std::string text = "META\nbudget;10\nvote_type;approval\nPROJECTS\nproject_id;cost\na;5\n";
    CHECK_THROWS_AS(parse_pb(text), ParseError);
  }
  SUBCASE("missing budget") {
    std::string text = "META\nvote_type;approval\nPROJECTS\nproject_id;cost\na;5\n"
                       "VOTES\nvoter_id;vote\nv;a\n";
    CHECK_THROWS_AS(parse_pb(text), ParseError);
  }
  SUBCASE("missing vote_type") {
    std::string text = "META\nbudget;10\nPROJECTS\nproject_id;cost\na;5\n"
                       "VOTES\nvoter_id;vote\nv;a\n";
    CHECK_THROWS_AS(parse_pb(text), ParseError);
  }
  SUBCASE("unparseable cost carries its line number") {
    std::string text = "META\nbudget;10\nvote_type;approval\nPROJECTS\nproject_id;cost\na;5x\n"
                       "VOTES\nvoter_id;vote\nv;a\n";
    try {
      parse_pb(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 6);
    }
  }
  SUBCASE("duplicate project id") {
    std::string text = "META\nbudget;10\nvote_type;approval\nPROJECTS\nproject_id;cost\na;5\na;6\n"
                       "VOTES\nvoter_id;vote\nv;a\n";
    CHECK_THROWS_AS(parse_pb(text), ParseError);
  }
  SUBCASE("row width must match the header") {
    std::string text = "META\nbudget;10\nvote_type;approval\nPROJECTS\nproject_id;cost\na;5;extra\n"
                       "VOTES\nvoter_id;vote\nv;a\n";
    CHECK_THROWS_AS(parse_pb(text), ParseError);
  }
}

TEST_CASE("vote/points length mismatch: strict fatal, lenient drops the ballot") {
  std::string text = "META\nbudget;100\nvote_type;cumulative\nPROJECTS\nproject_id;cost\na;5\nb;6\n"
                     "VOTES\nvoter_id;vote;points\nv1;a,b;7\nv2;a;10\n";
  CHECK_THROWS_AS(parse_pb(text, ParseMode::strict), ParseError);
  auto lenient = parse_pb(text, ParseMode::lenient);
  REQUIRE(lenient.profile.size() == 1);
  CHECK(lenient.profile.ballots[0].voter_id == "v2");
  REQUIRE(lenient.diagnostics.size() == 1);
  CHECK(lenient.diagnostics[0].line == 10);
}

TEST_CASE("serialize rejects separator characters in tokens") {
  auto result = parse_pb(slurp(fixture("minimal.pb")));
  Instance instance = result.instance;
  instance.projects[0].id = "bad,id";
  instance.reindex();
  CHECK_THROWS_AS(serialize_pb(instance, result.profile), std::invalid_argument);
}

TEST_CASE("scan_corpus summarizes valid files and reports corrupt ones") {
  CorpusScan scan = scan_corpus(fixture("scanmix"));
  REQUIRE(scan.summaries.size() == 3);
  REQUIRE(scan.failures.size() == 1);
  CHECK(scan.failures[0].id == "corrupt");

  const ElectionSummary& v2 = scan.summaries[1];
  CHECK(v2.id == "valid2");
  CHECK(v2.num_projects == 3);
  CHECK(v2.budget == Money::from_major(Rational(300)));
  CHECK(v2.total_cost == Money::from_major(Rational(450)));
  CHECK(v2.mean_cost == Money::from_major(Rational(150)).value());
  CHECK(v2.vote_type == VoteType::approval);
}

TEST_CASE("scan_corpus is deterministic under concurrency") {
  CorpusScan a = scan_corpus(fixture("corpus_frozen"), 1);
  CorpusScan b = scan_corpus(fixture("corpus_frozen"), 4);
  REQUIRE(a.summaries.size() == b.summaries.size());
  for (size_t i = 0; i < a.summaries.size(); ++i) {
    CHECK(a.summaries[i].id == b.summaries[i].id);
    CHECK(a.summaries[i].num_projects == b.summaries[i].num_projects);
  }
}

TEST_CASE("scan_corpus on an empty directory") {
  auto dir = std::filesystem::temp_directory_path() / "pbeval_empty_corpus";
  std::filesystem::create_directories(dir);
  CorpusScan scan = scan_corpus(dir);
  CHECK(scan.summaries.empty());
  CHECK(scan.failures.empty());
}

TEST_CASE("corpus hash is stable") {
  CHECK(corpus_content_hash(fixture("corpus_frozen")) ==
        corpus_content_hash(fixture("corpus_frozen")));
  CHECK(corpus_content_hash(fixture("corpus_frozen")) != corpus_content_hash(fixture("scanmix")));
}
