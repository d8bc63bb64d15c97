#ifndef PBEVAL_REPORT_HPP
#define PBEVAL_REPORT_HPP

#include "pbeval/metrics.hpp"
#include "pbeval/model.hpp"
#include "pbeval/pabulib.hpp"
#include "pbeval/rules.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pbeval {

using Json = nlohmann::ordered_json;

// One rule evaluated on one election, with every metric the reports need.
struct RuleOutcome {
  RuleConfig config;
  Allocation allocation;
  RepresentationStats rep_points;
  RepresentationStats rep_count;
  std::map<std::string, Rational> winner_category_shares;
  std::optional<DistrictTally> districts;  // when the instance carries district tags
  Rational coverage;                       // voters supporting >=1 winner
};

RuleOutcome evaluate_rule(const Instance& instance, const Profile& profile,
                          const RuleConfig& config);

// Side-by-side of two rule configs on the same parsed input.
struct ComparisonReport {
  std::string instance_id;
  long long num_projects = 0;
  long long num_votes = 0;
  Money budget;
  BudgetStats budget_stats;
  std::map<std::string, Rational> proposed_category_shares;
  RuleOutcome a;
  RuleOutcome b;
  std::vector<std::string> exclusive_a;  // winners under a but not b
  std::vector<std::string> exclusive_b;
  RepresentationStats exclusive_rep_a;   // support landing on exclusive_a
  RepresentationStats exclusive_rep_b;
  std::optional<Rational> spatial_fairness_gain_ab;  // a fair vs b baseline
};

ComparisonReport compare(const std::string& instance_id, const Instance& instance,
                         const Profile& profile, const RuleConfig& config_a,
                         const RuleConfig& config_b);

Json to_json(const Instance& instance, const Profile& profile, const RuleOutcome& outcome,
             bool include_ledger = true);
Json to_json(const Instance& instance, const ComparisonReport& report);

// Flat ','-separated panels with a header row, one value column per rule.
std::string winners_csv(const Instance& instance, const Profile& profile,
                        const ComparisonReport& report);
std::string curve_csv(const ComparisonReport& report);
std::string categories_csv(const ComparisonReport& report);
std::string districts_csv(const ComparisonReport& report);

// Corpus-level analysis: every election compared under both configs, the
// quartile match applied, and matched-subset aggregates per criteria subset.
struct ElectionComparison {
  ElectionSummary summary;
  size_t winners_a = 0;
  size_t winners_b = 0;
  std::optional<Rational> mean_rep_a;  // points mode, per-election mean
  std::optional<Rational> mean_rep_b;
  long long defined_voters = 0;
  std::vector<std::pair<Rational, Rational>> curve_a;
  std::vector<std::pair<Rational, Rational>> curve_b;
};

struct CorpusAggregate {
  std::vector<MatchCriterion> criteria;
  std::vector<std::string> matched;
  // Mean of per-election means (the per-election aggregation mode).
  std::optional<Rational> mean_rep_a;
  std::optional<Rational> mean_rep_b;
  std::optional<Rational> mean_rep_gain;  // mean of (a - b)
  // Defined-voter-weighted means (the pooled aggregation mode).
  std::optional<Rational> pooled_rep_a;
  std::optional<Rational> pooled_rep_b;
  std::optional<Rational> mean_winner_increase;  // mean of (|a|-|b|)/|b|
  std::vector<std::pair<Rational, Rational>> mean_curve_a;
  std::vector<std::pair<Rational, Rational>> mean_curve_b;
  // Reference-vs-corpus curve gains averaged over thresholds, when a
  // reference election was supplied.
  std::optional<Rational> reference_gain_vs_b;
  std::optional<Rational> reference_gain_vs_a;
};

struct CorpusReport {
  std::string directory;
  std::string content_hash;
  std::string ballot_format;  // approval | cumulative | joint
  RuleConfig config_a;
  RuleConfig config_b;
  std::vector<ElectionComparison> elections;            // id order
  std::vector<std::pair<std::string, std::string>> skipped;  // id -> reason
  std::vector<CorpusAggregate> aggregates;  // one per subset of the criteria
  std::optional<ElectionComparison> reference;
};

enum class BallotFormat { approval, cumulative, joint };

std::string to_string(BallotFormat f);
std::optional<BallotFormat> ballot_format_from_string(std::string_view s);

struct CorpusOptions {
  std::vector<MatchCriterion> criteria;
  BallotFormat format = BallotFormat::joint;
  RuleConfig config_a;  // defaults to mes+add1u
  RuleConfig config_b;  // defaults to greedy
  int jobs = 1;
  std::optional<std::filesystem::path> reference;  // election evaluated under config_a
};

CorpusReport corpus_analyze(const std::filesystem::path& directory, const CorpusOptions& options);

Json to_json(const CorpusReport& report);
std::string aggregates_csv(const CorpusReport& report);

// Shared JSON fragments.
Json rational_json(const Rational& r);
Json money_json(const Money& m);

}  // namespace pbeval

#endif
