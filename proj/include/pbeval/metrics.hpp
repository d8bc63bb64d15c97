#ifndef PBEVAL_METRICS_HPP
#define PBEVAL_METRICS_HPP

#include "pbeval/model.hpp"
#include "pbeval/pabulib.hpp"

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace pbeval {

enum class RepresentationMode { points, count };

std::string to_string(RepresentationMode m);

// Fraction of the voter's expressed support landing on winners: point-weighted
// or by selected-project count. nullopt when the ballot carries no support.
std::optional<Rational> voter_representation(const Ballot& ballot,
                                             const std::set<std::string>& winners,
                                             RepresentationMode mode);

// (0.1, 0.2, ..., 0.9)
std::vector<Rational> default_thresholds();

// For each threshold t: share of voters (with defined representation) whose
// score is >= t. Non-increasing in t.
std::vector<std::pair<Rational, Rational>> representation_curve(
    const Profile& profile, const std::set<std::string>& winners,
    std::span<const Rational> thresholds, RepresentationMode mode);

struct RepresentationStats {
  std::vector<std::pair<std::string, std::optional<Rational>>> per_voter;
  std::optional<Rational> mean;  // over voters with defined representation
  std::vector<std::pair<Rational, Rational>> curve;
  long long excluded_voters = 0;  // zero-support ballots
  long long defined_voters = 0;
};

RepresentationStats representation_stats(const Profile& profile,
                                         const std::set<std::string>& winners,
                                         RepresentationMode mode,
                                         std::span<const Rational> thresholds);

// Representation against the projects that win under `winners` but lose under
// `baseline`.
RepresentationStats exclusive_representation(const Profile& profile,
                                             const std::set<std::string>& winners,
                                             const std::set<std::string>& baseline,
                                             RepresentationMode mode,
                                             std::span<const Rational> thresholds);

// Population variance divided by mean. Throws std::invalid_argument on an
// empty list or zero mean.
Rational index_of_dispersion(std::span<const Rational> values);

struct DistrictTally {
  // district -> (proposed, winning)
  std::map<std::string, std::pair<long long, long long>> per_district;
  std::map<std::string, Rational> ratios;  // winning / proposed
};

DistrictTally district_tally(const Instance& instance, const std::set<std::string>& winners);

// Index of dispersion of the tally's ratios.
Rational dispersion(const DistrictTally& tally);

// Relative reduction (D_baseline - D_fair) / D_baseline.
Rational spatial_fairness_gain(const DistrictTally& fair, const DistrictTally& baseline);

// Each project counts once per category tag; shares are normalized by the
// total number of incidences. Untagged projects count under "uncategorized".
std::map<std::string, Rational> category_shares(std::span<const Project> projects);

struct BudgetStats {
  Rational relative_budget_allocation;  // budget / total proposed cost
  Rational project_budget_share;        // mean proposed cost / budget
  Rational mean_budget_share;           // alias of project_budget_share
};

BudgetStats budget_stats(const Instance& instance);

// Share of voters giving positive points to at least one project in the set.
Rational support_coverage(const Profile& profile, const std::set<std::string>& projects);

enum class MatchCriterion {
  num_projects_q4,
  relative_budget_allocation_q1,
  project_budget_share_q1,
};

std::string to_string(MatchCriterion c);
std::optional<MatchCriterion> match_criterion_from_string(std::string_view s);

struct CorpusMatch {
  std::vector<MatchCriterion> criteria;
  std::vector<std::string> matched;  // election ids, in corpus order
};

// Rank-based quartiles over the full corpus, ties assigned to the lower
// quartile; elections must sit in the stated quartile of every criterion.
CorpusMatch quartile_match(std::span<const ElectionSummary> corpus,
                           std::span<const MatchCriterion> criteria);

// Quartile (1..4) of `value` within `values` under the same convention;
// exposed for reporting where a reference election sits.
int quartile_of(const Rational& value, std::span<const Rational> values);

struct PairwiseComparison {
  std::string a;
  std::string b;
  std::string winner;  // equal to a or b; empty means a tie
};

struct PairwiseRank {
  std::string project;
  long long wins = 0;
  int rank = 0;  // dense: equal wins share a rank
};

// Wins per project (ties count for neither side), densely ranked by
// descending wins.
std::vector<PairwiseRank> pairwise_win_ranking(std::span<const PairwiseComparison> records);

}  // namespace pbeval

#endif
