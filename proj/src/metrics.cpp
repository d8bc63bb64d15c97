#include "pbeval/metrics.hpp"

#include <algorithm>
#include <unordered_map>

namespace pbeval {

std::string to_string(RepresentationMode m) {
  return m == RepresentationMode::points ? "points" : "count";
}

std::optional<Rational> voter_representation(const Ballot& ballot,
                                             const std::set<std::string>& winners,
                                             RepresentationMode mode) {
  long long denominator = 0;
  long long numerator = 0;
  for (const auto& e : ballot.entries) {
    if (e.points <= 0) continue;
    bool winning = winners.count(e.project_id) != 0;
    if (mode == RepresentationMode::points) {
      denominator += e.points;
      if (winning) numerator += e.points;
    } else {
      denominator += 1;
      if (winning) numerator += 1;
    }
  }
  if (denominator == 0) return std::nullopt;
  return Rational(numerator, denominator);
}

std::vector<Rational> default_thresholds() {
  std::vector<Rational> t;
  for (int i = 1; i <= 9; ++i) t.emplace_back(i, 10);
  return t;
}

std::vector<std::pair<Rational, Rational>> representation_curve(
    const Profile& profile, const std::set<std::string>& winners,
    std::span<const Rational> thresholds, RepresentationMode mode) {
  std::vector<Rational> scores;
  for (const auto& ballot : profile.ballots) {
    auto r = voter_representation(ballot, winners, mode);
    if (r) scores.push_back(*r);
  }
  std::vector<std::pair<Rational, Rational>> curve;
  for (const auto& t : thresholds) {
    if (scores.empty()) {
      curve.emplace_back(t, Rational(0));
      continue;
    }
    long long at_least = std::count_if(scores.begin(), scores.end(),
                                       [&](const Rational& s) { return s >= t; });
    curve.emplace_back(t, Rational(at_least, static_cast<long long>(scores.size())));
  }
  return curve;
}

RepresentationStats representation_stats(const Profile& profile,
                                         const std::set<std::string>& winners,
                                         RepresentationMode mode,
                                         std::span<const Rational> thresholds) {
  RepresentationStats stats;
  Rational sum = 0;
  for (const auto& ballot : profile.ballots) {
    auto r = voter_representation(ballot, winners, mode);
    if (r) {
      sum += *r;
      ++stats.defined_voters;
    } else {
      ++stats.excluded_voters;
    }
    stats.per_voter.emplace_back(ballot.voter_id, r);
  }
  if (stats.defined_voters > 0) stats.mean = sum / Rational(stats.defined_voters);
  stats.curve = representation_curve(profile, winners, thresholds, mode);
  return stats;
}

RepresentationStats exclusive_representation(const Profile& profile,
                                             const std::set<std::string>& winners,
                                             const std::set<std::string>& baseline,
                                             RepresentationMode mode,
                                             std::span<const Rational> thresholds) {
  std::set<std::string> exclusive;
  for (const auto& id : winners) {
    if (baseline.count(id) == 0) exclusive.insert(id);
  }
  return representation_stats(profile, exclusive, mode, thresholds);
}

Rational index_of_dispersion(std::span<const Rational> values) {
  if (values.empty()) throw std::invalid_argument("index of dispersion of an empty list");
  Rational mean = 0;
  for (const auto& v : values) mean += v;
  mean /= Rational(values.size());
  if (mean == 0) throw std::invalid_argument("index of dispersion is undefined for zero mean");
  Rational variance = 0;
  for (const auto& v : values) variance += (v - mean) * (v - mean);
  variance /= Rational(values.size());
  return variance / mean;
}

DistrictTally district_tally(const Instance& instance, const std::set<std::string>& winners) {
  DistrictTally tally;
  for (const auto& p : instance.projects) {
    if (!p.district) continue;
    auto& [proposed, winning] = tally.per_district[*p.district];
    ++proposed;
    if (winners.count(p.id) != 0) ++winning;
  }
  for (const auto& [district, counts] : tally.per_district) {
    tally.ratios[district] = Rational(counts.second, counts.first);
  }
  return tally;
}

Rational dispersion(const DistrictTally& tally) {
  std::vector<Rational> ratios;
  for (const auto& [district, ratio] : tally.ratios) ratios.push_back(ratio);
  return index_of_dispersion(ratios);
}

Rational spatial_fairness_gain(const DistrictTally& fair, const DistrictTally& baseline) {
  if (fair.per_district.size() != baseline.per_district.size()) {
    throw std::invalid_argument("district tallies cover different district sets");
  }
  for (const auto& [district, counts] : fair.per_district) {
    if (baseline.per_district.count(district) == 0) {
      throw std::invalid_argument("district tallies cover different district sets");
    }
  }
  Rational d_fair = dispersion(fair);
  Rational d_baseline = dispersion(baseline);
  if (d_baseline == 0) {
    throw std::invalid_argument("spatial fairness gain is undefined when the baseline dispersion is 0");
  }
  return (d_baseline - d_fair) / d_baseline;
}

std::map<std::string, Rational> category_shares(std::span<const Project> projects) {
  std::map<std::string, long long> incidences;
  long long total = 0;
  for (const auto& p : projects) {
    if (p.categories.empty()) {
      ++incidences["uncategorized"];
      ++total;
      continue;
    }
    for (const auto& tag : p.categories) {
      ++incidences[tag];
      ++total;
    }
  }
  std::map<std::string, Rational> shares;
  for (const auto& [tag, count] : incidences) shares[tag] = Rational(count, total);
  return shares;
}

BudgetStats budget_stats(const Instance& instance) {
  if (instance.projects.empty()) {
    throw std::invalid_argument("budget statistics need at least one project");
  }
  BudgetStats stats;
  Rational total = instance.total_project_cost().value();
  Rational mean = total / Rational(instance.projects.size());
  stats.relative_budget_allocation = instance.budget.value() / total;
  stats.project_budget_share = mean / instance.budget.value();
  stats.mean_budget_share = stats.project_budget_share;
  return stats;
}

Rational support_coverage(const Profile& profile, const std::set<std::string>& projects) {
  if (profile.empty()) throw std::invalid_argument("support coverage of an empty profile");
  long long covered = 0;
  for (const auto& ballot : profile.ballots) {
    for (const auto& e : ballot.entries) {
      if (e.points > 0 && projects.count(e.project_id) != 0) {
        ++covered;
        break;
      }
    }
  }
  return Rational(covered, static_cast<long long>(profile.size()));
}

std::string to_string(MatchCriterion c) {
  switch (c) {
    case MatchCriterion::num_projects_q4: return "num_projects_q4";
    case MatchCriterion::relative_budget_allocation_q1: return "relative_budget_allocation_q1";
    case MatchCriterion::project_budget_share_q1: return "project_budget_share_q1";
  }
  return "?";
}

std::optional<MatchCriterion> match_criterion_from_string(std::string_view s) {
  if (s == "num_projects_q4") return MatchCriterion::num_projects_q4;
  if (s == "relative_budget_allocation_q1") return MatchCriterion::relative_budget_allocation_q1;
  if (s == "project_budget_share_q1") return MatchCriterion::project_budget_share_q1;
  return std::nullopt;
}

namespace {

// Quartile of rank r (1-based) among m values: Q1 holds ranks 1..ceil(m/4),
// Q2 up to ceil(m/2), Q3 up to ceil(3m/4), Q4 the rest.
int quartile_of_rank(long long r, long long m) {
  if (r <= (m + 3) / 4) return 1;
  if (r <= (m + 1) / 2) return 2;
  if (r <= (3 * m + 3) / 4) return 3;
  return 4;
}

Rational criterion_value(const ElectionSummary& s, MatchCriterion c) {
  switch (c) {
    case MatchCriterion::num_projects_q4:
      return Rational(s.num_projects);
    case MatchCriterion::relative_budget_allocation_q1:
      if (s.total_cost.is_zero()) {
        throw std::invalid_argument("election '" + s.id + "' has zero total proposed cost");
      }
      return s.budget.value() / s.total_cost.value();
    case MatchCriterion::project_budget_share_q1:
      return s.mean_cost / s.budget.value();
  }
  throw std::invalid_argument("unknown match criterion");
}

int target_quartile(MatchCriterion c) {
  return c == MatchCriterion::num_projects_q4 ? 4 : 1;
}

}  // namespace

int quartile_of(const Rational& value, std::span<const Rational> values) {
  long long m = static_cast<long long>(values.size());
  long long less = std::count_if(values.begin(), values.end(),
                                 [&](const Rational& v) { return v < value; });
  // A tied block takes the quartile of its lowest rank.
  return quartile_of_rank(less + 1, m);
}

CorpusMatch quartile_match(std::span<const ElectionSummary> corpus,
                           std::span<const MatchCriterion> criteria) {
  CorpusMatch match;
  match.criteria.assign(criteria.begin(), criteria.end());

  std::vector<bool> keep(corpus.size(), true);
  for (MatchCriterion c : criteria) {
    std::vector<Rational> values;
    values.reserve(corpus.size());
    for (const auto& s : corpus) values.push_back(criterion_value(s, c));
    for (size_t i = 0; i < corpus.size(); ++i) {
      if (keep[i] && quartile_of(values[i], values) != target_quartile(c)) keep[i] = false;
    }
  }
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (keep[i]) match.matched.push_back(corpus[i].id);
  }
  return match;
}

std::vector<PairwiseRank> pairwise_win_ranking(std::span<const PairwiseComparison> records) {
  std::map<std::string, long long> wins;
  for (const auto& r : records) {
    if (r.a == r.b) throw std::invalid_argument("pairwise record compares '" + r.a + "' to itself");
    wins.try_emplace(r.a, 0);
    wins.try_emplace(r.b, 0);
    if (r.winner.empty() || r.winner == "tie") continue;
    if (r.winner != r.a && r.winner != r.b) {
      throw std::invalid_argument("pairwise winner '" + r.winner + "' is neither side of the pair");
    }
    ++wins[r.winner];
  }

  std::vector<PairwiseRank> ranking;
  for (const auto& [project, count] : wins) ranking.push_back({project, count, 0});
  std::sort(ranking.begin(), ranking.end(), [](const PairwiseRank& a, const PairwiseRank& b) {
    if (a.wins != b.wins) return a.wins > b.wins;
    return a.project < b.project;
  });
  int rank = 0;
  long long previous = -1;
  for (auto& r : ranking) {
    if (r.wins != previous) {
      ++rank;
      previous = r.wins;
    }
    r.rank = rank;
  }
  return ranking;
}

}  // namespace pbeval
