#include "pbeval/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

namespace pbeval {

Json rational_json(const Rational& r) {
  Json j;
  j["exact"] = format_fraction(r);
  j["approx"] = format_fixed(r, 6);
  return j;
}

// Exact decimal when the amount has one ("600", "20.25"), exact fraction
// otherwise ("50/3" for an endowment of one third).
Json money_json(const Money& m) {
  Rational major = m.major_units();
  if (denominator(major) == 1) return Json(format_decimal(major));
  try {
    return Json(format_decimal(major));
  } catch (const std::domain_error&) {
    return Json(format_fraction(major));
  }
}

namespace {

Json optional_rational_json(const std::optional<Rational>& r) {
  if (!r) return Json(nullptr);
  return rational_json(*r);
}

Json curve_json(const std::vector<std::pair<Rational, Rational>>& curve) {
  Json j = Json::array();
  for (const auto& [threshold, share] : curve) {
    Json point;
    point["threshold"] = format_fixed(threshold, 2);
    point["share"] = rational_json(share);
    j.push_back(point);
  }
  return j;
}

Json representation_json(const RepresentationStats& stats, bool per_voter) {
  Json j;
  j["mean"] = optional_rational_json(stats.mean);
  j["defined_voters"] = stats.defined_voters;
  j["excluded_voters"] = stats.excluded_voters;
  j["curve"] = curve_json(stats.curve);
  if (per_voter) {
    Json voters = Json::object();
    for (const auto& [voter, score] : stats.per_voter) {
      voters[voter] = optional_rational_json(score);
    }
    j["per_voter"] = voters;
  }
  return j;
}

Json shares_json(const std::map<std::string, Rational>& shares) {
  Json j = Json::object();
  for (const auto& [key, value] : shares) j[key] = rational_json(value);
  return j;
}

Json tie_events_json(const std::vector<TieEvent>& events) {
  Json j = Json::array();
  for (const auto& e : events) {
    Json event;
    event["context"] = e.context;
    event["contenders"] = e.contenders;
    event["resolved_by"] = e.resolved_by;
    j.push_back(event);
  }
  return j;
}

Json allocation_json(const Instance& instance, const Profile& profile,
                     const Allocation& allocation, bool include_ledger) {
  Json j;
  j["rule"] = allocation.rule_tag.rule;
  j["completion"] = allocation.rule_tag.completion;
  j["utility_mode"] = allocation.rule_tag.utility_mode;
  if (allocation.rule_tag.endowment_per_voter) {
    j["endowment_per_voter"] = money_json(*allocation.rule_tag.endowment_per_voter);
  }
  Json winners = Json::array();
  for (const auto& id : allocation.winners) {
    const Project* p = instance.find_project(id);
    Json w;
    w["id"] = id;
    if (p != nullptr) {
      if (!p->name.empty()) w["name"] = p->name;
      w["cost"] = money_json(p->cost);
    }
    w["score"] = total_score(profile, id);
    winners.push_back(w);
  }
  j["winners"] = winners;
  j["winner_count"] = allocation.winners.size();
  j["spent"] = money_json(allocation.spent);
  j["leftover"] = money_json(allocation.leftover);
  j["tie_events"] = tie_events_json(allocation.rule_tag.tie_events);
  if (include_ledger && !allocation.payments.empty()) {
    Json ledger = Json::object();
    for (const auto& [project, voters] : allocation.payments) {
      Json entry = Json::object();
      for (const auto& [voter, amount] : voters) entry[voter] = money_json(amount);
      ledger[project] = entry;
    }
    j["payments"] = ledger;
  }
  return j;
}

std::string config_label(const RuleConfig& config) {
  std::string label = to_string(config.rule);
  if (config.completion != Completion::none) label += "+" + to_string(config.completion);
  return label;
}

}  // namespace

RuleOutcome evaluate_rule(const Instance& instance, const Profile& profile,
                          const RuleConfig& config) {
  RuleOutcome outcome;
  outcome.config = config;
  outcome.allocation = run_rule(instance, profile, config);
  check_allocation(instance, outcome.allocation);

  auto winners = outcome.allocation.winner_set();
  auto thresholds = default_thresholds();
  outcome.rep_points =
      representation_stats(profile, winners, RepresentationMode::points, thresholds);
  outcome.rep_count = representation_stats(profile, winners, RepresentationMode::count, thresholds);

  std::vector<Project> winning_projects;
  for (const auto& p : instance.projects) {
    if (winners.count(p.id) != 0) winning_projects.push_back(p);
  }
  outcome.winner_category_shares = category_shares(winning_projects);

  bool any_district = std::any_of(instance.projects.begin(), instance.projects.end(),
                                  [](const Project& p) { return p.district.has_value(); });
  if (any_district) outcome.districts = district_tally(instance, winners);
  outcome.coverage = support_coverage(profile, winners);
  return outcome;
}

ComparisonReport compare(const std::string& instance_id, const Instance& instance,
                         const Profile& profile, const RuleConfig& config_a,
                         const RuleConfig& config_b) {
  ComparisonReport report;
  report.instance_id = instance_id;
  report.num_projects = static_cast<long long>(instance.projects.size());
  report.num_votes = static_cast<long long>(profile.size());
  report.budget = instance.budget;
  report.budget_stats = budget_stats(instance);
  report.proposed_category_shares = category_shares(instance.projects);
  report.a = evaluate_rule(instance, profile, config_a);
  report.b = evaluate_rule(instance, profile, config_b);

  auto set_a = report.a.allocation.winner_set();
  auto set_b = report.b.allocation.winner_set();
  for (const auto& id : report.a.allocation.winners) {
    if (set_b.count(id) == 0) report.exclusive_a.push_back(id);
  }
  for (const auto& id : report.b.allocation.winners) {
    if (set_a.count(id) == 0) report.exclusive_b.push_back(id);
  }
  auto thresholds = default_thresholds();
  report.exclusive_rep_a = exclusive_representation(profile, set_a, set_b,
                                                    RepresentationMode::points, thresholds);
  report.exclusive_rep_b = exclusive_representation(profile, set_b, set_a,
                                                    RepresentationMode::points, thresholds);

  if (report.a.districts && report.b.districts) {
    try {
      report.spatial_fairness_gain_ab = spatial_fairness_gain(*report.a.districts,
                                                              *report.b.districts);
    } catch (const std::invalid_argument&) {
      // Undefined (e.g. zero baseline dispersion); the report omits it.
    }
  }
  return report;
}

Json to_json(const Instance& instance, const Profile& profile, const RuleOutcome& outcome,
             bool include_ledger) {
  Json j;
  j["budget"] = money_json(instance.budget);
  j["vote_type"] = to_string(instance.vote_type);
  j["num_projects"] = instance.projects.size();
  j["num_votes"] = profile.size();
  j["allocation"] = allocation_json(instance, profile, outcome.allocation, include_ledger);
  j["representation_points"] = representation_json(outcome.rep_points, false);
  j["representation_count"] = representation_json(outcome.rep_count, false);
  j["winner_category_shares"] = shares_json(outcome.winner_category_shares);
  j["support_coverage"] = rational_json(outcome.coverage);
  if (outcome.districts) {
    Json districts = Json::object();
    for (const auto& [district, counts] : outcome.districts->per_district) {
      Json d;
      d["proposed"] = counts.first;
      d["winning"] = counts.second;
      d["ratio"] = rational_json(outcome.districts->ratios.at(district));
      districts[district] = d;
    }
    j["districts"] = districts;
    j["district_dispersion"] = rational_json(dispersion(*outcome.districts));
  }
  return j;
}

Json to_json(const Instance& instance, const ComparisonReport& report) {
  Json j;
  j["instance"] = report.instance_id;
  j["budget"] = money_json(report.budget);
  j["num_projects"] = report.num_projects;
  j["num_votes"] = report.num_votes;
  Json stats;
  stats["relative_budget_allocation"] = rational_json(report.budget_stats.relative_budget_allocation);
  stats["project_budget_share"] = rational_json(report.budget_stats.project_budget_share);
  stats["mean_budget_share"] = rational_json(report.budget_stats.mean_budget_share);
  j["budget_stats"] = stats;
  j["proposed_category_shares"] = shares_json(report.proposed_category_shares);

  auto fill = [&](const RuleOutcome& outcome) {
    Json r;
    r["winner_count"] = outcome.allocation.winners.size();
    r["winners"] = outcome.allocation.winners;
    r["spent"] = money_json(outcome.allocation.spent);
    r["leftover"] = money_json(outcome.allocation.leftover);
    if (outcome.allocation.rule_tag.endowment_per_voter) {
      r["endowment_per_voter"] = money_json(*outcome.allocation.rule_tag.endowment_per_voter);
    }
    r["tie_events"] = tie_events_json(outcome.allocation.rule_tag.tie_events);
    r["representation_points"] = representation_json(outcome.rep_points, false);
    r["representation_count"] = representation_json(outcome.rep_count, false);
    r["winner_category_shares"] = shares_json(outcome.winner_category_shares);
    r["support_coverage"] = rational_json(outcome.coverage);
    if (outcome.districts) {
      Json districts = Json::object();
      for (const auto& [district, counts] : outcome.districts->per_district) {
        Json d;
        d["proposed"] = counts.first;
        d["winning"] = counts.second;
        d["ratio"] = rational_json(outcome.districts->ratios.at(district));
        districts[district] = d;
      }
      r["districts"] = districts;
      r["district_dispersion"] = rational_json(dispersion(*outcome.districts));
    }
    return r;
  };
  j["rules"] = Json::object();
  j["rules"][config_label(report.a.config)] = fill(report.a);
  j["rules"][config_label(report.b.config)] = fill(report.b);

  Json deltas;
  deltas["exclusive_" + config_label(report.a.config)] = report.exclusive_a;
  deltas["exclusive_" + config_label(report.b.config)] = report.exclusive_b;
  deltas["exclusive_representation_" + config_label(report.a.config)] =
      representation_json(report.exclusive_rep_a, false);
  deltas["exclusive_representation_" + config_label(report.b.config)] =
      representation_json(report.exclusive_rep_b, false);
  j["winner_deltas"] = deltas;
  if (report.spatial_fairness_gain_ab) {
    j["spatial_fairness_gain"] = rational_json(*report.spatial_fairness_gain_ab);
  }
  return j;
}

std::string winners_csv(const Instance& instance, const Profile& profile,
                        const ComparisonReport& report) {
  std::ostringstream out;
  std::string label_a = config_label(report.a.config);
  std::string label_b = config_label(report.b.config);
  out << "project_id,cost,score," << label_a << "," << label_b << "\n";
  auto set_a = report.a.allocation.winner_set();
  auto set_b = report.b.allocation.winner_set();
  for (const auto& p : instance.projects) {
    out << p.id << "," << format_decimal(p.cost.major_units()) << ","
        << total_score(profile, p.id) << "," << (set_a.count(p.id) ? 1 : 0) << ","
        << (set_b.count(p.id) ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string curve_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "threshold," << config_label(report.a.config) << "," << config_label(report.b.config)
      << "\n";
  for (size_t i = 0; i < report.a.rep_points.curve.size(); ++i) {
    out << format_fixed(report.a.rep_points.curve[i].first, 2) << ","
        << format_fixed(report.a.rep_points.curve[i].second, 6) << ","
        << format_fixed(report.b.rep_points.curve[i].second, 6) << "\n";
  }
  return out.str();
}

std::string categories_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "category,proposed," << config_label(report.a.config) << ","
      << config_label(report.b.config) << "\n";
  std::set<std::string> keys;
  for (const auto& [k, v] : report.proposed_category_shares) keys.insert(k);
  for (const auto& [k, v] : report.a.winner_category_shares) keys.insert(k);
  for (const auto& [k, v] : report.b.winner_category_shares) keys.insert(k);
  auto value = [](const std::map<std::string, Rational>& shares, const std::string& key) {
    auto it = shares.find(key);
    return it == shares.end() ? Rational(0) : it->second;
  };
  for (const auto& key : keys) {
    out << key << "," << format_fixed(value(report.proposed_category_shares, key), 6) << ","
        << format_fixed(value(report.a.winner_category_shares, key), 6) << ","
        << format_fixed(value(report.b.winner_category_shares, key), 6) << "\n";
  }
  return out.str();
}

std::string districts_csv(const ComparisonReport& report) {
  std::ostringstream out;
  std::string label_a = config_label(report.a.config);
  std::string label_b = config_label(report.b.config);
  out << "district,proposed,winning_" << label_a << ",winning_" << label_b << ",ratio_" << label_a
      << ",ratio_" << label_b << "\n";
  if (!report.a.districts || !report.b.districts) return out.str();
  for (const auto& [district, counts] : report.a.districts->per_district) {
    auto itb = report.b.districts->per_district.find(district);
    long long winning_b = itb == report.b.districts->per_district.end() ? 0 : itb->second.second;
    out << district << "," << counts.first << "," << counts.second << "," << winning_b << ","
        << format_fixed(report.a.districts->ratios.at(district), 6) << ","
        << format_fixed(report.b.districts->ratios.at(district), 6) << "\n";
  }
  return out.str();
}

std::string to_string(BallotFormat f) {
  switch (f) {
    case BallotFormat::approval: return "approval";
    case BallotFormat::cumulative: return "cumulative";
    case BallotFormat::joint: return "joint";
  }
  return "?";
}

std::optional<BallotFormat> ballot_format_from_string(std::string_view s) {
  if (s == "approval") return BallotFormat::approval;
  if (s == "cumulative") return BallotFormat::cumulative;
  if (s == "joint") return BallotFormat::joint;
  return std::nullopt;
}

namespace {

bool format_accepts(BallotFormat f, VoteType t) {
  switch (f) {
    case BallotFormat::approval: return t == VoteType::approval;
    case BallotFormat::cumulative: return t == VoteType::cumulative;
    case BallotFormat::joint: return t == VoteType::approval || t == VoteType::cumulative;
  }
  return false;
}

std::optional<Rational> mean_of(const std::vector<Rational>& values) {
  if (values.empty()) return std::nullopt;
  Rational sum = 0;
  for (const auto& v : values) sum += v;
  return sum / Rational(values.size());
}

ElectionComparison compare_election(const std::string& id, const Instance& instance,
                                    const Profile& profile, const RuleConfig& config_a,
                                    const RuleConfig& config_b) {
  ElectionComparison c;
  c.summary = summarize(id, instance, profile);
  Allocation a = run_rule(instance, profile, config_a);
  Allocation b = run_rule(instance, profile, config_b);
  check_allocation(instance, a);
  check_allocation(instance, b);
  c.winners_a = a.winners.size();
  c.winners_b = b.winners.size();
  auto thresholds = default_thresholds();
  auto stats_a = representation_stats(profile, a.winner_set(), RepresentationMode::points, thresholds);
  auto stats_b = representation_stats(profile, b.winner_set(), RepresentationMode::points, thresholds);
  c.mean_rep_a = stats_a.mean;
  c.mean_rep_b = stats_b.mean;
  c.defined_voters = stats_a.defined_voters;
  c.curve_a = stats_a.curve;
  c.curve_b = stats_b.curve;
  return c;
}

std::vector<std::vector<MatchCriterion>> criteria_subsets(
    const std::vector<MatchCriterion>& criteria) {
  std::vector<std::vector<MatchCriterion>> subsets;
  size_t n = criteria.size();
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    std::vector<MatchCriterion> subset;
    for (size_t i = 0; i < n; ++i) {
      if (mask & (size_t{1} << i)) subset.push_back(criteria[i]);
    }
    subsets.push_back(std::move(subset));
  }
  std::sort(subsets.begin(), subsets.end(),
            [](const auto& x, const auto& y) { return x.size() < y.size(); });
  return subsets;
}

}  // namespace

CorpusReport corpus_analyze(const std::filesystem::path& directory, const CorpusOptions& options) {
  CorpusReport report;
  report.directory = directory.string();
  report.content_hash = corpus_content_hash(directory);
  report.ballot_format = to_string(options.format);
  report.config_a = options.config_a;
  report.config_b = options.config_b;

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pb") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct Slot {
    std::optional<ElectionComparison> comparison;
    std::string id;
    std::string skip_reason;
  };
  std::vector<Slot> slots(files.size());

  auto worker = [&](std::atomic<size_t>& next) {
    for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      Slot& slot = slots[i];
      slot.id = files[i].stem().string();
      try {
        ParseResult parsed = parse_pb_file(files[i], ParseMode::lenient);
        if (!format_accepts(options.format, parsed.instance.vote_type)) {
          slot.skip_reason = "vote_type " + to_string(parsed.instance.vote_type) +
                             " outside format " + report.ballot_format;
          continue;
        }
        ValidationReport validation =
            validate(parsed.instance, parsed.profile, ValidationMode::lenient);
        if (validation.fatal()) {
          slot.skip_reason = "validation failed: " + validation.violations.front().message;
          continue;
        }
        Profile profile = apply_validation(parsed.profile, validation);
        if (profile.empty()) {
          slot.skip_reason = "no usable ballots";
          continue;
        }
        slot.comparison = compare_election(slot.id, parsed.instance, profile, options.config_a,
                                           options.config_b);
      } catch (const std::exception& e) {
        slot.skip_reason = e.what();
      }
    }
  };

  int jobs = std::max(1, options.jobs);
  std::atomic<size_t> next{0};
  if (jobs == 1 || files.size() < 2) {
    worker(next);
  } else {
    std::vector<std::thread> pool;
    int n = static_cast<int>(std::min<size_t>(jobs, files.size()));
    for (int t = 0; t < n; ++t) pool.emplace_back([&] { worker(next); });
    for (auto& t : pool) t.join();
  }

  for (auto& slot : slots) {
    if (slot.comparison) {
      report.elections.push_back(std::move(*slot.comparison));
    } else {
      report.skipped.emplace_back(slot.id, slot.skip_reason);
    }
  }

  if (options.reference) {
    ParseResult parsed = parse_pb_file(*options.reference, ParseMode::lenient);
    ValidationReport validation = validate(parsed.instance, parsed.profile, ValidationMode::lenient);
    Profile profile = apply_validation(parsed.profile, validation);
    report.reference = compare_election(options.reference->stem().string(), parsed.instance,
                                        profile, options.config_a, options.config_b);
  }

  std::vector<ElectionSummary> summaries;
  for (const auto& e : report.elections) summaries.push_back(e.summary);

  auto thresholds = default_thresholds();
  for (const auto& subset : criteria_subsets(options.criteria)) {
    CorpusAggregate aggregate;
    aggregate.criteria = subset;
    CorpusMatch match = quartile_match(summaries, subset);
    aggregate.matched = match.matched;

    std::set<std::string> matched_ids(match.matched.begin(), match.matched.end());
    std::vector<Rational> reps_a, reps_b, gains, increases;
    Rational pooled_a = 0, pooled_b = 0;
    long long pooled_voters = 0;
    std::vector<Rational> curve_sum_a(thresholds.size(), Rational(0));
    std::vector<Rational> curve_sum_b(thresholds.size(), Rational(0));
    long long curve_count = 0;

    for (const auto& e : report.elections) {
      if (matched_ids.count(e.summary.id) == 0) continue;
      if (e.mean_rep_a) reps_a.push_back(*e.mean_rep_a);
      if (e.mean_rep_b) reps_b.push_back(*e.mean_rep_b);
      if (e.mean_rep_a && e.mean_rep_b) gains.push_back(*e.mean_rep_a - *e.mean_rep_b);
      if (e.winners_b > 0) {
        increases.push_back(Rational(static_cast<long long>(e.winners_a) -
                                         static_cast<long long>(e.winners_b),
                                     static_cast<long long>(e.winners_b)));
      }
      if (e.mean_rep_a && e.defined_voters > 0) {
        pooled_a += *e.mean_rep_a * Rational(e.defined_voters);
        pooled_b += e.mean_rep_b.value_or(Rational(0)) * Rational(e.defined_voters);
        pooled_voters += e.defined_voters;
      }
      for (size_t t = 0; t < thresholds.size(); ++t) {
        curve_sum_a[t] += e.curve_a[t].second;
        curve_sum_b[t] += e.curve_b[t].second;
      }
      ++curve_count;
    }

    aggregate.mean_rep_a = mean_of(reps_a);
    aggregate.mean_rep_b = mean_of(reps_b);
    aggregate.mean_rep_gain = mean_of(gains);
    aggregate.mean_winner_increase = mean_of(increases);
    if (pooled_voters > 0) {
      aggregate.pooled_rep_a = pooled_a / Rational(pooled_voters);
      aggregate.pooled_rep_b = pooled_b / Rational(pooled_voters);
    }
    if (curve_count > 0) {
      for (size_t t = 0; t < thresholds.size(); ++t) {
        aggregate.mean_curve_a.emplace_back(thresholds[t], curve_sum_a[t] / Rational(curve_count));
        aggregate.mean_curve_b.emplace_back(thresholds[t], curve_sum_b[t] / Rational(curve_count));
      }
    }
    if (report.reference && curve_count > 0) {
      Rational gain_b = 0, gain_a = 0;
      for (size_t t = 0; t < thresholds.size(); ++t) {
        gain_b += report.reference->curve_a[t].second - aggregate.mean_curve_b[t].second;
        gain_a += report.reference->curve_a[t].second - aggregate.mean_curve_a[t].second;
      }
      aggregate.reference_gain_vs_b = gain_b / Rational(thresholds.size());
      aggregate.reference_gain_vs_a = gain_a / Rational(thresholds.size());
    }
    report.aggregates.push_back(std::move(aggregate));
  }

  return report;
}

Json to_json(const CorpusReport& report) {
  Json j;
  j["directory"] = report.directory;
  j["content_hash"] = report.content_hash;
  j["ballot_format"] = report.ballot_format;
  j["rule_a"] = config_label(report.config_a);
  j["rule_b"] = config_label(report.config_b);

  Json elections = Json::array();
  for (const auto& e : report.elections) {
    Json entry;
    entry["id"] = e.summary.id;
    entry["vote_type"] = to_string(e.summary.vote_type);
    entry["num_projects"] = e.summary.num_projects;
    entry["num_votes"] = e.summary.num_votes;
    entry["budget"] = money_json(e.summary.budget);
    entry["winners_a"] = e.winners_a;
    entry["winners_b"] = e.winners_b;
    entry["mean_rep_a"] = optional_rational_json(e.mean_rep_a);
    entry["mean_rep_b"] = optional_rational_json(e.mean_rep_b);
    entry["curve_a"] = curve_json(e.curve_a);
    entry["curve_b"] = curve_json(e.curve_b);
    elections.push_back(entry);
  }
  j["elections"] = elections;

  Json skipped = Json::array();
  for (const auto& [id, reason] : report.skipped) {
    Json entry;
    entry["id"] = id;
    entry["reason"] = reason;
    skipped.push_back(entry);
  }
  j["skipped"] = skipped;

  if (report.reference) {
    Json entry;
    entry["id"] = report.reference->summary.id;
    entry["winners_a"] = report.reference->winners_a;
    entry["winners_b"] = report.reference->winners_b;
    entry["mean_rep_a"] = optional_rational_json(report.reference->mean_rep_a);
    entry["mean_rep_b"] = optional_rational_json(report.reference->mean_rep_b);
    entry["curve_a"] = curve_json(report.reference->curve_a);
    entry["curve_b"] = curve_json(report.reference->curve_b);
    j["reference"] = entry;
  }

  Json aggregates = Json::array();
  for (const auto& a : report.aggregates) {
    Json entry;
    Json criteria = Json::array();
    for (const auto& c : a.criteria) criteria.push_back(to_string(c));
    entry["criteria"] = criteria;
    entry["matched_count"] = a.matched.size();
    entry["matched"] = a.matched;
    entry["mean_rep_a"] = optional_rational_json(a.mean_rep_a);
    entry["mean_rep_b"] = optional_rational_json(a.mean_rep_b);
    entry["mean_rep_gain"] = optional_rational_json(a.mean_rep_gain);
    entry["pooled_rep_a"] = optional_rational_json(a.pooled_rep_a);
    entry["pooled_rep_b"] = optional_rational_json(a.pooled_rep_b);
    entry["mean_winner_increase"] = optional_rational_json(a.mean_winner_increase);
    entry["mean_curve_a"] = curve_json(a.mean_curve_a);
    entry["mean_curve_b"] = curve_json(a.mean_curve_b);
    entry["reference_gain_vs_b"] = optional_rational_json(a.reference_gain_vs_b);
    entry["reference_gain_vs_a"] = optional_rational_json(a.reference_gain_vs_a);
    aggregates.push_back(entry);
  }
  j["aggregates"] = aggregates;
  return j;
}

std::string aggregates_csv(const CorpusReport& report) {
  std::ostringstream out;
  out << "criteria,matched,mean_rep_a,mean_rep_b,mean_rep_gain,mean_winner_increase,"
         "reference_gain_vs_b,reference_gain_vs_a\n";
  auto cell = [](const std::optional<Rational>& r) {
    return r ? format_fixed(*r, 6) : std::string();
  };
  for (const auto& a : report.aggregates) {
    std::string names;
    for (size_t i = 0; i < a.criteria.size(); ++i) {
      if (i > 0) names += "+";
      names += to_string(a.criteria[i]);
    }
    if (names.empty()) names = "all_elections";
    out << names << "," << a.matched.size() << "," << cell(a.mean_rep_a) << ","
        << cell(a.mean_rep_b) << "," << cell(a.mean_rep_gain) << ","
        << cell(a.mean_winner_increase) << "," << cell(a.reference_gain_vs_b) << ","
        << cell(a.reference_gain_vs_a) << "\n";
  }
  return out.str();
}

}  // namespace pbeval
