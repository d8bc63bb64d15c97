// pbeval: participatory-budgeting election evaluation.
//
// Computes utilitarian greedy and Method of Equal Shares outcomes (with
// utilitarian/Add1/Add1U completions) on Pabulib files, compares rules,
// analyzes corpora with quartile matching, and emits JSON/CSV reports.

#include "pbeval/metrics.hpp"
#include "pbeval/model.hpp"
#include "pbeval/pabulib.hpp"
#include "pbeval/report.hpp"
#include "pbeval/rules.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

struct RuleFlags {
  std::string rule = "mes";
  std::string completion = "add1u";
  std::string increment = "1";
  std::string utility = "points";
  std::string tiebreak = "score,cost,id";
};

void add_rule_flags(CLI::App* cmd, RuleFlags& flags, const std::string& suffix = "") {
  std::string dash = suffix.empty() ? "" : "-" + suffix;
  cmd->add_option("--rule" + dash, flags.rule, "Voting rule: greedy or mes")
      ->check(CLI::IsMember({"greedy", "mes"}));
  cmd->add_option("--completion" + dash, flags.completion,
                  "Completion for mes: none, utilitarian, add1, add1u")
      ->check(CLI::IsMember({"none", "utilitarian", "add1", "add1u"}));
  cmd->add_option("--utility" + dash, flags.utility,
                  "Utilities for mes: raw points or normalized per voter")
      ->check(CLI::IsMember({"points", "normalized"}));
}

std::vector<pbeval::TieCriterion> parse_tiebreak(const std::string& spec) {
  std::vector<pbeval::TieCriterion> order;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto c = pbeval::tie_criterion_from_string(item);
    if (!c) throw CLI::ValidationError("--tiebreak", "unknown criterion '" + item + "'");
    order.push_back(*c);
  }
  if (order.empty()) throw CLI::ValidationError("--tiebreak", "empty tie-break list");
  return order;
}

pbeval::RuleConfig make_config(const RuleFlags& flags, const std::string& increment,
                               const std::string& tiebreak) {
  pbeval::RuleConfig config;
  config.rule = flags.rule == "greedy" ? pbeval::Rule::greedy : pbeval::Rule::mes;
  if (config.rule == pbeval::Rule::greedy) {
    config.completion = pbeval::Completion::none;
  } else if (flags.completion == "none") {
    config.completion = pbeval::Completion::none;
  } else if (flags.completion == "utilitarian") {
    config.completion = pbeval::Completion::utilitarian;
  } else if (flags.completion == "add1") {
    config.completion = pbeval::Completion::add1;
  } else {
    config.completion = pbeval::Completion::add1u;
  }
  config.add1_increment = pbeval::Money::from_major(pbeval::parse_decimal(increment));
  config.tiebreak = parse_tiebreak(tiebreak);
  config.utility_mode = flags.utility == "normalized" ? pbeval::UtilityMode::normalized
                                                      : pbeval::UtilityMode::points;
  return config;
}

// Parse + validate, applying lenient drops when requested. Throws on fatal
// problems; diagnostics go to stderr.
std::pair<pbeval::Instance, pbeval::Profile> load_election(const std::string& path, bool lenient) {
  auto mode = lenient ? pbeval::ParseMode::lenient : pbeval::ParseMode::strict;
  pbeval::ParseResult parsed = pbeval::parse_pb_file(path, mode);
  for (const auto& d : parsed.diagnostics) {
    std::cerr << path << ":" << d.line << ": " << d.message << "\n";
  }
  auto vmode = lenient ? pbeval::ValidationMode::lenient : pbeval::ValidationMode::strict;
  pbeval::ValidationReport report = pbeval::validate(parsed.instance, parsed.profile, vmode);
  for (const auto& v : report.violations) {
    std::cerr << path << ": " << pbeval::to_string(v.kind) << ": " << v.message << "\n";
  }
  if (report.fatal()) {
    throw std::invalid_argument("validation failed for '" + path + "'");
  }
  pbeval::Profile profile = pbeval::apply_validation(parsed.profile, report);
  if (!report.dropped_voters.empty()) {
    std::cerr << path << ": dropped " << report.dropped_voters.size() << " invalid ballot(s)\n";
  }
  return {std::move(parsed.instance), std::move(profile)};
}

void write_output(const std::string& target, const std::string& content) {
  if (target == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + target + "'");
  out << content;
}

void write_json(const std::string& target, const pbeval::Json& j) {
  write_output(target, j.dump(2) + "\n");
}

std::vector<pbeval::PairwiseComparison> load_pairwise(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<pbeval::PairwiseComparison> records;
  std::string line;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;  // first row names the columns: a,b,winner
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, winner;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) {
      throw pbeval::ParseError(line_no, "expected 'a,b,winner'");
    }
    std::getline(ss, winner, ',');
    records.push_back({a, b, winner});
  }
  return records;
}

int cmd_validate(const std::string& path, bool lenient) {
  auto mode = lenient ? pbeval::ParseMode::lenient : pbeval::ParseMode::strict;
  pbeval::ParseResult parsed = pbeval::parse_pb_file(path, mode);
  for (const auto& d : parsed.diagnostics) {
    std::cout << path << ":" << d.line << ": " << d.message << "\n";
  }
  auto vmode = lenient ? pbeval::ValidationMode::lenient : pbeval::ValidationMode::strict;
  pbeval::ValidationReport report = pbeval::validate(parsed.instance, parsed.profile, vmode);
  for (const auto& v : report.violations) {
    std::cout << pbeval::to_string(v.kind) << ": " << v.message << "\n";
  }
  std::cout << parsed.instance.projects.size() << " projects, " << parsed.profile.size()
            << " ballots, vote_type " << pbeval::to_string(parsed.instance.vote_type)
            << ", budget " << pbeval::format_decimal(parsed.instance.budget.major_units()) << "\n";
  if (report.fatal()) {
    std::cout << "INVALID (" << report.violations.size() << " violation(s))\n";
    return kExitValidation;
  }
  if (!report.violations.empty()) {
    std::cout << "VALID after dropping " << report.dropped_voters.size() << " ballot(s)\n";
  } else {
    std::cout << "VALID\n";
  }
  return kExitOk;
}

void print_allocation_summary(const pbeval::Instance& instance,
                              const pbeval::RuleOutcome& outcome) {
  const auto& allocation = outcome.allocation;
  std::cout << allocation.rule_tag.rule;
  if (allocation.rule_tag.completion != "none") std::cout << "+" << allocation.rule_tag.completion;
  std::cout << ": " << allocation.winners.size() << " winner(s), spent "
            << pbeval::format_decimal(allocation.spent.major_units()) << ", leftover "
            << pbeval::format_decimal(allocation.leftover.major_units());
  if (allocation.rule_tag.endowment_per_voter) {
    std::cout << ", endowment "
              << pbeval::format_fixed(allocation.rule_tag.endowment_per_voter->major_units(), 4);
  }
  std::cout << "\n";
  for (const auto& id : allocation.winners) {
    const pbeval::Project* p = instance.find_project(id);
    std::cout << "  " << id;
    if (p != nullptr && !p->name.empty()) std::cout << " (" << p->name << ")";
    if (p != nullptr) std::cout << " cost " << pbeval::format_decimal(p->cost.major_units());
    std::cout << "\n";
  }
  if (outcome.rep_points.mean) {
    std::cout << "mean representation (points): "
              << pbeval::format_fixed(*outcome.rep_points.mean, 4) << "\n";
  }
  if (!allocation.rule_tag.tie_events.empty()) {
    std::cout << allocation.rule_tag.tie_events.size() << " tie-break event(s) recorded\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Participatory-budgeting election evaluation"};
  app.require_subcommand(1);
  // Usage: pbeval --config FILE <subcommand> ...; the file holds [subcommand]
  // sections of option defaults, and explicit flags override it.
  app.set_config("--config", "", "TOML/INI file of option defaults; flags override it");

  std::string file, out_json, out_csv, out_path;
  bool lenient = false;
  bool no_ledger = false;
  std::string increment = "1";
  std::string tiebreak = "score,cost,id";

  auto* validate_cmd = app.add_subcommand("validate", "Check a Pabulib file");
  validate_cmd->add_option("file", file, "Election file")->required();
  validate_cmd->add_flag("--lenient", lenient, "Drop invalid ballots instead of failing");

  RuleFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Evaluate one rule on an election");
  run_cmd->add_option("file", file, "Election file")->required();
  add_rule_flags(run_cmd, run_flags);
  run_cmd->add_option("--add1-increment", increment, "Add1 endowment step, major units per voter");
  run_cmd->add_option("--tiebreak", tiebreak, "Comma list of score, cost, id");
  run_cmd->add_flag("--lenient", lenient, "Drop invalid ballots instead of failing");
  run_cmd->add_option("--json", out_json, "Write a JSON report ('-' for stdout)");
  run_cmd->add_flag("--no-ledger", no_ledger, "Omit the per-voter payment ledger from JSON");

  RuleFlags flags_a, flags_b;
  flags_b.rule = "greedy";
  auto* compare_cmd = app.add_subcommand("compare", "Evaluate two rule configs side by side");
  compare_cmd->add_option("file", file, "Election file")->required();
  add_rule_flags(compare_cmd, flags_a, "a");
  add_rule_flags(compare_cmd, flags_b, "b");
  compare_cmd->add_option("--add1-increment", increment, "Add1 endowment step, major units per voter");
  compare_cmd->add_option("--tiebreak", tiebreak, "Comma list of score, cost, id");
  compare_cmd->add_flag("--lenient", lenient, "Drop invalid ballots instead of failing");
  compare_cmd->add_option("--json", out_json, "Write a JSON report ('-' for stdout)");
  compare_cmd->add_option("--csv", out_csv, "Prefix for CSV panels (winners/curve/categories/districts)");

  std::string directory, criteria_spec = "all", format_spec = "joint", reference;
  int jobs = 1;
  RuleFlags corpus_flags_a, corpus_flags_b;
  corpus_flags_b.rule = "greedy";
  auto* corpus_cmd = app.add_subcommand("corpus", "Compare rules across a directory of elections");
  corpus_cmd->add_option("dir", directory, "Directory of .pb files")->required();
  corpus_cmd->add_option("--criteria", criteria_spec,
                         "Comma list of num_projects_q4, relative_budget_allocation_q1, "
                         "project_budget_share_q1, or 'all'");
  corpus_cmd->add_option("--format", format_spec, "Ballot format slice: approval, cumulative, joint")
      ->check(CLI::IsMember({"approval", "cumulative", "joint"}));
  corpus_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--reference", reference,
                         "Election file whose rule-a outcome is compared against the corpus");
  add_rule_flags(corpus_cmd, corpus_flags_a, "a");
  add_rule_flags(corpus_cmd, corpus_flags_b, "b");
  corpus_cmd->add_option("--add1-increment", increment, "Add1 endowment step, major units per voter");
  corpus_cmd->add_option("--tiebreak", tiebreak, "Comma list of score, cost, id");
  corpus_cmd->add_option("--json", out_json, "Write a JSON report ('-' for stdout)");
  corpus_cmd->add_option("--csv", out_csv, "Prefix for the aggregates CSV");

  auto* pairwise_cmd = app.add_subcommand("pairwise", "Rank projects by pairwise wins");
  pairwise_cmd->add_option("file", file, "CSV of a,b,winner records (winner empty or 'tie' for ties)")
      ->required();
  pairwise_cmd->add_option("--json", out_json, "Write a JSON report ('-' for stdout)");
  pairwise_cmd->add_option("--csv", out_csv, "Write the ranking CSV to this path");

  auto* convert_cmd = app.add_subcommand("convert", "Parse and re-emit a file in canonical form");
  convert_cmd->add_option("file", file, "Election file")->required();
  convert_cmd->add_option("--out", out_path, "Output path ('-' for stdout)")->required();
  convert_cmd->add_flag("--lenient", lenient, "Drop invalid ballots instead of failing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate_cmd)) {
      return cmd_validate(file, lenient);
    }

    if (app.got_subcommand(run_cmd)) {
      auto [instance, profile] = load_election(file, lenient);
      pbeval::RuleConfig config = make_config(run_flags, increment, tiebreak);
      pbeval::RuleOutcome outcome = pbeval::evaluate_rule(instance, profile, config);
      print_allocation_summary(instance, outcome);
      if (!out_json.empty()) {
        write_json(out_json, pbeval::to_json(instance, profile, outcome, !no_ledger));
      }
      return kExitOk;
    }

    if (app.got_subcommand(compare_cmd)) {
      auto [instance, profile] = load_election(file, lenient);
      pbeval::RuleConfig config_a = make_config(flags_a, increment, tiebreak);
      pbeval::RuleConfig config_b = make_config(flags_b, increment, tiebreak);
      std::filesystem::path p(file);
      pbeval::ComparisonReport report =
          pbeval::compare(p.stem().string(), instance, profile, config_a, config_b);
      print_allocation_summary(instance, report.a);
      print_allocation_summary(instance, report.b);
      std::cout << "exclusive winners: " << report.exclusive_a.size() << " vs "
                << report.exclusive_b.size() << "\n";
      if (report.spatial_fairness_gain_ab) {
        std::cout << "spatial fairness gain: "
                  << pbeval::format_fixed(*report.spatial_fairness_gain_ab, 4) << "\n";
      }
      if (!out_json.empty()) write_json(out_json, pbeval::to_json(instance, report));
      if (!out_csv.empty()) {
        write_output(out_csv + "winners.csv", pbeval::winners_csv(instance, profile, report));
        write_output(out_csv + "curve.csv", pbeval::curve_csv(report));
        write_output(out_csv + "categories.csv", pbeval::categories_csv(report));
        if (report.a.districts) {
          write_output(out_csv + "districts.csv", pbeval::districts_csv(report));
        }
      }
      return kExitOk;
    }

    if (app.got_subcommand(corpus_cmd)) {
      pbeval::CorpusOptions options;
      if (criteria_spec == "all") {
        options.criteria = {pbeval::MatchCriterion::num_projects_q4,
                            pbeval::MatchCriterion::relative_budget_allocation_q1,
                            pbeval::MatchCriterion::project_budget_share_q1};
      } else if (!criteria_spec.empty() && criteria_spec != "none") {
        std::stringstream ss(criteria_spec);
        std::string item;
        while (std::getline(ss, item, ',')) {
          auto c = pbeval::match_criterion_from_string(item);
          if (!c) throw CLI::ValidationError("--criteria", "unknown criterion '" + item + "'");
          options.criteria.push_back(*c);
        }
      }
      options.format = *pbeval::ballot_format_from_string(format_spec);
      options.config_a = make_config(corpus_flags_a, increment, tiebreak);
      options.config_b = make_config(corpus_flags_b, increment, tiebreak);
      options.jobs = jobs;
      if (!reference.empty()) options.reference = reference;
      pbeval::CorpusReport report = pbeval::corpus_analyze(directory, options);
      std::cout << report.elections.size() << " election(s) evaluated, " << report.skipped.size()
                << " skipped, corpus hash " << report.content_hash << "\n";
      for (const auto& a : report.aggregates) {
        std::cout << "criteria=";
        if (a.criteria.empty()) {
          std::cout << "(none)";
        } else {
          for (size_t i = 0; i < a.criteria.size(); ++i) {
            if (i > 0) std::cout << "+";
            std::cout << pbeval::to_string(a.criteria[i]);
          }
        }
        std::cout << " matched=" << a.matched.size();
        if (a.mean_rep_gain) {
          std::cout << " mean_rep_gain=" << pbeval::format_fixed(*a.mean_rep_gain, 4);
        }
        if (a.mean_winner_increase) {
          std::cout << " winner_increase=" << pbeval::format_fixed(*a.mean_winner_increase, 4);
        }
        std::cout << "\n";
      }
      if (!out_json.empty()) write_json(out_json, pbeval::to_json(report));
      if (!out_csv.empty()) write_output(out_csv + "aggregates.csv", pbeval::aggregates_csv(report));
      return kExitOk;
    }

    if (app.got_subcommand(pairwise_cmd)) {
      auto records = load_pairwise(file);
      auto ranking = pbeval::pairwise_win_ranking(records);
      std::ostringstream csv;
      csv << "project,wins,rank\n";
      for (const auto& r : ranking) {
        csv << r.project << "," << r.wins << "," << r.rank << "\n";
      }
      std::cout << csv.str();
      if (!out_csv.empty()) write_output(out_csv, csv.str());
      if (!out_json.empty()) {
        pbeval::Json j = pbeval::Json::array();
        for (const auto& r : ranking) {
          pbeval::Json entry;
          entry["project"] = r.project;
          entry["wins"] = r.wins;
          entry["rank"] = r.rank;
          j.push_back(entry);
        }
        write_json(out_json, j);
      }
      return kExitOk;
    }

    if (app.got_subcommand(convert_cmd)) {
      auto [instance, profile] = load_election(file, lenient);
      std::string text = pbeval::serialize_pb(instance, profile);
      write_output(out_path, text);
      return kExitOk;
    }
  } catch (const pbeval::ParseError& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const pbeval::InternalError& e) {
    std::cerr << "internal invariant breach: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
