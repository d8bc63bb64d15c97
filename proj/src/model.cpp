#include "pbeval/model.hpp"

#include <algorithm>
#include <unordered_set>

namespace pbeval {

std::string to_string(VoteType t) {
  switch (t) {
    case VoteType::approval: return "approval";
    case VoteType::cumulative: return "cumulative";
    case VoteType::scoring: return "scoring";
    case VoteType::ordinal: return "ordinal";
  }
  return "?";
}

std::optional<VoteType> vote_type_from_string(std::string_view s) {
  if (s == "approval") return VoteType::approval;
  if (s == "cumulative") return VoteType::cumulative;
  if (s == "scoring") return VoteType::scoring;
  if (s == "ordinal") return VoteType::ordinal;
  return std::nullopt;
}

std::optional<std::string> Instance::meta_value(std::string_view key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const Project* Instance::find_project(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return nullptr;
  return &projects[it->second];
}

Money Instance::total_project_cost() const {
  Money total;
  for (const auto& p : projects) total += p.cost;
  return total;
}

void Instance::reindex() {
  index_.clear();
  index_.reserve(projects.size());
  for (size_t i = 0; i < projects.size(); ++i) {
    auto [it, inserted] = index_.emplace(projects[i].id, i);
    if (!inserted) throw std::invalid_argument("duplicate project id '" + projects[i].id + "'");
  }
}

long long Ballot::points_for(std::string_view project_id) const {
  for (const auto& e : entries) {
    if (e.project_id == project_id) return e.points;
  }
  return 0;
}

long long Ballot::total_points() const {
  long long sum = 0;
  for (const auto& e : entries) sum += e.points;
  return sum;
}

long long utility(const Ballot& ballot, std::string_view project_id) {
  return ballot.points_for(project_id);
}

long long total_score(const Profile& profile, std::string_view project_id) {
  long long sum = 0;
  for (const auto& b : profile.ballots) sum += b.points_for(project_id);
  return sum;
}

long long total_score(const Instance& instance, const Profile& profile,
                      std::string_view project_id) {
  if (!instance.has_project(project_id)) {
    throw std::invalid_argument("unknown project id '" + std::string(project_id) + "'");
  }
  return total_score(profile, project_id);
}

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::unknown_project: return "unknown project";
    case ViolationKind::duplicate_voter: return "duplicate voter";
    case ViolationKind::zero_cost_project: return "zero-cost project";
    case ViolationKind::point_total_mismatch: return "point total mismatch";
    case ViolationKind::too_few_projects: return "too few projects";
    case ViolationKind::too_many_projects: return "too many projects";
    case ViolationKind::points_exceed_project_cap: return "points exceed per-project cap";
    case ViolationKind::nonpositive_points: return "nonpositive points";
    case ViolationKind::non_approval_points: return "non-approval points";
  }
  return "?";
}

bool ValidationReport::fatal() const {
  if (mode == ValidationMode::strict) return !violations.empty();
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.instance_level; });
}

ValidationReport validate(const Instance& instance, const Profile& profile, ValidationMode mode) {
  ValidationReport report;
  report.mode = mode;

  for (const auto& p : instance.projects) {
    if (p.cost.is_zero()) {
      report.violations.push_back({ViolationKind::zero_cost_project, p.id,
                                   "project '" + p.id + "' has zero cost", true});
    }
  }

  const auto& rules = instance.ballot_rules;
  std::unordered_set<std::string> seen_voters;
  for (size_t ballot_index = 0; ballot_index < profile.ballots.size(); ++ballot_index) {
    const Ballot& ballot = profile.ballots[ballot_index];
    bool drop = false;
    auto flag = [&](ViolationKind kind, std::string message) {
      report.violations.push_back({kind, ballot.voter_id, std::move(message), false});
      drop = true;
    };

    if (!seen_voters.insert(ballot.voter_id).second) {
      flag(ViolationKind::duplicate_voter, "voter '" + ballot.voter_id + "' appears more than once");
    } else {
      for (const auto& e : ballot.entries) {
        if (!instance.has_project(e.project_id)) {
          flag(ViolationKind::unknown_project,
               "voter '" + ballot.voter_id + "' references unknown project '" + e.project_id + "'");
        }
        if (e.points <= 0) {
          flag(ViolationKind::nonpositive_points,
               "voter '" + ballot.voter_id + "' assigns " + std::to_string(e.points) +
                   " points to '" + e.project_id + "'");
        }
        if (instance.vote_type == VoteType::approval && e.points != 1) {
          flag(ViolationKind::non_approval_points,
               "approval ballot of voter '" + ballot.voter_id + "' carries point value " +
                   std::to_string(e.points));
        }
        if (rules.max_points_per_project && e.points > *rules.max_points_per_project) {
          flag(ViolationKind::points_exceed_project_cap,
               "voter '" + ballot.voter_id + "' gives " + std::to_string(e.points) +
                   " points to '" + e.project_id + "' (cap " +
                   std::to_string(*rules.max_points_per_project) + ")");
        }
      }
      if (rules.min_projects && static_cast<long long>(ballot.size()) < *rules.min_projects) {
        flag(ViolationKind::too_few_projects,
             "voter '" + ballot.voter_id + "' votes for " + std::to_string(ballot.size()) +
                 " projects (minimum " + std::to_string(*rules.min_projects) + ")");
      }
      if (rules.max_projects && static_cast<long long>(ballot.size()) > *rules.max_projects) {
        flag(ViolationKind::too_many_projects,
             "voter '" + ballot.voter_id + "' votes for " + std::to_string(ballot.size()) +
                 " projects (maximum " + std::to_string(*rules.max_projects) + ")");
      }
      if (instance.vote_type == VoteType::cumulative && rules.total_points &&
          ballot.total_points() != *rules.total_points) {
        flag(ViolationKind::point_total_mismatch,
             "voter '" + ballot.voter_id + "' distributes " + std::to_string(ballot.total_points()) +
                 " points (required " + std::to_string(*rules.total_points) + ")");
      }
    }

    if (drop && mode == ValidationMode::lenient) {
      report.dropped_voters.push_back(ballot.voter_id);
      report.dropped_ballots.push_back(ballot_index);
    }
  }
  return report;
}

Profile apply_validation(const Profile& profile, const ValidationReport& report) {
  if (report.dropped_ballots.empty()) return profile;
  std::unordered_set<size_t> dropped(report.dropped_ballots.begin(),
                                     report.dropped_ballots.end());
  Profile kept;
  kept.ballots.reserve(profile.ballots.size());
  for (size_t i = 0; i < profile.ballots.size(); ++i) {
    if (dropped.count(i) == 0) kept.ballots.push_back(profile.ballots[i]);
  }
  return kept;
}

bool Allocation::is_winner(std::string_view id) const {
  return std::find(winners.begin(), winners.end(), id) != winners.end();
}

std::set<std::string> Allocation::winner_set() const {
  return std::set<std::string>(winners.begin(), winners.end());
}

void check_allocation(const Instance& instance, const Allocation& allocation) {
  Money cost_sum;
  std::unordered_set<std::string> seen;
  for (const auto& id : allocation.winners) {
    const Project* p = instance.find_project(id);
    if (p == nullptr) throw InternalError("allocation winner '" + id + "' is not in the instance");
    if (!seen.insert(id).second) throw InternalError("allocation selects '" + id + "' twice");
    cost_sum += p->cost;
  }
  if (cost_sum != allocation.spent) {
    throw InternalError("allocation spent does not equal the cost of its winners");
  }
  if (allocation.spent + allocation.leftover != instance.budget) {
    throw InternalError("allocation spent+leftover does not equal the budget");
  }
  if (allocation.spent > instance.budget) throw InternalError("allocation exceeds the budget");
  for (const auto& [project_id, ledger] : allocation.payments) {
    const Project* p = instance.find_project(project_id);
    if (p == nullptr || !allocation.is_winner(project_id)) {
      throw InternalError("payment ledger for non-winner '" + project_id + "'");
    }
    Money paid;
    for (const auto& [voter, amount] : ledger) paid += amount;
    if (paid != p->cost) {
      throw InternalError("payments for '" + project_id + "' do not sum to its cost");
    }
  }
}

}  // namespace pbeval
