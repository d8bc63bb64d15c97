#ifndef PBEVAL_MODEL_HPP
#define PBEVAL_MODEL_HPP

#include "pbeval/rational.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pbeval {

// Raised when an allocation or ledger violates one of its own invariants.
// Reaching this is a bug, not bad input; the CLI maps it to exit code 3.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// Non-negative exact amount in minor currency units (e.g. centimes).
// Costs read from election files are scaled by kMinorUnitsPerMajor once at
// parse time, so every later comparison is integer-exact whenever the input
// had at most two decimals.
class Money {
 public:
  static constexpr int kMinorUnitsPerMajor = 100;

  Money() = default;
  explicit Money(Rational minor_units) : value_(std::move(minor_units)) {
    if (value_ < 0) throw std::invalid_argument("Money cannot be negative");
  }
  static Money from_major(const Rational& major) { return Money(major * kMinorUnitsPerMajor); }

  const Rational& value() const { return value_; }
  Rational major_units() const { return value_ / kMinorUnitsPerMajor; }
  bool is_zero() const { return value_ == 0; }

  Money operator+(const Money& o) const { return Money(value_ + o.value_); }
  Money operator-(const Money& o) const {
    if (value_ < o.value_) throw std::invalid_argument("Money subtraction would go negative");
    return Money(value_ - o.value_);
  }
  Money& operator+=(const Money& o) {
    value_ += o.value_;
    return *this;
  }
  bool operator==(const Money& o) const { return value_ == o.value_; }
  bool operator!=(const Money& o) const { return value_ != o.value_; }
  bool operator<(const Money& o) const { return value_ < o.value_; }
  bool operator<=(const Money& o) const { return value_ <= o.value_; }
  bool operator>(const Money& o) const { return value_ > o.value_; }
  bool operator>=(const Money& o) const { return value_ >= o.value_; }

 private:
  Rational value_;
};

enum class VoteType { approval, cumulative, scoring, ordinal };

std::string to_string(VoteType t);
std::optional<VoteType> vote_type_from_string(std::string_view s);

// Constraints a ballot must satisfy, as declared by the election file.
struct BallotRules {
  std::optional<long long> min_projects;
  std::optional<long long> max_projects;
  std::optional<long long> total_points;           // exact point sum for cumulative ballots
  std::optional<long long> max_points_per_project;
};

struct Project {
  std::string id;
  Money cost;
  std::string name;
  std::vector<std::string> categories;
  std::optional<std::string> district;
  // Unrecognized columns, preserved verbatim for round-trips.
  std::vector<std::pair<std::string, std::string>> extra;
};

struct Instance {
  // All META rows in file order, canonical keys included. This is the
  // round-trip source of truth; the typed fields below are parsed views.
  std::vector<std::pair<std::string, std::string>> meta;
  Money budget;
  VoteType vote_type = VoteType::approval;
  BallotRules ballot_rules;
  std::vector<Project> projects;

  std::optional<std::string> meta_value(std::string_view key) const;
  const Project* find_project(std::string_view id) const;
  bool has_project(std::string_view id) const { return find_project(id) != nullptr; }
  Money total_project_cost() const;

  // Call after filling `projects`; duplicate ids throw std::invalid_argument.
  void reindex();

 private:
  std::unordered_map<std::string, size_t> index_;
};

struct BallotEntry {
  std::string project_id;
  long long points = 0;
};

struct Ballot {
  std::string voter_id;
  // File order preserved (ordinal ballots are rankings, and round-trips must
  // not reorder votes).
  std::vector<BallotEntry> entries;
  std::vector<std::pair<std::string, std::string>> voter_meta;

  long long points_for(std::string_view project_id) const;
  long long total_points() const;
  size_t size() const { return entries.size(); }
};

struct Profile {
  std::vector<Ballot> ballots;

  size_t size() const { return ballots.size(); }
  bool empty() const { return ballots.empty(); }
};

// u_i(c): points the ballot assigns to the project, 0 if unlisted.
long long utility(const Ballot& ballot, std::string_view project_id);

// Sum of utilities over all ballots.
long long total_score(const Profile& profile, std::string_view project_id);

// Same, but rejects ids that are not part of the instance.
long long total_score(const Instance& instance, const Profile& profile,
                      std::string_view project_id);

enum class ValidationMode { strict, lenient };

enum class ViolationKind {
  unknown_project,
  duplicate_voter,
  zero_cost_project,
  point_total_mismatch,
  too_few_projects,
  too_many_projects,
  points_exceed_project_cap,
  nonpositive_points,
  non_approval_points,
};

std::string to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string subject;  // voter or project id
  std::string message;
  bool instance_level = false;  // cannot be repaired by dropping a ballot
};

struct ValidationReport {
  std::vector<Violation> violations;
  // voter_ids removed in lenient mode (duplicates and rule violators).
  std::vector<std::string> dropped_voters;
  // Indices into the validated profile's ballot list. A duplicate drops only
  // the later occurrences, so indices rather than ids identify the ballots.
  std::vector<size_t> dropped_ballots;
  ValidationMode mode = ValidationMode::strict;

  bool ok() const { return violations.empty(); }
  // In strict mode any violation is fatal; in lenient mode only
  // instance-level ones are.
  bool fatal() const;
};

ValidationReport validate(const Instance& instance, const Profile& profile, ValidationMode mode);

// Profile with the report's dropped ballots removed (lenient pipeline).
Profile apply_validation(const Profile& profile, const ValidationReport& report);

// One tie-break invocation: the moment two candidates compared equal on the
// primary criterion and a secondary rule had to decide.
struct TieEvent {
  std::string context;                  // e.g. "mes round 3", "greedy rank 1"
  std::vector<std::string> contenders;  // ids that tied, winner first
  std::string resolved_by;              // criterion that separated them
};

struct RuleTag {
  std::string rule;
  std::string completion;
  std::optional<Money> endowment_per_voter;
  std::string utility_mode = "points";
  std::vector<TieEvent> tie_events;
};

struct Allocation {
  std::vector<std::string> winners;  // selection order
  // project -> voter -> amount; only rho-selected projects have entries.
  std::map<std::string, std::map<std::string, Money>> payments;
  Money spent;
  Money leftover;
  RuleTag rule_tag;

  bool is_winner(std::string_view id) const;
  std::set<std::string> winner_set() const;
};

// Throws InternalError unless spent+leftover==budget, spent==sum of winner
// costs, and every payment ledger sums to its project's cost.
void check_allocation(const Instance& instance, const Allocation& allocation);

}  // namespace pbeval

#endif
