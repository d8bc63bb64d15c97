#ifndef PBEVAL_RULES_HPP
#define PBEVAL_RULES_HPP

#include "pbeval/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pbeval {

enum class Rule { greedy, mes };
enum class Completion { none, utilitarian, add1, add1u };
enum class UtilityMode { points, normalized };

// Tie-break criteria, applied in order; `id` is always appended as the final
// fallback so selection is a total order.
enum class TieCriterion { score, cost, id };

std::string to_string(Rule r);
std::string to_string(Completion c);
std::string to_string(UtilityMode m);
std::string to_string(TieCriterion c);
std::optional<TieCriterion> tie_criterion_from_string(std::string_view s);

struct RuleConfig {
  Rule rule = Rule::mes;
  Completion completion = Completion::none;
  Money add1_increment = Money::from_major(1);  // per voter, per iteration
  std::vector<TieCriterion> tiebreak = {TieCriterion::score, TieCriterion::cost,
                                        TieCriterion::id};
  UtilityMode utility_mode = UtilityMode::points;
};

// Equal per-voter share of the budget.
struct Endowment {
  Money per_voter;
};

Endowment equal_endowment(const Instance& instance, const Profile& profile);

// One backer of a candidate project: remaining budget and positive utility.
struct RhoSupporter {
  Rational budget;   // minor units
  Rational utility;  // > 0
};

// rho is the price per utility unit at which capped supporter payments
// min(budget, rho*utility) exactly cover the cost.
struct RhoSolution {
  Rational rho;
  std::vector<Rational> payments;  // aligned with the supporter list
};

// Smallest rho covering `cost`, or nullopt when the supporters' combined
// budgets fall short. Exact; found by scanning the sorted budget/utility
// breakpoints.
std::optional<RhoSolution> find_rho(const Rational& cost,
                                    std::span<const RhoSupporter> supporters);
std::optional<RhoSolution> find_rho(const Money& cost,
                                    const std::vector<std::pair<Money, long long>>& supporters);

// Descending-score scan: each project is selected iff it fits the remaining
// budget at its turn; skipped projects do not end the scan.
Allocation utilitarian_greedy(const Instance& instance, const Profile& profile,
                              const RuleConfig& config);

// Method of equal shares: repeatedly buy the cheapest-per-utility affordable
// project, supporters paying min(budget, rho*utility), until nothing is
// affordable.
Allocation mes_core(const Instance& instance, const Profile& profile, const Endowment& endowment,
                    const RuleConfig& config);

// Greedy scan over the unselected projects against the leftover budget;
// appended winners carry no payment ledger.
Allocation complete_utilitarian(const Instance& instance, const Profile& profile,
                                const Allocation& partial, const RuleConfig& config);

// Reruns the equal-shares selection with stepped-up endowments
// (budget/n + k*increment, capped at the full budget per voter) and keeps the
// last outcome that fits the budget.
Allocation add1(const Instance& instance, const Profile& profile, const RuleConfig& config);

// add1 followed by the utilitarian completion.
Allocation add1u(const Instance& instance, const Profile& profile, const RuleConfig& config);

// True iff no unselected project fits the leftover budget.
bool is_exhaustive(const Instance& instance, const Allocation& allocation);

// Dispatch on config.rule/config.completion.
Allocation run_rule(const Instance& instance, const Profile& profile, const RuleConfig& config);

// One add1 endowment step, exposed for auditing the iteration trace.
struct Add1Step {
  Money endowment;
  Money selected_cost;
  size_t winner_count = 0;
  bool kept = false;  // fits the budget
};

struct Add1Result {
  Allocation allocation;
  std::vector<Add1Step> trace;
};

Add1Result add1_with_trace(const Instance& instance, const Profile& profile,
                           const RuleConfig& config);

}  // namespace pbeval

#endif
