#include "pbeval/rules.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace pbeval {

std::string to_string(Rule r) { return r == Rule::greedy ? "greedy" : "mes"; }

std::string to_string(Completion c) {
  switch (c) {
    case Completion::none: return "none";
    case Completion::utilitarian: return "utilitarian";
    case Completion::add1: return "add1";
    case Completion::add1u: return "add1u";
  }
  return "?";
}

std::string to_string(UtilityMode m) {
  return m == UtilityMode::points ? "points" : "normalized";
}

std::string to_string(TieCriterion c) {
  switch (c) {
    case TieCriterion::score: return "score";
    case TieCriterion::cost: return "cost";
    case TieCriterion::id: return "id";
  }
  return "?";
}

std::optional<TieCriterion> tie_criterion_from_string(std::string_view s) {
  if (s == "score") return TieCriterion::score;
  if (s == "cost") return TieCriterion::cost;
  if (s == "id") return TieCriterion::id;
  return std::nullopt;
}

Endowment equal_endowment(const Instance& instance, const Profile& profile) {
  if (profile.empty()) throw std::invalid_argument("profile is empty");
  return Endowment{Money(instance.budget.value() / Rational(profile.size()))};
}

std::optional<RhoSolution> find_rho(const Rational& cost,
                                    std::span<const RhoSupporter> supporters) {
  if (cost <= 0) throw std::invalid_argument("find_rho requires a positive cost");
  Rational budget_sum = 0;
  Rational utility_sum = 0;
  for (const auto& s : supporters) {
    if (s.utility <= 0) throw std::invalid_argument("find_rho requires positive utilities");
    budget_sum += s.budget;
    utility_sum += s.utility;
  }
  if (budget_sum < cost) return std::nullopt;

  // Fast path: when even the poorest supporter stays below its cap at the
  // uncapped price, no breakpoint matters and the sort can be skipped.
  {
    size_t poorest = 0;
    for (size_t i = 1; i < supporters.size(); ++i) {
      if (supporters[i].budget * supporters[poorest].utility <
          supporters[poorest].budget * supporters[i].utility) {
        poorest = i;
      }
    }
    Rational uncapped = cost / utility_sum;
    if (uncapped * supporters[poorest].utility <= supporters[poorest].budget) {
      RhoSolution solution;
      solution.rho = uncapped;
      solution.payments.resize(supporters.size());
      for (size_t i = 0; i < supporters.size(); ++i) {
        solution.payments[i] = Rational(uncapped * supporters[i].utility);
      }
      return solution;
    }
  }

  // Breakpoints budget/utility in ascending order; below its breakpoint a
  // supporter pays rho*utility, above it the full remaining budget.
  std::vector<size_t> order(supporters.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Rational> breakpoint(supporters.size());
  for (size_t i = 0; i < supporters.size(); ++i) {
    breakpoint[i] = supporters[i].budget / supporters[i].utility;
  }
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return breakpoint[a] < breakpoint[b]; });

  Rational capped_sum = 0;        // budgets of supporters paying their cap
  Rational active = utility_sum;  // utilities of supporters below their cap
  Rational rho;
  size_t k = 0;
  while (true) {
    // active > 0 here: capping every supporter would leave
    // capped_sum == budget_sum < cost, contradicting the check above.
    rho = (cost - capped_sum) / active;
    if (k >= supporters.size() || rho <= breakpoint[order[k]]) break;
    capped_sum += supporters[order[k]].budget;
    active -= supporters[order[k]].utility;
    ++k;
  }

  RhoSolution solution;
  solution.rho = rho;
  solution.payments.resize(supporters.size());
  for (size_t i = 0; i < supporters.size(); ++i) {
    solution.payments[i] = std::min(supporters[i].budget, Rational(rho * supporters[i].utility));
  }
  return solution;
}

std::optional<RhoSolution> find_rho(const Money& cost,
                                    const std::vector<std::pair<Money, long long>>& supporters) {
  std::vector<RhoSupporter> converted;
  converted.reserve(supporters.size());
  for (const auto& [budget, utility] : supporters) {
    converted.push_back({budget.value(), Rational(utility)});
  }
  return find_rho(cost.value(), converted);
}

namespace {

// Shared selection context: per-project total scores and the tie-break order.
struct SelectionContext {
  const Instance& instance;
  std::vector<long long> scores;            // by project index
  std::vector<TieCriterion> order;          // tiebreak with id fallback
  std::vector<TieEvent>* events = nullptr;  // where invoked ties are recorded

  SelectionContext(const Instance& instance_, const Profile& profile, const RuleConfig& config)
      : instance(instance_) {
    scores.resize(instance.projects.size(), 0);
    std::unordered_map<std::string_view, size_t> index;
    for (size_t i = 0; i < instance.projects.size(); ++i) index[instance.projects[i].id] = i;
    for (const auto& ballot : profile.ballots) {
      for (const auto& e : ballot.entries) {
        auto it = index.find(e.project_id);
        if (it != index.end()) scores[it->second] += e.points;
      }
    }
    for (TieCriterion c : config.tiebreak) {
      if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
    }
    if (std::find(order.begin(), order.end(), TieCriterion::id) == order.end()) {
      order.push_back(TieCriterion::id);
    }
  }

  // <0 when a precedes b under the criterion, 0 when the criterion ties.
  int compare(TieCriterion c, size_t a, size_t b) const {
    switch (c) {
      case TieCriterion::score:
        if (scores[a] != scores[b]) return scores[a] > scores[b] ? -1 : 1;
        return 0;
      case TieCriterion::cost: {
        const auto& ca = instance.projects[a].cost;
        const auto& cb = instance.projects[b].cost;
        if (ca != cb) return ca < cb ? -1 : 1;
        return 0;
      }
      case TieCriterion::id:
        return instance.projects[a].id.compare(instance.projects[b].id);
    }
    return 0;
  }

  bool precedes(size_t a, size_t b) const {
    for (TieCriterion c : order) {
      int r = compare(c, a, b);
      if (r != 0) return r < 0;
    }
    return false;
  }

  // Criterion that separates a from b, as a label for the tie trace.
  std::string separated_by(size_t a, size_t b) const {
    for (TieCriterion c : order) {
      if (compare(c, a, b) != 0) return to_string(c);
    }
    return "none";
  }

  void record_tie(std::string context, const std::vector<size_t>& group) {
    if (events == nullptr || group.size() < 2) return;
    TieEvent event;
    event.context = std::move(context);
    for (size_t p : group) event.contenders.push_back(instance.projects[p].id);
    event.resolved_by = separated_by(group[0], group[1]);
    events->push_back(std::move(event));
  }
};

// Greedy consideration order: descending score, then the tie-break chain.
std::vector<size_t> greedy_order(const SelectionContext& ctx) {
  std::vector<size_t> order(ctx.instance.projects.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    int r = ctx.compare(TieCriterion::score, a, b);
    if (r != 0) return r < 0;
    return ctx.precedes(a, b);
  });
  return order;
}

// Selects from `order` whatever fits the remaining budget, recording ties
// among equal-score neighbours that were actually considered.
void greedy_scan(SelectionContext& ctx, const std::vector<size_t>& order,
                 const std::vector<bool>& excluded, Money remaining, const char* context_prefix,
                 std::vector<size_t>& winners_out, Money& spent_out) {
  std::vector<size_t> considered;
  for (size_t p : order) {
    if (!excluded[p]) considered.push_back(p);
  }
  for (size_t i = 0; i < considered.size();) {
    size_t j = i;
    while (j + 1 < considered.size() && ctx.scores[considered[j + 1]] == ctx.scores[considered[i]]) {
      ++j;
    }
    if (j > i) {
      std::vector<size_t> group(considered.begin() + i, considered.begin() + j + 1);
      ctx.record_tie(std::string(context_prefix) + " rank " + std::to_string(i + 1), group);
    }
    i = j + 1;
  }
  for (size_t p : considered) {
    const Money& cost = ctx.instance.projects[p].cost;
    if (cost <= remaining) {
      remaining = remaining - cost;
      spent_out += cost;
      winners_out.push_back(p);
    }
  }
}

void require_evaluable(const Instance& instance, const Profile& profile) {
  if (profile.empty()) throw std::invalid_argument("profile is empty");
  if (instance.vote_type == VoteType::ordinal) {
    throw std::invalid_argument("ordinal ballots are not evaluated by any rule");
  }
}

struct MesRun {
  std::vector<size_t> winners;  // project indices in selection order
  std::map<std::string, std::map<std::string, Money>> payments;
  Money spent;
  std::vector<TieEvent> tie_events;
};

// The selection loop works on integer numerators over one shared denominator
// D (initially the lcm of the endowment and cost denominators). Payments
// rescale D instead of normalizing per-voter rationals, so the hot path is
// pure big-integer arithmetic; exact fractions are materialized only for the
// final ledger.
MesRun run_mes(const Instance& instance, const Profile& profile, const Rational& per_voter,
               const RuleConfig& config, SelectionContext& ctx) {
  using boost::multiprecision::gcd;
  using boost::multiprecision::lcm;

  // A price as an exact non-negative fraction; denominators are positive.
  struct Fraction {
    BigInt num;
    BigInt den;
  };
  auto less = [](const Fraction& a, const Fraction& b) { return a.num * b.den < b.num * a.den; };
  auto equal = [](const Fraction& a, const Fraction& b) { return a.num * b.den == b.num * a.den; };

  struct Candidate {
    size_t project;
    BigInt cost_num;               // cost scaled to the shared denominator D
    std::vector<size_t> voters;    // ballot indices with positive utility
    std::vector<BigInt> weights;   // utilities, scaled integer by `scale`
    BigInt weight_sum;
    BigInt scale;                  // weights = utility * scale
    Fraction bound;                // true-rho lower bound, valid across rounds
    Fraction solved;               // price from this round's solve (num over den*D)
  };

  std::unordered_map<std::string_view, size_t> index;
  for (size_t i = 0; i < instance.projects.size(); ++i) index[instance.projects[i].id] = i;

  size_t n_projects = instance.projects.size();
  std::vector<Candidate> candidates(n_projects);
  for (size_t i = 0; i < n_projects; ++i) {
    candidates[i].project = i;
    candidates[i].scale = 1;
  }

  // Supporter lists. Normalized mode divides by each ballot's point total;
  // clearing those divisors per candidate keeps the weights integer.
  std::vector<long long> ballot_totals;
  if (config.utility_mode == UtilityMode::normalized) {
    ballot_totals.reserve(profile.ballots.size());
    for (const auto& ballot : profile.ballots) ballot_totals.push_back(ballot.total_points());
  }
  std::vector<std::vector<long long>> raw_points(n_projects);
  for (size_t v = 0; v < profile.ballots.size(); ++v) {
    for (const auto& e : profile.ballots[v].entries) {
      if (e.points <= 0) continue;
      auto it = index.find(e.project_id);
      if (it == index.end()) continue;
      candidates[it->second].voters.push_back(v);
      raw_points[it->second].push_back(e.points);
    }
  }
  for (size_t i = 0; i < n_projects; ++i) {
    Candidate& cand = candidates[i];
    if (config.utility_mode == UtilityMode::normalized) {
      for (size_t k = 0; k < cand.voters.size(); ++k) {
        cand.scale = lcm(cand.scale, BigInt(ballot_totals[cand.voters[k]]));
      }
      for (size_t k = 0; k < cand.voters.size(); ++k) {
        cand.weights.push_back(BigInt(raw_points[i][k]) * cand.scale /
                               ballot_totals[cand.voters[k]]);
      }
    } else {
      for (long long p : raw_points[i]) cand.weights.push_back(p);
    }
    cand.weight_sum = 0;
    for (const auto& w : cand.weights) cand.weight_sum += w;
  }

  // Shared denominator and integer voter budgets.
  BigInt shared_den = denominator(per_voter);
  for (const auto& project : instance.projects) {
    shared_den = lcm(shared_den, denominator(project.cost.value()));
  }
  std::vector<BigInt> budget_num(profile.ballots.size(),
                                 numerator(per_voter) * (shared_den / denominator(per_voter)));
  std::vector<size_t> open;
  for (size_t i = 0; i < n_projects; ++i) {
    Candidate& cand = candidates[i];
    const Rational& cost = instance.projects[i].cost.value();
    cand.cost_num = numerator(cost) * (shared_den / denominator(cost));
    if (cand.voters.empty()) continue;
    // Static bound: payments are capped by rho*utility, so
    // rho >= cost / total utility no matter what the budgets are.
    cand.bound = {numerator(cost) * cand.scale, denominator(cost) * cand.weight_sum};
    open.push_back(i);
  }

  // Solves min rho with sum_i min(budget_i, rho*weight_i) = cost, all over
  // the shared denominator. Returns false when unaffordable.
  std::vector<size_t> scratch_order;
  auto solve = [&](Candidate& cand) -> bool {
    BigInt available = 0;
    for (size_t v : cand.voters) available += budget_num[v];
    if (available < cand.cost_num) return false;

    // Fast path: nobody capped at the uncapped price.
    size_t poorest = 0;
    for (size_t k = 1; k < cand.voters.size(); ++k) {
      if (budget_num[cand.voters[k]] * cand.weights[poorest] <
          budget_num[cand.voters[poorest]] * cand.weights[k]) {
        poorest = k;
      }
    }
    if (cand.cost_num * cand.weights[poorest] <=
        budget_num[cand.voters[poorest]] * cand.weight_sum) {
      cand.solved = {cand.cost_num, cand.weight_sum};
    } else {
      scratch_order.resize(cand.voters.size());
      std::iota(scratch_order.begin(), scratch_order.end(), 0);
      std::sort(scratch_order.begin(), scratch_order.end(), [&](size_t a, size_t b) {
        return budget_num[cand.voters[a]] * cand.weights[b] <
               budget_num[cand.voters[b]] * cand.weights[a];
      });
      BigInt capped = 0;
      BigInt active = cand.weight_sum;
      size_t k = 0;
      while (true) {
        // Capping everyone would contradict the affordability check above.
        if (k >= scratch_order.size()) throw InternalError("price scan exhausted all supporters");
        BigInt remaining = cand.cost_num - capped;
        if (remaining * cand.weights[scratch_order[k]] <=
            budget_num[cand.voters[scratch_order[k]]] * active) {
          cand.solved = {remaining, active};
          break;
        }
        capped += budget_num[cand.voters[scratch_order[k]]];
        active -= cand.weights[scratch_order[k]];
        ++k;
      }
    }
    BigInt g = gcd(cand.solved.num, cand.solved.den);
    if (g > 1) {
      cand.solved.num /= g;
      cand.solved.den /= g;
    }
    // True rho = solved * scale / shared_den; tighten the persistent bound.
    cand.bound = {cand.solved.num * cand.scale, cand.solved.den * shared_den};
    BigInt bg = gcd(cand.bound.num, cand.bound.den);
    if (bg > 1) {
      cand.bound.num /= bg;
      cand.bound.den /= bg;
    }
    return true;
  };

  MesRun run;
  for (int round = 1; !open.empty(); ++round) {
    // Cheapest known bounds first; exact prices are recomputed only until
    // the next bound already exceeds the best exact value found.
    std::sort(open.begin(), open.end(), [&](size_t a, size_t b) {
      if (!equal(candidates[a].bound, candidates[b].bound)) {
        return less(candidates[a].bound, candidates[b].bound);
      }
      return a < b;
    });

    bool have_best = false;
    Fraction best_rho;
    std::vector<size_t> best_group;
    std::vector<size_t> unaffordable;

    for (size_t ci : open) {
      Candidate& cand = candidates[ci];
      if (have_best && less(best_rho, cand.bound)) break;
      if (!solve(cand)) {
        // Budgets only shrink, so this project can never become affordable.
        unaffordable.push_back(ci);
        continue;
      }
      if (!have_best || less(cand.bound, best_rho)) {
        have_best = true;
        best_rho = cand.bound;
        best_group.assign(1, ci);
      } else if (equal(cand.bound, best_rho)) {
        best_group.push_back(ci);
      }
    }

    for (size_t ci : unaffordable) {
      open.erase(std::remove(open.begin(), open.end(), ci), open.end());
    }
    if (!have_best) break;

    size_t chosen = best_group[0];
    if (best_group.size() > 1) {
      std::sort(best_group.begin(), best_group.end(), [&](size_t a, size_t b) {
        return ctx.precedes(candidates[a].project, candidates[b].project);
      });
      chosen = best_group[0];
      TieEvent event;
      event.context = "mes round " + std::to_string(round);
      for (size_t ci : best_group) {
        event.contenders.push_back(instance.projects[candidates[ci].project].id);
      }
      event.resolved_by = ctx.separated_by(candidates[best_group[0]].project,
                                           candidates[best_group[1]].project);
      run.tie_events.push_back(std::move(event));
    }

    // Apply the winner's payments: pay_v = min(budget_v*den, num*weight_v)
    // over the rescaled denominator shared_den*den.
    Candidate& cand = candidates[chosen];
    const BigInt pay_den_factor = cand.solved.den;
    BigInt new_shared_den = shared_den * pay_den_factor;
    if (pay_den_factor != 1) {
      for (auto& b : budget_num) b *= pay_den_factor;
      for (auto& c : candidates) c.cost_num *= pay_den_factor;
    }
    auto& ledger = run.payments[instance.projects[cand.project].id];
    for (size_t k = 0; k < cand.voters.size(); ++k) {
      size_t v = cand.voters[k];
      BigInt pay = std::min(budget_num[v], BigInt(cand.solved.num * cand.weights[k]));
      if (pay == 0) continue;
      budget_num[v] -= pay;
      ledger[profile.ballots[v].voter_id] = Money(Rational(pay, new_shared_den));
    }
    shared_den = std::move(new_shared_den);

    run.spent += instance.projects[cand.project].cost;
    run.winners.push_back(cand.project);
    open.erase(std::remove(open.begin(), open.end(), chosen), open.end());
  }

  return run;
}

Allocation finish_mes(const Instance& instance, const MesRun& run, const Money& endowment,
                      const RuleConfig& config, std::vector<TieEvent> tie_events) {
  Allocation allocation;
  for (size_t p : run.winners) allocation.winners.push_back(instance.projects[p].id);
  allocation.payments = run.payments;
  allocation.spent = run.spent;
  if (run.spent > instance.budget) {
    throw InternalError("equal-shares outcome exceeds the budget");
  }
  allocation.leftover = instance.budget - run.spent;
  allocation.rule_tag.rule = "mes";
  allocation.rule_tag.completion = to_string(config.completion);
  allocation.rule_tag.endowment_per_voter = endowment;
  allocation.rule_tag.utility_mode = to_string(config.utility_mode);
  for (auto& e : run.tie_events) tie_events.push_back(e);
  allocation.rule_tag.tie_events = std::move(tie_events);
  return allocation;
}

}  // namespace

Allocation utilitarian_greedy(const Instance& instance, const Profile& profile,
                              const RuleConfig& config) {
  require_evaluable(instance, profile);
  SelectionContext ctx(instance, profile, config);
  std::vector<TieEvent> events;
  ctx.events = &events;

  std::vector<size_t> order = greedy_order(ctx);
  std::vector<bool> excluded(instance.projects.size(), false);
  std::vector<size_t> winners;
  Money spent;
  greedy_scan(ctx, order, excluded, instance.budget, "greedy", winners, spent);

  Allocation allocation;
  for (size_t p : winners) allocation.winners.push_back(instance.projects[p].id);
  allocation.spent = spent;
  allocation.leftover = instance.budget - spent;
  allocation.rule_tag.rule = "greedy";
  allocation.rule_tag.completion = "none";
  allocation.rule_tag.utility_mode = to_string(config.utility_mode);
  allocation.rule_tag.tie_events = std::move(events);
  return allocation;
}

Allocation mes_core(const Instance& instance, const Profile& profile, const Endowment& endowment,
                    const RuleConfig& config) {
  require_evaluable(instance, profile);
  if (endowment.per_voter.is_zero()) {
    throw std::invalid_argument("endowment must be positive");
  }
  SelectionContext ctx(instance, profile, config);
  MesRun run = run_mes(instance, profile, endowment.per_voter.value(), config, ctx);
  return finish_mes(instance, run, endowment.per_voter, config, {});
}

Allocation complete_utilitarian(const Instance& instance, const Profile& profile,
                                const Allocation& partial, const RuleConfig& config) {
  require_evaluable(instance, profile);
  SelectionContext ctx(instance, profile, config);
  std::vector<TieEvent> events;
  ctx.events = &events;

  std::vector<bool> excluded(instance.projects.size(), false);
  for (size_t i = 0; i < instance.projects.size(); ++i) {
    excluded[i] = partial.is_winner(instance.projects[i].id);
  }
  std::vector<size_t> order = greedy_order(ctx);
  std::vector<size_t> added;
  Money added_cost;
  greedy_scan(ctx, order, excluded, partial.leftover, "completion", added, added_cost);

  Allocation allocation = partial;
  for (size_t p : added) allocation.winners.push_back(instance.projects[p].id);
  allocation.spent += added_cost;
  allocation.leftover = allocation.leftover - added_cost;
  for (auto& e : events) allocation.rule_tag.tie_events.push_back(std::move(e));
  return allocation;
}

Add1Result add1_with_trace(const Instance& instance, const Profile& profile,
                           const RuleConfig& config) {
  require_evaluable(instance, profile);
  if (config.add1_increment.is_zero()) {
    throw std::invalid_argument("add1 requires a positive increment");
  }
  SelectionContext ctx(instance, profile, config);

  const Rational base = instance.budget.value() / Rational(profile.size());
  const Rational increment = config.add1_increment.value();
  const Rational cap = instance.budget.value();

  Add1Result result;
  std::optional<MesRun> kept;
  Money kept_endowment;

  for (long long k = 0;; ++k) {
    Rational per_voter = base + increment * k;
    bool capped = per_voter >= cap;
    if (capped) per_voter = cap;

    MesRun run = run_mes(instance, profile, per_voter, config, ctx);

    Add1Step step;
    step.endowment = Money(per_voter);
    step.selected_cost = run.spent;
    step.winner_count = run.winners.size();
    step.kept = run.spent <= instance.budget;
    result.trace.push_back(step);

    if (run.spent > instance.budget) break;  // overshoot: keep the previous outcome

    kept = std::move(run);
    kept_endowment = Money(per_voter);

    // Exhaustive outcomes cannot improve; larger endowments only overshoot.
    Money leftover = instance.budget - kept->spent;
    bool exhaustive = true;
    std::vector<bool> selected(instance.projects.size(), false);
    for (size_t p : kept->winners) selected[p] = true;
    for (size_t i = 0; i < instance.projects.size(); ++i) {
      if (!selected[i] && instance.projects[i].cost <= leftover) {
        exhaustive = false;
        break;
      }
    }
    if (exhaustive || capped) break;
  }

  if (!kept) throw InternalError("add1 kept no iteration; the base endowment must fit");
  result.allocation = finish_mes(instance, *kept, kept_endowment, config, {});
  return result;
}

Allocation add1(const Instance& instance, const Profile& profile, const RuleConfig& config) {
  return add1_with_trace(instance, profile, config).allocation;
}

Allocation add1u(const Instance& instance, const Profile& profile, const RuleConfig& config) {
  Allocation base = add1(instance, profile, config);
  Allocation completed = complete_utilitarian(instance, profile, base, config);
  completed.rule_tag.completion = "add1u";
  return completed;
}

bool is_exhaustive(const Instance& instance, const Allocation& allocation) {
  for (const auto& p : instance.projects) {
    if (!allocation.is_winner(p.id) && p.cost <= allocation.leftover) return false;
  }
  return true;
}

Allocation run_rule(const Instance& instance, const Profile& profile, const RuleConfig& config) {
  if (config.rule == Rule::greedy) {
    if (config.completion != Completion::none) {
      throw std::invalid_argument("greedy does not take a completion method");
    }
    return utilitarian_greedy(instance, profile, config);
  }
  switch (config.completion) {
    case Completion::none:
      return mes_core(instance, profile, equal_endowment(instance, profile), config);
    case Completion::utilitarian: {
      Allocation base = mes_core(instance, profile, equal_endowment(instance, profile), config);
      Allocation completed = complete_utilitarian(instance, profile, base, config);
      completed.rule_tag.completion = "utilitarian";
      return completed;
    }
    case Completion::add1:
      return add1(instance, profile, config);
    case Completion::add1u:
      return add1u(instance, profile, config);
  }
  throw std::invalid_argument("unknown completion");
}

}  // namespace pbeval
