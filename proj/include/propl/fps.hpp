#pragma once

// Focused proof search. Each goal is first inverted (invertible rules
// applied to a fixpoint, no choices), then chained: commit to one
// implication hypothesis or one disjunct of the target. Chaining choices
// are the only backtrack points. The whole search, abandoned branches
// included, is recorded as a SearchTrace.
//
// Focusing on h : A → B emits `have h' : A := by` followed, once A is
// closed, by `let h'' := h h'`. While proving A, h itself (and every
// implication already barred) may not be focused again.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "propl/error.hpp"
#include "propl/kernel.hpp"
#include "propl/proposition.hpp"
#include "propl/rng.hpp"
#include "propl/trace.hpp"

namespace propl {

// ---------------------------------------------------------------------------
// Polarity

enum class Polarity : std::uint8_t { Positive, Negative };

struct PolarityAssignment {
  /// Polarity of every node of the theorem, in preorder.
  std::vector<Polarity> nodes;
  /// Polarity of each atom index occurring in the theorem.
  std::map<std::uint32_t, Polarity> atoms;

  Polarity atom(std::uint32_t index) const {
    auto it = atoms.find(index);
    return it == atoms.end() ? Polarity::Negative : it->second;
  }
};

namespace detail {

// `goal_side` is true on the conclusion side of the sequent; the left of an
// arrow flips it.
inline void polarize(const Proposition& prop, bool goal_side, std::optional<Polarity> parent,
                     PolarityAssignment& out) {
  Polarity self = Polarity::Negative;
  switch (prop.kind()) {
    case Connective::And: self = goal_side ? Polarity::Negative : Polarity::Positive; break;
    case Connective::Or:
    case Connective::Bot: self = Polarity::Positive; break;
    case Connective::Imp:
    case Connective::Top: self = Polarity::Negative; break;
    case Connective::Atom: {
      // First occurrence decides: positive under ∨ or a positive ∧.
      auto [it, fresh] = out.atoms.emplace(prop.atom_index(), parent.value_or(Polarity::Negative));
      self = it->second;
      break;
    }
  }
  out.nodes.push_back(self);
  if (prop.is_leaf()) return;
  const Polarity as_parent = prop.is(Connective::Imp) ? Polarity::Negative : self;
  polarize(prop.left(), prop.is(Connective::Imp) ? !goal_side : goal_side, as_parent, out);
  polarize(prop.right(), goal_side, as_parent, out);
}

}  // namespace detail

inline PolarityAssignment polarize(const Proposition& theorem) {
  PolarityAssignment out;
  detail::polarize(theorem, true, std::nullopt, out);
  return out;
}

// ---------------------------------------------------------------------------
// Configuration and results

struct FpsConfig {
  std::size_t max_states = 10000;
  /// Shuffle chaining candidates with the seeded rng. When false candidates
  /// are tried in a fixed order (disjuncts left then right, then
  /// implications in hypothesis order).
  bool randomize = true;
  /// Only focus an implication whose final head is a negative atom when
  /// that atom is the current target.
  bool atom_pruning = true;
};

enum class FpsStatus : std::uint8_t { Proved, Unprovable, LimitExceeded };

inline std::string_view to_string(FpsStatus s) {
  switch (s) {
    case FpsStatus::Proved: return "proved";
    case FpsStatus::Unprovable: return "unprovable";
    case FpsStatus::LimitExceeded: return "limit";
  }
  return "?";
}

struct FpsResult {
  FpsStatus status = FpsStatus::Unprovable;
  /// Present iff status == Proved.
  std::optional<SearchTrace> trace;
  std::size_t states = 0;

  bool proved() const { return status == FpsStatus::Proved; }
};

class SearchFailure : public Error {
 public:
  SearchFailure(FpsStatus status, const std::string& what) : Error(what), status_(status) {}
  FpsStatus status() const noexcept { return status_; }

 private:
  FpsStatus status_;
};

/// Per-goal focusing restriction.
struct FocusRestriction {
  /// Implications being proved-for: barred inside their own premise subproof.
  std::vector<Proposition> barred;
  /// Implications whose conclusion is already in context.
  std::vector<Proposition> spent;
  /// Hypotheses introduced by `have`: already derivable, so never decomposed
  /// or focused.
  std::vector<std::string> inert;

  bool blocks(const Proposition& imp) const {
    return std::find(barred.begin(), barred.end(), imp) != barred.end() ||
           std::find(spent.begin(), spent.end(), imp) != spent.end();
  }
  bool is_inert(const std::string& name) const { return std::find(inert.begin(), inert.end(), name) != inert.end(); }
};

// ---------------------------------------------------------------------------
// Inversion and chaining on a single goal

/// The first invertible step for the goal, in the fixed order: True
/// target, False hypothesis, → target, ∧ target, ∧ hypothesis, ∨
/// hypothesis.
inline std::optional<Tactic> invertible_step(const Goal& g, std::uint32_t next_index,
                                             const FocusRestriction& restriction = {}) {
  using namespace tactic;
  const std::string f1 = hypothesis_name(next_index);
  const std::string f2 = hypothesis_name(next_index + 1);
  if (g.target.is(Connective::Top)) return ExactTrueIntro{};
  for (const auto& h : g.hypotheses) {
    if (h.prop.is(Connective::Bot)) return ApplyFalseElim{h.name};
  }
  if (g.target.is(Connective::Imp)) return Intro{f1};
  if (g.target.is(Connective::And)) return ApplyAndIntro{};
  for (const auto& h : g.hypotheses) {
    if (h.prop.is(Connective::And) && !restriction.is_inert(h.name)) return DestructAnd{h.name, f1, f2};
  }
  for (const auto& h : g.hypotheses) {
    if (h.prop.is(Connective::Or) && !restriction.is_inert(h.name)) return Cases{h.name, f1, f2};
  }
  return std::nullopt;
}

struct InversionResult {
  ProofState state;
  std::vector<TraceStep> steps;
  bool complete = false;
};

/// Applies invertible steps to the first goal until none applies. Goals the
/// inversion closes are dropped and inversion moves on to the next one.
inline InversionResult invert(const ProofState& start) {
  InversionResult out{start, {}, false};
  while (!out.state.terminal()) {
    auto t = invertible_step(out.state.current(), out.state.next_hyp_index);
    if (!t) break;
    const std::uint64_t from = out.state.state_id;
    TacticResult r = apply_tactic(out.state, *t);
    out.steps.emplace_back(step::Apply{from, *t, from + 1});
    if (is_complete(r)) {
      out.state = ProofState{{}, out.state.next_hyp_index, from + 1};
      out.complete = true;
      break;
    }
    out.state = std::get<ProofState>(std::move(r));
  }
  return out;
}

struct FocusCandidate {
  enum class Kind : std::uint8_t { LeftDisjunct, RightDisjunct, Implication };
  Kind kind = Kind::Implication;
  /// For Implication: the hypothesis focused on and its proposition.
  std::string hyp;
  std::optional<Proposition> imp;
};

namespace detail {

inline Proposition head(Proposition p) {
  while (p.is(Connective::Imp)) p = p.right();
  return p;
}

}  // namespace detail

/// Admissible chaining candidates for an inverted goal, in canonical order.
inline std::vector<FocusCandidate> chain_candidates(const Goal& g, const PolarityAssignment& polarity,
                                                    const FocusRestriction& restriction, bool atom_pruning = true) {
  std::vector<FocusCandidate> out;
  if (g.target.is(Connective::Or)) {
    out.push_back({FocusCandidate::Kind::LeftDisjunct, {}, std::nullopt});
    out.push_back({FocusCandidate::Kind::RightDisjunct, {}, std::nullopt});
  }
  std::vector<Proposition> seen;
  for (const auto& h : g.hypotheses) {
    if (!h.prop.is(Connective::Imp) || restriction.is_inert(h.name) || restriction.blocks(h.prop)) continue;
    if (std::find(seen.begin(), seen.end(), h.prop) != seen.end()) continue;
    seen.push_back(h.prop);
    const Proposition& concl = h.prop.right();
    if (g.find_prop(concl)) continue;
    const Proposition hd = detail::head(concl);
    if (hd.is(Connective::Top)) continue;
    if (atom_pruning && hd.is(Connective::Atom) && polarity.atom(hd.atom_index()) == Polarity::Negative &&
        hd != g.target) {
      continue;
    }
    out.push_back({FocusCandidate::Kind::Implication, h.name, h.prop});
  }
  return out;
}

/// One chaining decision: a uniformly random admissible candidate, or
/// nullopt (no candidate, the goal is dead).
inline std::optional<FocusCandidate> chain(const Goal& g, const PolarityAssignment& polarity, Rng& rng,
                                           const FocusRestriction& restriction, bool atom_pruning = true) {
  auto candidates = chain_candidates(g, polarity, restriction, atom_pruning);
  if (candidates.empty()) return std::nullopt;
  return candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
}

// ---------------------------------------------------------------------------
// Search

namespace detail {

struct Lineage {
  std::size_t choice;
  std::shared_ptr<const Lineage> parent;
};

struct GoalMeta {
  FocusRestriction restriction;
  /// `let` to run when this continuation goal becomes current:
  /// (implication hypothesis, premise hypothesis).
  std::optional<std::pair<std::string, std::string>> pending;
  /// Choice points this goal depends on, most recent first.
  std::shared_ptr<const Lineage> lineage;
};

struct SearchNode {
  ProofState state;
  std::vector<GoalMeta> meta;
};

struct ChoicePoint {
  SearchNode node;
  std::vector<FocusCandidate> candidates;
  std::size_t next = 0;

  bool open() const { return next < candidates.size(); }
};

class FpsEngine {
 public:
  FpsEngine(ProofState start, const Proposition& theorem, PolarityAssignment polarity, std::uint64_t seed,
            const FpsConfig& config)
      : config_(config), polarity_(std::move(polarity)), rng_(seed), trace_{theorem, {}, {}} {
    next_id_ = start.state_id + 1;
    trace_.states.emplace(start.state_id, start);
    std::vector<GoalMeta> meta(start.goals.size());
    node_ = SearchNode{std::move(start), std::move(meta)};
  }

  FpsResult run() {
    FpsResult out;
    try {
      out.status = search();
    } catch (const LimitHit&) {
      out.status = FpsStatus::LimitExceeded;
    }
    out.states = trace_.states.size();
    if (out.status == FpsStatus::Proved) out.trace = std::move(trace_);
    return out;
  }

 private:
  struct LimitHit {};
  enum class Phase { Complete, Choice, Dead };

  FpsStatus search() {
    for (;;) {
      switch (advance()) {
        case Phase::Complete:
          trace_.steps.emplace_back(step::Qed{node_.state.state_id});
          return FpsStatus::Proved;
        case Phase::Choice: {
          auto candidates = chain_candidates(node_.state.current(), polarity_, node_.meta.front().restriction,
                                             config_.atom_pruning);
          if (config_.randomize) rng_.shuffle(candidates);
          choices_.push_back(ChoicePoint{node_, std::move(candidates), 0});
          take(choices_.size() - 1);
          break;
        }
        case Phase::Dead: {
          // Jump to the latest choice this goal depends on that still has
          // untried candidates; choices made for other goals are irrelevant.
          std::optional<std::size_t> target;
          for (const Lineage* l = node_.meta.front().lineage.get(); l; l = l->parent.get()) {
            if (choices_[l->choice].open()) {
              target = l->choice;
              break;
            }
          }
          if (!target) return FpsStatus::Unprovable;
          choices_.resize(*target + 1);
          const std::uint64_t from = node_.state.state_id;
          const std::uint64_t to = choices_[*target].node.state.state_id;
          trace_.steps.emplace_back(step::Backtrack{from, to});
          node_ = choices_[*target].node;
          take(*target);
          break;
        }
      }
    }
  }

  // Runs deterministic steps until the proof completes or the first goal
  // needs a chaining decision (or has none).
  Phase advance() {
    while (!node_.state.terminal()) {
      const Goal& g = node_.state.current();
      GoalMeta& m = node_.meta.front();
      const std::uint32_t next = node_.state.next_hyp_index;
      if (m.pending) {
        auto [imp, arg] = *m.pending;
        m.pending.reset();
        apply(tactic::LetMp{hypothesis_name(next), imp, arg}, {node_.meta.front()});
        continue;
      }
      if (auto t = invertible_step(g, next, m.restriction)) {
        const std::size_t produced = produced_goals(*t);
        apply(*t, std::vector<GoalMeta>(produced, m));
        continue;
      }
      if (const Hypothesis* h = g.find_prop(g.target)) {
        apply(tactic::Exact{h->name}, {});
        continue;
      }
      if (chain_candidates(g, polarity_, m.restriction, config_.atom_pruning).empty()) return Phase::Dead;
      return Phase::Choice;
    }
    return Phase::Complete;
  }

  static std::size_t produced_goals(const Tactic& t) {
    return std::visit(overloaded{
                          [](const tactic::ApplyAndIntro&) -> std::size_t { return 2; },
                          [](const tactic::Cases&) -> std::size_t { return 2; },
                          [](const tactic::HaveBy&) -> std::size_t { return 2; },
                          [](const tactic::ExactTrueIntro&) -> std::size_t { return 0; },
                          [](const tactic::ApplyFalseElim&) -> std::size_t { return 0; },
                          [](const tactic::Exact&) -> std::size_t { return 0; },
                          [](const auto&) -> std::size_t { return 1; },
                      },
                      t);
  }

  // Commits to the next untried candidate of choice point `c`, whose node is
  // the current node.
  void take(std::size_t c) {
    ChoicePoint& cp = choices_[c];
    const FocusCandidate cand = cp.candidates[cp.next++];
    GoalMeta base = node_.meta.front();
    base.lineage = std::make_shared<const Lineage>(Lineage{c, base.lineage});
    switch (cand.kind) {
      case FocusCandidate::Kind::LeftDisjunct: apply(tactic::ApplyOrInl{}, {base}); return;
      case FocusCandidate::Kind::RightDisjunct: apply(tactic::ApplyOrInr{}, {base}); return;
      case FocusCandidate::Kind::Implication: {
        const std::string have = hypothesis_name(node_.state.next_hyp_index);
        GoalMeta premise = base;
        premise.restriction.barred.push_back(*cand.imp);
        GoalMeta cont = base;
        cont.restriction.spent.push_back(*cand.imp);
        cont.restriction.inert.push_back(have);
        cont.pending = std::make_pair(cand.hyp, have);
        apply(tactic::HaveBy{have, cand.imp->left()}, {std::move(premise), std::move(cont)});
        return;
      }
    }
  }

  void apply(const Tactic& t, std::vector<GoalMeta> produced) {
    if (trace_.states.size() >= config_.max_states) throw LimitHit{};
    const std::uint64_t from = node_.state.state_id;
    const std::uint64_t id = next_id_++;
    TacticResult r = apply_tactic(node_.state, t, id);
    if (const auto* f = std::get_if<TacticFailure>(&r)) {
      throw Error("focused search produced a failing tactic '" + render_tactic(t) + "': " + f->message);
    }
    ProofState next = is_complete(r) ? ProofState{{}, node_.state.next_hyp_index, id}
                                     : std::get<ProofState>(std::move(r));
    produced.insert(produced.end(), std::make_move_iterator(node_.meta.begin() + 1),
                    std::make_move_iterator(node_.meta.end()));
    if (produced.size() != next.goals.size()) throw Error("focused search lost track of goals");
    trace_.steps.emplace_back(step::Apply{from, t, id});
    trace_.states.emplace(id, next);
    node_ = SearchNode{std::move(next), std::move(produced)};
  }

  FpsConfig config_;
  PolarityAssignment polarity_;
  Rng rng_;
  SearchTrace trace_;
  SearchNode node_;
  std::vector<ChoicePoint> choices_;
  std::uint64_t next_id_ = 1;
};

/// The sequent of the first goal as one implication, for polarizing a search
/// that starts mid-proof.
inline Proposition sequent_formula(const Goal& g) {
  Proposition out = g.target;
  for (auto it = g.hypotheses.rbegin(); it != g.hypotheses.rend(); ++it) out = Proposition::imp(it->prop, out);
  return out;
}

}  // namespace detail

inline FpsResult fps_search(const Proposition& theorem, std::uint64_t seed, const FpsConfig& config = {}) {
  return detail::FpsEngine(initial_state(theorem), theorem, polarize(theorem), seed, config).run();
}

/// Searches from an arbitrary non-terminal state. Atom polarities come from
/// the first goal's sequent. The trace's states are numbered on from the
/// start state's id.
inline FpsResult fps_search_from(const ProofState& start, const Proposition& theorem, std::uint64_t seed,
                                 const FpsConfig& config = {}) {
  if (start.terminal()) throw Error("fps_search_from on a terminal state");
  return detail::FpsEngine(start, theorem, polarize(detail::sequent_formula(start.current())), seed, config).run();
}

// ---------------------------------------------------------------------------
// Stripping

/// The Apply steps on the path from the first state to QED, in order.
inline std::vector<step::Apply> successful_path(const SearchTrace& trace) {
  if (!trace.successful()) throw Error("strip: trace is not successful");
  std::vector<step::Apply> path;
  const std::uint64_t root = trace.states.begin()->first;
  for (const auto& s : trace.steps) {
    const auto* a = std::get_if<step::Apply>(&s);
    if (!a) continue;
    if (a->from == root) {
      path.clear();
    } else {
      while (!path.empty() && path.back().to != a->from) path.pop_back();
      if (path.empty()) throw Error("strip: apply step from an unknown state");
    }
    path.push_back(*a);
  }
  return path;
}

/// Tactics of the successful path, with trial-and-error removed.
inline std::vector<Tactic> strip(const SearchTrace& trace) {
  std::vector<Tactic> out;
  for (const auto& a : successful_path(trace)) out.push_back(a.tactic);
  return out;
}

/// The stripped proof as a linear trace numbered 0, 1, 2, ...
inline SearchTrace stripped_trace(const SearchTrace& trace) {
  SearchTrace out{trace.theorem, {}, {}};
  ProofState state = initial_state(trace.theorem);
  out.states.emplace(0, state);
  for (const Tactic& t : strip(trace)) {
    const std::uint64_t id = state.state_id + 1;
    TacticResult r = apply_tactic(state, t, id);
    if (is_failure(r)) throw Error("strip: stripped proof does not check");
    out.steps.emplace_back(step::Apply{state.state_id, t, id});
    state = is_complete(r) ? ProofState{{}, state.next_hyp_index, id} : std::get<ProofState>(std::move(r));
    out.states.emplace(id, state);
  }
  if (!state.terminal()) throw Error("strip: stripped proof is incomplete");
  out.steps.emplace_back(step::Qed{state.state_id});
  return out;
}

/// k searches under seeds derived from `seed`; throws SearchFailure if any
/// of them does not find a proof.
inline std::vector<SearchTrace> generate_diverse(const Proposition& theorem, std::size_t k, std::uint64_t seed,
                                                 const FpsConfig& config = {}) {
  std::vector<SearchTrace> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    FpsResult r = fps_search(theorem, derive_seed(seed, i), config);
    if (!r.proved()) {
      throw SearchFailure(r.status, "search " + std::to_string(i) + " ended " + std::string(to_string(r.status)));
    }
    out.push_back(std::move(*r.trace));
  }
  return out;
}

}  // namespace propl
