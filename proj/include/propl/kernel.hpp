#pragma once

// Tactic-level proof kernel. A proof state is a list of goals `Γ ⊢ A`;
// every tactic acts on the first goal and corresponds to one natural
// deduction rule:
//
//   intro h                →-I
//   apply And.intro        ∧-I          (left conjunct first)
//   apply Or.inl / Or.inr  ∨-I1 / ∨-I2
//   exact h                Assumption   (syntactic equality)
//   have h : P := by       cut: prove P first, then continue with h : P
//   let h := hi hj         →-E
//   apply False.elim h     F-E
//   cases h with hl hr     ∨-E          (h is consumed)
//   exact True.intro       T-I
//   obtain hl hr := h      ∧-E1/∧-E2    (h is consumed)

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "propl/error.hpp"
#include "propl/proposition.hpp"

namespace propl {

struct Hypothesis {
  std::string name;
  Proposition prop;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

struct Goal {
  std::vector<Hypothesis> hypotheses;
  Proposition target;

  const Hypothesis* find(std::string_view name) const {
    for (const auto& h : hypotheses) {
      if (h.name == name) return &h;
    }
    return nullptr;
  }

  /// First hypothesis whose proposition is `prop`.
  const Hypothesis* find_prop(const Proposition& prop) const {
    for (const auto& h : hypotheses) {
      if (h.prop == prop) return &h;
    }
    return nullptr;
  }

  friend bool operator==(const Goal&, const Goal&) = default;
};

struct ProofState {
  std::vector<Goal> goals;
  std::uint32_t next_hyp_index = 1;
  std::uint64_t state_id = 0;

  bool terminal() const noexcept { return goals.empty(); }
  const Goal& current() const {
    if (goals.empty()) throw Error("proof state has no goals");
    return goals.front();
  }

  /// Equality of the logical content; state ids are bookkeeping.
  bool same_content(const ProofState& other) const {
    return goals == other.goals && next_hyp_index == other.next_hyp_index;
  }

  friend bool operator==(const ProofState&, const ProofState&) = default;
};

inline ProofState initial_state(const Proposition& theorem) {
  return ProofState{{Goal{{}, theorem}}, 1, 0};
}

// ---------------------------------------------------------------------------
// Tactics

namespace tactic {

struct Intro {
  std::string name;
  friend bool operator==(const Intro&, const Intro&) = default;
};
struct ApplyAndIntro {
  friend bool operator==(const ApplyAndIntro&, const ApplyAndIntro&) = default;
};
struct ApplyOrInl {
  friend bool operator==(const ApplyOrInl&, const ApplyOrInl&) = default;
};
struct ApplyOrInr {
  friend bool operator==(const ApplyOrInr&, const ApplyOrInr&) = default;
};
struct Exact {
  std::string hyp;
  friend bool operator==(const Exact&, const Exact&) = default;
};
struct HaveBy {
  std::string name;
  Proposition prop;
  friend bool operator==(const HaveBy&, const HaveBy&) = default;
};
struct LetMp {
  std::string name;
  std::string imp_hyp;
  std::string arg_hyp;
  friend bool operator==(const LetMp&, const LetMp&) = default;
};
struct ApplyFalseElim {
  std::string hyp;
  friend bool operator==(const ApplyFalseElim&, const ApplyFalseElim&) = default;
};
struct Cases {
  std::string hyp;
  std::string left_name;
  std::string right_name;
  friend bool operator==(const Cases&, const Cases&) = default;
};
struct ExactTrueIntro {
  friend bool operator==(const ExactTrueIntro&, const ExactTrueIntro&) = default;
};
struct DestructAnd {
  std::string hyp;
  std::string left_name;
  std::string right_name;
  friend bool operator==(const DestructAnd&, const DestructAnd&) = default;
};

}  // namespace tactic

using Tactic = std::variant<tactic::Intro, tactic::ApplyAndIntro, tactic::ApplyOrInl, tactic::ApplyOrInr,
                            tactic::Exact, tactic::HaveBy, tactic::LetMp, tactic::ApplyFalseElim,
                            tactic::Cases, tactic::ExactTrueIntro, tactic::DestructAnd>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Surface syntax of a tactic, exactly as stored in corpus text.
inline std::string render_tactic(const Tactic& t) {
  using namespace tactic;
  return std::visit(
      overloaded{
          [](const Intro& x) { return "intro " + x.name; },
          [](const ApplyAndIntro&) { return std::string("apply And.intro"); },
          [](const ApplyOrInl&) { return std::string("apply Or.inl"); },
          [](const ApplyOrInr&) { return std::string("apply Or.inr"); },
          [](const Exact& x) { return "exact " + x.hyp; },
          [](const HaveBy& x) { return "have " + x.name + " : " + render(x.prop) + " := by"; },
          [](const LetMp& x) { return "let " + x.name + " := " + x.imp_hyp + " " + x.arg_hyp; },
          [](const ApplyFalseElim& x) { return "apply False.elim " + x.hyp; },
          [](const Cases& x) { return "cases " + x.hyp + " with " + x.left_name + " " + x.right_name; },
          [](const ExactTrueIntro&) { return std::string("exact True.intro"); },
          [](const DestructAnd& x) { return "obtain " + x.left_name + " " + x.right_name + " := " + x.hyp; },
      },
      t);
}

/// Index k of a hypothesis name `h<k>`, or nullopt if the name is malformed.
inline std::optional<std::uint32_t> hypothesis_index(std::string_view name) {
  if (name.size() < 2 || name[0] != 'h' || name[1] < '1' || name[1] > '9' || name.size() > 10) {
    return std::nullopt;
  }
  std::uint64_t k = 0;
  for (char c : name.substr(1)) {
    if (c < '0' || c > '9') return std::nullopt;
    k = k * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (k >= 0xffffffffULL) return std::nullopt;
  return static_cast<std::uint32_t>(k);
}

inline std::string hypothesis_name(std::uint32_t index) { return "h" + std::to_string(index); }

namespace detail {

inline std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string checked_name(std::string_view word, std::string_view text) {
  if (!hypothesis_index(word)) {
    throw GrammarError("bad hypothesis name '" + std::string(word) + "' in '" + std::string(text) + "'");
  }
  return std::string(word);
}

}  // namespace detail

/// Parses one tactic line. Lean 3 lowercase namespaces (`or.inl`) are
/// accepted as aliases. Throws GrammarError on anything else.
inline Tactic parse_tactic(std::string_view text) {
  using namespace tactic;
  const std::string_view line = detail::trim(text);
  const auto fail = [&]() -> GrammarError {
    return GrammarError("not a tactic: '" + std::string(line) + "'");
  };

  if (line.substr(0, 5) == "have ") {
    // have <name> : <prop> := by
    constexpr std::string_view kSuffix = ":= by";
    if (line.size() < kSuffix.size() || line.substr(line.size() - kSuffix.size()) != kSuffix) throw fail();
    std::string_view body = detail::trim(line.substr(5, line.size() - 5 - kSuffix.size()));
    const std::size_t colon = body.find(':');
    if (colon == std::string_view::npos) throw fail();
    std::string name = detail::checked_name(detail::trim(body.substr(0, colon)), line);
    std::string_view prop_text = detail::trim(body.substr(colon + 1));
    try {
      return HaveBy{std::move(name), parse(prop_text)};
    } catch (const ParseError& e) {
      throw GrammarError(std::string("bad proposition in have: ") + e.what());
    }
  }

  const auto w = detail::split_words(line);
  const auto is = [&](std::size_t i, std::string_view a, std::string_view b = {}) {
    return i < w.size() && (w[i] == a || (!b.empty() && w[i] == b));
  };
  if (w.empty()) throw fail();
  if (w.size() == 2 && is(0, "intro")) return Intro{detail::checked_name(w[1], line)};
  if (w.size() == 2 && is(0, "apply")) {
    if (is(1, "And.intro", "and.intro")) return ApplyAndIntro{};
    if (is(1, "Or.inl", "or.inl")) return ApplyOrInl{};
    if (is(1, "Or.inr", "or.inr")) return ApplyOrInr{};
    throw fail();
  }
  if (w.size() == 3 && is(0, "apply") && is(1, "False.elim", "false.elim")) {
    return ApplyFalseElim{detail::checked_name(w[2], line)};
  }
  if (w.size() == 2 && is(0, "exact")) {
    if (is(1, "True.intro", "true.intro")) return ExactTrueIntro{};
    return Exact{detail::checked_name(w[1], line)};
  }
  if (w.size() == 5 && is(0, "let") && is(2, ":=")) {
    return LetMp{detail::checked_name(w[1], line), detail::checked_name(w[3], line),
                 detail::checked_name(w[4], line)};
  }
  if (w.size() == 5 && is(0, "cases") && is(2, "with")) {
    return Cases{detail::checked_name(w[1], line), detail::checked_name(w[3], line),
                 detail::checked_name(w[4], line)};
  }
  if (w.size() == 5 && is(0, "obtain") && is(3, ":=")) {
    return DestructAnd{detail::checked_name(w[4], line), detail::checked_name(w[1], line),
                       detail::checked_name(w[2], line)};
  }
  throw fail();
}

inline std::optional<Tactic> try_parse_tactic(std::string_view text) {
  try {
    return parse_tactic(text);
  } catch (const GrammarError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Application

enum class TacticError { RuleInapplicable, UnknownHypothesis, DuplicateHypothesisName, InvalidName, NoGoals };

inline std::string_view to_string(TacticError e) {
  switch (e) {
    case TacticError::RuleInapplicable: return "RuleInapplicable";
    case TacticError::UnknownHypothesis: return "UnknownHypothesis";
    case TacticError::DuplicateHypothesisName: return "DuplicateHypothesisName";
    case TacticError::InvalidName: return "InvalidName";
    case TacticError::NoGoals: return "NoGoals";
  }
  return "?";
}

struct TacticFailure {
  TacticError kind;
  std::string message;
};

struct Complete {};

/// NewState, Complete (no goals remain) or Failure.
using TacticResult = std::variant<ProofState, Complete, TacticFailure>;

inline bool is_complete(const TacticResult& r) { return std::holds_alternative<Complete>(r); }
inline bool is_failure(const TacticResult& r) { return std::holds_alternative<TacticFailure>(r); }

namespace detail {

class Step {
 public:
  Step(const ProofState& state, std::uint64_t new_id) : state_(state), new_id_(new_id) {}

  TacticResult run(const Tactic& t) {
    if (state_.goals.empty()) return fail(TacticError::NoGoals, "no goals to apply the tactic to");
    goal_ = state_.goals.front();
    return std::visit([this](const auto& x) { return apply(x); }, t);
  }

 private:
  static TacticResult fail(TacticError kind, std::string message) {
    return TacticFailure{kind, std::move(message)};
  }

  std::optional<TacticFailure> lookup(const std::string& name, const Hypothesis*& out) const {
    out = goal_.find(name);
    if (!out) return TacticFailure{TacticError::UnknownHypothesis, "unknown hypothesis " + name};
    return std::nullopt;
  }

  // Checks a name about to be introduced into `goal` (ignoring `consumed`).
  std::optional<TacticFailure> fresh(const std::string& name, const std::string& consumed = {}) const {
    if (!hypothesis_index(name)) return TacticFailure{TacticError::InvalidName, "invalid name " + name};
    if (name != consumed && goal_.find(name)) {
      return TacticFailure{TacticError::DuplicateHypothesisName, "duplicate hypothesis " + name};
    }
    return std::nullopt;
  }

  void bump(const std::string& name) {
    next_index_ = std::max(next_index_, *hypothesis_index(name) + 1);
  }

  // Replaces the first goal by `replacement` and packages the result.
  TacticResult finish(std::vector<Goal> replacement) {
    ProofState out;
    out.goals = std::move(replacement);
    out.goals.insert(out.goals.end(), state_.goals.begin() + 1, state_.goals.end());
    out.next_hyp_index = next_index_;
    out.state_id = new_id_;
    if (out.goals.empty()) return Complete{};
    return out;
  }

  static Goal with(Goal g, std::string name, Proposition prop) {
    g.hypotheses.push_back(Hypothesis{std::move(name), std::move(prop)});
    return g;
  }

  static Goal without(Goal g, const std::string& name) {
    std::erase_if(g.hypotheses, [&](const Hypothesis& h) { return h.name == name; });
    return g;
  }

  TacticResult apply(const tactic::Intro& t) {
    if (!goal_.target.is(Connective::Imp)) return fail(TacticError::RuleInapplicable, "intro needs an implication");
    if (auto e = fresh(t.name)) return *e;
    bump(t.name);
    Goal g = with(goal_, t.name, goal_.target.left());
    g.target = goal_.target.right();
    return finish({std::move(g)});
  }

  TacticResult apply(const tactic::ApplyAndIntro&) {
    if (!goal_.target.is(Connective::And)) return fail(TacticError::RuleInapplicable, "And.intro needs a conjunction");
    return finish({Goal{goal_.hypotheses, goal_.target.left()}, Goal{goal_.hypotheses, goal_.target.right()}});
  }

  TacticResult apply(const tactic::ApplyOrInl&) {
    if (!goal_.target.is(Connective::Or)) return fail(TacticError::RuleInapplicable, "Or.inl needs a disjunction");
    return finish({Goal{goal_.hypotheses, goal_.target.left()}});
  }

  TacticResult apply(const tactic::ApplyOrInr&) {
    if (!goal_.target.is(Connective::Or)) return fail(TacticError::RuleInapplicable, "Or.inr needs a disjunction");
    return finish({Goal{goal_.hypotheses, goal_.target.right()}});
  }

  TacticResult apply(const tactic::Exact& t) {
    const Hypothesis* h = nullptr;
    if (auto e = lookup(t.hyp, h)) return *e;
    if (h->prop != goal_.target) {
      return fail(TacticError::RuleInapplicable, t.hyp + " does not match the target");
    }
    return finish({});
  }

  TacticResult apply(const tactic::HaveBy& t) {
    if (auto e = fresh(t.name)) return *e;
    bump(t.name);
    return finish({Goal{goal_.hypotheses, t.prop}, with(goal_, t.name, t.prop)});
  }

  TacticResult apply(const tactic::LetMp& t) {
    const Hypothesis* imp = nullptr;
    const Hypothesis* arg = nullptr;
    if (auto e = lookup(t.imp_hyp, imp)) return *e;
    if (auto e = lookup(t.arg_hyp, arg)) return *e;
    if (!imp->prop.is(Connective::Imp)) return fail(TacticError::RuleInapplicable, t.imp_hyp + " is not an implication");
    if (imp->prop.left() != arg->prop) {
      return fail(TacticError::RuleInapplicable, t.arg_hyp + " does not match the premise of " + t.imp_hyp);
    }
    if (auto e = fresh(t.name)) return *e;
    bump(t.name);
    return finish({with(goal_, t.name, imp->prop.right())});
  }

  TacticResult apply(const tactic::ApplyFalseElim& t) {
    const Hypothesis* h = nullptr;
    if (auto e = lookup(t.hyp, h)) return *e;
    if (!h->prop.is(Connective::Bot)) return fail(TacticError::RuleInapplicable, t.hyp + " is not False");
    return finish({});
  }

  TacticResult apply(const tactic::Cases& t) {
    const Hypothesis* h = nullptr;
    if (auto e = lookup(t.hyp, h)) return *e;
    if (!h->prop.is(Connective::Or)) return fail(TacticError::RuleInapplicable, t.hyp + " is not a disjunction");
    if (t.left_name == t.right_name) return fail(TacticError::DuplicateHypothesisName, "cases names coincide");
    if (auto e = fresh(t.left_name, t.hyp)) return *e;
    if (auto e = fresh(t.right_name, t.hyp)) return *e;
    bump(t.left_name);
    bump(t.right_name);
    const Proposition a = h->prop.left();
    const Proposition b = h->prop.right();
    Goal base = without(goal_, t.hyp);
    return finish({with(base, t.left_name, a), with(base, t.right_name, b)});
  }

  TacticResult apply(const tactic::ExactTrueIntro&) {
    if (!goal_.target.is(Connective::Top)) return fail(TacticError::RuleInapplicable, "target is not True");
    return finish({});
  }

  TacticResult apply(const tactic::DestructAnd& t) {
    const Hypothesis* h = nullptr;
    if (auto e = lookup(t.hyp, h)) return *e;
    if (!h->prop.is(Connective::And)) return fail(TacticError::RuleInapplicable, t.hyp + " is not a conjunction");
    if (t.left_name == t.right_name) return fail(TacticError::DuplicateHypothesisName, "obtain names coincide");
    if (auto e = fresh(t.left_name, t.hyp)) return *e;
    if (auto e = fresh(t.right_name, t.hyp)) return *e;
    bump(t.left_name);
    bump(t.right_name);
    const Proposition a = h->prop.left();
    const Proposition b = h->prop.right();
    return finish({with(with(without(goal_, t.hyp), t.left_name, a), t.right_name, b)});
  }

  const ProofState& state_;
  std::uint64_t new_id_;
  Goal goal_{{}, Proposition::top()};
  std::uint32_t next_index_ = state_.next_hyp_index;
};

}  // namespace detail

/// Applies `t` to the first goal. A resulting state is numbered `new_id`.
inline TacticResult apply_tactic(const ProofState& state, const Tactic& t, std::uint64_t new_id) {
  return detail::Step(state, new_id).run(t);
}

inline TacticResult apply_tactic(const ProofState& state, const Tactic& t) {
  return apply_tactic(state, t, state.state_id + 1);
}

/// Every tactic applicable to the first goal, goal-directed rules first and
/// then hypothesis rules in hypothesis order. New names are h<next>, h<next+1>.
inline std::vector<Tactic> enumerate_tactics(const ProofState& state) {
  using namespace tactic;
  if (state.terminal()) throw Error("enumerate_tactics on a terminal state");
  const Goal& g = state.current();
  const std::string f1 = hypothesis_name(state.next_hyp_index);
  const std::string f2 = hypothesis_name(state.next_hyp_index + 1);
  std::vector<Tactic> out;
  switch (g.target.kind()) {
    case Connective::Imp: out.emplace_back(Intro{f1}); break;
    case Connective::And: out.emplace_back(ApplyAndIntro{}); break;
    case Connective::Or:
      out.emplace_back(ApplyOrInl{});
      out.emplace_back(ApplyOrInr{});
      break;
    case Connective::Top: out.emplace_back(ExactTrueIntro{}); break;
    default: break;
  }
  std::vector<Proposition> premises;
  for (const auto& h : g.hypotheses) {
    if (h.prop == g.target) out.emplace_back(Exact{h.name});
    switch (h.prop.kind()) {
      case Connective::Bot: out.emplace_back(ApplyFalseElim{h.name}); break;
      case Connective::Or: out.emplace_back(Cases{h.name, f1, f2}); break;
      case Connective::And: out.emplace_back(DestructAnd{h.name, f1, f2}); break;
      case Connective::Imp: {
        const Proposition& premise = h.prop.left();
        if (std::find(premises.begin(), premises.end(), premise) == premises.end()) {
          premises.push_back(premise);
          out.emplace_back(HaveBy{f1, premise});
        }
        for (const auto& arg : g.hypotheses) {
          if (arg.prop == premise) out.emplace_back(LetMp{f1, h.name, arg.name});
        }
        break;
      }
      default: break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole scripts

struct ScriptCheck {
  bool ok = false;
  /// Index of the first failing tactic, if any tactic failed.
  std::optional<std::size_t> failure_index;
  std::optional<TacticFailure> failure;
  /// Last non-terminal state reached (the initial state if nothing applied).
  ProofState final_state;
  bool complete = false;
};

/// Folds apply_tactic over the script. ok iff the last tactic completes the
/// proof and nothing failed.
inline ScriptCheck check_script(const Proposition& theorem, const std::vector<Tactic>& tactics) {
  ScriptCheck out;
  out.final_state = initial_state(theorem);
  for (std::size_t i = 0; i < tactics.size(); ++i) {
    if (out.complete) {
      out.failure_index = i;
      out.failure = TacticFailure{TacticError::NoGoals, "tactic after the proof was complete"};
      out.ok = false;
      return out;
    }
    TacticResult r = apply_tactic(out.final_state, tactics[i]);
    if (auto* f = std::get_if<TacticFailure>(&r)) {
      out.failure_index = i;
      out.failure = *f;
      return out;
    }
    if (auto* s = std::get_if<ProofState>(&r)) {
      out.final_state = std::move(*s);
    } else {
      out.complete = true;
    }
  }
  out.ok = out.complete;
  return out;
}

inline std::string render_goal(const Goal& g) {
  std::string out;
  for (const auto& h : g.hypotheses) {
    out += h.name;
    out += " : ";
    out += render(h.prop);
    out += '\n';
  }
  out += "⊢ ";
  out += render(g.target);
  out += '\n';
  return out;
}

/// Goals one after another; a terminal state renders as `no goals`.
inline std::string render_state(const ProofState& s) {
  if (s.terminal()) return "no goals\n";
  std::string out;
  for (const auto& g : s.goals) out += render_goal(g);
  return out;
}

}  // namespace propl
