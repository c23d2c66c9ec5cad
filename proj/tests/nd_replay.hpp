#pragma once

// Test-only natural deduction replay. A tactic script is rebuilt into an
// explicit derivation tree over the eleven rules (Assumption, T-I, F-E, ∧-I,
// ∧-E1, ∧-E2, ∨-I1, ∨-I2, ∨-E, →-I, →-E) and every rule instance is then
// re-checked on its own. `have`, `let` and `obtain` become cuts encoded as
// →-I followed by →-E. Nothing here calls into the kernel.

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "propl/kernel.hpp"

namespace propl::testing {

enum class Rule { Assumption, TrueI, FalseE, AndI, AndE1, AndE2, OrI1, OrI2, OrE, ImpI, ImpE };

struct Derivation {
  Rule rule;
  std::vector<Proposition> context;
  Proposition conclusion;
  std::vector<Derivation> premises;
};

class NdReplay {
 public:
  explicit NdReplay(const std::vector<Tactic>& tactics) : tactics_(tactics) {}

  Derivation build(const Proposition& theorem) {
    Derivation d = prove({}, {}, theorem);
    if (pos_ != tactics_.size()) throw std::runtime_error("unused tactics");
    return d;
  }

 private:
  using Names = std::map<std::string, Proposition>;
  using Ctx = std::vector<Proposition>;

  static Derivation node(Rule r, const Ctx& ctx, Proposition c, std::vector<Derivation> ps = {}) {
    return Derivation{r, ctx, std::move(c), std::move(ps)};
  }

  static Ctx plus(Ctx ctx, const Proposition& a) {
    ctx.push_back(a);
    return ctx;
  }

  static Derivation cut(const Ctx& ctx, const Proposition& a, Derivation proof_of_a, Derivation rest) {
    const Proposition c = rest.conclusion;
    Derivation intro = node(Rule::ImpI, ctx, Proposition::imp(a, c));
    intro.premises.push_back(std::move(rest));
    return node(Rule::ImpE, ctx, c, {std::move(intro), std::move(proof_of_a)});
  }

  const Proposition& hyp(const Names& names, const std::string& n) {
    auto it = names.find(n);
    if (it == names.end()) throw std::runtime_error("unknown name " + n);
    return it->second;
  }

  Derivation prove(const Names& names, const Ctx& ctx, const Proposition& goal) {
    using namespace tactic;
    if (pos_ >= tactics_.size()) throw std::runtime_error("script ended early");
    const Tactic& t = tactics_[pos_++];
    if (auto* x = std::get_if<Intro>(&t)) {
      Names n2 = names;
      n2.insert_or_assign(x->name, goal.left());
      return node(Rule::ImpI, ctx, goal, {prove(n2, plus(ctx, goal.left()), goal.right())});
    }
    if (std::holds_alternative<ApplyAndIntro>(t)) {
      Derivation l = prove(names, ctx, goal.left());
      Derivation r = prove(names, ctx, goal.right());
      return node(Rule::AndI, ctx, goal, {std::move(l), std::move(r)});
    }
    if (std::holds_alternative<ApplyOrInl>(t)) return node(Rule::OrI1, ctx, goal, {prove(names, ctx, goal.left())});
    if (std::holds_alternative<ApplyOrInr>(t)) return node(Rule::OrI2, ctx, goal, {prove(names, ctx, goal.right())});
    if (auto* x = std::get_if<Exact>(&t)) return node(Rule::Assumption, ctx, hyp(names, x->hyp));
    if (std::holds_alternative<ExactTrueIntro>(t)) return node(Rule::TrueI, ctx, goal);
    if (auto* x = std::get_if<ApplyFalseElim>(&t)) {
      return node(Rule::FalseE, ctx, goal, {node(Rule::Assumption, ctx, hyp(names, x->hyp))});
    }
    if (auto* x = std::get_if<HaveBy>(&t)) {
      Derivation pa = prove(names, ctx, x->prop);
      Names n2 = names;
      n2.insert_or_assign(x->name, x->prop);
      Derivation rest = prove(n2, plus(ctx, x->prop), goal);
      return cut(ctx, x->prop, std::move(pa), std::move(rest));
    }
    if (auto* x = std::get_if<LetMp>(&t)) {
      const Proposition imp = hyp(names, x->imp_hyp);
      const Proposition arg = hyp(names, x->arg_hyp);
      Derivation pb = node(Rule::ImpE, ctx, imp.right(),
                           {node(Rule::Assumption, ctx, imp), node(Rule::Assumption, ctx, arg)});
      Names n2 = names;
      n2.insert_or_assign(x->name, imp.right());
      Derivation rest = prove(n2, plus(ctx, imp.right()), goal);
      return cut(ctx, imp.right(), std::move(pb), std::move(rest));
    }
    if (auto* x = std::get_if<Cases>(&t)) {
      const Proposition d = hyp(names, x->hyp);
      Names nl = names;
      nl.erase(x->hyp);
      Names nr = nl;
      nl.insert_or_assign(x->left_name, d.left());
      nr.insert_or_assign(x->right_name, d.right());
      Derivation l = prove(nl, plus(ctx, d.left()), goal);
      Derivation r = prove(nr, plus(ctx, d.right()), goal);
      return node(Rule::OrE, ctx, goal, {node(Rule::Assumption, ctx, d), std::move(l), std::move(r)});
    }
    if (auto* x = std::get_if<DestructAnd>(&t)) {
      const Proposition c = hyp(names, x->hyp);
      const Proposition a = c.left();
      const Proposition b = c.right();
      Names n2 = names;
      n2.erase(x->hyp);
      n2.insert_or_assign(x->left_name, a);
      n2.insert_or_assign(x->right_name, b);
      Derivation rest = prove(n2, plus(plus(ctx, a), b), goal);
      // Γ ⊢ A → (B → C) by two →-I, then →-E with ∧-E1 and ∧-E2.
      Derivation inner = node(Rule::ImpI, plus(ctx, a), Proposition::imp(b, goal), {std::move(rest)});
      Derivation outer = node(Rule::ImpI, ctx, Proposition::imp(a, Proposition::imp(b, goal)), {std::move(inner)});
      Derivation pa = node(Rule::AndE1, ctx, a, {node(Rule::Assumption, ctx, c)});
      Derivation pb = node(Rule::AndE2, ctx, b, {node(Rule::Assumption, ctx, c)});
      Derivation bc = node(Rule::ImpE, ctx, Proposition::imp(b, goal), {std::move(outer), std::move(pa)});
      return node(Rule::ImpE, ctx, goal, {std::move(bc), std::move(pb)});
    }
    throw std::runtime_error("unhandled tactic");
  }

  const std::vector<Tactic>& tactics_;
  std::size_t pos_ = 0;
};

inline bool same_ctx(const std::vector<Proposition>& a, const std::vector<Proposition>& b) { return a == b; }

/// Re-checks every rule instance of `d` against the rule schemas.
inline bool verify(const Derivation& d) {
  for (const auto& p : d.premises) {
    if (!verify(p)) return false;
  }
  const auto& ps = d.premises;
  const auto& G = d.context;
  const auto& C = d.conclusion;
  const auto ctx_ok = [&](std::size_t i) { return same_ctx(ps[i].context, G); };
  switch (d.rule) {
    case Rule::Assumption:
      return ps.empty() && std::find(G.begin(), G.end(), C) != G.end();
    case Rule::TrueI: return ps.empty() && C.is(Connective::Top);
    case Rule::FalseE: return ps.size() == 1 && ctx_ok(0) && ps[0].conclusion.is(Connective::Bot);
    case Rule::AndI:
      return ps.size() == 2 && ctx_ok(0) && ctx_ok(1) && C.is(Connective::And) && ps[0].conclusion == C.left() &&
             ps[1].conclusion == C.right();
    case Rule::AndE1:
      return ps.size() == 1 && ctx_ok(0) && ps[0].conclusion.is(Connective::And) && ps[0].conclusion.left() == C;
    case Rule::AndE2:
      return ps.size() == 1 && ctx_ok(0) && ps[0].conclusion.is(Connective::And) && ps[0].conclusion.right() == C;
    case Rule::OrI1: return ps.size() == 1 && ctx_ok(0) && C.is(Connective::Or) && ps[0].conclusion == C.left();
    case Rule::OrI2: return ps.size() == 1 && ctx_ok(0) && C.is(Connective::Or) && ps[0].conclusion == C.right();
    case Rule::OrE: {
      if (ps.size() != 3 || !ctx_ok(0) || !ps[0].conclusion.is(Connective::Or)) return false;
      auto gl = G;
      gl.push_back(ps[0].conclusion.left());
      auto gr = G;
      gr.push_back(ps[0].conclusion.right());
      return same_ctx(ps[1].context, gl) && same_ctx(ps[2].context, gr) && ps[1].conclusion == C &&
             ps[2].conclusion == C;
    }
    case Rule::ImpI: {
      if (ps.size() != 1 || !C.is(Connective::Imp)) return false;
      auto g2 = G;
      g2.push_back(C.left());
      return same_ctx(ps[0].context, g2) && ps[0].conclusion == C.right();
    }
    case Rule::ImpE:
      return ps.size() == 2 && ctx_ok(0) && ctx_ok(1) && ps[0].conclusion.is(Connective::Imp) &&
             ps[0].conclusion.left() == ps[1].conclusion && ps[0].conclusion.right() == C;
  }
  return false;
}

/// Builds and verifies; false if the script cannot be replayed.
inline bool replay_derivation(const Proposition& theorem, const std::vector<Tactic>& tactics) {
  try {
    NdReplay r(tactics);
    Derivation d = r.build(theorem);
    return d.context.empty() && d.conclusion == theorem && verify(d);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace propl::testing
