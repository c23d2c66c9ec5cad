#pragma once

// Decision procedure for intuitionistic propositional provability using the
// contraction-free sequent calculus G4ip. Every rule strictly decreases a
// multiset measure on the sequent, so search terminates without loop
// checks. Deliberately independent of the kernel and of focused search; it
// exists to validate both.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "propl/proposition.hpp"

namespace propl {

class G4ipOracle {
 public:
  bool provable(const Proposition& theorem) { return prove({}, theorem); }

  std::size_t memo_size() const { return memo_.size(); }

 private:
  using Ctx = std::vector<Proposition>;

  struct Key {
    Ctx ctx;
    Proposition goal;
    bool operator==(const Key& o) const { return goal == o.goal && ctx == o.ctx; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::size_t h = k.goal.hash();
      for (const auto& p : k.ctx) h = h * 1000003u ^ p.hash();
      return h;
    }
  };

  static bool contains(const Ctx& ctx, const Proposition& p) {
    return std::find(ctx.begin(), ctx.end(), p) != ctx.end();
  }

  static void add(Ctx& ctx, Proposition p) {
    if (!contains(ctx, p)) ctx.push_back(std::move(p));
  }

  static Ctx without(const Ctx& ctx, std::size_t i) {
    Ctx out = ctx;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
  }

  // Canonical order so equal sets produce equal memo keys.
  static void canonicalize(Ctx& ctx) {
    std::sort(ctx.begin(), ctx.end(), [](const Proposition& a, const Proposition& b) {
      if (a.hash() != b.hash()) return a.hash() < b.hash();
      return compare(a, b) == Ordering::Less;
    });
  }

  bool prove(Ctx ctx, const Proposition& goal) {
    // Invertible left rules, applied to saturation.
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < ctx.size() && !changed; ++i) {
        const Proposition h = ctx[i];
        switch (h.kind()) {
          case Connective::Bot: return true;
          case Connective::Top:
            ctx = without(ctx, i);
            changed = true;
            break;
          case Connective::And: {
            Ctx next = without(ctx, i);
            add(next, h.left());
            add(next, h.right());
            ctx = std::move(next);
            changed = true;
            break;
          }
          case Connective::Or: {
            Ctx l = without(ctx, i);
            Ctx r = l;
            add(l, h.left());
            add(r, h.right());
            return prove(std::move(l), goal) && prove(std::move(r), goal);
          }
          case Connective::Imp: {
            const Proposition& a = h.left();
            const Proposition& b = h.right();
            std::optional<Ctx> next;
            if (a.is(Connective::Top) || (a.is(Connective::Atom) && contains(ctx, a))) {
              next = without(ctx, i);
              add(*next, b);
            } else if (a.is(Connective::Bot)) {
              next = without(ctx, i);
            } else if (a.is(Connective::And)) {
              next = without(ctx, i);
              add(*next, Proposition::imp(a.left(), Proposition::imp(a.right(), b)));
            } else if (a.is(Connective::Or)) {
              next = without(ctx, i);
              add(*next, Proposition::imp(a.left(), b));
              add(*next, Proposition::imp(a.right(), b));
            }
            if (next) {
              ctx = std::move(*next);
              changed = true;
            }
            break;
          }
          default: break;
        }
      }
    }

    // Invertible right rules.
    switch (goal.kind()) {
      case Connective::Top: return true;
      case Connective::And: return prove(ctx, goal.left()) && prove(ctx, goal.right());
      case Connective::Imp: {
        Ctx next = ctx;
        add(next, goal.left());
        return prove(std::move(next), goal.right());
      }
      default: break;
    }
    if (goal.is(Connective::Atom) && contains(ctx, goal)) return true;

    canonicalize(ctx);
    Key key{ctx, goal};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    bool result = false;
    if (goal.is(Connective::Or)) {
      result = prove(ctx, goal.left()) || prove(ctx, goal.right());
    }
    // Left implication whose antecedent is itself an implication:
    //   Γ, D→B ⊢ C→D    Γ, B ⊢ G
    //   ------------------------
    //       Γ, (C→D)→B ⊢ G
    for (std::size_t i = 0; i < ctx.size() && !result; ++i) {
      const Proposition& h = ctx[i];
      if (!h.is(Connective::Imp) || !h.left().is(Connective::Imp)) continue;
      const Proposition& c = h.left().left();
      const Proposition& d = h.left().right();
      const Proposition& b = h.right();
      Ctx first = without(ctx, i);
      Ctx second = first;
      add(first, Proposition::imp(d, b));
      add(second, b);
      result = prove(std::move(first), Proposition::imp(c, d)) && prove(std::move(second), goal);
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

  std::unordered_map<Key, bool, KeyHash> memo_;
};

/// True iff `theorem` is provable in intuitionistic propositional logic.
inline bool decide_oracle(const Proposition& theorem) { return G4ipOracle{}.provable(theorem); }

}  // namespace propl
