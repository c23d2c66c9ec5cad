#pragma once

// Propositions of intuitionistic propositional logic as immutable full
// binary trees: leaves are atoms p1..pN, True and False; internal nodes are
// the connectives ∧, ∨ and →.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>

#include "propl/error.hpp"

namespace propl {

enum class Connective : std::uint8_t { Top, Bot, Atom, And, Or, Imp };

enum class Ordering : std::int8_t { Less = -1, Equal = 0, Greater = 1 };

struct PropNode;

/// Shared, immutable proposition tree. Copies are cheap and share structure.
class Proposition {
 public:
  static Proposition top();
  static Proposition bot();
  /// Atom p<index>; index is 1-based.
  static Proposition atom(std::uint32_t index);
  static Proposition conj(Proposition lhs, Proposition rhs);
  static Proposition disj(Proposition lhs, Proposition rhs);
  static Proposition imp(Proposition lhs, Proposition rhs);
  static Proposition make(Connective c, Proposition lhs, Proposition rhs);

  Connective kind() const noexcept;
  bool is_leaf() const noexcept;
  bool is(Connective c) const noexcept { return kind() == c; }
  /// Atom index, 0 for non-atoms.
  std::uint32_t atom_index() const noexcept;
  const Proposition& left() const;
  const Proposition& right() const;

  /// Number of ∧/∨/→ nodes.
  std::size_t internal_nodes() const noexcept;
  /// Largest atom index occurring in the tree, 0 if none.
  std::uint32_t max_atom() const noexcept;
  std::size_t hash() const noexcept;

  friend bool operator==(const Proposition& a, const Proposition& b);

 private:
  explicit Proposition(std::shared_ptr<const PropNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const PropNode> node_;
};

struct PropNode {
  Connective kind;
  std::uint32_t atom = 0;
  std::uint32_t internal = 0;
  std::uint32_t max_atom = 0;
  std::size_t hash = 0;
  // Children are only populated for internal nodes.
  std::unique_ptr<Proposition> lhs;
  std::unique_ptr<Proposition> rhs;
};

namespace detail {

inline std::size_t mix_hash(std::size_t seed, std::size_t v) noexcept {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline std::shared_ptr<const PropNode> make_leaf(Connective c, std::uint32_t atom) {
  auto n = std::make_shared<PropNode>();
  n->kind = c;
  n->atom = atom;
  n->max_atom = atom;
  n->hash = mix_hash(static_cast<std::size_t>(c) * 1315423911ULL, atom);
  return n;
}

}  // namespace detail

inline Proposition Proposition::top() {
  static const Proposition t{detail::make_leaf(Connective::Top, 0)};
  return t;
}

inline Proposition Proposition::bot() {
  static const Proposition f{detail::make_leaf(Connective::Bot, 0)};
  return f;
}

inline Proposition Proposition::atom(std::uint32_t index) {
  if (index == 0) throw Error("atom index must be positive");
  return Proposition{detail::make_leaf(Connective::Atom, index)};
}

inline Proposition Proposition::make(Connective c, Proposition lhs, Proposition rhs) {
  if (c != Connective::And && c != Connective::Or && c != Connective::Imp) {
    throw Error("make() requires a binary connective");
  }
  auto n = std::make_shared<PropNode>();
  n->kind = c;
  n->internal = 1 + lhs.node_->internal + rhs.node_->internal;
  n->max_atom = std::max(lhs.node_->max_atom, rhs.node_->max_atom);
  n->hash = detail::mix_hash(detail::mix_hash(static_cast<std::size_t>(c), lhs.hash()), rhs.hash());
  n->lhs = std::make_unique<Proposition>(std::move(lhs));
  n->rhs = std::make_unique<Proposition>(std::move(rhs));
  return Proposition{std::move(n)};
}

inline Proposition Proposition::conj(Proposition lhs, Proposition rhs) {
  return make(Connective::And, std::move(lhs), std::move(rhs));
}
inline Proposition Proposition::disj(Proposition lhs, Proposition rhs) {
  return make(Connective::Or, std::move(lhs), std::move(rhs));
}
inline Proposition Proposition::imp(Proposition lhs, Proposition rhs) {
  return make(Connective::Imp, std::move(lhs), std::move(rhs));
}

inline Connective Proposition::kind() const noexcept { return node_->kind; }
inline bool Proposition::is_leaf() const noexcept { return node_->lhs == nullptr; }
inline std::uint32_t Proposition::atom_index() const noexcept { return node_->atom; }

inline const Proposition& Proposition::left() const {
  if (is_leaf()) throw Error("left() on a leaf");
  return *node_->lhs;
}

inline const Proposition& Proposition::right() const {
  if (is_leaf()) throw Error("right() on a leaf");
  return *node_->rhs;
}

inline std::size_t Proposition::internal_nodes() const noexcept { return node_->internal; }
inline std::uint32_t Proposition::max_atom() const noexcept { return node_->max_atom; }
inline std::size_t Proposition::hash() const noexcept { return node_->hash; }

inline bool operator==(const Proposition& a, const Proposition& b) {
  if (a.node_ == b.node_) return true;
  const PropNode& x = *a.node_;
  const PropNode& y = *b.node_;
  if (x.hash != y.hash || x.kind != y.kind || x.internal != y.internal || x.atom != y.atom) {
    return false;
  }
  if (!x.lhs) return true;
  return *x.lhs == *y.lhs && *x.rhs == *y.rhs;
}

inline bool operator!=(const Proposition& a, const Proposition& b) { return !(a == b); }

inline std::size_t internal_nodes(const Proposition& p) noexcept { return p.internal_nodes(); }

// ---------------------------------------------------------------------------
// Rendering

inline constexpr std::string_view kAndSymbol = "∧";
inline constexpr std::string_view kOrSymbol = "∨";
inline constexpr std::string_view kImpSymbol = "→";

inline std::string_view connective_symbol(Connective c) {
  switch (c) {
    case Connective::And: return kAndSymbol;
    case Connective::Or: return kOrSymbol;
    case Connective::Imp: return kImpSymbol;
    default: throw Error("not a binary connective");
  }
}

namespace detail {

inline void render_into(const Proposition& p, std::string& out) {
  switch (p.kind()) {
    case Connective::Top: out += "True"; return;
    case Connective::Bot: out += "False"; return;
    case Connective::Atom:
      out += 'p';
      out += std::to_string(p.atom_index());
      return;
    default:
      out += '(';
      render_into(p.left(), out);
      out += ' ';
      out += connective_symbol(p.kind());
      out += ' ';
      render_into(p.right(), out);
      out += ')';
  }
}

}  // namespace detail

/// Canonical text: leaves bare, every compound subterm parenthesized.
inline std::string render(const Proposition& p) {
  std::string out;
  detail::render_into(p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
// Precedence ∧ > ∨ > →, all three right-associative (Lean's infixr).
// ASCII aliases /\, \/ and -> are accepted on input.

namespace detail {

class PropParser {
 public:
  PropParser(std::string_view text, std::uint32_t max_atom) : text_(text), max_atom_(max_atom) {}

  Proposition parse_all() {
    Proposition result = parse_imp();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return result;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  bool eat_imp() { return eat(kImpSymbol) || eat("->"); }
  bool eat_or() { return eat(kOrSymbol) || eat("\\/"); }
  bool eat_and() { return eat(kAndSymbol) || eat("/\\"); }

  Proposition parse_imp() {
    Proposition lhs = parse_or();
    if (eat_imp()) return Proposition::imp(std::move(lhs), parse_imp());
    return lhs;
  }

  Proposition parse_or() {
    Proposition lhs = parse_and();
    if (eat_or()) return Proposition::disj(std::move(lhs), parse_or());
    return lhs;
  }

  Proposition parse_and() {
    Proposition lhs = parse_primary();
    if (eat_and()) return Proposition::conj(std::move(lhs), parse_and());
    return lhs;
  }

  static bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  }

  Proposition parse_primary() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    if (text_[pos_] == '(') {
      ++pos_;
      Proposition inner = parse_imp();
      if (!eat(")")) throw ParseError("expected ')'", pos_);
      return inner;
    }
    std::size_t end = pos_;
    while (end < text_.size() && is_ident_char(text_[end])) ++end;
    std::string_view word = text_.substr(pos_, end - pos_);
    if (word.empty()) throw ParseError("expected a proposition", start);
    pos_ = end;
    if (word == "True") return Proposition::top();
    if (word == "False") return Proposition::bot();
    if (word.size() >= 2 && word[0] == 'p' && word[1] >= '1' && word[1] <= '9') {
      std::uint64_t index = 0;
      for (char c : word.substr(1)) {
        if (c < '0' || c > '9') throw ParseError("malformed atom '" + std::string(word) + "'", start);
        index = index * 10 + static_cast<std::uint64_t>(c - '0');
        if (index > std::numeric_limits<std::uint32_t>::max()) {
          throw ParseError("atom index too large", start);
        }
      }
      if (index > max_atom_) {
        throw ParseError("atom p" + std::to_string(index) + " exceeds p=" + std::to_string(max_atom_),
                         start);
      }
      return Proposition::atom(static_cast<std::uint32_t>(index));
    }
    throw ParseError("unknown token '" + std::string(word) + "'", start);
  }

  std::string_view text_;
  std::uint32_t max_atom_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline constexpr std::uint32_t kUnboundedAtoms = std::numeric_limits<std::uint32_t>::max();

/// Parses proposition text. Atoms above `max_atom` are rejected.
inline Proposition parse(std::string_view text, std::uint32_t max_atom = kUnboundedAtoms) {
  return detail::PropParser(text, max_atom).parse_all();
}

// ---------------------------------------------------------------------------
// Lexicographic order
//
// Keys, in priority: internal-node count (ascending), internal-node count of
// the left child (descending), top symbol T < F < P1 < ... < ∧ < ∨ < →, then
// the left and right children recursively. The recursion skips the first key.

namespace detail {

inline std::uint64_t symbol_rank(const Proposition& p) {
  constexpr std::uint64_t kConnectiveBase = std::uint64_t{1} << 40;
  switch (p.kind()) {
    case Connective::Top: return 0;
    case Connective::Bot: return 1;
    case Connective::Atom: return 1 + std::uint64_t{p.atom_index()};
    case Connective::And: return kConnectiveBase;
    case Connective::Or: return kConnectiveBase + 1;
    case Connective::Imp: return kConnectiveBase + 2;
  }
  return 0;
}

template <typename T>
Ordering three_way(const T& a, const T& b) {
  if (a < b) return Ordering::Less;
  if (b < a) return Ordering::Greater;
  return Ordering::Equal;
}

inline Ordering compare_from_left_key(const Proposition& a, const Proposition& b) {
  const std::size_t la = a.is_leaf() ? 0 : a.left().internal_nodes();
  const std::size_t lb = b.is_leaf() ? 0 : b.left().internal_nodes();
  if (la != lb) return la > lb ? Ordering::Less : Ordering::Greater;
  if (Ordering o = three_way(symbol_rank(a), symbol_rank(b)); o != Ordering::Equal) return o;
  if (a.is_leaf() || b.is_leaf()) return Ordering::Equal;
  if (Ordering o = compare_from_left_key(a.left(), b.left()); o != Ordering::Equal) return o;
  return compare_from_left_key(a.right(), b.right());
}

}  // namespace detail

inline Ordering compare(const Proposition& a, const Proposition& b) {
  if (Ordering o = detail::three_way(a.internal_nodes(), b.internal_nodes()); o != Ordering::Equal) {
    return o;
  }
  return detail::compare_from_left_key(a, b);
}

struct PropositionLess {
  bool operator()(const Proposition& a, const Proposition& b) const {
    return compare(a, b) == Ordering::Less;
  }
};

}  // namespace propl

template <>
struct std::hash<propl::Proposition> {
  std::size_t operator()(const propl::Proposition& p) const noexcept { return p.hash(); }
};
