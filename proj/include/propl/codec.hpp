#pragma once

// Bijection between propositions with a fixed number n of internal nodes
// over atoms p1..pP and the naturals [0, C_n * 3^n * (P+2)^(n+1)).
//
// An id is `shape_rank * 3^n * (P+2)^(n+1) + assignment`, where shape_rank
// ranks the unlabeled full binary tree among the C_n shapes and assignment
// reads the labels in-order as a mixed-radix number (base 3 for
// connectives, base P+2 for leaves).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "propl/error.hpp"
#include "propl/proposition.hpp"
#include "propl/rng.hpp"

namespace propl {

using Natural = boost::multiprecision::cpp_int;

struct CodecParams {
  std::uint32_t n = 0;
  std::uint32_t p = 1;
};

/// Arbitrary-precision proposition index, serialized as a decimal string.
struct PropositionId {
  Natural value;

  std::string to_string() const { return value.str(); }

  static PropositionId parse(const std::string& text) {
    if (text.empty()) throw CodecError("empty id");
    for (char c : text) {
      if (c < '0' || c > '9') throw CodecError("id must be a decimal natural: '" + text + "'");
    }
    return PropositionId{Natural(text)};
  }

  friend bool operator==(const PropositionId&, const PropositionId&) = default;
  friend bool operator<(const PropositionId& a, const PropositionId& b) { return a.value < b.value; }
};

// ---------------------------------------------------------------------------
// Catalan numbers, memoized. The table only grows; readers share the lock.

namespace detail {

class CatalanTable {
 public:
  Natural get(std::size_t k) {
    {
      std::shared_lock lock(mutex_);
      if (k < table_.size()) return table_[k];
    }
    std::unique_lock lock(mutex_);
    while (table_.size() <= k) {
      const std::size_t m = table_.size();
      Natural c = 0;
      for (std::size_t i = 1; i <= m; ++i) c += table_[i - 1] * table_[m - i];
      table_.push_back(std::move(c));
    }
    return table_[k];
  }

 private:
  std::shared_mutex mutex_;
  std::vector<Natural> table_{Natural(1)};
};

inline CatalanTable& catalan_table() {
  static CatalanTable table;
  return table;
}

}  // namespace detail

/// C_k via C_k = sum_{i=1..k} C_{i-1} C_{k-i}.
inline Natural catalan(std::size_t k) { return detail::catalan_table().get(k); }

// ---------------------------------------------------------------------------
// Tree shapes

/// Unlabeled full binary tree.
class TreeShape {
 public:
  static TreeShape leaf() { return TreeShape{}; }
  static TreeShape node(TreeShape l, TreeShape r) {
    TreeShape s;
    s.internal_ = 1 + l.internal_ + r.internal_;
    s.left_ = std::make_shared<const TreeShape>(std::move(l));
    s.right_ = std::make_shared<const TreeShape>(std::move(r));
    return s;
  }
  static TreeShape of(const Proposition& p) {
    if (p.is_leaf()) return leaf();
    return node(of(p.left()), of(p.right()));
  }

  bool is_leaf() const noexcept { return left_ == nullptr; }
  std::size_t internal_nodes() const noexcept { return internal_; }
  const TreeShape& left() const { return *left_; }
  const TreeShape& right() const { return *right_; }

  friend bool operator==(const TreeShape& a, const TreeShape& b) {
    if (a.internal_ != b.internal_) return false;
    if (a.is_leaf()) return true;
    return a.left() == b.left() && a.right() == b.right();
  }

 private:
  std::size_t internal_ = 0;
  std::shared_ptr<const TreeShape> left_;
  std::shared_ptr<const TreeShape> right_;
};

/// Digit of a node label: ∧/T -> 0, ∨/F -> 1, → -> 2, P_i -> i + 1.
inline std::uint32_t node_number(const Proposition& node) {
  switch (node.kind()) {
    case Connective::And:
    case Connective::Top: return 0;
    case Connective::Or:
    case Connective::Bot: return 1;
    case Connective::Imp: return 2;
    case Connective::Atom: return node.atom_index() + 1;
  }
  return 0;
}

inline Natural shape_number(const TreeShape& shape) {
  if (shape.is_leaf()) return 0;
  const std::size_t nl = shape.left().internal_nodes();
  const std::size_t nr = shape.right().internal_nodes();
  const std::size_t n = nl + nr + 1;
  Natural rank = 0;
  for (std::size_t i = 1; i <= nl; ++i) rank += catalan(i - 1) * catalan(n - i);
  return rank + catalan(nr) * shape_number(shape.left()) + shape_number(shape.right());
}

/// Number of label assignments of a shape with `internal` internal nodes:
/// 3^internal * (p+2)^(internal+1).
inline Natural assignments_per_shape(std::size_t internal, std::uint32_t p) {
  return boost::multiprecision::pow(Natural(3), static_cast<unsigned>(internal)) *
         boost::multiprecision::pow(Natural(p) + 2, static_cast<unsigned>(internal + 1));
}

namespace detail {

inline Natural assignment_number_unchecked(const Proposition& prop, std::uint32_t p) {
  const Natural digit = node_number(prop);
  if (prop.is_leaf()) return digit;
  const Natural radix_right = assignments_per_shape(prop.right().internal_nodes(), p);
  return 3 * radix_right * assignment_number_unchecked(prop.left(), p) + radix_right * digit +
         assignment_number_unchecked(prop.right(), p);
}

inline void check_atoms(const Proposition& prop, std::uint32_t p) {
  if (prop.max_atom() > p) {
    throw CodecError("atom p" + std::to_string(prop.max_atom()) + " exceeds p=" + std::to_string(p));
  }
}

}  // namespace detail

inline Natural assignment_number(const Proposition& prop, const CodecParams& params) {
  detail::check_atoms(prop, params.p);
  return detail::assignment_number_unchecked(prop, params.p);
}

inline Natural count_propositions(const CodecParams& params) {
  return catalan(params.n) * assignments_per_shape(params.n, params.p);
}

inline PropositionId encode(const Proposition& prop, const CodecParams& params) {
  if (params.p < 1) throw CodecError("p must be at least 1");
  if (prop.internal_nodes() != params.n) {
    throw CodecError("proposition has " + std::to_string(prop.internal_nodes()) +
                     " internal nodes, expected n=" + std::to_string(params.n));
  }
  detail::check_atoms(prop, params.p);
  return PropositionId{assignments_per_shape(params.n, params.p) * shape_number(TreeShape::of(prop)) +
                       detail::assignment_number_unchecked(prop, params.p)};
}

namespace detail {

inline TreeShape tree_shape(Natural rank, std::size_t n) {
  if (n == 0) return TreeShape::leaf();
  std::size_t nl = 0;
  Natural prefix = 0;
  while (nl < n) {
    Natural next = prefix + catalan(nl) * catalan(n - 1 - nl);
    if (next > rank) break;
    prefix = std::move(next);
    ++nl;
  }
  const std::size_t nr = n - nl - 1;
  rank -= prefix;
  const Natural cr = catalan(nr);
  return TreeShape::node(tree_shape(rank / cr, nl), tree_shape(rank % cr, nr));
}

inline Proposition leaf_of_digit(std::uint32_t digit) {
  if (digit == 0) return Proposition::top();
  if (digit == 1) return Proposition::bot();
  return Proposition::atom(digit - 1);
}

inline Proposition tree_assignment(const TreeShape& shape, Natural number, std::uint32_t p) {
  if (shape.is_leaf()) return leaf_of_digit(static_cast<std::uint32_t>(number));
  const Natural radix_right = assignments_per_shape(shape.right().internal_nodes(), p);
  const Natural right_part = number % radix_right;
  number /= radix_right;
  const auto digit = static_cast<std::uint32_t>(number % 3);
  number /= 3;
  Proposition lhs = tree_assignment(shape.left(), std::move(number), p);
  Proposition rhs = tree_assignment(shape.right(), right_part, p);
  constexpr Connective kByDigit[] = {Connective::And, Connective::Or, Connective::Imp};
  return Proposition::make(kByDigit[digit], std::move(lhs), std::move(rhs));
}

}  // namespace detail

inline TreeShape tree_shape(const Natural& rank, std::size_t n) {
  if (rank < 0 || rank >= catalan(n)) throw CodecError("shape rank out of range");
  return detail::tree_shape(rank, n);
}

inline Proposition decode(const PropositionId& id, const CodecParams& params) {
  if (params.p < 1) throw CodecError("p must be at least 1");
  if (id.value < 0 || id.value >= count_propositions(params)) {
    throw CodecError("id " + id.to_string() + " out of range for n=" + std::to_string(params.n) +
                     ", p=" + std::to_string(params.p));
  }
  const Natural base = assignments_per_shape(params.n, params.p);
  TreeShape shape = detail::tree_shape(id.value / base, params.n);
  return detail::tree_assignment(shape, id.value % base, params.p);
}

// ---------------------------------------------------------------------------
// Sampling

inline std::vector<PropositionId> sample_uniform_ids(const CodecParams& params, std::uint64_t seed,
                                                     std::size_t count) {
  const Natural total = count_propositions(params);
  Rng rng(seed);
  std::vector<PropositionId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ids.push_back(PropositionId{rng.below(total)});
  return ids;
}

/// `count` independent uniform draws at fixed (n, p); deterministic in `seed`.
inline std::vector<Proposition> sample_uniform(const CodecParams& params, std::uint64_t seed,
                                               std::size_t count) {
  std::vector<Proposition> out;
  out.reserve(count);
  for (const auto& id : sample_uniform_ids(params, seed, count)) out.push_back(decode(id, params));
  return out;
}

// ---------------------------------------------------------------------------
// Merged ranking over a range of internal-node counts: the blocks for
// n_min..n_max are concatenated in ascending n.

inline Natural encode_merged(const Proposition& prop, std::uint32_t n_min, std::uint32_t n_max,
                             std::uint32_t p) {
  const std::size_t n = prop.internal_nodes();
  if (n_min > n_max) throw CodecError("empty n range");
  if (n < n_min || n > n_max) {
    throw CodecError("internal node count " + std::to_string(n) + " outside the merged range");
  }
  Natural offset = 0;
  for (std::uint32_t m = n_min; m < n; ++m) offset += count_propositions({m, p});
  return offset + encode(prop, {static_cast<std::uint32_t>(n), p}).value;
}

inline Proposition decode_merged(const Natural& id, std::uint32_t n_min, std::uint32_t n_max,
                                 std::uint32_t p) {
  if (n_min > n_max) throw CodecError("empty n range");
  if (id < 0) throw CodecError("negative id");
  Natural rest = id;
  for (std::uint32_t m = n_min; m <= n_max; ++m) {
    const Natural block = count_propositions({m, p});
    if (rest < block) return decode(PropositionId{rest}, {m, p});
    rest -= block;
  }
  throw CodecError("merged id out of range");
}

}  // namespace propl
