#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "propl/proposition.hpp"
#include "propl/rng.hpp"

namespace propl::testing {

/// Random proposition with exactly `internal` internal nodes; the split
/// point is uniform, so shapes are not uniformly distributed.
inline Proposition random_prop(Rng& rng, std::size_t internal, std::uint32_t p) {
  if (internal == 0) {
    const auto d = rng.below(p + 2);
    if (d == 0) return Proposition::top();
    if (d == 1) return Proposition::bot();
    return Proposition::atom(static_cast<std::uint32_t>(d - 1));
  }
  const std::size_t nl = static_cast<std::size_t>(rng.below(internal));
  constexpr Connective kOps[] = {Connective::And, Connective::Or, Connective::Imp};
  const Connective op = kOps[rng.below(3)];
  Proposition l = random_prop(rng, nl, p);
  Proposition r = random_prop(rng, internal - 1 - nl, p);
  return Proposition::make(op, std::move(l), std::move(r));
}

/// Contents of a file under tests/data.
inline std::string read_data(const std::string& name) {
  std::ifstream in(std::string(PROPL_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const char* kAppendixCTheorem = "((p1 ∨ p2) → False) → ((p1 → False) ∧ (p2 → False))";

}  // namespace propl::testing
