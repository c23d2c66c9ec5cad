#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "propl/proposition.hpp"
#include "test_support.hpp"

namespace propl {
namespace {

const Proposition p1 = Proposition::atom(1);
const Proposition p2 = Proposition::atom(2);
const Proposition T = Proposition::top();
const Proposition F = Proposition::bot();

TEST(Parse, TheoremOne) {
  EXPECT_EQ(parse("p1 → p1 ∨ p2"), Proposition::imp(p1, Proposition::disj(p1, p2)));
}

TEST(Parse, Leaf) { EXPECT_EQ(parse("True"), T); }

TEST(Parse, AppendixCTheorem) {
  const Proposition expected = Proposition::imp(
      Proposition::imp(Proposition::disj(p1, p2), F),
      Proposition::conj(Proposition::imp(p1, F), Proposition::imp(p2, F)));
  EXPECT_EQ(parse(testing::kAppendixCTheorem), expected);
}

TEST(Parse, AsciiAliases) {
  EXPECT_EQ(parse("p1 -> p1 \\/ p2"), parse("p1 → p1 ∨ p2"));
  EXPECT_EQ(parse("p1 /\\ p2 -> False"), parse("(p1 ∧ p2) → False"));
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(parse("p1 → p2 → p1"), Proposition::imp(p1, Proposition::imp(p2, p1)));
  EXPECT_EQ(parse("p1 ∧ p2 ∨ p1"), Proposition::disj(Proposition::conj(p1, p2), p1));
  EXPECT_EQ(parse("p1 ∨ p2 ∨ p1"), Proposition::disj(p1, Proposition::disj(p2, p1)));
  EXPECT_EQ(parse("p1 ∧ p2 ∧ p1"), Proposition::conj(p1, Proposition::conj(p2, p1)));
}

TEST(Parse, ErrorsCarryOffsets) {
  try {
    parse("p1 → (p2 ∨ ");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 15u);
  }
  try {
    parse("p1 ∧ q");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
  EXPECT_THROW(parse("(p1"), ParseError);
  EXPECT_THROW(parse("p1 p2"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("p0"), ParseError);
}

TEST(Parse, AtomBound) {
  EXPECT_NO_THROW(parse("p3 → p1", 3));
  try {
    parse("p1 → p4", 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(Render, Examples) {
  EXPECT_EQ(render(Proposition::atom(3)), "p3");
  EXPECT_EQ(render(Proposition::conj(T, F)), "(True ∧ False)");
  EXPECT_EQ(render(Proposition::imp(p1, Proposition::disj(p1, p2))), "(p1 → (p1 ∨ p2))");
  EXPECT_EQ(render(parse(testing::kAppendixCTheorem)),
            "(((p1 ∨ p2) → False) → ((p1 → False) ∧ (p2 → False)))");
}

TEST(Render, ParseRoundTripOnRandomTrees) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Proposition x = testing::random_prop(rng, rng.below(20), 5);
    ASSERT_EQ(parse(render(x)), x) << render(x);
  }
}

TEST(InternalNodes, Examples) {
  EXPECT_EQ(internal_nodes(T), 0u);
  EXPECT_EQ(internal_nodes(Proposition::imp(p1, Proposition::disj(p1, p2))), 2u);
  EXPECT_EQ(internal_nodes(parse(testing::kAppendixCTheorem)), 6u);
}

TEST(Compare, Examples) {
  EXPECT_EQ(compare(T, F), Ordering::Less);
  EXPECT_EQ(compare(F, p1), Ordering::Less);
  EXPECT_EQ(compare(p1, p2), Ordering::Less);
  EXPECT_EQ(compare(Proposition::conj(T, T), Proposition::disj(T, T)), Ordering::Less);
  EXPECT_EQ(compare(Proposition::disj(T, T), Proposition::imp(T, T)), Ordering::Less);
  const Proposition x = parse(testing::kAppendixCTheorem);
  EXPECT_EQ(compare(x, x), Ordering::Equal);
}

TEST(Compare, KeyPriority) {
  // More internal nodes sorts later.
  EXPECT_EQ(compare(Proposition::imp(T, T), Proposition::conj(Proposition::conj(T, T), T)), Ordering::Less);
  // A heavier left child sorts first at equal size.
  EXPECT_EQ(compare(Proposition::imp(Proposition::conj(T, T), T), Proposition::conj(T, Proposition::conj(T, T))),
            Ordering::Less);
  // Top connective before children.
  EXPECT_EQ(compare(Proposition::conj(p2, p2), Proposition::disj(T, T)), Ordering::Less);
  // Left child before right child.
  EXPECT_EQ(compare(Proposition::conj(T, p2), Proposition::conj(F, T)), Ordering::Less);
}

TEST(Compare, TotalOrderProperties) {
  Rng rng(11);
  std::vector<Proposition> sample;
  for (int i = 0; i < 300; ++i) sample.push_back(testing::random_prop(rng, rng.below(4), 2));
  for (const auto& a : sample) {
    for (const auto& b : sample) {
      const Ordering ab = compare(a, b);
      const Ordering ba = compare(b, a);
      ASSERT_EQ(static_cast<int>(ab), -static_cast<int>(ba));
      ASSERT_EQ(ab == Ordering::Equal, a == b);
    }
  }
  // Transitivity on the sorted sequence.
  std::sort(sample.begin(), sample.end(), PropositionLess{});
  for (std::size_t i = 0; i + 1 < sample.size(); ++i) {
    for (std::size_t j = i + 1; j < sample.size(); ++j) {
      ASSERT_NE(compare(sample[i], sample[j]), Ordering::Greater);
    }
  }
}

TEST(Hash, EqualTreesHashEqual) {
  EXPECT_EQ(parse("p1 → p2").hash(), Proposition::imp(p1, p2).hash());
  EXPECT_NE(Proposition::imp(p1, p2), Proposition::imp(p2, p1));
}

}  // namespace
}  // namespace propl
