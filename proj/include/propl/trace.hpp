#pragma once

// Search traces: the steps of a proof search including abandoned branches,
// and their canonical text form.
//
//   state 0:
//   ⊢ (p1 → (p1 ∨ p2))
//   tactic: intro h1
//   state 1:
//   ...
//   no solution, return to state 1 [that leads to state 2]
//
// A tactic line always applies to the most recent state, or to the state
// named by the preceding backtrack line. A terminal state renders as
// `no goals`.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "propl/error.hpp"
#include "propl/kernel.hpp"
#include "propl/proposition.hpp"

namespace propl {

namespace step {

struct Apply {
  std::uint64_t from = 0;
  Tactic tactic;
  std::uint64_t to = 0;
  friend bool operator==(const Apply&, const Apply&) = default;
};
struct Backtrack {
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  friend bool operator==(const Backtrack&, const Backtrack&) = default;
};
struct Qed {
  std::uint64_t state = 0;
  friend bool operator==(const Qed&, const Qed&) = default;
};

}  // namespace step

using TraceStep = std::variant<step::Apply, step::Backtrack, step::Qed>;

struct SearchTrace {
  Proposition theorem;
  std::vector<TraceStep> steps;
  std::map<std::uint64_t, ProofState> states;

  bool successful() const { return !steps.empty() && std::holds_alternative<step::Qed>(steps.back()); }

  std::size_t backtracks() const {
    std::size_t n = 0;
    for (const auto& s : steps) n += std::holds_alternative<step::Backtrack>(s);
    return n;
  }

  friend bool operator==(const SearchTrace&, const SearchTrace&) = default;
};

inline std::string backtrack_line(std::uint64_t to, std::uint64_t from) {
  return "no solution, return to state " + std::to_string(to) + " [that leads to state " + std::to_string(from) +
         "]";
}

/// Parses `no solution, return to state <j> [that leads to state <k>]`.
inline std::optional<step::Backtrack> parse_backtrack(std::string_view line) {
  line = detail::trim(line);
  constexpr std::string_view kHead = "no solution, return to state ";
  constexpr std::string_view kMid = " [that leads to state ";
  if (line.substr(0, kHead.size()) != kHead || line.empty() || line.back() != ']') return std::nullopt;
  line.remove_prefix(kHead.size());
  line.remove_suffix(1);
  const std::size_t mid = line.find(kMid);
  if (mid == std::string_view::npos) return std::nullopt;
  const auto number = [](std::string_view s) -> std::optional<std::uint64_t> {
    if (s.empty() || s.size() > 18) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  };
  const auto to = number(line.substr(0, mid));
  const auto from = number(line.substr(mid + kMid.size()));
  if (!to || !from) return std::nullopt;
  return step::Backtrack{*from, *to};
}

inline std::string state_block(std::uint64_t id, const ProofState& s) {
  return "state " + std::to_string(id) + ":\n" + render_state(s);
}

inline std::string trace_to_text(const SearchTrace& trace) {
  std::string out = state_block(0, trace.states.at(0));
  for (const auto& s : trace.steps) {
    if (const auto* a = std::get_if<step::Apply>(&s)) {
      out += "tactic: " + render_tactic(a->tactic) + '\n';
      out += state_block(a->to, trace.states.at(a->to));
    } else if (const auto* b = std::get_if<step::Backtrack>(&s)) {
      out += backtrack_line(b->to, b->from) + '\n';
    }
  }
  return out;
}

/// Number of words after splitting on ASCII whitespace.
inline std::size_t word_length(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

/// Rebuilds a trace from its text, replaying every tactic through the kernel
/// and requiring each rendered state to match exactly.
inline SearchTrace text_to_trace(std::string_view text, const Proposition& theorem) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  std::size_t i = 0;
  const auto fail = [&](const std::string& what) {
    return TraceFormatError("line " + std::to_string(i + 1) + ": " + what);
  };
  // Reads `state <id>:` plus its rendered goals; returns the block text.
  const auto read_block = [&](std::uint64_t& id) {
    if (i >= lines.size()) throw fail("expected a state header");
    const std::string& head = lines[i];
    if (head.size() < 8 || head.substr(0, 6) != "state " || head.back() != ':') throw fail("expected a state header");
    const std::string digits = head.substr(6, head.size() - 7);
    if (digits.empty() || digits.size() > 18 || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw fail("bad state number");
    }
    id = std::stoull(digits);
    std::string body;
    for (++i; i < lines.size(); ++i) {
      const std::string& l = lines[i];
      if (l.substr(0, 8) == "tactic: " || l.substr(0, 12) == "no solution," || l.substr(0, 6) == "state ") break;
      body += l + '\n';
    }
    return body;
  };

  SearchTrace trace{theorem, {}, {}};
  std::uint64_t id = 0;
  const ProofState start = initial_state(theorem);
  if (read_block(id) != render_state(start) || id != 0) throw fail("initial state does not match the theorem");
  trace.states.emplace(0, start);
  std::uint64_t cursor = 0;
  std::uint64_t latest = 0;
  bool done = false;

  while (i < lines.size()) {
    const std::string& line = lines[i];
    if (done) throw fail("text after the proof was complete");
    if (auto b = parse_backtrack(line)) {
      if (b->from != cursor) throw fail("backtrack does not leave the current state");
      if (b->to >= b->from || !trace.states.count(b->to)) throw fail("backtrack to an unknown or later state");
      if (trace.states.at(b->to).terminal()) throw fail("backtrack to a terminal state");
      trace.steps.emplace_back(*b);
      cursor = b->to;
      ++i;
      continue;
    }
    if (line.substr(0, 8) != "tactic: ") throw fail("expected a tactic or backtrack line");
    Tactic t;
    try {
      t = parse_tactic(std::string_view(line).substr(8));
    } catch (const GrammarError& e) {
      throw fail(e.what());
    }
    ++i;
    const std::string body = read_block(id);
    if (id <= latest || trace.states.count(id)) throw fail("state numbers must increase");
    TacticResult r = apply_tactic(trace.states.at(cursor), t, id);
    if (const auto* f = std::get_if<TacticFailure>(&r)) throw fail("tactic fails: " + f->message);
    ProofState next;
    if (auto* s = std::get_if<ProofState>(&r)) {
      next = std::move(*s);
    } else {
      next.next_hyp_index = trace.states.at(cursor).next_hyp_index;
      next.state_id = id;
      done = true;
    }
    if (render_state(next) != body) throw fail("state " + std::to_string(id) + " does not match the kernel");
    trace.steps.emplace_back(step::Apply{cursor, std::move(t), id});
    trace.states.emplace(id, std::move(next));
    cursor = latest = id;
  }
  if (done) trace.steps.emplace_back(step::Qed{cursor});
  return trace;
}

}  // namespace propl
