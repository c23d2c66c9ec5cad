#pragma once

// Lean 4 rendering of checked tactic scripts, and the reverse: reading a
// theorem plus its tactic lines back out of Lean-style text.

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "propl/error.hpp"
#include "propl/kernel.hpp"
#include "propl/proposition.hpp"

namespace propl {

/// Emits a Lean file: `variable (p1 .. pP : Prop)`, the theorem line, and
/// the tactics indented two spaces per open `have` block. Throws if the
/// script does not check.
inline std::string render_lean(const Proposition& theorem, const std::vector<Tactic>& tactics, std::uint32_t p,
                               std::string_view name = "thm") {
  const ScriptCheck check = check_script(theorem, tactics);
  if (!check.ok) throw Error("render_lean: script does not prove the theorem");

  std::string out = "variable (";
  for (std::uint32_t i = 1; i <= p; ++i) {
    if (i > 1) out += ' ';
    out += 'p' + std::to_string(i);
  }
  out += " : Prop)\n";
  out += "theorem " + std::string(name) + " : " + render(theorem) + " := by\n";

  // Indentation level of each open goal, parallel to state.goals.
  ProofState state = initial_state(theorem);
  std::vector<std::size_t> depth{1};
  for (const Tactic& t : tactics) {
    const std::size_t d = depth.front();
    out += std::string(2 * d, ' ') + render_tactic(t) + '\n';
    TacticResult r = apply_tactic(state, t);
    if (is_complete(r)) break;
    ProofState next = std::get<ProofState>(std::move(r));
    const std::size_t produced = next.goals.size() + 1 - state.goals.size();
    std::vector<std::size_t> head(produced, d);
    if (std::holds_alternative<tactic::HaveBy>(t)) head.front() = d + 1;
    depth.erase(depth.begin());
    depth.insert(depth.begin(), head.begin(), head.end());
    state = std::move(next);
  }
  return out;
}

struct LeanScript {
  Proposition theorem;
  std::vector<Tactic> tactics;
};

namespace detail {

inline std::string_view strip_comment(std::string_view line) {
  if (auto pos = line.find("--"); pos != std::string_view::npos) line = line.substr(0, pos);
  if (auto pos = line.find('#'); pos != std::string_view::npos) line = line.substr(0, pos);
  return trim(line);
}

}  // namespace detail

/// Reads a script in the style of the emitted Lean text: an optional
/// `variable` line, a `theorem [name...] : <prop> := by` line, then one
/// tactic per line. `--` and `#` comments, blank lines and indentation are
/// ignored. Without a theorem line, `theorem` must be supplied.
inline LeanScript parse_lean_script(std::string_view text, const Proposition* theorem = nullptr) {
  std::vector<Tactic> tactics;
  std::optional<Proposition> stated;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::strip_comment(raw);
    if (line.empty() || line.substr(0, 9) == "variable ") continue;
    if (line.substr(0, 7) == "theorem") {
      const std::size_t colon = line.find(':');
      constexpr std::string_view kBy = ":= by";
      if (colon == std::string_view::npos || line.size() < kBy.size() ||
          line.substr(line.size() - kBy.size()) != kBy || stated) {
        throw GrammarError("malformed theorem line " + std::to_string(line_no));
      }
      const std::string_view body = detail::trim(line.substr(colon + 1, line.size() - kBy.size() - colon - 1));
      stated = parse(body);
      continue;
    }
    try {
      tactics.push_back(parse_tactic(line));
    } catch (const GrammarError& e) {
      throw GrammarError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!stated) {
    if (!theorem) throw GrammarError("script has no theorem line");
    stated = *theorem;
  } else if (theorem && !(*stated == *theorem)) {
    throw GrammarError("script states a different theorem");
  }
  return LeanScript{*stated, std::move(tactics)};
}

}  // namespace propl
