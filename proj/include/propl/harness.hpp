#pragma once

// Two inference regimes driven by a tactic generator and checked by the
// kernel.
//
// run_dfs: at every new state ask for n_sampled candidates, drop duplicates
// and ungrammatical ones, and try them depth-first; a state whose
// candidates all fail returns to its parent.
//
// run_tae: keep one history text with every state, tactic and backtrack so
// far; take only the generator's first emission. A backtrack line moves the
// cursor to an earlier state without consulting the kernel.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "propl/error.hpp"
#include "propl/fps.hpp"
#include "propl/kernel.hpp"
#include "propl/parallel.hpp"
#include "propl/proposition.hpp"
#include "propl/rng.hpp"
#include "propl/trace.hpp"

namespace propl {

enum class FailureReason : std::uint8_t { None, LeanError, WordLimit, StepLimit, Exhausted, NoOutput };

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "None";
    case FailureReason::LeanError: return "LeanError";
    case FailureReason::WordLimit: return "WordLimit";
    case FailureReason::StepLimit: return "StepLimit";
    case FailureReason::Exhausted: return "Exhausted";
    case FailureReason::NoOutput: return "NoOutput";
  }
  return "?";
}

struct SearchOutcome {
  bool success = false;
  /// Kernel tactic checks.
  std::size_t n_lean = 0;
  /// DFS: kernel checks. TAE: generator emissions acted on, backtracks
  /// included.
  std::size_t steps = 0;
  FailureReason failure_reason = FailureReason::None;
  /// On success, the tactics from the theorem to the closed proof.
  std::vector<Tactic> proof;
};

struct DfsConfig {
  std::size_t n_sampled = 5;
  std::size_t step_limit = 65;
  std::size_t word_limit = 1500;
};

struct TaeConfig {
  std::size_t word_limit = 1500;
};

/// Called immediately before every kernel check.
using CheckObserver = std::function<void(const ProofState&, const Tactic&)>;

// ---------------------------------------------------------------------------
// Generators

struct GenerationQuery {
  const Proposition& theorem;
  /// The text a language model would be prompted with.
  std::string_view history;
  /// Structured view of the current state and the tactics leading to it.
  const ProofState& state;
  const std::vector<Tactic>& path;
};

class TacticGenerator {
 public:
  virtual ~TacticGenerator() = default;
  /// Up to `m` candidate tactic strings (or backtrack lines, under TAE).
  virtual std::vector<std::string> generate(const GenerationQuery& q, std::size_t m) = 0;
  /// Independent copy with its own seed, for parallel runs.
  virtual std::unique_ptr<TacticGenerator> clone(std::uint64_t seed) const = 0;
};

/// Emits the next tactic of a known proof while the search stays on it, and
/// otherwise the first tactic of a fresh focused search from the current
/// state. With no proof supplied, one is found for the theorem on first use.
class OracleGenerator : public TacticGenerator {
 public:
  OracleGenerator() = default;
  explicit OracleGenerator(std::vector<Tactic> proof) : proof_(std::move(proof)) {}

  std::vector<std::string> generate(const GenerationQuery& q, std::size_t m) override {
    if (m == 0) return {};
    auto t = oracle_tactic(q);
    if (!t) return {};
    return {render_tactic(*t)};
  }

  std::unique_ptr<TacticGenerator> clone(std::uint64_t) const override {
    return std::make_unique<OracleGenerator>(*this);
  }

  std::optional<Tactic> oracle_tactic(const GenerationQuery& q) {
    if (q.state.terminal()) return std::nullopt;
    FpsConfig fixed;
    fixed.randomize = false;
    if (!proof_) {
      FpsResult r = fps_search(q.theorem, 0, fixed);
      proof_ = r.proved() ? strip(*r.trace) : std::vector<Tactic>{};
    }
    const auto& proof = *proof_;
    if (q.path.size() < proof.size() && std::equal(q.path.begin(), q.path.end(), proof.begin())) {
      return proof[q.path.size()];
    }
    FpsResult r = fps_search_from(q.state, q.theorem, 0, fixed);
    if (!r.proved()) return std::nullopt;
    return strip(*r.trace).front();
  }

 private:
  std::optional<std::vector<Tactic>> proof_;
};

/// Uniformly shuffled applicable tactics.
class RandomGenerator : public TacticGenerator {
 public:
  explicit RandomGenerator(std::uint64_t seed) : rng_(seed) {}

  std::vector<std::string> generate(const GenerationQuery& q, std::size_t m) override {
    if (q.state.terminal()) return {};
    auto options = enumerate_tactics(q.state);
    rng_.shuffle(options);
    options.resize(std::min(options.size(), m));
    std::vector<std::string> out;
    for (const auto& t : options) out.push_back(render_tactic(t));
    return out;
  }

  std::unique_ptr<TacticGenerator> clone(std::uint64_t seed) const override {
    return std::make_unique<RandomGenerator>(seed);
  }

 private:
  Rng rng_;
};

/// The oracle's tactic in each of the m slots, replaced with probability
/// `error_rate` by a uniformly random applicable tactic.
class PerturbedOracleGenerator : public TacticGenerator {
 public:
  PerturbedOracleGenerator(double error_rate, std::uint64_t seed) : error_rate_(error_rate), rng_(seed) {
    if (!(error_rate >= 0 && error_rate <= 1)) throw Error("error rate must be in [0, 1]");
  }

  std::vector<std::string> generate(const GenerationQuery& q, std::size_t m) override {
    if (q.state.terminal()) return {};
    std::optional<std::string> base;
    std::vector<Tactic> options;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < m; ++i) {
      if (rng_.bernoulli(error_rate_)) {
        if (options.empty()) options = enumerate_tactics(q.state);
        if (!options.empty()) out.push_back(render_tactic(options[rng_.below(options.size())]));
      } else {
        if (!base) {
          auto t = oracle_.oracle_tactic(q);
          base = t ? render_tactic(*t) : std::string();
        }
        if (!base->empty()) out.push_back(*base);
      }
    }
    return out;
  }

  std::unique_ptr<TacticGenerator> clone(std::uint64_t seed) const override {
    return std::make_unique<PerturbedOracleGenerator>(error_rate_, seed);
  }

 private:
  double error_rate_;
  Rng rng_;
  OracleGenerator oracle_;
};

/// Canned responses: call i returns responses[i]; later calls return the
/// last response again if `repeat_last`, else nothing.
class ScriptedGenerator : public TacticGenerator {
 public:
  explicit ScriptedGenerator(std::vector<std::vector<std::string>> responses, bool repeat_last = false)
      : responses_(std::move(responses)), repeat_last_(repeat_last) {}

  std::vector<std::string> generate(const GenerationQuery&, std::size_t m) override {
    std::vector<std::string> out;
    if (calls_ < responses_.size()) {
      out = responses_[calls_];
    } else if (repeat_last_ && !responses_.empty()) {
      out = responses_.back();
    }
    ++calls_;
    if (out.size() > m) out.resize(m);
    return out;
  }

  std::unique_ptr<TacticGenerator> clone(std::uint64_t) const override {
    return std::make_unique<ScriptedGenerator>(responses_, repeat_last_);
  }

 private:
  std::vector<std::vector<std::string>> responses_;
  bool repeat_last_;
  std::size_t calls_ = 0;
};

/// Replays a recorded trial-and-error trace: the emission for a history is
/// the trace line following the last tactic or backtrack line it contains.
class TraceReplayGenerator : public TacticGenerator {
 public:
  explicit TraceReplayGenerator(const SearchTrace& trace) {
    for (const auto& s : trace.steps) {
      if (const auto* a = std::get_if<step::Apply>(&s)) {
        lines_.push_back(render_tactic(a->tactic));
      } else if (const auto* b = std::get_if<step::Backtrack>(&s)) {
        lines_.push_back(backtrack_line(b->to, b->from));
      }
    }
  }

  std::vector<std::string> generate(const GenerationQuery& q, std::size_t m) override {
    std::size_t done = 0;
    std::istringstream in{std::string(q.history)};
    for (std::string line; std::getline(in, line);) {
      done += line.rfind("tactic: ", 0) == 0 || line.rfind("no solution,", 0) == 0;
    }
    if (m == 0 || done >= lines_.size()) return {};
    return {lines_[done]};
  }

  std::unique_ptr<TacticGenerator> clone(std::uint64_t) const override {
    return std::make_unique<TraceReplayGenerator>(*this);
  }

 private:
  std::vector<std::string> lines_;
};

// ---------------------------------------------------------------------------
// DFS

namespace detail {

inline std::vector<Tactic> usable_candidates(const std::vector<std::string>& raw) {
  std::vector<std::string> seen;
  std::vector<Tactic> out;
  for (const auto& text : raw) {
    const std::string key(trim(text));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    if (auto t = try_parse_tactic(key)) out.push_back(std::move(*t));
  }
  return out;
}

}  // namespace detail

inline SearchOutcome run_dfs(const Proposition& theorem, TacticGenerator& gen, const DfsConfig& config = {},
                             const CheckObserver& observe = {}) {
  if (config.n_sampled < 1) throw Error("n_sampled must be at least 1");
  struct Frame {
    ProofState state;
    std::vector<Tactic> candidates;
    std::size_t next = 0;
    /// Words of the linear path text up to and including this state.
    std::size_t words = 0;
  };
  SearchOutcome out;
  std::vector<Frame> stack;
  std::vector<Tactic> path;
  std::string text;  // linear path text, rebuilt as the path changes
  std::vector<std::size_t> text_len;

  const auto fail = [&](FailureReason why) {
    out.failure_reason = why;
    return out;
  };
  // Enters a new state at depth path.size(); false if the word limit is hit.
  const auto enter = [&](ProofState s) {
    const std::size_t depth = path.size();
    std::string block;
    if (depth > 0) block = "tactic: " + render_tactic(path.back()) + '\n';
    block += state_block(depth, s);
    const std::size_t words = (stack.empty() ? 0 : stack.back().words) + word_length(block);
    if (words > config.word_limit) return false;
    text_len.push_back(text.size());
    text += block;
    Frame f{std::move(s), {}, 0, words};
    if (!f.state.terminal()) {
      const GenerationQuery q{theorem, text, f.state, path};
      f.candidates = detail::usable_candidates(gen.generate(q, config.n_sampled));
    }
    stack.push_back(std::move(f));
    return true;
  };

  if (!enter(initial_state(theorem))) return fail(FailureReason::WordLimit);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next == f.candidates.size()) {
      stack.pop_back();
      text.resize(text_len.back());
      text_len.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const Tactic t = f.candidates[f.next++];
    if (out.steps >= config.step_limit) return fail(FailureReason::StepLimit);
    ++out.steps;
    ++out.n_lean;
    if (observe) observe(f.state, t);
    TacticResult r = apply_tactic(f.state, t, path.size() + 1);
    if (is_failure(r)) continue;
    path.push_back(t);
    ProofState next = is_complete(r) ? ProofState{{}, f.state.next_hyp_index, path.size()}
                                     : std::get<ProofState>(std::move(r));
    if (!enter(std::move(next))) return fail(FailureReason::WordLimit);
    if (stack.back().state.terminal()) {
      out.success = true;
      out.proof = path;
      return out;
    }
  }
  return fail(FailureReason::Exhausted);
}

// ---------------------------------------------------------------------------
// Trial-and-error

/// History of a trial-and-error session; its text is exactly the trace text
/// format.
class TaeSession {
 public:
  explicit TaeSession(const Proposition& theorem) : theorem_(theorem) {
    states_.emplace(0, initial_state(theorem));
    append(state_block(0, states_.at(0)));
  }

  const std::string& history() const { return history_; }
  std::size_t words() const { return words_; }
  std::uint64_t cursor() const { return cursor_; }
  const ProofState& current() const { return states_.at(cursor_); }

  std::vector<Tactic> path() const {
    std::vector<Tactic> out;
    for (std::uint64_t s = cursor_; s != 0;) {
      const auto& [parent, t] = parents_.at(s);
      out.push_back(t);
      s = parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// Moves to an earlier state; false if the instruction is not well formed.
  bool backtrack(const step::Backtrack& b) {
    if (b.from != cursor_ || b.to >= b.from || !states_.count(b.to) || states_.at(b.to).terminal()) return false;
    append(backtrack_line(b.to, b.from) + '\n');
    cursor_ = b.to;
    return true;
  }

  TacticResult apply(const Tactic& t) {
    const ProofState& from = states_.at(cursor_);
    const std::uint64_t id = next_id_;
    TacticResult r = apply_tactic(from, t, id);
    if (is_failure(r)) return r;
    ProofState next = is_complete(r) ? ProofState{{}, from.next_hyp_index, id} : std::get<ProofState>(r);
    ++next_id_;
    append("tactic: " + render_tactic(t) + '\n' + state_block(id, next));
    parents_.emplace(id, std::make_pair(cursor_, t));
    states_.emplace(id, std::move(next));
    cursor_ = id;
    return r;
  }

 private:
  void append(const std::string& s) {
    history_ += s;
    words_ += word_length(s);
  }

  Proposition theorem_;
  std::map<std::uint64_t, ProofState> states_;
  std::map<std::uint64_t, std::pair<std::uint64_t, Tactic>> parents_;
  std::string history_;
  std::size_t words_ = 0;
  std::uint64_t cursor_ = 0;
  std::uint64_t next_id_ = 1;
};

inline SearchOutcome run_tae(const Proposition& theorem, TacticGenerator& gen, const TaeConfig& config = {},
                             const CheckObserver& observe = {}, std::string* history_out = nullptr) {
  SearchOutcome out;
  TaeSession session(theorem);
  const auto finish = [&](FailureReason why) {
    out.failure_reason = why;
    out.success = why == FailureReason::None;
    if (out.success) out.proof = session.path();
    if (history_out) *history_out = session.history();
    return out;
  };
  for (;;) {
    if (session.words() > config.word_limit) return finish(FailureReason::WordLimit);
    const std::vector<Tactic> path = session.path();
    const GenerationQuery q{theorem, session.history(), session.current(), path};
    const auto emitted = gen.generate(q, 1);
    if (emitted.empty()) return finish(FailureReason::NoOutput);
    const std::string_view line = detail::trim(emitted.front());
    ++out.steps;
    if (line.rfind("no solution", 0) == 0) {
      const auto b = parse_backtrack(line);
      if (!b || !session.backtrack(*b)) return finish(FailureReason::LeanError);
      continue;
    }
    const auto t = try_parse_tactic(line);
    if (!t) return finish(FailureReason::LeanError);
    ++out.n_lean;
    if (observe) observe(session.current(), *t);
    const TacticResult r = session.apply(*t);
    if (is_failure(r)) return finish(FailureReason::LeanError);
    if (is_complete(r)) {
      if (session.words() > config.word_limit) return finish(FailureReason::WordLimit);
      return finish(FailureReason::None);
    }
  }
}

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::size_t total_n_lean = 0;
  std::map<FailureReason, std::size_t> failures;

  double success_rate() const { return runs == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs); }
  double mean_n_lean() const {
    return runs == 0 ? 0.0 : static_cast<double>(total_n_lean) / static_cast<double>(runs);
  }
};

inline Metrics aggregate(const std::vector<SearchOutcome>& outcomes) {
  Metrics m;
  for (const auto& o : outcomes) {
    ++m.runs;
    m.successes += o.success;
    m.total_n_lean += o.n_lean;
    if (!o.success) ++m.failures[o.failure_reason];
  }
  return m;
}

/// Per-theorem CSV: id,success,n_lean,steps,failure_reason.
inline std::string outcomes_csv(const std::vector<std::string>& ids, const std::vector<SearchOutcome>& outcomes) {
  if (ids.size() != outcomes.size()) throw Error("outcomes_csv: ids and outcomes differ in length");
  std::string out = "id,success,n_lean,steps,failure_reason\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& o = outcomes[i];
    out += ids[i] + ',' + (o.success ? "1" : "0") + ',' + std::to_string(o.n_lean) + ',' + std::to_string(o.steps) +
           ',' + std::string(to_string(o.failure_reason)) + '\n';
  }
  return out;
}

inline std::string metrics_summary(const Metrics& m) {
  std::ostringstream s;
  s << "runs " << m.runs << "\nsuccesses " << m.successes << "\nsuccess_rate " << m.success_rate()
    << "\ntotal_n_lean " << m.total_n_lean << "\nmean_n_lean " << m.mean_n_lean() << '\n';
  for (const auto& [why, n] : m.failures) s << "failed " << to_string(why) << ' ' << n << '\n';
  return s.str();
}

/// Generator by name: oracle, random, perturbed (uses error_rate) or
/// replay (a randomized focused-search trace of the theorem; silent if the
/// search finds no proof).
inline std::unique_ptr<TacticGenerator> make_generator(std::string_view name, const Proposition& theorem,
                                                       double error_rate, std::uint64_t seed) {
  if (name == "oracle") return std::make_unique<OracleGenerator>();
  if (name == "random") return std::make_unique<RandomGenerator>(seed);
  if (name == "perturbed") return std::make_unique<PerturbedOracleGenerator>(error_rate, seed);
  if (name == "replay") {
    FpsResult r = fps_search(theorem, seed);
    if (r.proved()) return std::make_unique<TraceReplayGenerator>(*r.trace);
    return std::make_unique<ScriptedGenerator>(std::vector<std::vector<std::string>>{});
  }
  throw Error("unknown generator '" + std::string(name) + "'");
}

enum class Regime : std::uint8_t { Dfs, Tae };

/// Runs every theorem with its own generator from `make_generator(i)`,
/// in parallel; results are in input order.
inline std::vector<SearchOutcome> run_many(
    const std::vector<Proposition>& theorems,
    const std::function<std::unique_ptr<TacticGenerator>(std::size_t)>& make_generator, Regime regime,
    const DfsConfig& dfs, const TaeConfig& tae, std::size_t jobs = 1) {
  return parallel_map(theorems.size(), jobs, [&](std::size_t i) {
    auto gen = make_generator(i);
    return regime == Regime::Dfs ? run_dfs(theorems[i], *gen, dfs) : run_tae(theorems[i], *gen, tae);
  });
}

}  // namespace propl
