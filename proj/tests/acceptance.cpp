// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "propl/propl.hpp"

namespace {

using namespace propl;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string read_data(const std::string& name) {
  std::ifstream in(std::string(PROPL_TEST_DATA) + "/" + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Every proposition with exactly n connectives over atoms p1..pp, by
// direct recursion over the grammar.
std::vector<Proposition> enumerate_asts(std::uint32_t n, std::uint32_t p) {
  std::vector<Proposition> out;
  if (n == 0) {
    out.push_back(Proposition::top());
    out.push_back(Proposition::bot());
    for (std::uint32_t i = 1; i <= p; ++i) out.push_back(Proposition::atom(i));
    return out;
  }
  for (std::uint32_t left = 0; left < n; ++left) {
    const auto ls = enumerate_asts(left, p);
    const auto rs = enumerate_asts(n - 1 - left, p);
    for (const auto& l : ls) {
      for (const auto& r : rs) {
        out.push_back(Proposition::conj(l, r));
        out.push_back(Proposition::disj(l, r));
        out.push_back(Proposition::imp(l, r));
      }
    }
  }
  return out;
}

Verdict codec_bijection() {
  std::size_t checked = 0;
  std::size_t bad = 0;
  for (std::uint32_t n = 0; n <= 3; ++n) {
    for (std::uint32_t p = 1; p <= 2; ++p) {
      const CodecParams params{n, p};
      const auto total = count_propositions(params).convert_to<std::uint64_t>();
      std::set<std::string> seen;
      for (std::uint64_t i = 0; i < total; ++i) {
        const PropositionId id{Natural(i)};
        const Proposition prop = decode(id, params);
        bad += !(encode(prop, params) == id);
        bad += !seen.insert(render(prop)).second;
        ++checked;
      }
    }
  }
  const CodecParams big{16, 5};
  for (const auto& id : sample_uniform_ids(big, 1, 10000)) {
    bad += !(encode(decode(id, big), big) == id);
    ++checked;
  }
  return {bad == 0, fmt("%zu ids round-tripped, %zu mismatches", checked, bad)};
}

Verdict counting() {
  std::size_t bad = 0;
  for (std::uint32_t n = 0; n <= 2; ++n) {
    for (std::uint32_t p = 1; p <= 3; ++p) {
      bad += count_propositions({n, p}) != Natural(enumerate_asts(n, p).size());
    }
  }
  const std::vector<int> small{1, 1, 2, 5, 14};
  for (std::size_t k = 0; k < small.size(); ++k) bad += catalan(k) != small[k];
  bad += catalan(16) != Natural(35357670);
  return {bad == 0, fmt("%zu mismatches against enumeration and Catalan values", bad)};
}

Verdict kernel_fidelity() {
  const Proposition thm1 = parse("p1 → p1 ∨ p2");
  const LeanScript s1 = parse_lean_script(read_data("theorem_1.script"), &thm1);
  const bool ok1 = check_script(thm1, s1.tactics).ok;

  const LeanScript c = parse_lean_script(read_data("appendix_c.lean"));
  const bool ok_c = check_script(c.theorem, c.tactics).ok;

  const LeanScript back = parse_lean_script(read_data("theorem_1_backtracked.script"), &thm1);
  const ScriptCheck b = check_script(thm1, back.tactics);
  const bool back_fails = !b.ok && b.failure_index == std::size_t{2};

  // Same tactic lines with the same indentation as the listing.
  const auto body = [](const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    bool after_theorem = false;
    for (std::string line; std::getline(in, line);) {
      const std::string_view t = detail::trim(line);
      if (t.empty() || t.substr(0, 2) == "--") continue;
      if (after_theorem) lines.push_back(line.substr(0, line.find_last_not_of(" \t") + 1));
      if (t.substr(0, 7) == "theorem") after_theorem = true;
    }
    return lines;
  };
  const bool structure = body(render_lean(c.theorem, c.tactics, 5)) == body(read_data("appendix_c.lean"));
  return {ok1 && ok_c && back_fails && structure,
          fmt("theorem_1 %s, appendix C %s, backtracked variant %s, emitted structure %s", ok1 ? "checks" : "FAILS",
              ok_c ? "checks" : "FAILS", back_fails ? "fails at tactic 3" : "WRONG",
              structure ? "matches" : "DIFFERS")};
}

struct SampleRun {
  Proposition theorem = Proposition::top();
  bool oracle = false;
  FpsResult fps;
};

std::vector<SampleRun> sample_runs() {
  const CodecParams params{16, 5};
  const auto props = sample_uniform(params, 2024, 5000);
  return parallel_map(props.size(), default_jobs(), [&](std::size_t i) {
    return SampleRun{props[i], decide_oracle(props[i]), fps_search(props[i], derive_seed(7, i))};
  });
}

Verdict fps_soundness(const std::vector<SampleRun>& runs) {
  std::size_t proved = 0;
  std::size_t rejected = 0;
  std::size_t unsound = 0;
  for (const auto& r : runs) {
    if (!r.fps.proved()) continue;
    ++proved;
    rejected += !check_script(r.theorem, strip(*r.fps.trace)).ok;
    unsound += !r.oracle;
  }
  return {rejected == 0 && unsound == 0,
          fmt("%zu of %zu proved; %zu stripped proofs rejected by the kernel, %zu proofs of oracle-rejected theorems",
              proved, runs.size(), rejected, unsound)};
}

Verdict fps_completeness(const std::vector<SampleRun>& runs) {
  std::size_t provable = 0;
  std::size_t missed = 0;
  for (const auto& r : runs) {
    if (!r.oracle) continue;
    ++provable;
    missed += !r.fps.proved();
  }
  const double rate = provable ? double(missed) / double(provable) : 1.0;
  return {provable > 0 && rate <= 0.005,
          fmt("%zu of %zu oracle-provable theorems missed (%.3f%%, bound 0.5%%)", missed, provable, 100 * rate)};
}

Verdict trace_protocol(const std::vector<SampleRun>& runs) {
  std::size_t traces = 0;
  std::size_t backtracks = 0;
  std::size_t bad = 0;
  const auto check_trace = [&](const Proposition& thm, const SearchTrace& t) {
    ++traces;
    std::set<std::size_t> seen{0};
    for (const auto& s : t.steps) {
      if (const auto* a = std::get_if<step::Apply>(&s)) seen.insert(a->to);
      if (const auto* b = std::get_if<step::Backtrack>(&s)) {
        ++backtracks;
        const auto parsed = parse_backtrack(backtrack_line(b->to, b->from));
        bad += !parsed || parsed->to != b->to || parsed->from != b->from || b->to >= b->from || !seen.count(b->to);
      }
    }
    const std::string text = trace_to_text(t);
    try {
      const SearchTrace back = text_to_trace(text, thm);
      bad += !(back == t) || trace_to_text(back) != text;
    } catch (const TraceFormatError&) {
      ++bad;
    }
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (!r.fps.proved()) continue;
    check_trace(r.theorem, *r.fps.trace);
    if (i % 10 == 0) {
      for (const auto& t : generate_diverse(r.theorem, 10, derive_seed(11, i))) check_trace(r.theorem, t);
    }
  }
  return {bad == 0, fmt("%zu traces, %zu backtrack instructions, %zu violations", traces, backtracks, bad)};
}

std::size_t linear_words(const FpsResult& r) { return word_length(trace_to_text(stripped_trace(*r.trace))); }

// Sampled theorems whose proofs without trial-and-error are exactly
// `words` long.
std::optional<Proposition> theorem_with_proof_words(std::size_t words) {
  FpsConfig fixed;
  fixed.randomize = false;
  for (std::uint32_t n = 20; n <= 80; n += 2) {
    for (const auto& thm : sample_uniform({n, 5}, n, 3000)) {
      const auto r = fps_search(thm, 0, fixed);
      if (r.proved() && linear_words(r) == words) return thm;
    }
  }
  return std::nullopt;
}

Verdict harness_accounting(const std::vector<SampleRun>& runs) {
  // Oracle DFS: limits lifted so that only the accounting is measured.
  DfsConfig open;
  open.step_limit = 1 << 20;
  open.word_limit = 1 << 30;
  std::size_t provable = 0;
  std::size_t dfs_bad = 0;
  std::size_t tae_bad = 0;
  FpsConfig fixed;
  fixed.randomize = false;
  for (const auto& r : runs) {
    if (!r.fps.proved()) continue;
    ++provable;
    const auto det = fps_search(r.theorem, 0, fixed);
    OracleGenerator oracle;
    const auto o = run_dfs(r.theorem, oracle, open);
    dfs_bad += !det.proved() || !o.success || o.n_lean != strip(*det.trace).size();

    TraceReplayGenerator replay(*r.fps.trace);
    const auto t = run_tae(r.theorem, replay, {1 << 30});
    const std::size_t applies = r.fps.trace->steps.size() - r.fps.trace->backtracks() - 1;
    tae_bad += !t.success || t.n_lean != applies || t.steps != applies + r.fps.trace->backtracks();
  }

  // Step limit: 64 failing candidates then the two proof tactics.
  const Proposition id = parse("p1 → p1");
  const auto steps_with = [&](std::size_t failing) {
    std::vector<std::string> root;
    for (std::size_t i = 0; i < failing; ++i) root.push_back("exact h" + std::to_string(100 + i));
    root.push_back("intro h1");
    ScriptedGenerator gen({root, {"exact h1"}});
    DfsConfig c;
    c.n_sampled = failing + 1;
    return run_dfs(id, gen, c);
  };
  const auto at65 = steps_with(63);
  const auto at66 = steps_with(64);
  const bool step_ok = at65.success && at65.steps == 65 && !at66.success &&
                       at66.failure_reason == FailureReason::StepLimit && at66.steps == 65;

  // Word limit under the default 1500, for both regimes.
  bool word_ok = false;
  const auto w1500 = theorem_with_proof_words(1500);
  const auto w1501 = theorem_with_proof_words(1501);
  if (w1500 && w1501) {
    OracleGenerator a;
    OracleGenerator b;
    const auto fits = run_dfs(*w1500, a, {5, 1 << 20, 1500});
    const auto over = run_dfs(*w1501, b, {5, 1 << 20, 1500});
    const auto replay_of = [&](const Proposition& thm) {
      return TraceReplayGenerator(stripped_trace(*fps_search(thm, 0, fixed).trace));
    };
    auto ra = replay_of(*w1500);
    auto rb = replay_of(*w1501);
    const auto tae_fits = run_tae(*w1500, ra);
    const auto tae_over = run_tae(*w1501, rb);
    word_ok = fits.success && over.failure_reason == FailureReason::WordLimit && tae_fits.success &&
              tae_over.failure_reason == FailureReason::WordLimit;
  }
  return {dfs_bad == 0 && tae_bad == 0 && step_ok && word_ok,
          fmt("%zu fps-provable: %zu oracle DFS mismatches, %zu TAE replay mismatches; step limit %s, word "
              "limit %s",
              provable, dfs_bad, tae_bad, step_ok ? "at 66" : "WRONG", word_ok ? "at 1501" : "WRONG")};
}

Verdict tradeoff_shape() {
  CorpusConfig c;
  c.count = 6000;
  c.n = 16;
  c.p = 5;
  c.k = 10;
  c.seed = 88;
  c.jobs = default_jobs();
  SplitSpec spec;
  spec.sizes.in_dist_test = 200;
  spec.sizes.ood_test = 200;
  spec.seed = 88;
  const Split split = quantile_split(build_corpus(c), spec);
  std::vector<Proposition> suite;
  for (const auto& r : split.ood_test) suite.push_back(parse(r.statement));

  const std::vector<double> rates{0, 0.1, 0.3};
  const std::vector<std::size_t> widths{2, 5, 10};
  std::map<std::pair<std::size_t, std::size_t>, double> mean;
  std::string table;
  std::size_t word_aborts_clean = 0;
  std::size_t word_aborts_noisy = 0;
  for (std::size_t e = 0; e < rates.size(); ++e) {
    for (std::size_t s = 0; s < widths.size(); ++s) {
      DfsConfig d;
      d.n_sampled = widths[s];
      const auto make = [&](std::size_t i) -> std::unique_ptr<TacticGenerator> {
        return std::make_unique<PerturbedOracleGenerator>(rates[e], derive_seed(89, i));
      };
      const Metrics m = aggregate(run_many(suite, make, Regime::Dfs, d, {}, default_jobs()));
      mean[{e, s}] = m.mean_n_lean();
      const auto w = m.failures.find(FailureReason::WordLimit);
      const std::size_t aborts = w == m.failures.end() ? 0 : w->second;
      if (e == 0 && s == widths.size() - 1) word_aborts_clean = aborts;
      if (e == rates.size() - 1 && s == widths.size() - 1) word_aborts_noisy = aborts;
      table += fmt(" %.2f", m.mean_n_lean());
    }
    table += " |";
  }
  bool monotone = suite.size() == 200;
  for (std::size_t e = 0; e < rates.size(); ++e) {
    for (std::size_t s = 0; s < widths.size(); ++s) {
      if (e + 1 < rates.size()) monotone &= mean[{e, s}] <= mean[{e + 1, s}];
      if (s + 1 < widths.size()) monotone &= mean[{e, s}] <= mean[{e, s + 1}];
    }
  }
  return {monotone, fmt("%zu OOD theorems; mean n_lean by error rate (rows) and n_sampled 2/5/10:%s word-limit "
                        "aborts at n_sampled 10: %zu at error 0, %zu at error 0.3",
                        suite.size(), table.c_str(), word_aborts_clean, word_aborts_noisy)};
}

Verdict dataset_pipeline() {
  CorpusConfig c;
  c.count = 2000;
  c.n = 8;
  c.p = 3;
  c.k = 10;
  c.seed = 5;
  c.jobs = default_jobs();
  const auto first = build_corpus(c);
  const auto second = build_corpus(c);
  std::ostringstream a;
  std::ostringstream b;
  write_jsonl(a, first);
  write_jsonl(b, second);
  const bool identical = a.str() == b.str();

  SplitSpec spec;
  spec.sizes.in_dist_test = 100;
  spec.sizes.ood_test = std::nullopt;
  spec.seed = 5;
  const Split s = quantile_split(first, spec);
  std::set<std::string> ids;
  std::size_t bad = 0;
  for (const auto* part : {&s.train, &s.in_dist_test, &s.ood_test}) {
    for (const auto& r : *part) bad += !ids.insert(r.id).second;
  }
  for (const auto* part : {&s.train, &s.in_dist_test}) {
    for (const auto& r : *part) {
      bad += !(r.len_no_tae <= s.train_threshold.no_tae && r.len_tae_avg <= s.train_threshold.tae);
    }
  }
  for (const auto& r : s.ood_test) bad += !(r.len_no_tae > s.ood_threshold.no_tae && r.len_tae_avg > s.ood_threshold.tae);

  const auto path = std::filesystem::temp_directory_path() / "propl_acceptance_corpus.jsonl";
  export_jsonl(first, path.string());
  const auto imported = import_jsonl(path.string());
  std::filesystem::remove(path);
  std::size_t rechecked = 0;
  std::size_t rejected = imported == first ? 0 : 1;
  for (const auto& r : imported) {
    if (!r.provable) continue;
    std::vector<Tactic> proof;
    for (const auto& line : r.stripped_proof) proof.push_back(parse_tactic(line));
    rejected += !check_script(parse(r.statement), proof).ok;
    ++rechecked;
  }
  return {identical && bad == 0 && rejected == 0 && !s.train.empty() && !s.ood_test.empty(),
          fmt("JSONL %s across runs; split %zu/%zu/%zu with %zu rule violations; %zu of %zu imported proofs rejected",
              identical ? "identical" : "DIFFERS", s.train.size(), s.in_dist_test.size(), s.ood_test.size(), bad,
              rejected, rechecked)};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int number, const char* name, const std::function<Verdict()>& criterion) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criterion();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("%s %d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", number, name, v.detail.c_str(), secs);
    std::fflush(stdout);
  };
  report(1, "codec bijection", codec_bijection);
  report(2, "counting", counting);
  report(3, "kernel fidelity", kernel_fidelity);
  std::vector<SampleRun> runs;
  report(4, "fps soundness", [&] {
    runs = sample_runs();
    return fps_soundness(runs);
  });
  report(5, "fps near-completeness", [&] { return fps_completeness(runs); });
  report(6, "trace protocol", [&] { return trace_protocol(runs); });
  report(7, "harness accounting", [&] { return harness_accounting(runs); });
  report(8, "harness trade-off shape", tradeoff_shape);
  report(9, "dataset pipeline", dataset_pipeline);
  return failures == 0 ? 0 : 1;
}
