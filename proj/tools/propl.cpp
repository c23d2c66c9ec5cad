#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "propl/propl.hpp"

namespace {

using namespace propl;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

/// Input the user got wrong, as opposed to a domain failure.
struct UsageError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write " + out_path);
  out << text;
}

std::string jsonl_text(const std::vector<TheoremRecord>& records) {
  std::ostringstream s;
  write_jsonl(s, records);
  return s.str();
}

std::vector<TheoremRecord> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  return read_jsonl(in);
}

struct Options {
  std::uint32_t n = 16;
  std::uint32_t p = 5;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t k = 10;
  double train_q = 0.66;
  double ood_q = 0.8;
  std::size_t n_sampled = 5;
  std::size_t step_limit = 65;
  std::size_t word_limit = 1500;
  std::string format = "text";
  std::string out;
  std::size_t jobs = 1;
  std::size_t max_states = 10000;

  std::string theorem;
  std::string script;
  std::string trace;
  std::string input;
  std::string id;
  std::string generator = "oracle";
  double error_rate = 0.1;
  bool require_proof = false;
  bool stripped = false;
  std::optional<std::size_t> train_size;
  std::size_t test_size = 1000;
  std::optional<std::size_t> ood_size = 1000;
  bool all_ood = false;
};

FpsConfig fps_config(const Options& o) {
  FpsConfig c;
  c.max_states = o.max_states;
  return c;
}

int cmd_sample(const Options& o) {
  const CodecParams params{o.n, o.p};
  std::string text;
  for (const auto& id : sample_uniform_ids(params, o.seed, o.count)) {
    const std::string statement = render(decode(id, params));
    if (o.format == "jsonl") {
      nlohmann::ordered_json j{{"id", id.to_string()}, {"n", o.n}, {"p", o.p}, {"statement", statement}};
      text += j.dump() + '\n';
    } else {
      text += id.to_string() + '\t' + statement + '\n';
    }
  }
  emit(o.out, text);
  return kOk;
}

int cmd_encode(const Options& o, CLI::App& sub) {
  const Proposition prop = parse(o.theorem);
  CodecParams params{static_cast<std::uint32_t>(prop.internal_nodes()), std::max<std::uint32_t>(1, prop.max_atom())};
  if (sub.count("--n")) params.n = o.n;
  if (sub.count("--p")) params.p = o.p;
  emit(o.out, encode(prop, params).to_string() + '\n');
  return kOk;
}

int cmd_decode(const Options& o) {
  emit(o.out, render(decode(PropositionId::parse(o.id), {o.n, o.p})) + '\n');
  return kOk;
}

int cmd_prove(const Options& o) {
  const Proposition thm = parse(o.theorem);
  FpsConfig config = fps_config(o);
  config.randomize = !o.stripped;
  const FpsResult r = fps_search(thm, o.seed, config);
  std::cerr << to_string(r.status) << " (" << r.states << " states)\n";
  if (!r.proved()) return o.require_proof ? kFailure : kOk;
  emit(o.out, trace_to_text(o.stripped ? stripped_trace(*r.trace) : *r.trace));
  return kOk;
}

int cmd_check(const Options& o) {
  std::optional<Proposition> thm;
  if (!o.theorem.empty()) thm = parse(o.theorem);
  if (!o.trace.empty()) {
    if (!thm) throw UsageError("--trace needs --theorem");
    const SearchTrace t = text_to_trace(read_file(o.trace), *thm);
    if (!t.successful()) {
      std::cerr << "trace does not close the proof\n";
      return kFailure;
    }
    std::cout << "ok\n";
    return kOk;
  }
  if (o.script.empty()) throw UsageError("check needs --script or --trace");
  const LeanScript s = parse_lean_script(read_file(o.script), thm ? &*thm : nullptr);
  const ScriptCheck c = check_script(s.theorem, s.tactics);
  if (c.ok) {
    std::cout << "ok\n";
    return kOk;
  }
  if (c.failure_index) {
    std::cerr << "tactic " << *c.failure_index + 1 << " (" << render_tactic(s.tactics[*c.failure_index])
              << ") failed: " << c.failure->message << '\n';
  } else {
    std::cerr << "script ends with open goals\n";
  }
  return kFailure;
}

int cmd_corpus(const Options& o) {
  CorpusConfig c;
  c.count = o.count;
  c.n = o.n;
  c.p = o.p;
  c.k = o.k;
  c.seed = o.seed;
  c.jobs = o.jobs;
  c.fps = fps_config(o);
  emit(o.out, jsonl_text(build_corpus(c)));
  return kOk;
}

int cmd_split(const Options& o) {
  if (o.out.empty()) throw UsageError("split needs --out <directory>");
  SplitSpec spec;
  spec.train_quantile = o.train_q;
  spec.ood_quantile = o.ood_q;
  spec.seed = o.seed;
  spec.sizes.train = o.train_size;
  spec.sizes.in_dist_test = o.test_size;
  spec.sizes.ood_test = o.all_ood ? std::nullopt : o.ood_size;
  const Split s = quantile_split(load_corpus(o.input), spec);
  std::filesystem::create_directories(o.out);
  const std::filesystem::path dir(o.out);
  emit((dir / "train.jsonl").string(), jsonl_text(s.train));
  emit((dir / "in_dist_test.jsonl").string(), jsonl_text(s.in_dist_test));
  emit((dir / "ood_test.jsonl").string(), jsonl_text(s.ood_test));
  std::cout << "train " << s.train.size() << "\nin_dist_test " << s.in_dist_test.size() << "\nood_test "
            << s.ood_test.size() << "\ntrain_threshold " << s.train_threshold.no_tae << ' '
            << s.train_threshold.tae << "\nood_threshold " << s.ood_threshold.no_tae << ' '
            << s.ood_threshold.tae << '\n';
  return kOk;
}

int cmd_run(const Options& o, Regime regime) {
  std::vector<std::string> ids;
  std::vector<Proposition> theorems;
  if (!o.input.empty()) {
    for (const auto& r : load_corpus(o.input)) {
      ids.push_back(r.id);
      theorems.push_back(parse(r.statement));
    }
  } else if (!o.theorem.empty()) {
    ids.push_back("0");
    theorems.push_back(parse(o.theorem));
  } else {
    const CodecParams params{o.n, o.p};
    for (const auto& id : sample_uniform_ids(params, o.seed, o.count)) {
      ids.push_back(id.to_string());
      theorems.push_back(decode(id, params));
    }
  }
  try {
    make_generator(o.generator, parse("True"), o.error_rate, 0);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto make = [&](std::size_t i) {
    return make_generator(o.generator, theorems[i], o.error_rate, theorem_seed(o.seed, ids[i]));
  };
  const DfsConfig dfs{o.n_sampled, o.step_limit, o.word_limit};
  const TaeConfig tae{o.word_limit};
  const auto outcomes = run_many(theorems, make, regime, dfs, tae, o.jobs);
  if (o.format == "csv") {
    emit(o.out, outcomes_csv(ids, outcomes));
  } else {
    emit(o.out, metrics_summary(aggregate(outcomes)));
  }
  return kOk;
}

int cmd_emit_lean(const Options& o) {
  Proposition thm = parse(o.theorem.empty() ? "True" : o.theorem);
  std::vector<Tactic> tactics;
  if (!o.script.empty()) {
    LeanScript s = parse_lean_script(read_file(o.script), o.theorem.empty() ? nullptr : &thm);
    thm = s.theorem;
    tactics = std::move(s.tactics);
    if (!check_script(thm, tactics).ok) {
      std::cerr << "script does not prove the theorem\n";
      return kFailure;
    }
  } else {
    if (o.theorem.empty()) throw UsageError("emit-lean needs --theorem or --script");
    FpsConfig config = fps_config(o);
    config.randomize = false;
    const FpsResult r = fps_search(thm, 0, config);
    if (!r.proved()) {
      std::cerr << to_string(r.status) << '\n';
      return kFailure;
    }
    tactics = strip(*r.trace);
  }
  emit(o.out, render_lean(thm, tactics, std::max(o.p, thm.max_atom())));
  return kOk;
}

int cmd_stats(const Options& o) {
  const auto corpus = load_corpus(o.input);
  const CorpusStats s = corpus_stats(corpus, o.train_q, o.ood_q);
  std::ostringstream t;
  t << "records " << s.records << "\nprovable " << s.provable << "\nresource_limited " << s.resource_limited
    << "\nq" << o.train_q << "_no_tae " << s.q66.no_tae << "\nq" << o.train_q << "_tae " << s.q66.tae << "\nq"
    << o.ood_q << "_no_tae " << s.q80.no_tae << "\nq" << o.ood_q << "_tae " << s.q80.tae << '\n';
  std::size_t bad = 0;
  for (const auto& r : corpus) {
    const std::string why = verify_record(r);
    if (!why.empty()) {
      ++bad;
      std::cerr << "record " << r.id << ": " << why << '\n';
    }
  }
  t << "invalid " << bad << '\n';
  emit(o.out, t.str());
  return bad == 0 ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intuitionistic propositional logic theorems, proofs and proof-search harnesses"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* s) {
    s->add_option("--n", o.n, "Connectives per proposition");
    s->add_option("--p", o.p, "Number of atoms");
    s->add_option("--seed", o.seed, "Seed for every random stream");
    s->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"jsonl", "csv", "text"}));
    s->add_option("--out", o.out, "Output path (default: standard output)");
  };

  auto* sample = app.add_subcommand("sample", "Uniformly sample propositions");
  common(sample);
  sample->add_option("--count", o.count);

  auto* enc = app.add_subcommand("encode", "Proposition to id");
  common(enc);
  enc->add_option("theorem", o.theorem)->required();

  auto* dec = app.add_subcommand("decode", "Id to proposition");
  common(dec);
  dec->add_option("id", o.id)->required();

  auto* prove = app.add_subcommand("prove", "Focused proof search; prints the trace");
  common(prove);
  prove->add_option("--theorem,theorem", o.theorem)->required();
  prove->add_option("--max-states", o.max_states);
  prove->add_flag("--require-proof", o.require_proof, "Exit 1 unless a proof is found");
  prove->add_flag("--stripped", o.stripped, "Deterministic search, linear proof only");

  auto* check = app.add_subcommand("check", "Check a tactic script or trace");
  common(check);
  check->add_option("--theorem", o.theorem);
  check->add_option("--script", o.script);
  check->add_option("--trace", o.trace);

  auto* corpus = app.add_subcommand("corpus", "Build a JSONL corpus");
  common(corpus);
  corpus->add_option("--count", o.count);
  corpus->add_option("--k", o.k, "Randomized traces per theorem");
  corpus->add_option("--jobs", o.jobs);
  corpus->add_option("--max-states", o.max_states);

  auto* split = app.add_subcommand("split", "Quantile split of a corpus into a directory");
  common(split);
  split->add_option("--in", o.input)->required();
  split->add_option("--train-q", o.train_q);
  split->add_option("--ood-q", o.ood_q);
  split->add_option("--train-size", o.train_size);
  split->add_option("--test-size", o.test_size);
  split->add_option("--ood-size", o.ood_size);
  split->add_flag("--all-ood", o.all_ood, "Keep the whole out-of-distribution region");

  const auto run_options = [&](CLI::App* s) {
    common(s);
    s->add_option("--in", o.input, "Corpus to run on");
    s->add_option("--theorem", o.theorem, "Single theorem to run on");
    s->add_option("--count", o.count, "Sampled theorems when no input is given");
    s->add_option("--generator", o.generator, "oracle, random, perturbed or replay");
    s->add_option("--error-rate", o.error_rate);
    s->add_option("--word-limit", o.word_limit);
    s->add_option("--jobs", o.jobs);
  };
  auto* dfs = app.add_subcommand("run-dfs", "Sampled-tactic depth-first search");
  run_options(dfs);
  dfs->add_option("--n-sampled", o.n_sampled);
  dfs->add_option("--step-limit", o.step_limit);
  auto* tae = app.add_subcommand("run-tae", "Trial-and-error inference");
  run_options(tae);

  auto* lean = app.add_subcommand("emit-lean", "Lean text of a proof");
  common(lean);
  lean->add_option("--theorem,theorem", o.theorem);
  lean->add_option("--script", o.script);
  lean->add_option("--max-states", o.max_states);

  auto* stats = app.add_subcommand("stats", "Corpus summary and record verification");
  common(stats);
  stats->add_option("--in", o.input)->required();
  stats->add_option("--train-q", o.train_q);
  stats->add_option("--ood-q", o.ood_q);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (*lean && !*lean->get_option("--p")) o.p = 0;

  try {
    if (*sample) return cmd_sample(o);
    if (*enc) return cmd_encode(o, *enc);
    if (*dec) return cmd_decode(o);
    if (*prove) return cmd_prove(o);
    if (*check) return cmd_check(o);
    if (*corpus) return cmd_corpus(o);
    if (*split) return cmd_split(o);
    if (*dfs) return cmd_run(o, Regime::Dfs);
    if (*tae) return cmd_run(o, Regime::Tae);
    if (*lean) return cmd_emit_lean(o);
    if (*stats) return cmd_stats(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const GrammarError& e) {
    std::cerr << "grammar error: " << e.what() << '\n';
    return kUsage;
  } catch (const CodecError& e) {
    std::cerr << "codec error: " << e.what() << '\n';
    return kUsage;
  } catch (const TraceFormatError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kFailure;
  } catch (const DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
