#pragma once

// Corpus construction: sample theorems, search for proofs, measure proof
// lengths with and without trial-and-error, split by length quantiles, and
// read/write JSON Lines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "propl/codec.hpp"
#include "propl/error.hpp"
#include "propl/fps.hpp"
#include "propl/kernel.hpp"
#include "propl/parallel.hpp"
#include "propl/proposition.hpp"
#include "propl/rng.hpp"
#include "propl/trace.hpp"

namespace propl {

struct TheoremRecord {
  std::string id;
  std::uint32_t n = 0;
  std::uint32_t p = 0;
  std::string statement;
  bool provable = false;
  /// Trial-and-error trace texts, one per randomized search.
  std::vector<std::string> traces;
  /// Tactic lines of the proof without trial-and-error.
  std::vector<std::string> stripped_proof;
  /// Words in the linear trace of the stripped proof.
  std::size_t len_no_tae = 0;
  /// Mean words over `traces`.
  double len_tae_avg = 0;
  /// A search hit its state limit; provability is unknown.
  bool resource_limit = false;

  friend bool operator==(const TheoremRecord&, const TheoremRecord&) = default;
};

struct CorpusConfig {
  std::size_t count = 1;
  std::uint32_t n = 16;
  std::uint32_t p = 5;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  FpsConfig fps;
};

/// Seed for everything done to one theorem, independent of its position in
/// the corpus.
inline std::uint64_t theorem_seed(std::uint64_t seed, const std::string& id) {
  return derive_seed(seed, hash_string(id));
}

/// Runs the searches for one theorem. The proof without trial-and-error
/// comes from the search with the fixed candidate order; the k traces come
/// from randomized searches.
inline TheoremRecord build_record(const Proposition& theorem, const CodecParams& params, std::size_t k,
                                  std::uint64_t seed, const FpsConfig& fps = {}) {
  TheoremRecord r;
  r.id = encode(theorem, params).to_string();
  r.n = params.n;
  r.p = params.p;
  r.statement = render(theorem);
  const std::uint64_t ts = theorem_seed(seed, r.id);

  FpsConfig fixed = fps;
  fixed.randomize = false;
  const FpsResult det = fps_search(theorem, ts, fixed);
  if (det.status == FpsStatus::LimitExceeded) r.resource_limit = true;
  if (!det.proved()) return r;

  FpsConfig randomized = fps;
  randomized.randomize = true;
  std::vector<SearchTrace> traces;
  try {
    traces = generate_diverse(theorem, k, ts, randomized);
  } catch (const SearchFailure&) {
    // The fixed-order search found a proof, so a randomized one can only
    // fail on the state limit.
    r.resource_limit = true;
    return r;
  }
  r.provable = true;
  const SearchTrace linear = stripped_trace(*det.trace);
  for (const Tactic& t : strip(linear)) r.stripped_proof.push_back(render_tactic(t));
  r.len_no_tae = word_length(trace_to_text(linear));
  std::size_t total = 0;
  for (const auto& t : traces) {
    r.traces.push_back(trace_to_text(t));
    total += word_length(r.traces.back());
  }
  r.len_tae_avg = traces.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(traces.size());
  return r;
}

/// Samples `count` theorems uniformly at (n, p) and builds their records.
/// Output order is sampling order regardless of `jobs`.
inline std::vector<TheoremRecord> build_corpus(const CorpusConfig& config) {
  if (config.count < 1) throw DatasetError("corpus count must be at least 1");
  const CodecParams params{config.n, config.p};
  const auto ids = sample_uniform_ids(params, derive_seed(config.seed, hash_string("sample")), config.count);
  const std::uint64_t proof_seed = derive_seed(config.seed, hash_string("proof"));
  return parallel_map(ids.size(), config.jobs, [&](std::size_t i) {
    return build_record(decode(ids[i], params), params, config.k, proof_seed, config.fps);
  });
}

// ---------------------------------------------------------------------------
// Verification

/// Re-checks a record: the id encodes the statement, the stripped proof
/// checks, every trace replays through the kernel, and both lengths match.
/// Returns an empty string on success, else the first problem found.
inline std::string verify_record(const TheoremRecord& r) {
  try {
    const Proposition thm = parse(r.statement);
    if (encode(thm, {r.n, r.p}).to_string() != r.id) return "id does not encode the statement";
    if (r.provable != !r.traces.empty()) return "provable flag disagrees with the traces";
    if (!r.provable) return r.stripped_proof.empty() ? "" : "unprovable record carries a proof";
    std::vector<Tactic> tactics;
    for (const auto& line : r.stripped_proof) tactics.push_back(parse_tactic(line));
    if (!check_script(thm, tactics).ok) return "stripped proof does not check";
    std::size_t total = 0;
    for (const auto& text : r.traces) {
      const SearchTrace t = text_to_trace(text, thm);
      if (!t.successful()) return "trace does not end in a proof";
      total += word_length(text);
    }
    if (static_cast<double>(total) / static_cast<double>(r.traces.size()) != r.len_tae_avg) {
      return "len_tae_avg does not match the traces";
    }
    ProofState s = initial_state(thm);
    std::string text = state_block(0, s);
    for (const auto& t : tactics) {
      const TacticResult res = apply_tactic(s, t);
      s = is_complete(res) ? ProofState{{}, s.next_hyp_index, s.state_id + 1} : std::get<ProofState>(res);
      text += "tactic: " + render_tactic(t) + '\n' + state_block(s.state_id, s);
    }
    if (word_length(text) != r.len_no_tae) return "len_no_tae does not match the stripped proof";
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// ---------------------------------------------------------------------------
// Splits

/// Nearest-rank empirical quantile: the smallest value v such that at least
/// a fraction q of the values are <= v.
template <typename T>
T nearest_rank(std::vector<T> values, double q) {
  if (values.empty()) throw DatasetError("quantile of an empty sample");
  if (!(q > 0 && q <= 1)) throw DatasetError("quantile must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const double exact = q * static_cast<double>(values.size());
  // Guard against q*N landing a hair above an integer (0.7 * 10).
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

struct SplitSizes {
  /// Unset: every pool record not drawn for the in-distribution test.
  std::optional<std::size_t> train;
  std::size_t in_dist_test = 1000;
  /// Unset: the whole out-of-distribution region.
  std::optional<std::size_t> ood_test = 1000;
};

struct SplitSpec {
  double train_quantile = 0.66;
  double ood_quantile = 0.8;
  SplitSizes sizes;
  std::uint64_t seed = 0;
};

struct QuantileThresholds {
  double no_tae = 0;
  double tae = 0;
};

struct Split {
  std::vector<TheoremRecord> train;
  std::vector<TheoremRecord> in_dist_test;
  std::vector<TheoremRecord> ood_test;
  QuantileThresholds train_threshold;
  QuantileThresholds ood_threshold;
};

inline QuantileThresholds length_quantiles(const std::vector<TheoremRecord>& provable, double q) {
  std::vector<double> no_tae;
  std::vector<double> tae;
  for (const auto& r : provable) {
    no_tae.push_back(static_cast<double>(r.len_no_tae));
    tae.push_back(r.len_tae_avg);
  }
  return {nearest_rank(no_tae, q), nearest_rank(tae, q)};
}

namespace detail {

// Uniform sample without replacement; the rest stays in original order.
inline std::vector<TheoremRecord> draw(std::vector<TheoremRecord>& pool, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  rng.shuffle(idx);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<TheoremRecord> picked;
  std::vector<TheoremRecord> rest;
  std::size_t j = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (j < idx.size() && idx[j] == i) {
      picked.push_back(std::move(pool[i]));
      ++j;
    } else {
      rest.push_back(std::move(pool[i]));
    }
  }
  pool = std::move(rest);
  return picked;
}

}  // namespace detail

/// Splits the provable records of a corpus. The train pool holds records
/// whose two lengths are both at or below their train quantile; the
/// in-distribution test is drawn from that pool and removed from it; the
/// out-of-distribution test holds records with both lengths strictly above
/// their ood quantile. Records in between are unused.
inline Split quantile_split(const std::vector<TheoremRecord>& corpus, const SplitSpec& spec) {
  if (!(0 < spec.train_quantile && spec.train_quantile < spec.ood_quantile && spec.ood_quantile < 1)) {
    throw DatasetError("quantiles must satisfy 0 < train < ood < 1");
  }
  std::vector<TheoremRecord> provable;
  for (const auto& r : corpus) {
    if (r.provable) provable.push_back(r);
  }
  if (provable.empty()) throw DatasetError("corpus has no provable records");
  Split out;
  out.train_threshold = length_quantiles(provable, spec.train_quantile);
  out.ood_threshold = length_quantiles(provable, spec.ood_quantile);

  std::vector<TheoremRecord> pool;
  std::vector<TheoremRecord> ood;
  for (auto& r : provable) {
    const double a = static_cast<double>(r.len_no_tae);
    const double b = r.len_tae_avg;
    if (a <= out.train_threshold.no_tae && b <= out.train_threshold.tae) {
      pool.push_back(std::move(r));
    } else if (a > out.ood_threshold.no_tae && b > out.ood_threshold.tae) {
      ood.push_back(std::move(r));
    }
  }
  Rng rng(derive_seed(spec.seed, hash_string("split")));
  const SplitSizes& sz = spec.sizes;
  if (sz.in_dist_test > pool.size()) {
    throw DatasetError("train region has " + std::to_string(pool.size()) + " records, " +
                       std::to_string(sz.in_dist_test) + " requested for the in-distribution test");
  }
  out.in_dist_test = detail::draw(pool, sz.in_dist_test, rng);
  if (sz.train) {
    if (*sz.train > pool.size()) {
      throw DatasetError("train region has " + std::to_string(pool.size()) + " records left, " +
                         std::to_string(*sz.train) + " requested for training");
    }
    out.train = detail::draw(pool, *sz.train, rng);
  } else {
    out.train = std::move(pool);
  }
  if (sz.ood_test) {
    if (*sz.ood_test > ood.size()) {
      throw DatasetError("ood region has " + std::to_string(ood.size()) + " records, " +
                         std::to_string(*sz.ood_test) + " requested");
    }
    out.ood_test = detail::draw(ood, *sz.ood_test, rng);
  } else {
    out.ood_test = std::move(ood);
  }
  return out;
}

enum class TrainingSelection : std::uint8_t { Shortest5, Shortest4, Any };

/// Two distinct traces chosen uniformly from the shortest five (or four,
/// or all), ordering traces by word length and then by text.
inline std::vector<std::string> select_training_proofs(const TheoremRecord& record, std::uint64_t seed,
                                                       TrainingSelection mode = TrainingSelection::Shortest5) {
  const std::size_t window = mode == TrainingSelection::Shortest5   ? 5
                             : mode == TrainingSelection::Shortest4 ? 4
                                                                    : record.traces.size();
  const std::size_t needed = std::max<std::size_t>(window, 2);
  if (record.traces.size() < needed) {
    throw DatasetError("record " + record.id + " has " + std::to_string(record.traces.size()) +
                       " traces, need " + std::to_string(needed));
  }
  std::vector<std::string> sorted = record.traces;
  std::sort(sorted.begin(), sorted.end(), [](const std::string& a, const std::string& b) {
    const std::size_t la = word_length(a);
    const std::size_t lb = word_length(b);
    return la != lb ? la < lb : a < b;
  });
  std::vector<std::size_t> idx(window);
  for (std::size_t i = 0; i < window; ++i) idx[i] = i;
  Rng rng(theorem_seed(seed, record.id));
  rng.shuffle(idx);
  return {sorted[idx[0]], sorted[idx[1]]};
}

// ---------------------------------------------------------------------------
// JSON Lines

inline nlohmann::ordered_json to_json(const TheoremRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["n"] = r.n;
  j["p"] = r.p;
  j["statement"] = r.statement;
  j["provable"] = r.provable;
  j["traces"] = r.traces;
  j["stripped_proof"] = r.stripped_proof;
  j["len_no_tae"] = r.len_no_tae;
  j["len_tae_avg"] = r.len_tae_avg;
  j["resource_limit"] = r.resource_limit;
  return j;
}

inline TheoremRecord record_from_json(const nlohmann::json& j) {
  TheoremRecord r;
  j.at("id").get_to(r.id);
  PropositionId::parse(r.id);
  j.at("n").get_to(r.n);
  j.at("p").get_to(r.p);
  j.at("statement").get_to(r.statement);
  j.at("provable").get_to(r.provable);
  j.at("traces").get_to(r.traces);
  j.at("stripped_proof").get_to(r.stripped_proof);
  j.at("len_no_tae").get_to(r.len_no_tae);
  j.at("len_tae_avg").get_to(r.len_tae_avg);
  if (j.contains("resource_limit")) j.at("resource_limit").get_to(r.resource_limit);
  return r;
}

inline void write_jsonl(std::ostream& out, const std::vector<TheoremRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<TheoremRecord> read_jsonl(std::istream& in) {
  std::vector<TheoremRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const CodecError& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void export_jsonl(const std::vector<TheoremRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path);
  write_jsonl(out, records);
  if (!out) throw DatasetError("write failed: " + path);
}

inline std::vector<TheoremRecord> import_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path);
  return read_jsonl(in);
}

struct CorpusStats {
  std::size_t records = 0;
  std::size_t provable = 0;
  std::size_t resource_limited = 0;
  QuantileThresholds q66;
  QuantileThresholds q80;
};

inline CorpusStats corpus_stats(const std::vector<TheoremRecord>& corpus, double train_q = 0.66,
                                double ood_q = 0.8) {
  CorpusStats s;
  std::vector<TheoremRecord> provable;
  for (const auto& r : corpus) {
    ++s.records;
    s.resource_limited += r.resource_limit;
    if (r.provable) provable.push_back(r);
  }
  s.provable = provable.size();
  if (!provable.empty()) {
    s.q66 = length_quantiles(provable, train_q);
    s.q80 = length_quantiles(provable, ood_q);
  }
  return s;
}

}  // namespace propl
