#include "effdecomp/trace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <zlib.h>

#include "effdecomp/workload.hpp"

namespace effdecomp {

namespace {

bool is_token_char(unsigned char c) {
  // Bytes >= 0x80 (UTF-8 multibyte) count as letters.
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

std::vector<AnalysisToken> analysis_tokenize(std::string_view text) {
  std::vector<AnalysisToken> tokens;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_token_char(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    std::string tok;
    while (i < n) {
      unsigned char c = static_cast<unsigned char>(text[i]);
      if (is_token_char(c)) {
        tok.push_back(static_cast<char>(std::tolower(c)));
        ++i;
      } else if (c == '-' && i + 1 < n &&
                 is_token_char(static_cast<unsigned char>(text[i + 1]))) {
        // internal hyphen
        tok.push_back('-');
        ++i;
      } else {
        break;
      }
    }
    tokens.push_back({std::move(tok), begin, i});
  }
  return tokens;
}

std::map<std::string, std::set<std::string>> default_anchor_sets() {
  return {
      {"location", {"located", "at", "in", "location", "move", "moved", "go", "went"}},
      {"clothes_shirt", {"shirt"}},
      {"clothes_pant", {"pant", "pants"}},
      {"clothes_hat", {"hat"}},
      {"clothes_socks", {"sock", "socks"}},
      {"clothes_gloves", {"glove", "gloves"}},
      {"clothes_underwear", {"underwear"}},
      {"hair", {"hair"}},
      {"recent_eat", {"eat", "ate", "eaten"}},
      {"recent_watch", {"watch", "watched", "movie"}},
      {"recent_listen", {"listen", "listened", "music"}},
      {"recent_read", {"read", "book"}},
  };
}

std::vector<std::vector<std::string>> value_surface_forms(
    const std::string& value, const AnalysisParams& params) {
  std::vector<std::vector<std::string>> forms;
  auto add = [&forms](std::vector<std::string> seq) {
    if (seq.empty()) return;
    if (std::find(forms.begin(), forms.end(), seq) == forms.end())
      forms.push_back(std::move(seq));
  };
  auto to_seq = [](std::string_view s) {
    std::vector<std::string> seq;
    for (auto& t : analysis_tokenize(s)) seq.push_back(std::move(t.text));
    return seq;
  };

  auto base = to_seq(value);
  if (base.empty()) return forms;
  add(base);

  // simple plural on the last token
  auto plural = base;
  plural.back() += "s";
  add(plural);

  // hyphen -> space on each hyphenated token
  std::vector<std::string> split;
  bool had_hyphen = false;
  for (const auto& tok : base) {
    std::string part;
    for (char c : tok) {
      if (c == '-') {
        had_hyphen = true;
        if (!part.empty()) split.push_back(part);
        part.clear();
      } else {
        part.push_back(c);
      }
    }
    if (!part.empty()) split.push_back(part);
  }
  if (had_hyphen) add(split);

  // space -> hyphen for multi-token values
  if (base.size() > 1) {
    std::string joined;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (i) joined.push_back('-');
      joined += base[i];
    }
    add({joined});
  }

  auto it = params.alias_table.find(value);
  if (it != params.alias_table.end())
    for (const auto& alias : it->second) add(to_seq(alias));
  return forms;
}

std::vector<char> grounded_mask(
    std::span<const AnalysisToken> tokens,
    const std::vector<std::pair<std::string, std::string>>& ontology,
    const AnalysisParams& params,
    std::vector<std::string>* categories_without_anchors) {
  std::vector<char> mask(tokens.size(), 0);
  const std::ptrdiff_t w = params.window;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(tokens.size());

  for (const auto& [category, value] : ontology) {
    auto anchors_it = params.anchor_sets.find(category);
    if (anchors_it == params.anchor_sets.end() || anchors_it->second.empty()) {
      if (categories_without_anchors &&
          std::find(categories_without_anchors->begin(),
                    categories_without_anchors->end(),
                    category) == categories_without_anchors->end())
        categories_without_anchors->push_back(category);
      continue;
    }
    const auto& anchors = anchors_it->second;
    for (const auto& form : value_surface_forms(value, params)) {
      const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(form.size());
      for (std::ptrdiff_t j = 0; j + len <= n; ++j) {
        bool match = true;
        for (std::ptrdiff_t t = 0; t < len; ++t)
          if (tokens[j + t].text != form[t]) {
            match = false;
            break;
          }
        if (!match) continue;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, j - w);
        const std::ptrdiff_t hi = std::min(n - 1, j + len - 1 + w);
        bool anchored = false;
        for (std::ptrdiff_t t = lo; t <= hi && !anchored; ++t)
          anchored = anchors.count(tokens[t].text) > 0;
        if (!anchored) continue;
        for (std::ptrdiff_t t = lo; t <= hi; ++t) mask[t] = 1;
      }
    }
  }
  return mask;
}

namespace {

// Token ids shared across sequences so n-grams compare exactly.
struct Vocab {
  std::unordered_map<std::string, int> ids;
  int id(const std::string& tok) {
    auto [it, inserted] = ids.emplace(tok, static_cast<int>(ids.size()));
    return it->second;
  }
};

std::uint64_t gram_hash(std::span<const int> ids, std::size_t start, int n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int t = 0; t < n; ++t) {
    h ^= static_cast<std::uint64_t>(ids[start + t]) + 0x9e3779b97f4a7c15ULL;
    h *= 1099511628211ULL;
  }
  return h;
}

bool gram_equal(std::span<const int> a, std::size_t pa, std::span<const int> b,
                std::size_t pb, int n) {
  for (int t = 0; t < n; ++t)
    if (a[pa + t] != b[pb + t]) return false;
  return true;
}

// Start positions of n-grams occurring more than once in ids.
std::vector<std::size_t> repeated_gram_starts(std::span<const int> ids, int n) {
  std::vector<std::size_t> out;
  if (n < 1 || ids.size() < static_cast<std::size_t>(n)) return out;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  const std::size_t count = ids.size() - n + 1;
  buckets.reserve(count * 2);
  for (std::size_t j = 0; j < count; ++j)
    buckets[gram_hash(ids, j, n)].push_back(j);
  for (auto& [h, positions] : buckets) {
    if (positions.size() < 2) continue;
    // resolve hash collisions exactly
    std::vector<char> used(positions.size(), 0);
    for (std::size_t a = 0; a < positions.size(); ++a) {
      if (used[a]) continue;
      std::vector<std::size_t> group{positions[a]};
      for (std::size_t b = a + 1; b < positions.size(); ++b)
        if (!used[b] && gram_equal(ids, positions[a], ids, positions[b], n)) {
          group.push_back(positions[b]);
          used[b] = 1;
        }
      if (group.size() >= 2)
        out.insert(out.end(), group.begin(), group.end());
    }
  }
  return out;
}

std::string normalized_line(std::string_view line, int* token_count) {
  std::string norm;
  int count = 0;
  for (const auto& tok : analysis_tokenize(line)) {
    if (!norm.empty()) norm.push_back(' ');
    norm += tok.text;
    ++count;
  }
  *token_count = count;
  return norm;
}

}  // namespace

std::vector<char> repetition_mask(std::string_view trace_text,
                                  std::span<const AnalysisToken> tokens,
                                  const AnalysisParams& params) {
  std::vector<char> mask(tokens.size(), 0);

  // (a) repeated lines
  struct Line {
    std::size_t begin, end;
    std::string norm;
  };
  std::vector<Line> lines;
  std::unordered_map<std::string, int> counts;
  std::size_t pos = 0;
  while (pos <= trace_text.size()) {
    std::size_t nl = trace_text.find('\n', pos);
    std::size_t end = (nl == std::string_view::npos) ? trace_text.size() : nl;
    int ntok = 0;
    std::string norm = normalized_line(trace_text.substr(pos, end - pos), &ntok);
    if (ntok >= params.min_line_tokens) {
      lines.push_back({pos, end, norm});
      ++counts[norm];
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  for (const auto& line : lines) {
    if (counts[line.norm] < 2) continue;
    // tokens are ordered by char span
    auto first = std::lower_bound(
        tokens.begin(), tokens.end(), line.begin,
        [](const AnalysisToken& t, std::size_t b) { return t.begin < b; });
    for (auto it = first; it != tokens.end() && it->end <= line.end; ++it)
      mask[static_cast<std::size_t>(it - tokens.begin())] = 1;
  }

  // (b) repeated n-grams over the analysis-token sequence
  Vocab vocab;
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t.text));
  for (std::size_t start : repeated_gram_starts(ids, params.n_rep))
    for (int t = 0; t < params.n_rep; ++t) mask[start + t] = 1;

  return mask;
}

std::vector<char> prompt_copy_mask(std::span<const AnalysisToken> tokens,
                                   std::span<const AnalysisToken> prompt_tokens,
                                   const AnalysisParams& params) {
  std::vector<char> mask(tokens.size(), 0);
  const int n = params.n_copy;
  if (n < 1 || tokens.size() < static_cast<std::size_t>(n) ||
      prompt_tokens.size() < static_cast<std::size_t>(n))
    return mask;

  Vocab vocab;
  std::vector<int> trace_ids, prompt_ids;
  trace_ids.reserve(tokens.size());
  prompt_ids.reserve(prompt_tokens.size());
  for (const auto& t : tokens) trace_ids.push_back(vocab.id(t.text));
  for (const auto& t : prompt_tokens) prompt_ids.push_back(vocab.id(t.text));

  std::unordered_map<std::uint64_t, std::vector<std::size_t>> prompt_grams;
  for (std::size_t j = 0; j + n <= prompt_ids.size(); ++j)
    prompt_grams[gram_hash(prompt_ids, j, n)].push_back(j);

  for (std::size_t j = 0; j + n <= trace_ids.size(); ++j) {
    auto it = prompt_grams.find(gram_hash(trace_ids, j, n));
    if (it == prompt_grams.end()) continue;
    bool found = false;
    for (std::size_t p : it->second)
      if (gram_equal(trace_ids, j, prompt_ids, p, n)) {
        found = true;
        break;
      }
    if (!found) continue;
    for (int t = 0; t < n; ++t) mask[j + t] = 1;
  }
  return mask;
}

double compression_ratio(std::string_view text, int level) {
  if (text.empty()) return 1.0;
  uLong bound = compressBound(static_cast<uLong>(text.size()));
  std::vector<Bytef> buf(bound);
  uLongf out_len = bound;
  int rc = compress2(buf.data(), &out_len,
                     reinterpret_cast<const Bytef*>(text.data()),
                     static_cast<uLong>(text.size()), level);
  if (rc != Z_OK) throw std::runtime_error("zlib compress2 failed");
  double ratio = static_cast<double>(out_len) / static_cast<double>(text.size());
  return std::min(ratio, 1.0);
}

TraceMaskResult analyze_trace(const TraceRecord& trace, const InstanceMetadata& meta,
                              std::int64_t model_tokens,
                              const AnalysisParams& params) {
  if (model_tokens < 1)
    throw std::invalid_argument("analyze_trace: model_tokens must be >= 1");
  TraceMaskResult result;
  auto tokens = analysis_tokenize(trace.trace_text);
  result.t_w = static_cast<std::int64_t>(tokens.size());
  if (tokens.empty()) {
    result.sigma = 0.0;
    result.sigma_c = 1.0;
    result.t_sig = 0.0;
    result.degenerate = true;
    return result;
  }
  auto prompt_tokens = analysis_tokenize(trace.prompt_text);
  result.grounded = grounded_mask(tokens, meta.ontology, params);
  result.repetitive = repetition_mask(trace.trace_text, tokens, params);
  result.copied = prompt_copy_mask(tokens, prompt_tokens, params);
  result.signal.resize(tokens.size());
  std::int64_t n_signal = 0;
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    result.signal[j] =
        result.grounded[j] && !result.repetitive[j] && !result.copied[j];
    n_signal += result.signal[j];
  }
  result.sigma = static_cast<double>(n_signal) / static_cast<double>(tokens.size());
  result.sigma_c = compression_ratio(trace.trace_text, params.compression_level);
  result.t_sig = static_cast<double>(model_tokens) * result.sigma;
  return result;
}

TraceQualitySummary summarize_trace_quality(const RunDataset& dataset,
                                            const std::string& model_id,
                                            const AnalysisParams& params) {
  auto records = dataset.outcomes_for(model_id);
  if (records.empty())
    throw std::invalid_argument("summarize_trace_quality: no outcomes for " +
                                model_id);
  std::stable_sort(records.begin(), records.end(),
                   [](const OutcomeRecord& a, const OutcomeRecord& b) {
                     return a.instance_id < b.instance_id;
                   });

  TraceQualitySummary s;
  s.model_id = model_id;
  double sum_t = 0.0, sum_tsig = 0.0, sum_t_sigma_c = 0.0;
  double sum_gspan = 0.0, sum_grep = 0.0;
  double sum_w = 0.0, sum_vo_sig = 0.0;
  double sum_succ = 0.0, sum_completed = 0.0;
  for (const auto& rec : records) {
    const TraceRecord* trace = dataset.find_trace(rec.instance_id, rec.model_id);
    if (!trace || trace->trace_text.empty()) continue;
    auto meta_it = dataset.metadata.find(rec.instance_id);
    if (meta_it == dataset.metadata.end()) continue;
    const InstanceMetadata& meta = meta_it->second;
    const std::int64_t w = compute_w_poi(meta);

    auto r = analyze_trace(*trace, meta, rec.output_tokens, params);
    const double t = static_cast<double>(rec.output_tokens);
    double g = 0.0, gr = 0.0;
    for (std::size_t j = 0; j < r.grounded.size(); ++j) {
      g += r.grounded[j];
      gr += r.grounded[j] && r.repetitive[j];
    }
    if (r.t_w > 0) {
      sum_gspan += g / static_cast<double>(r.t_w);
      sum_grep += gr / static_cast<double>(r.t_w);
    }
    sum_t += t;
    sum_tsig += r.t_sig;
    sum_t_sigma_c += t * r.sigma_c;
    sum_w += static_cast<double>(w);
    sum_vo_sig += r.t_sig / static_cast<double>(w);
    sum_succ += rec.succ;
    sum_completed += rec.truncated ? 0.0 : 1.0;
    ++s.n_covered;
  }
  if (s.n_covered == 0)
    throw std::invalid_argument("summarize_trace_quality: no covered traces for " +
                                model_id);
  const double n = static_cast<double>(s.n_covered);
  s.coverage = n / static_cast<double>(records.size());
  s.q_trace = sum_tsig / sum_t;
  s.q_trace_c = sum_t_sigma_c / sum_t;
  s.g_span = sum_gspan / n;
  s.g_rep = sum_grep / n;
  s.mean_w = sum_w / n;
  s.vo_sig_bar = sum_vo_sig / n;
  s.kappa_sig = (s.vo_sig_bar > 0.0)
                    ? (sum_tsig / n) / (s.mean_w * s.vo_sig_bar)
                    : 0.0;
  s.mean_tokens = sum_t / n;
  s.r_ctx = sum_completed / n;
  s.r_logic = sum_completed > 0.0 ? sum_succ / sum_completed : 0.0;
  s.e0 = 1000.0 * sum_succ / sum_t;
  return s;
}

std::vector<TraceDelta> decompose_trace_relative(
    std::span<const TraceQualitySummary> summaries, const std::string& reference_id) {
  const TraceQualitySummary* ref = nullptr;
  for (const auto& s : summaries)
    if (s.model_id == reference_id) ref = &s;
  if (!ref)
    throw std::invalid_argument("decompose_trace_relative: reference not found: " +
                                reference_id);
  auto positive = [](const TraceQualitySummary& s) {
    return s.r_ctx > 0.0 && s.r_logic > 0.0 && s.q_trace > 0.0 &&
           s.vo_sig_bar > 0.0 && s.kappa_sig > 0.0 && s.e0 > 0.0;
  };
  if (!positive(*ref))
    throw std::invalid_argument(
        "decompose_trace_relative: reference has a zero factor");
  for (const auto& s : summaries) {
    const double rel =
        std::abs(s.mean_w - ref->mean_w) / std::max(std::abs(ref->mean_w), 1e-300);
    if (rel > 1e-9)
      throw std::invalid_argument(
          "decompose_trace_relative: covered-set E[W] mismatch between " +
          s.model_id + " and " + reference_id);
  }

  std::vector<TraceDelta> out;
  for (const auto& s : summaries) {
    TraceDelta d;
    d.model_id = s.model_id;
    d.reference_id = reference_id;
    if (positive(s)) {
      d.d_log_e0 = std::log(s.e0) - std::log(ref->e0);
      d.d_log_r_ctx = std::log(s.r_ctx) - std::log(ref->r_ctx);
      d.d_log_r_logic = std::log(s.r_logic) - std::log(ref->r_logic);
      d.d_log_q_trace = std::log(s.q_trace) - std::log(ref->q_trace);
      d.d_log_vo_sig_bar = std::log(s.vo_sig_bar) - std::log(ref->vo_sig_bar);
      d.d_log_kappa_sig = std::log(s.kappa_sig) - std::log(ref->kappa_sig);
      d.defined = true;
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace effdecomp
