#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "effdecomp/dataset.hpp"
#include "effdecomp/outcome.hpp"

namespace effdecomp {

struct AnalysisToken {
  std::string text;   // lowercased, hyphen-joined alphanumeric run
  std::size_t begin = 0;  // char span in original text
  std::size_t end = 0;

  bool operator==(const AnalysisToken&) const = default;
};

// Lowercase alphanumeric word tokenization; hyphens preserved inside words,
// everything else is a separator.
std::vector<AnalysisToken> analysis_tokenize(std::string_view text);

std::map<std::string, std::set<std::string>> default_anchor_sets();

struct AnalysisParams {
  int window = 6;           // +/- tokens around an anchored value mention
  int n_rep = 8;            // repeated n-gram length
  int n_copy = 12;          // prompt-copy n-gram length
  int min_line_tokens = 3;  // repeated-line mask ignores shorter lines
  int compression_level = 6;
  std::map<std::string, std::set<std::string>> anchor_sets = default_anchor_sets();
  // Extra accepted surface forms per ontology value; defaults (plural,
  // hyphen/space variants) are always applied on top.
  std::map<std::string, std::set<std::string>> alias_table;
};

// Accepted surface forms of a value: the value itself, simple plural (+s),
// hyphen<->space variants, plus alias_table entries. Multi-word forms match
// as token sequences.
std::vector<std::vector<std::string>> value_surface_forms(
    const std::string& value, const AnalysisParams& params);

std::vector<char> grounded_mask(
    std::span<const AnalysisToken> tokens,
    const std::vector<std::pair<std::string, std::string>>& ontology,
    const AnalysisParams& params,
    std::vector<std::string>* categories_without_anchors = nullptr);

std::vector<char> repetition_mask(std::string_view trace_text,
                                  std::span<const AnalysisToken> tokens,
                                  const AnalysisParams& params);

std::vector<char> prompt_copy_mask(std::span<const AnalysisToken> tokens,
                                   std::span<const AnalysisToken> prompt_tokens,
                                   const AnalysisParams& params);

// zlib-compressed size / raw size over UTF-8 bytes, clamped to <= 1.
double compression_ratio(std::string_view text, int level = 6);

struct TraceMaskResult {
  std::int64_t t_w = 0;
  std::vector<char> grounded;
  std::vector<char> repetitive;
  std::vector<char> copied;
  std::vector<char> signal;   // grounded && !repetitive && !copied
  double sigma = 0.0;
  double sigma_c = 1.0;
  double t_sig = 0.0;         // model-token units: T * sigma
  bool degenerate = false;    // empty trace
};

TraceMaskResult analyze_trace(const TraceRecord& trace, const InstanceMetadata& meta,
                              std::int64_t model_tokens,
                              const AnalysisParams& params = {});

struct TraceQualitySummary {
  std::string model_id;
  std::int64_t n_covered = 0;
  double coverage = 0.0;      // covered / model outcomes
  double q_trace = 0.0;       // sum(t_sig) / sum(T) over covered instances
  double q_trace_c = 0.0;     // sum(T * sigma_c) / sum(T)
  double g_span = 0.0;        // mean per-instance grounded fraction
  double g_rep = 0.0;         // mean per-instance grounded&repetitive fraction
  double vo_sig_bar = 0.0;    // E[t_sig / W]
  double kappa_sig = 0.0;
  // Outcome factors restricted to the covered instance set, so that the
  // trace-level log identity is exact under partial coverage.
  double mean_w = 0.0;
  double mean_tokens = 0.0;
  double r_ctx = 0.0;
  double r_logic = 0.0;
  double e0 = 0.0;
};

TraceQualitySummary summarize_trace_quality(const RunDataset& dataset,
                                            const std::string& model_id,
                                            const AnalysisParams& params = {});

struct TraceDelta {
  std::string model_id;
  std::string reference_id;
  double d_log_e0 = 0.0;
  double d_log_r_ctx = 0.0;
  double d_log_r_logic = 0.0;
  double d_log_q_trace = 0.0;
  double d_log_vo_sig_bar = 0.0;
  double d_log_kappa_sig = 0.0;
  bool defined = false;
};

// Requires covered-set E[W] identical across models (1e-9 relative).
std::vector<TraceDelta> decompose_trace_relative(
    std::span<const TraceQualitySummary> summaries, const std::string& reference_id);

}  // namespace effdecomp
