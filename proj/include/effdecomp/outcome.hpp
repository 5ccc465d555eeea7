#pragma once

#include <span>
#include <string>
#include <vector>

#include "effdecomp/dataset.hpp"

namespace effdecomp {

struct OutcomeSummary {
  std::string model_id;
  std::int64_t n = 0;
  double p_success = 0.0;   // P(S)
  double r_ctx = 0.0;       // P(N)
  double r_logic = 0.0;     // P(S|N), 0 and flagged when everything truncated
  bool r_logic_defined = true;
  double mean_tokens = 0.0; // E[T]
  double e0 = 0.0;          // 1000 * sum(succ) / sum(T)
  double e0_pct = 0.0;      // 100 * e0
};

OutcomeSummary summarize_outcomes(std::span<const OutcomeRecord> records);

struct OutcomeDelta {
  std::string model_id;
  std::string reference_id;
  double d_log_e0 = 0.0;
  double d_log_r_ctx = 0.0;
  double d_log_r_logic = 0.0;
  double d_log_mean_tokens = 0.0;
  bool defined = false;
};

std::vector<OutcomeDelta> decompose_relative(
    std::span<const OutcomeSummary> summaries, const std::string& reference_id);

// 1000 * sum(succ) / sum(output_chars); throws if any record lacks chars.
double char_normalized_e0(std::span<const OutcomeRecord> records);

}  // namespace effdecomp
