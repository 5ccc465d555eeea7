#include "effdecomp/outcome.hpp"

#include <cmath>
#include <stdexcept>

namespace effdecomp {

OutcomeSummary summarize_outcomes(std::span<const OutcomeRecord> records) {
  if (records.empty())
    throw std::invalid_argument("summarize_outcomes: empty record list");
  OutcomeSummary s;
  s.model_id = records.front().model_id;
  double sum_succ = 0.0, sum_t = 0.0, sum_completed = 0.0;
  for (const auto& rec : records) {
    if (rec.model_id != s.model_id)
      throw std::invalid_argument("summarize_outcomes: mixed model_ids");
    sum_succ += rec.succ;
    sum_t += static_cast<double>(rec.output_tokens);
    sum_completed += rec.truncated ? 0.0 : 1.0;
  }
  const double n = static_cast<double>(records.size());
  s.n = static_cast<std::int64_t>(records.size());
  s.p_success = sum_succ / n;
  s.mean_tokens = sum_t / n;
  s.r_ctx = sum_completed / n;
  if (sum_completed > 0.0) {
    s.r_logic = sum_succ / sum_completed;
  } else {
    s.r_logic = 0.0;
    s.r_logic_defined = false;
  }
  s.e0 = 1000.0 * sum_succ / sum_t;
  s.e0_pct = 100.0 * s.e0;
  return s;
}

std::vector<OutcomeDelta> decompose_relative(
    std::span<const OutcomeSummary> summaries, const std::string& reference_id) {
  const OutcomeSummary* ref = nullptr;
  for (const auto& s : summaries)
    if (s.model_id == reference_id) ref = &s;
  if (!ref)
    throw std::invalid_argument("decompose_relative: reference model not found: " +
                                reference_id);
  if (!(ref->r_ctx > 0.0 && ref->r_logic > 0.0 && ref->e0 > 0.0))
    throw std::invalid_argument(
        "decompose_relative: reference model has a zero factor");

  std::vector<OutcomeDelta> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) {
    OutcomeDelta d;
    d.model_id = s.model_id;
    d.reference_id = reference_id;
    if (s.r_ctx > 0.0 && s.r_logic > 0.0 && s.e0 > 0.0) {
      d.d_log_e0 = std::log(s.e0) - std::log(ref->e0);
      d.d_log_r_ctx = std::log(s.r_ctx) - std::log(ref->r_ctx);
      d.d_log_r_logic = std::log(s.r_logic) - std::log(ref->r_logic);
      d.d_log_mean_tokens = std::log(s.mean_tokens) - std::log(ref->mean_tokens);
      d.defined = true;
    }
    out.push_back(std::move(d));
  }
  return out;
}

double char_normalized_e0(std::span<const OutcomeRecord> records) {
  if (records.empty())
    throw std::invalid_argument("char_normalized_e0: empty record list");
  double sum_succ = 0.0, sum_chars = 0.0;
  for (const auto& rec : records) {
    if (!rec.output_chars)
      throw std::invalid_argument(
          "char_normalized_e0: record missing output_chars: " + rec.instance_id);
    sum_succ += rec.succ;
    sum_chars += static_cast<double>(*rec.output_chars);
  }
  if (sum_chars <= 0.0)
    throw std::invalid_argument("char_normalized_e0: zero total chars");
  return 1000.0 * sum_succ / sum_chars;
}

}  // namespace effdecomp
