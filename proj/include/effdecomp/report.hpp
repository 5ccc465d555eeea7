#pragma once

#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "effdecomp/outcome.hpp"
#include "effdecomp/stats.hpp"
#include "effdecomp/trace.hpp"
#include "effdecomp/workload.hpp"

namespace effdecomp {

// Raised when a report row violates its additive identity; the CLI maps this
// to exit code 3.
class IdentityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DecompositionLevel { outcome, workload, trace };
const char* to_string(DecompositionLevel level);

struct DecompositionTerm {
  std::string name;
  double value = 0.0;
};

struct DecompositionRow {
  std::string model_id;
  double d_log_e0 = 0.0;
  std::vector<DecompositionTerm> terms;
  double residual = 0.0;
  bool defined = false;
};

struct DecompositionReport {
  DecompositionLevel level = DecompositionLevel::outcome;
  std::string reference_id;
  std::vector<DecompositionRow> rows;
};

DecompositionReport make_report(std::span<const OutcomeDelta> deltas);
DecompositionReport make_report(std::span<const WorkloadDelta> deltas);
DecompositionReport make_report(std::span<const TraceDelta> deltas);

// Recomputes and asserts |residual| <= 1e-9 on defined rows before writing.
void write_waterfall_json(std::ostream& out, const DecompositionReport& report,
                          bool log10_display = false);
void write_waterfall_svg(std::ostream& out, const DecompositionReport& report);

std::string csv_quote(const std::string& field);  // RFC 4180

// Columns: model_id,e0_pct,acc_pct,mean_tokens,r_ctx_pct,r_logic_pct,n
void write_leaderboard_csv(std::ostream& out,
                           std::span<const OutcomeSummary> summaries);
// Columns: model_id,vo_bar,kappa,mean_w,mean_tokens,w_variant
void write_workload_csv(std::ostream& out,
                        std::span<const WorkloadSummary> summaries);
// Columns: model_id,mean_t_correct,mean_t_incorrect,ratio,cohens_d,n_correct,n_incorrect
void write_selection_csv(std::ostream& out,
                         std::span<const SelectionEffect> effects);
void write_ci_json(std::ostream& out, std::span<const BootstrapCI> cis);
// Columns: model_id,q_trace,q_trace_c,g_span,g_rep,vo_sig_bar,kappa_sig,coverage
void write_trace_csv(std::ostream& out,
                     std::span<const TraceQualitySummary> summaries);

}  // namespace effdecomp
