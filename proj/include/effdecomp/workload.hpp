#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "effdecomp/dataset.hpp"
#include "effdecomp/outcome.hpp"

namespace effdecomp {

// W_poi = sum_t k_t + sum_{t needle} m_t
std::int64_t compute_w_poi(const InstanceMetadata& meta);

struct WVariant {
  enum class Kind { poi, needle_only, poi_plus_cN };
  Kind kind = Kind::poi;
  int c = 0;  // only for poi_plus_cN, c in {0,1,2} for built-ins

  std::string name() const;
  static WVariant parse(std::string_view name);  // "poi", "needle_only", "poi_plus_cN:c"
  bool operator==(const WVariant&) const = default;
};

// needle_only may legitimately return 0 (no needles); callers must treat
// W <= 0 as invalid for normalization.
std::int64_t compute_w_variant(const InstanceMetadata& meta, const WVariant& variant);

struct WorkloadSummary {
  std::string model_id;
  WVariant variant;
  std::int64_t n = 0;
  std::int64_t excluded = 0;  // records without metadata
  double mean_w = 0.0;
  double vo_bar = 0.0;        // E[T/W]
  double kappa = 0.0;         // E[W*VO] / (E[W] * E[VO])
  double mean_tokens = 0.0;
};

WorkloadSummary summarize_workload(std::span<const OutcomeRecord> records,
                                   const std::map<std::string, InstanceMetadata>& metadata,
                                   const WVariant& variant = {});

struct WorkloadDelta {
  std::string model_id;
  std::string reference_id;
  double d_log_e0 = 0.0;
  double d_log_r_ctx = 0.0;
  double d_log_r_logic = 0.0;
  double d_log_vo_bar = 0.0;
  double d_log_kappa = 0.0;
  bool defined = false;
};

// Requires E[W] identical across models (1e-9 relative); hard error otherwise.
std::vector<WorkloadDelta> decompose_workload_relative(
    std::span<const WorkloadSummary> workload,
    std::span<const OutcomeSummary> outcome, const std::string& reference_id);

struct WSensitivity {
  std::vector<WVariant> variants;
  std::vector<std::string> model_ids;
  // vo_bar per variant (outer) per model (inner), model order = model_ids
  std::vector<std::vector<double>> vo_bar;
  std::vector<std::vector<double>> rho;            // variant x variant Spearman
  std::vector<std::vector<int>> max_displacement;  // variant x variant
};

WSensitivity w_sensitivity(const RunDataset& dataset,
                           std::span<const WVariant> variants);

}  // namespace effdecomp
