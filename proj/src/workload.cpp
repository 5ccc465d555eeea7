#include "effdecomp/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "effdecomp/stats.hpp"

namespace effdecomp {

std::int64_t compute_w_poi(const InstanceMetadata& meta) {
  if (meta.statements.empty())
    throw std::invalid_argument("compute_w_poi: instance has zero statements: " +
                                meta.instance_id);
  std::int64_t w = 0;
  for (const auto& s : meta.statements) {
    if (s.k < 1)
      throw std::invalid_argument("compute_w_poi: statement with k < 1 in " +
                                  meta.instance_id);
    w += s.k;
    if (s.needle) w += s.m;
  }
  return w;
}

std::string WVariant::name() const {
  switch (kind) {
    case Kind::poi: return "poi";
    case Kind::needle_only: return "needle_only";
    case Kind::poi_plus_cN: return "poi_plus_cN:" + std::to_string(c);
  }
  return "?";
}

WVariant WVariant::parse(std::string_view name) {
  if (name == "poi") return {Kind::poi, 0};
  if (name == "needle_only") return {Kind::needle_only, 0};
  if (name.starts_with("poi_plus_cN:")) {
    int c = std::stoi(std::string(name.substr(12)));
    if (c < 0) throw std::invalid_argument("WVariant: c must be >= 0");
    return {Kind::poi_plus_cN, c};
  }
  throw std::invalid_argument("unknown W variant: " + std::string(name));
}

std::int64_t compute_w_variant(const InstanceMetadata& meta, const WVariant& variant) {
  switch (variant.kind) {
    case WVariant::Kind::poi:
      return compute_w_poi(meta);
    case WVariant::Kind::needle_only: {
      if (meta.statements.empty())
        throw std::invalid_argument("compute_w_variant: zero statements");
      std::int64_t w = 0;
      for (const auto& s : meta.statements)
        if (s.needle) w += s.k + s.m;
      return w;  // may be 0; invalid for normalization
    }
    case WVariant::Kind::poi_plus_cN:
      return compute_w_poi(meta) +
             static_cast<std::int64_t>(variant.c) * meta.n_statements;
  }
  throw std::logic_error("unreachable");
}

WorkloadSummary summarize_workload(std::span<const OutcomeRecord> records,
                                   const std::map<std::string, InstanceMetadata>& metadata,
                                   const WVariant& variant) {
  WorkloadSummary s;
  s.variant = variant;
  double sum_w = 0.0, sum_vo = 0.0, sum_t = 0.0;
  for (const auto& rec : records) {
    if (s.model_id.empty()) s.model_id = rec.model_id;
    auto it = metadata.find(rec.instance_id);
    if (it == metadata.end()) {
      ++s.excluded;
      continue;
    }
    const std::int64_t w = compute_w_variant(it->second, variant);
    if (w <= 0)
      throw std::invalid_argument("summarize_workload: W <= 0 for instance " +
                                  rec.instance_id + " under variant " +
                                  variant.name());
    const double t = static_cast<double>(rec.output_tokens);
    sum_w += static_cast<double>(w);
    sum_vo += t / static_cast<double>(w);
    sum_t += t;  // sum of W * VO
    ++s.n;
  }
  if (s.n == 0)
    throw std::invalid_argument("summarize_workload: no records with metadata");
  const double n = static_cast<double>(s.n);
  s.mean_w = sum_w / n;
  s.vo_bar = sum_vo / n;
  s.mean_tokens = sum_t / n;
  // kappa via the ratio form: E[W*VO] / (E[W] * E[VO]); T = W*VO pointwise.
  s.kappa = s.mean_tokens / (s.mean_w * s.vo_bar);
  return s;
}

std::vector<WorkloadDelta> decompose_workload_relative(
    std::span<const WorkloadSummary> workload,
    std::span<const OutcomeSummary> outcome, const std::string& reference_id) {
  auto find_outcome = [&](const std::string& id) -> const OutcomeSummary* {
    for (const auto& s : outcome)
      if (s.model_id == id) return &s;
    return nullptr;
  };
  const WorkloadSummary* wref = nullptr;
  for (const auto& s : workload)
    if (s.model_id == reference_id) wref = &s;
  const OutcomeSummary* oref = find_outcome(reference_id);
  if (!wref || !oref)
    throw std::invalid_argument(
        "decompose_workload_relative: reference model not found: " + reference_id);

  // Eq. 7 requires E[W] to cancel; mismatched instance sets are an error.
  for (const auto& s : workload) {
    if (s.excluded > 0)
      throw std::invalid_argument(
          "decompose_workload_relative: model " + s.model_id +
          " has records excluded for missing metadata");
    const double rel = std::abs(s.mean_w - wref->mean_w) /
                       std::max(std::abs(wref->mean_w), 1e-300);
    if (rel > 1e-9)
      throw std::invalid_argument(
          "decompose_workload_relative: E[W] mismatch between " + s.model_id +
          " and " + reference_id + " (models must share the instance set)");
  }
  if (!(oref->r_ctx > 0.0 && oref->r_logic > 0.0 && oref->e0 > 0.0))
    throw std::invalid_argument(
        "decompose_workload_relative: reference has a zero factor");

  std::vector<WorkloadDelta> out;
  for (const auto& w : workload) {
    const OutcomeSummary* o = find_outcome(w.model_id);
    if (!o)
      throw std::invalid_argument(
          "decompose_workload_relative: missing outcome summary for " + w.model_id);
    WorkloadDelta d;
    d.model_id = w.model_id;
    d.reference_id = reference_id;
    if (o->r_ctx > 0.0 && o->r_logic > 0.0 && o->e0 > 0.0 && w.vo_bar > 0.0 &&
        w.kappa > 0.0) {
      d.d_log_e0 = std::log(o->e0) - std::log(oref->e0);
      d.d_log_r_ctx = std::log(o->r_ctx) - std::log(oref->r_ctx);
      d.d_log_r_logic = std::log(o->r_logic) - std::log(oref->r_logic);
      d.d_log_vo_bar = std::log(w.vo_bar) - std::log(wref->vo_bar);
      d.d_log_kappa = std::log(w.kappa) - std::log(wref->kappa);
      d.defined = true;
    }
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

// Rank positions (1 = largest value) for displacement reporting.
std::vector<int> rank_positions(std::span<const double> values) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  std::vector<int> pos(values.size());
  for (std::size_t r = 0; r < idx.size(); ++r) pos[idx[r]] = static_cast<int>(r);
  return pos;
}

}  // namespace

WSensitivity w_sensitivity(const RunDataset& dataset,
                           std::span<const WVariant> variants) {
  WSensitivity result;
  result.variants.assign(variants.begin(), variants.end());
  result.model_ids = dataset.model_ids();
  if (result.model_ids.size() < 3)
    throw std::invalid_argument(
        "w_sensitivity: need >= 3 models for rank correlation");

  for (const auto& variant : variants) {
    std::vector<double> vo;
    for (const auto& model : result.model_ids) {
      auto records = dataset.outcomes_for(model);
      vo.push_back(summarize_workload(records, dataset.metadata, variant).vo_bar);
    }
    result.vo_bar.push_back(std::move(vo));
  }

  const std::size_t v = variants.size();
  result.rho.assign(v, std::vector<double>(v, 1.0));
  result.max_displacement.assign(v, std::vector<int>(v, 0));
  for (std::size_t a = 0; a < v; ++a) {
    auto pa = rank_positions(result.vo_bar[a]);
    for (std::size_t b = 0; b < v; ++b) {
      result.rho[a][b] = spearman(result.vo_bar[a], result.vo_bar[b]);
      auto pb = rank_positions(result.vo_bar[b]);
      int disp = 0;
      for (std::size_t i = 0; i < pa.size(); ++i)
        disp = std::max(disp, std::abs(pa[i] - pb[i]));
      result.max_displacement[a][b] = disp;
    }
  }
  return result;
}

}  // namespace effdecomp
