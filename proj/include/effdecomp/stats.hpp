#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "effdecomp/dataset.hpp"

namespace effdecomp {

struct BootstrapCI {
  std::string metric_name;
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int resamples = 500;
  double level = 0.95;
  std::uint64_t seed = 0;
  int rejected = 0;  // resamples on which the statistic was undefined
};

// Empirical percentile with linear interpolation between order statistics
// (h = (n-1)*q rule). `sorted` must be ascending.
double percentile(std::span<const double> sorted, double q);

// Percentile bootstrap over instance indices [0, n). The statistic receives
// the resampled index multiset; returning nullopt rejects the resample.
// Throws if the statistic is undefined on > 20% of resamples.
BootstrapCI bootstrap_ci(std::size_t n, const std::string& metric_name,
                         const std::function<std::optional<double>(std::span<const std::size_t>)>& statistic,
                         int resamples = 500, double level = 0.95,
                         std::uint64_t seed = 0);

// Spearman rank correlation with average-rank tie handling. Throws when a
// rank vector has zero variance or sizes mismatch / < 3.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct SelectionEffect {
  std::string model_id;
  double mean_t_correct = 0.0;
  double mean_t_incorrect = 0.0;
  double ratio = 0.0;      // incorrect / correct
  double cohens_d = 0.0;   // pooled SD, n-1 denominators
  std::int64_t n_correct = 0;
  std::int64_t n_incorrect = 0;
};

// Truncated records are excluded. Requires >= 1 record in each group.
SelectionEffect selection_effect(std::span<const OutcomeRecord> records);

}  // namespace effdecomp
