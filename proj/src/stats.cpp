#include "effdecomp/stats.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace effdecomp {

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

BootstrapCI bootstrap_ci(
    std::size_t n, const std::string& metric_name,
    const std::function<std::optional<double>(std::span<const std::size_t>)>& statistic,
    int resamples, double level, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("bootstrap_ci: need n >= 2");
  if (resamples < 1) throw std::invalid_argument("bootstrap_ci: resamples >= 1");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_ci: level in (0,1)");

  BootstrapCI ci;
  ci.metric_name = metric_name;
  ci.resamples = resamples;
  ci.level = level;
  ci.seed = seed;

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  auto point = statistic(identity);
  if (!point)
    throw std::invalid_argument("bootstrap_ci: statistic undefined on full sample");
  ci.point = *point;

  std::mt19937_64 rng(seed);
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<std::size_t> indices(n);
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < n; ++i)
      indices[i] = static_cast<std::size_t>(rng() % n);
    auto value = statistic(indices);
    if (value)
      stats.push_back(*value);
    else
      ++ci.rejected;
  }
  if (ci.rejected > resamples / 5)
    throw std::runtime_error("bootstrap_ci: statistic undefined on > 20% of resamples");
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  ci.lo = percentile(stats, alpha);
  ci.hi = percentile(stats, 1.0 - alpha);
  return ci;
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 3) throw std::invalid_argument("spearman: need >= 3 points");
  auto rx = average_ranks(xs);
  auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("spearman: zero variance in a rank vector");
  return sxy / std::sqrt(sxx * syy);
}

SelectionEffect selection_effect(std::span<const OutcomeRecord> records) {
  SelectionEffect e;
  std::vector<double> correct, incorrect;
  for (const auto& rec : records) {
    if (rec.truncated) continue;  // truncations excluded
    if (e.model_id.empty()) e.model_id = rec.model_id;
    (rec.succ ? correct : incorrect)
        .push_back(static_cast<double>(rec.output_tokens));
  }
  if (correct.empty() || incorrect.empty())
    throw std::invalid_argument(
        "selection_effect: need >= 1 correct and >= 1 incorrect non-truncated record");
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  e.n_correct = static_cast<std::int64_t>(correct.size());
  e.n_incorrect = static_cast<std::int64_t>(incorrect.size());
  e.mean_t_correct = mean(correct);
  e.mean_t_incorrect = mean(incorrect);
  e.ratio = e.mean_t_incorrect / e.mean_t_correct;

  auto ss = [](const std::vector<double>& v, double m) {
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  const double n1 = static_cast<double>(correct.size());
  const double n2 = static_cast<double>(incorrect.size());
  const double pooled_var =
      (ss(correct, e.mean_t_correct) + ss(incorrect, e.mean_t_incorrect)) /
      std::max(n1 + n2 - 2.0, 1.0);
  const double pooled_sd = std::sqrt(pooled_var);
  e.cohens_d =
      pooled_sd > 0.0 ? (e.mean_t_incorrect - e.mean_t_correct) / pooled_sd : 0.0;
  return e;
}

}  // namespace effdecomp
