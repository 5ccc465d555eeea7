#pragma once

#include <string>
#include <vector>

namespace effdecomp {

// Published leaderboard row used as an internal consistency fixture.
struct FixtureRow {
  std::string model_id;
  double e0_pct;        // E0(%) = 100 * 1000 * P(S) / E[T]
  int acc_pct;          // integer percent
  double mean_tokens;   // E[T], leaderboard value
  int r_ctx_pct;        // integer percent
  int r_logic_pct;      // integer percent
  double vo_bar;        // tokens per work unit
  double kappa;
  double mean_tokens_vo; // E[T] as reported alongside vo_bar/kappa
};

const std::vector<FixtureRow>& fixture_rows();

struct FixtureRowResult {
  std::string model_id;
  bool acc_consistent = false;      // |acc - r_ctx*r_logic| <= 1.5 pp
  bool e0_consistent = false;       // e0_pct vs 100000*acc/E[T], acc rounding band +- 0.25
  bool workload_consistent = false; // |491*vo_bar*kappa - E[T]| / E[T] <= 0.02
  bool pass = false;
};

struct FixtureReport {
  std::vector<FixtureRowResult> rows;
  double spearman_e0_acc = 0.0;
  bool spearman_ok = false;  // 0.63 +- 0.03
  bool pass = false;
};

FixtureReport verify_fixture();

}  // namespace effdecomp
