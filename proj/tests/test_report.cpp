#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "effdecomp/fixture.hpp"
#include "effdecomp/outcome.hpp"
#include "effdecomp/report.hpp"

using namespace effdecomp;

namespace {

std::vector<OutcomeDelta> sample_deltas() {
  OutcomeDelta ref;
  ref.model_id = "ref";
  ref.reference_id = "ref";
  ref.defined = true;
  OutcomeDelta worse;
  worse.model_id = "worse";
  worse.reference_id = "ref";
  worse.defined = true;
  worse.d_log_r_ctx = -0.1;
  worse.d_log_r_logic = -0.2;
  worse.d_log_mean_tokens = 0.3;
  worse.d_log_e0 = -0.6;
  return {ref, worse};
}

}  // namespace

TEST_CASE("make_report terms sum to d_log_e0 with zero residual") {
  auto deltas = sample_deltas();
  auto report = make_report(std::span<const OutcomeDelta>(deltas));
  CHECK(report.level == DecompositionLevel::outcome);
  REQUIRE(report.rows.size() == 2);
  REQUIRE(report.rows[1].terms.size() == 3);
  CHECK(report.rows[1].terms[0].name == "d_log_r_ctx");
  CHECK(report.rows[1].terms[2].name == "-d_log_mean_tokens");
  CHECK(report.rows[1].terms[2].value == doctest::Approx(-0.3));
  CHECK(std::abs(report.rows[1].residual) <= 1e-12);
}

TEST_CASE("waterfall writer asserts the residual bound") {
  auto deltas = sample_deltas();
  auto report = make_report(std::span<const OutcomeDelta>(deltas));
  std::ostringstream ok;
  CHECK_NOTHROW(write_waterfall_json(ok, report));
  CHECK(ok.str().find("d_log_r_ctx") != std::string::npos);

  report.rows[1].terms[0].value += 1e-6;  // corrupt the identity
  std::ostringstream bad;
  CHECK_THROWS_AS(write_waterfall_json(bad, report), IdentityViolation);
  std::ostringstream bad_svg;
  CHECK_THROWS_AS(write_waterfall_svg(bad_svg, report), IdentityViolation);
}

TEST_CASE("waterfall json stores natural log, log10 only for display") {
  auto deltas = sample_deltas();
  auto report = make_report(std::span<const OutcomeDelta>(deltas));
  std::ostringstream plain, disp;
  write_waterfall_json(plain, report, false);
  write_waterfall_json(disp, report, true);
  CHECK(plain.str().find("display_log10") == std::string::npos);
  CHECK(disp.str().find("display_log10") != std::string::npos);
  CHECK(disp.str().find("\"log_base\": \"natural\"") != std::string::npos);
}

TEST_CASE("svg renders one bar group per model") {
  auto deltas = sample_deltas();
  auto report = make_report(std::span<const OutcomeDelta>(deltas));
  std::ostringstream out;
  write_waterfall_svg(out, report);
  const std::string svg = out.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("worse") != std::string::npos);
  CHECK(svg.find("<rect") != std::string::npos);
}

TEST_CASE("csv quoting follows RFC 4180") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_quote("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("golden CSV headers are stable") {
  std::ostringstream lb, wl, sel, tr;
  write_leaderboard_csv(lb, {});
  write_workload_csv(wl, {});
  write_selection_csv(sel, {});
  write_trace_csv(tr, {});
  CHECK(lb.str() ==
        "model_id,e0_pct,acc_pct,mean_tokens,r_ctx_pct,r_logic_pct,n\r\n");
  CHECK(wl.str() == "model_id,vo_bar,kappa,mean_w,mean_tokens,w_variant\r\n");
  CHECK(sel.str() ==
        "model_id,mean_t_correct,mean_t_incorrect,ratio,cohens_d,n_correct,"
        "n_incorrect\r\n");
  CHECK(tr.str() ==
        "model_id,q_trace,q_trace_c,g_span,g_rep,vo_sig_bar,kappa_sig,"
        "coverage\r\n");
}

TEST_CASE("leaderboard row formatting and quoting") {
  OutcomeSummary s;
  s.model_id = "model,with comma";
  s.n = 4;
  s.p_success = 0.5;
  s.r_ctx = 1.0;
  s.r_logic = 0.5;
  s.mean_tokens = 1000.0;
  s.e0 = 0.5;
  s.e0_pct = 50.0;
  std::ostringstream out;
  std::vector<OutcomeSummary> ss = {s};
  write_leaderboard_csv(out, ss);
  CHECK(out.str() ==
        "model_id,e0_pct,acc_pct,mean_tokens,r_ctx_pct,r_logic_pct,n\r\n"
        "\"model,with comma\",50,50,1000,100,50,4\r\n");
}

TEST_CASE("embedded fixture verifies and correlates like the leaderboard") {
  auto report = verify_fixture();
  CHECK(report.rows.size() == 25);
  CHECK(report.pass);
  for (const auto& row : report.rows) CHECK(row.pass);
  CHECK(report.spearman_e0_acc == doctest::Approx(0.63).epsilon(0.05));
  CHECK(report.spearman_ok);
}

TEST_CASE("fixture rows reproduce the published spot checks") {
  const auto& rows = fixture_rows();
  auto find = [&](const std::string& id) {
    for (const auto& r : rows)
      if (r.model_id == id) return r;
    REQUIRE(false);
    return rows[0];
  };
  auto o3 = find("o3(04-16)");
  CHECK(100000.0 * 0.895 / o3.mean_tokens == doctest::Approx(15.25).epsilon(0.001));
  auto gem = find("gemini-2.5-pro");
  CHECK(gem.r_ctx_pct * gem.r_logic_pct / 100.0 ==
        doctest::Approx(74.7).epsilon(0.01));
  auto ds = find("DS-R1D-Llama-70B");
  CHECK(100000.0 * ds.acc_pct / 100.0 / ds.mean_tokens ==
        doctest::Approx(12.63).epsilon(0.001));
}
