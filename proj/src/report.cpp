#include "effdecomp/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace effdecomp {

using nlohmann::json;

const char* to_string(DecompositionLevel level) {
  switch (level) {
    case DecompositionLevel::outcome: return "outcome";
    case DecompositionLevel::workload: return "workload";
    case DecompositionLevel::trace: return "trace";
  }
  return "?";
}

namespace {

double residual_of(const DecompositionRow& row) {
  double sum = 0.0;
  for (const auto& t : row.terms) sum += t.value;
  return row.d_log_e0 - sum;
}

void check_residuals(const DecompositionReport& report) {
  for (const auto& row : report.rows) {
    if (!row.defined) continue;
    if (std::abs(residual_of(row)) > 1e-9)
      throw IdentityViolation("decomposition residual exceeds 1e-9 for model " +
                              row.model_id);
  }
}

}  // namespace

DecompositionReport make_report(std::span<const OutcomeDelta> deltas) {
  DecompositionReport report;
  report.level = DecompositionLevel::outcome;
  for (const auto& d : deltas) {
    report.reference_id = d.reference_id;
    DecompositionRow row;
    row.model_id = d.model_id;
    row.defined = d.defined;
    if (d.defined) {
      row.d_log_e0 = d.d_log_e0;
      row.terms = {{"d_log_r_ctx", d.d_log_r_ctx},
                   {"d_log_r_logic", d.d_log_r_logic},
                   {"-d_log_mean_tokens", -d.d_log_mean_tokens}};
      row.residual = residual_of(row);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

DecompositionReport make_report(std::span<const WorkloadDelta> deltas) {
  DecompositionReport report;
  report.level = DecompositionLevel::workload;
  for (const auto& d : deltas) {
    report.reference_id = d.reference_id;
    DecompositionRow row;
    row.model_id = d.model_id;
    row.defined = d.defined;
    if (d.defined) {
      row.d_log_e0 = d.d_log_e0;
      row.terms = {{"d_log_r_ctx", d.d_log_r_ctx},
                   {"d_log_r_logic", d.d_log_r_logic},
                   {"-d_log_vo_bar", -d.d_log_vo_bar},
                   {"-d_log_kappa", -d.d_log_kappa}};
      row.residual = residual_of(row);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

DecompositionReport make_report(std::span<const TraceDelta> deltas) {
  DecompositionReport report;
  report.level = DecompositionLevel::trace;
  for (const auto& d : deltas) {
    report.reference_id = d.reference_id;
    DecompositionRow row;
    row.model_id = d.model_id;
    row.defined = d.defined;
    if (d.defined) {
      row.d_log_e0 = d.d_log_e0;
      row.terms = {{"d_log_r_ctx", d.d_log_r_ctx},
                   {"d_log_r_logic", d.d_log_r_logic},
                   {"d_log_q_trace", d.d_log_q_trace},
                   {"-d_log_vo_sig_bar", -d.d_log_vo_sig_bar},
                   {"-d_log_kappa_sig", -d.d_log_kappa_sig}};
      row.residual = residual_of(row);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_waterfall_json(std::ostream& out, const DecompositionReport& report,
                          bool log10_display) {
  check_residuals(report);
  const double scale = log10_display ? 1.0 / std::log(10.0) : 1.0;
  json j;
  j["level"] = to_string(report.level);
  j["reference_id"] = report.reference_id;
  j["log_base"] = "natural";  // stored values are always natural log
  j["models"] = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["model_id"] = row.model_id;
    r["defined"] = row.defined;
    if (row.defined) {
      r["d_log_e0"] = row.d_log_e0;
      r["terms"] = json::array();
      for (const auto& t : row.terms)
        r["terms"].push_back({{"term_name", t.name}, {"value", t.value}});
      r["residual"] = row.residual;
      if (log10_display) {
        r["display_log10"] = json::array();
        for (const auto& t : row.terms)
          r["display_log10"].push_back(
              {{"term_name", t.name}, {"value", t.value * scale}});
      }
    }
    j["models"].push_back(std::move(r));
  }
  out << j.dump(2) << "\n";
}

void write_waterfall_svg(std::ostream& out, const DecompositionReport& report) {
  check_residuals(report);
  // one bar group per model, one segment per term
  const double bar_w = 22.0, gap = 8.0;
  double max_abs = 0.1;
  std::size_t n_terms = 0;
  for (const auto& row : report.rows)
    if (row.defined) {
      n_terms = row.terms.size();
      for (const auto& t : row.terms)
        max_abs = std::max(max_abs, std::abs(t.value));
    }
  const double group_w = n_terms * bar_w + gap * 2;
  const double height = 320.0, mid = height / 2.0 - 20.0;
  const double scale = (mid - 10.0) / max_abs;
  const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << report.rows.size() * group_w + 40 << "\" height=\"" << height << "\">\n";
  out << "<line x1=\"0\" y1=\"" << mid << "\" x2=\""
      << report.rows.size() * group_w + 40 << "\" y2=\"" << mid
      << "\" stroke=\"#888\"/>\n";
  double x = 20.0;
  for (const auto& row : report.rows) {
    if (row.defined) {
      for (std::size_t i = 0; i < row.terms.size(); ++i) {
        const double v = row.terms[i].value * scale;
        const double y = v >= 0 ? mid - v : mid;
        out << "<rect x=\"" << x + i * bar_w << "\" y=\"" << y << "\" width=\""
            << bar_w - 2 << "\" height=\"" << std::abs(v) << "\" fill=\""
            << palette[i % 5] << "\"><title>" << row.model_id << " "
            << row.terms[i].name << " = " << row.terms[i].value
            << "</title></rect>\n";
      }
    }
    out << "<text x=\"" << x << "\" y=\"" << height - 6
        << "\" font-size=\"9\" font-family=\"sans-serif\">" << row.model_id
        << "</text>\n";
    x += group_w;
  }
  out << "</svg>\n";
}

std::string csv_quote(const std::string& field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

void write_leaderboard_csv(std::ostream& out,
                           std::span<const OutcomeSummary> summaries) {
  out << "model_id,e0_pct,acc_pct,mean_tokens,r_ctx_pct,r_logic_pct,n\r\n";
  for (const auto& s : summaries)
    out << csv_quote(s.model_id) << "," << fmt(s.e0_pct) << ","
        << fmt(100.0 * s.p_success) << "," << fmt(s.mean_tokens) << ","
        << fmt(100.0 * s.r_ctx) << "," << fmt(100.0 * s.r_logic) << "," << s.n
        << "\r\n";
}

void write_workload_csv(std::ostream& out,
                        std::span<const WorkloadSummary> summaries) {
  out << "model_id,vo_bar,kappa,mean_w,mean_tokens,w_variant\r\n";
  for (const auto& s : summaries)
    out << csv_quote(s.model_id) << "," << fmt(s.vo_bar) << "," << fmt(s.kappa)
        << "," << fmt(s.mean_w) << "," << fmt(s.mean_tokens) << ","
        << csv_quote(s.variant.name()) << "\r\n";
}

void write_selection_csv(std::ostream& out,
                         std::span<const SelectionEffect> effects) {
  out << "model_id,mean_t_correct,mean_t_incorrect,ratio,cohens_d,n_correct,"
         "n_incorrect\r\n";
  for (const auto& e : effects)
    out << csv_quote(e.model_id) << "," << fmt(e.mean_t_correct) << ","
        << fmt(e.mean_t_incorrect) << "," << fmt(e.ratio) << ","
        << fmt(e.cohens_d) << "," << e.n_correct << "," << e.n_incorrect
        << "\r\n";
}

void write_ci_json(std::ostream& out, std::span<const BootstrapCI> cis) {
  json j = json::array();
  for (const auto& ci : cis)
    j.push_back({{"metric_name", ci.metric_name},
                 {"point", ci.point},
                 {"lo", ci.lo},
                 {"hi", ci.hi},
                 {"resamples", ci.resamples},
                 {"level", ci.level},
                 {"seed", ci.seed},
                 {"rejected", ci.rejected}});
  out << j.dump(2) << "\n";
}

void write_trace_csv(std::ostream& out,
                     std::span<const TraceQualitySummary> summaries) {
  out << "model_id,q_trace,q_trace_c,g_span,g_rep,vo_sig_bar,kappa_sig,coverage\r\n";
  for (const auto& s : summaries)
    out << csv_quote(s.model_id) << "," << fmt(s.q_trace) << ","
        << fmt(s.q_trace_c) << "," << fmt(s.g_span) << "," << fmt(s.g_rep) << ","
        << fmt(s.vo_sig_bar) << "," << fmt(s.kappa_sig) << "," << fmt(s.coverage)
        << "\r\n";
}

}  // namespace effdecomp
