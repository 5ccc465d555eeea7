// effdecomp command-line tool.
//
// Subcommands:
//   ingest-validate     parse + validate a dataset, report a summary
//   analyze             leaderboard + decomposition waterfall at a chosen level
//   generate            synthetic puzzle suites (single config or factorial sweep)
//   simulate-archetypes generate + simulate three reasoning-style profiles
//   stats               bootstrap | spearman | selection
//   verify-fixture      internal consistency checks on the embedded leaderboard
//   w-sensitivity       workload-definition robustness of verbosity rankings
//
// Exit codes: 0 success, 1 check failure, 2 input error, 3 identity violation.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "effdecomp/dataset.hpp"
#include "effdecomp/fixture.hpp"
#include "effdecomp/outcome.hpp"
#include "effdecomp/puzzle.hpp"
#include "effdecomp/report.hpp"
#include "effdecomp/stats.hpp"
#include "effdecomp/trace.hpp"
#include "effdecomp/workload.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace effdecomp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitIdentity = 3;

std::uint64_t default_seed(std::uint64_t fallback) {
  if (const char* env = std::getenv("EFFDECOMP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw IngestError("EFFDECOMP_SEED is not a valid unsigned integer: " +
                        std::string(env));
    }
  }
  return fallback;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot open output file: " + path.string());
  return out;
}

struct DatasetOpts {
  std::string outcomes, metadata, traces;
  std::int64_t budget = 32768;

  void attach(CLI::App* cmd, bool outcomes_required = true) {
    auto* o = cmd->add_option("--outcomes", outcomes, "outcomes.jsonl path");
    if (outcomes_required) o->required();
    cmd->add_option("--metadata", metadata, "metadata.jsonl path");
    cmd->add_option("--traces", traces, "traces.jsonl path");
    cmd->add_option("--budget", budget, "token budget used for truncation checks");
  }

  RunDataset load() const {
    return ingest_dataset(outcomes, metadata, traces, budget);
  }
};

// --- analyze -----------------------------------------------------------------

int run_analyze(const DatasetOpts& data, const std::string& level,
                const std::string& reference, const std::string& w_variant,
                const fs::path& out_dir, bool svg, bool log10_display) {
  RunDataset ds = data.load();
  if (level != "outcome" && data.metadata.empty())
    throw IngestError("level '" + level +
                      "' requires metadata (--metadata); outcome level needs "
                      "outcomes only");
  if (level == "trace" && data.traces.empty())
    throw IngestError("trace level requires traces (--traces) in addition to "
                      "outcomes and metadata");

  fs::create_directories(out_dir);
  const auto models = ds.model_ids();
  if (models.empty()) throw IngestError("dataset contains no outcome records");
  std::string ref = reference.empty() ? models.front() : reference;
  if (std::find(models.begin(), models.end(), ref) == models.end())
    throw IngestError("reference model not present in dataset: " + ref);

  std::vector<OutcomeSummary> outcome;
  for (const auto& m : models) outcome.push_back(summarize_outcomes(ds.outcomes_for(m)));
  std::stable_sort(outcome.begin(), outcome.end(),
                   [](const auto& a, const auto& b) { return a.e0_pct > b.e0_pct; });
  {
    auto f = open_out(out_dir / "leaderboard.csv");
    write_leaderboard_csv(f, outcome);
  }

  DecompositionReport report;
  if (level == "outcome") {
    auto deltas = decompose_relative(outcome, ref);
    report = make_report(std::span<const OutcomeDelta>(deltas));
  } else if (level == "workload") {
    const WVariant variant = WVariant::parse(w_variant);
    std::vector<WorkloadSummary> workload;
    for (const auto& m : models)
      workload.push_back(summarize_workload(ds.outcomes_for(m), ds.metadata, variant));
    {
      auto f = open_out(out_dir / "workload.csv");
      write_workload_csv(f, workload);
    }
    auto deltas = decompose_workload_relative(workload, outcome, ref);
    report = make_report(std::span<const WorkloadDelta>(deltas));
  } else if (level == "trace") {
    std::vector<TraceQualitySummary> trace;
    for (const auto& m : models) trace.push_back(summarize_trace_quality(ds, m));
    {
      auto f = open_out(out_dir / "trace.csv");
      write_trace_csv(f, trace);
    }
    auto deltas = decompose_trace_relative(trace, ref);
    report = make_report(std::span<const TraceDelta>(deltas));
  } else {
    throw IngestError("unknown level: " + level);
  }

  {
    auto f = open_out(out_dir / "waterfall.json");
    write_waterfall_json(f, report, log10_display);
  }
  if (svg) {
    auto f = open_out(out_dir / "waterfall.svg");
    write_waterfall_svg(f, report);
  }
  std::cout << "wrote " << (out_dir / "leaderboard.csv").string() << " and "
            << (out_dir / "waterfall.json").string() << " (" << models.size()
            << " models, level=" << level << ", reference=" << ref << ")\n";
  return kExitOk;
}

// --- generate / simulate-archetypes -----------------------------------------

struct SweepOpts {
  std::vector<int> d{5};
  std::vector<int> n{20};
  std::vector<double> rho{0.5};
  int count = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--d", d, "difficulty values (repeat for a sweep)");
    cmd->add_option("--n", n, "statement counts (repeat for a sweep)");
    cmd->add_option("--rho", rho, "needle fractions (repeat for a sweep)");
    cmd->add_option("--count", count, "instances per configuration")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "base seed (EFFDECOMP_SEED overrides default)")
        ->capture_default_str();
  }

  std::uint64_t effective_seed(const CLI::App* cmd) const {
    if (cmd->count("--seed") > 0) return seed;
    return default_seed(seed);
  }

  std::vector<GeneratedInstance> generate_all(std::uint64_t base_seed) const {
    std::vector<GeneratedInstance> out;
    std::uint64_t idx = 0;
    for (int dv : d)
      for (int nv : n)
        for (double rv : rho)
          for (int c = 0; c < count; ++c)
            out.push_back(generate(dv, nv, rv, base_seed + idx++));
    return out;
  }
};

void write_suite(const fs::path& out_dir,
                 const std::vector<GeneratedInstance>& suite) {
  fs::create_directories(out_dir);
  std::map<std::string, InstanceMetadata> meta;
  for (const auto& g : suite) meta.emplace(g.metadata.instance_id, g.metadata);
  {
    auto f = open_out(out_dir / "metadata.jsonl");
    write_metadata_jsonl(f, meta);
  }
  auto f = open_out(out_dir / "prompts.jsonl");
  for (const auto& g : suite) {
    json j{{"instance_id", g.metadata.instance_id},
           {"prompt_text", g.prompt_text},
           {"gold_answer", g.instance.gold_answer},
           {"query_category", g.instance.query_category}};
    f << j.dump() << "\n";
  }
}

void write_runs(const fs::path& out_dir, const std::vector<SimulatedRun>& runs) {
  std::vector<OutcomeRecord> outcomes;
  std::map<std::pair<std::string, std::string>, TraceRecord> traces;
  for (const auto& r : runs) {
    outcomes.push_back(r.outcome);
    traces.emplace(std::make_pair(r.trace.instance_id, r.trace.model_id), r.trace);
  }
  {
    auto f = open_out(out_dir / "outcomes.jsonl");
    write_outcomes_jsonl(f, outcomes);
  }
  auto f = open_out(out_dir / "traces.jsonl");
  write_traces_jsonl(f, traces);
}

int run_generate(const SweepOpts& sweep, std::uint64_t base_seed,
                 const fs::path& out_dir, bool archetypes,
                 std::int64_t token_budget) {
  auto suite = sweep.generate_all(base_seed);
  write_suite(out_dir, suite);
  if (archetypes) {
    std::vector<SimulatedRun> runs;
    std::uint64_t idx = 0;
    for (const auto& g : suite)
      for (auto a : {Archetype::concise_correct, Archetype::verbose_engaged,
                     Archetype::degenerate_looper})
        runs.push_back(simulate_archetype(g, a, base_seed + idx++, token_budget));
    write_runs(out_dir, runs);
  }
  std::cout << "wrote " << suite.size() << " instances to " << out_dir.string()
            << (archetypes ? " (with simulated archetype runs)" : "") << "\n";
  return kExitOk;
}

// --- stats -------------------------------------------------------------------

int run_bootstrap(const DatasetOpts& data, const std::string& model,
                  const std::string& metric, int resamples, double level,
                  std::uint64_t seed, const std::string& out_path) {
  RunDataset ds = data.load();
  auto models = ds.model_ids();
  std::vector<std::string> targets =
      model.empty() ? models : std::vector<std::string>{model};
  std::vector<BootstrapCI> cis;
  for (const auto& m : targets) {
    auto records = ds.outcomes_for(m);
    if (records.empty()) throw IngestError("no records for model: " + m);
    auto statistic = [&](std::span<const std::size_t> idx) -> std::optional<double> {
      double succ = 0, tok = 0;
      for (auto i : idx) {
        succ += records[i].succ;
        tok += static_cast<double>(records[i].output_tokens);
      }
      const double n = static_cast<double>(idx.size());
      if (metric == "e0") return tok > 0 ? std::optional(1000.0 * succ / tok)
                                         : std::nullopt;
      if (metric == "acc") return succ / n;
      if (metric == "mean_tokens") return tok / n;
      throw IngestError("unknown metric: " + metric);
    };
    cis.push_back(bootstrap_ci(records.size(), m + ":" + metric, statistic,
                               resamples, level, seed));
  }
  if (out_path.empty()) {
    write_ci_json(std::cout, cis);
  } else {
    auto f = open_out(out_path);
    write_ci_json(f, cis);
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int run_spearman(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IngestError("cannot open input file: " + file);
  std::vector<double> xs, ys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw IngestError(file + ":" + std::to_string(lineno) +
                        ": expected two numeric columns");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  std::cout << "spearman_rho " << spearman(xs, ys) << " n " << xs.size() << "\n";
  return kExitOk;
}

int run_selection(const DatasetOpts& data, const std::string& out_path) {
  RunDataset ds = data.load();
  std::vector<SelectionEffect> effects;
  for (const auto& m : ds.model_ids()) {
    auto records = ds.outcomes_for(m);
    effects.push_back(selection_effect(records));
  }
  if (out_path.empty()) {
    write_selection_csv(std::cout, effects);
  } else {
    auto f = open_out(out_path);
    write_selection_csv(f, effects);
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

// --- verify-fixture ----------------------------------------------------------

int run_verify_fixture() {
  FixtureReport report = verify_fixture();
  for (const auto& row : report.rows)
    std::cout << (row.pass ? "pass " : "FAIL ") << row.model_id
              << (row.acc_consistent ? "" : " [acc vs r_ctx*r_logic]")
              << (row.e0_consistent ? "" : " [e0 vs acc/E[T]]")
              << (row.workload_consistent ? "" : " [E[T] vs W*VO*kappa]") << "\n";
  std::cout << "spearman(e0, acc) = " << report.spearman_e0_acc
            << (report.spearman_ok ? " (ok)" : " (out of band)") << "\n";
  std::cout << (report.pass ? "fixture: PASS" : "fixture: FAIL") << "\n";
  return report.pass ? kExitOk : kExitCheckFailed;
}

// --- w-sensitivity -----------------------------------------------------------

int run_w_sensitivity(const DatasetOpts& data,
                      const std::vector<std::string>& variant_names,
                      const std::string& out_path) {
  RunDataset ds = data.load();
  std::vector<WVariant> variants;
  for (const auto& name : variant_names) variants.push_back(WVariant::parse(name));
  WSensitivity sens = w_sensitivity(ds, variants);

  json j;
  j["variants"] = json::array();
  for (const auto& v : sens.variants) j["variants"].push_back(v.name());
  j["model_ids"] = sens.model_ids;
  j["vo_bar"] = sens.vo_bar;
  j["spearman"] = sens.rho;
  j["max_rank_displacement"] = sens.max_displacement;
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    auto f = open_out(out_path);
    f << j.dump(2) << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  for (std::size_t a = 0; a < sens.variants.size(); ++a)
    for (std::size_t b = a + 1; b < sens.variants.size(); ++b)
      std::cout << sens.variants[a].name() << " vs " << sens.variants[b].name()
                << ": spearman " << sens.rho[a][b] << ", max displacement "
                << sens.max_displacement[a][b] << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reasoning-token efficiency decomposition toolkit"};
  app.require_subcommand(1);

  // ingest-validate
  auto* validate = app.add_subcommand("ingest-validate",
                                      "Parse and validate dataset files");
  DatasetOpts validate_data;
  validate_data.attach(validate);

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Leaderboard and decomposition waterfall at a chosen level");
  DatasetOpts analyze_data;
  analyze_data.attach(analyze);
  std::string level = "outcome", reference, w_variant = "poi";
  std::string analyze_out = "analysis";
  bool svg = false, log10_display = false;
  analyze->add_option("--level", level, "outcome | workload | trace")
      ->check(CLI::IsMember({"outcome", "workload", "trace"}));
  analyze->add_option("--reference", reference,
                      "reference model id (default: first seen)");
  analyze->add_option("--w-variant", w_variant,
                      "poi | needle_only | poi_plus_cN:<c>");
  analyze->add_option("--out", analyze_out, "output directory")
      ->capture_default_str();
  analyze->add_flag("--svg", svg, "also write waterfall.svg");
  analyze->add_flag("--log10", log10_display,
                    "add base-10 display values to waterfall.json");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate synthetic puzzle suites");
  SweepOpts gen_sweep;
  gen_sweep.attach(gen);
  std::string gen_out = "suite";
  bool gen_archetypes = false;
  std::int64_t gen_budget = 32768;
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();
  gen->add_flag("--archetypes", gen_archetypes,
                "also simulate the three archetype models");
  gen->add_option("--budget", gen_budget, "token budget for simulated runs");

  // simulate-archetypes
  auto* sim = app.add_subcommand(
      "simulate-archetypes",
      "Generate a suite and simulate the three archetype models");
  SweepOpts sim_sweep;
  sim_sweep.attach(sim);
  std::string sim_out = "archetypes";
  std::int64_t sim_budget = 32768;
  sim->add_option("--out", sim_out, "output directory")->capture_default_str();
  sim->add_option("--budget", sim_budget, "token budget for simulated runs");

  // stats
  auto* stats = app.add_subcommand("stats", "Statistical utilities");
  stats->require_subcommand(1);
  auto* boot = stats->add_subcommand("bootstrap",
                                     "Percentile bootstrap CI per model");
  DatasetOpts boot_data;
  boot_data.attach(boot);
  std::string boot_model, boot_metric = "e0", boot_out;
  int boot_resamples = 500;
  double boot_level = 0.95;
  std::uint64_t boot_seed = 0;
  boot->add_option("--model", boot_model, "model id (default: all models)");
  boot->add_option("--metric", boot_metric, "e0 | acc | mean_tokens")
      ->check(CLI::IsMember({"e0", "acc", "mean_tokens"}));
  boot->add_option("--resamples", boot_resamples)->capture_default_str();
  boot->add_option("--level", boot_level)->capture_default_str();
  boot->add_option("--seed", boot_seed, "seed (EFFDECOMP_SEED overrides default)");
  boot->add_option("--out", boot_out, "output JSON path (default: stdout)");

  auto* rho_cmd = stats->add_subcommand(
      "spearman", "Rank correlation of a two-column numeric file");
  std::string rho_file;
  rho_cmd->add_option("file", rho_file, "two numeric columns per line")->required();

  auto* sel = stats->add_subcommand("selection",
                                    "Token selection effect per model");
  DatasetOpts sel_data;
  sel_data.attach(sel);
  std::string sel_out;
  sel->add_option("--out", sel_out, "output CSV path (default: stdout)");

  // verify-fixture
  app.add_subcommand("verify-fixture",
                     "Consistency checks on the embedded leaderboard fixture");

  // w-sensitivity
  auto* wsens = app.add_subcommand(
      "w-sensitivity", "Verbosity-ranking robustness across workload variants");
  DatasetOpts wsens_data;
  wsens_data.attach(wsens);
  std::vector<std::string> wsens_variants = {"poi", "needle_only",
                                             "poi_plus_cN:1", "poi_plus_cN:2"};
  std::string wsens_out;
  wsens->add_option("--variants", wsens_variants, "workload variant names")
      ->capture_default_str();
  wsens->add_option("--out", wsens_out, "output JSON path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      RunDataset ds = validate_data.load();
      std::cout << "ok: " << ds.outcomes.size() << " outcomes, "
                << ds.metadata.size() << " metadata, " << ds.traces.size()
                << " traces, " << ds.model_ids().size() << " models\n";
      return kExitOk;
    }
    if (analyze->parsed())
      return run_analyze(analyze_data, level, reference, w_variant, analyze_out,
                         svg, log10_display);
    if (gen->parsed())
      return run_generate(gen_sweep, gen_sweep.effective_seed(gen), gen_out,
                          gen_archetypes, gen_budget);
    if (sim->parsed())
      return run_generate(sim_sweep, sim_sweep.effective_seed(sim), sim_out,
                          /*archetypes=*/true, sim_budget);
    if (boot->parsed())
      return run_bootstrap(boot_data, boot_model, boot_metric, boot_resamples,
                           boot_level,
                           boot->count("--seed") ? boot_seed
                                                 : default_seed(boot_seed),
                           boot_out);
    if (rho_cmd->parsed()) return run_spearman(rho_file);
    if (sel->parsed()) return run_selection(sel_data, sel_out);
    if (app.get_subcommand("verify-fixture")->parsed()) return run_verify_fixture();
    if (wsens->parsed())
      return run_w_sensitivity(wsens_data, wsens_variants, wsens_out);
  } catch (const IdentityViolation& e) {
    std::cerr << "identity violation: " << e.what() << "\n";
    return kExitIdentity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
