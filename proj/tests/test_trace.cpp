#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "effdecomp/trace.hpp"

using namespace effdecomp;

namespace {

std::vector<std::string> texts(const std::vector<AnalysisToken>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.text);
  return out;
}

int count(const std::vector<char>& mask) {
  return std::accumulate(mask.begin(), mask.end(), 0,
                         [](int a, char b) { return a + (b != 0); });
}

using Ontology = std::vector<std::pair<std::string, std::string>>;

InstanceMetadata meta_with(const std::string& id, int k, Ontology ontology) {
  InstanceMetadata m;
  m.instance_id = id;
  m.n_statements = 1;
  m.needle_fraction = 0.5;
  m.statements = {{k, 0, false}};
  m.ontology = std::move(ontology);
  return m;
}

TraceRecord trace_rec(const std::string& id, const std::string& model,
                      std::string text, std::string prompt = "") {
  return {id, model, std::move(text), std::move(prompt)};
}

}  // namespace

TEST_CASE("analysis tokenization") {
  CHECK(texts(analysis_tokenize("Let me think.")) ==
        std::vector<std::string>{"let", "me", "think"});
  CHECK(texts(analysis_tokenize("sci-fi book!")) ==
        std::vector<std::string>{"sci-fi", "book"});
  CHECK(analysis_tokenize("").empty());
  // Spans reference the original text.
  auto toks = analysis_tokenize("Let me think.");
  CHECK(toks[2].begin == 7);
  CHECK(toks[2].end == 12);
  // Leading/trailing hyphens are separators; internal ones join.
  CHECK(texts(analysis_tokenize("-x- a--b")) ==
        std::vector<std::string>{"x", "a", "b"});
}

TEST_CASE("grounded mask needs a matching category anchor nearby") {
  AnalysisParams params;
  auto toks = analysis_tokenize("anna moved to the port");
  auto g1 = grounded_mask(toks, {{"location", "port"}}, params);
  CHECK(count(g1) == 5);  // window +/-6 around the value covers everything

  auto g2 = grounded_mask(toks, {{"hair", "port"}}, params);
  CHECK(count(g2) == 0);  // "hair" anchors absent near the mention

  auto g3 = grounded_mask(toks, {}, params);
  CHECK(count(g3) == 0);
}

TEST_CASE("grounded mask reports categories without anchor sets") {
  AnalysisParams params;
  auto toks = analysis_tokenize("anna moved to the port");
  std::vector<std::string> missing;
  auto g = grounded_mask(toks, {{"mystery_category", "port"}}, params, &missing);
  CHECK(count(g) == 0);
  REQUIRE(missing.size() == 1);
  CHECK(missing[0] == "mystery_category");
}

TEST_CASE("grounded mask window semantics") {
  AnalysisParams params;
  // Anchor at token distance 6 grounds the window; distance 7 does not.
  auto near = analysis_tokenize("moved f1 f2 f3 f4 f5 port");
  CHECK(count(grounded_mask(near, {{"location", "port"}}, params)) == 7);
  auto far = analysis_tokenize("moved f1 f2 f3 f4 f5 f6 port");
  CHECK(count(grounded_mask(far, {{"location", "port"}}, params)) == 0);

  // Widening the window never decreases coverage.
  AnalysisParams narrow = params;
  narrow.window = 2;
  auto toks = analysis_tokenize("x1 x2 x3 x4 x5 moved to the port y1 y2 y3 y4 y5");
  Ontology onto = {{"location", "port"}};
  CHECK(count(grounded_mask(toks, onto, narrow)) <=
        count(grounded_mask(toks, onto, params)));

  // Adding an ontology pair never decreases coverage.
  auto base = grounded_mask(toks, onto, params);
  Ontology more = onto;
  more.emplace_back("recent_read", "x3");
  auto extended = grounded_mask(toks, more, params);
  CHECK(count(extended) >= count(base));
}

TEST_CASE("multi-word values and plural aliases ground as sequences") {
  AnalysisParams params;
  auto toks = analysis_tokenize("she moved to the old port yesterday");
  CHECK(count(grounded_mask(toks, {{"location", "old port"}}, params)) > 0);
  auto plural = analysis_tokenize("wearing red socks, the blue gloves");
  CHECK(count(grounded_mask(plural, {{"clothes_gloves", "glove"}}, params)) > 0);
}

TEST_CASE("repetition mask: repeated lines") {
  AnalysisParams params;
  const std::string two = "go to the port now\ngo to the port now\n";
  auto toks = analysis_tokenize(two);
  CHECK(count(repetition_mask(two, toks, params)) ==
        static_cast<int>(toks.size()));

  // Short normalized lines (< min_line_tokens) never mass-flag.
  const std::string shorts = "ok\nok\nok\n";
  auto stoks = analysis_tokenize(shorts);
  CHECK(count(repetition_mask(shorts, stoks, params)) == 0);
}

TEST_CASE("repetition mask: no repeats at all") {
  AnalysisParams params;
  std::string text;
  for (int i = 0; i < 20; ++i) text += "w" + std::to_string(i) + " ";
  auto toks = analysis_tokenize(text);
  CHECK(count(repetition_mask(text, toks, params)) == 0);
}

TEST_CASE("repetition mask: repeated 8-gram marks both copies, filler unmarked") {
  AnalysisParams params;
  const std::string text = "a b c d e f g h x a b c d e f g h";
  auto toks = analysis_tokenize(text);
  auto r = repetition_mask(text, toks, params);
  REQUIRE(toks.size() == 17);
  for (int j = 0; j < 8; ++j) CHECK(r[j]);
  CHECK_FALSE(r[8]);  // the distinct filler token
  for (int j = 9; j < 17; ++j) CHECK(r[j]);
}

TEST_CASE("prompt-copy mask") {
  AnalysisParams params;
  const std::string sentence =
      "p1 p2 p3 p4 p5 p6 p7 p8 p9 p10 p11 p12";  // 12 tokens
  auto prompt = analysis_tokenize("intro words " + sentence + " outro words");
  {
    auto toks = analysis_tokenize("thinking " + sentence + " done");
    auto c = prompt_copy_mask(toks, prompt, params);
    CHECK(count(c) == 12);
    CHECK_FALSE(c.front());
    CHECK_FALSE(c.back());
  }
  {
    // Sharing only an 11-token run never marks anything.
    auto toks = analysis_tokenize("thinking p1 p2 p3 p4 p5 p6 p7 p8 p9 p10 p11 done");
    CHECK(count(prompt_copy_mask(toks, prompt, params)) == 0);
  }
  {
    auto toks = analysis_tokenize(sentence);
    CHECK(count(prompt_copy_mask(toks, analysis_tokenize(""), params)) == 0);
  }
}

TEST_CASE("compression ratio extremes") {
  std::string loop;
  for (int i = 0; i < 100; ++i) loop += "the same line repeated over and over\n";
  CHECK(compression_ratio(loop) < 0.1);
  CHECK(compression_ratio("hi") <= 1.0);  // clamped despite container overhead
}

TEST_CASE("analyze_trace composes masks") {
  auto meta = meta_with("i1", 2, {{"location", "port"}});
  {
    auto res = analyze_trace(trace_rec("i1", "m", "anna moved to the port"), meta,
                             200);
    CHECK(res.sigma == doctest::Approx(1.0));
    CHECK(res.t_sig == doctest::Approx(200.0));
    CHECK_FALSE(res.degenerate);
    for (std::size_t j = 0; j < res.signal.size(); ++j)
      CHECK(res.signal[j] ==
            (res.grounded[j] && !res.repetitive[j] && !res.copied[j]));
  }
  {
    // Fully repeated trace: sigma = 0 regardless of grounding.
    auto res = analyze_trace(
        trace_rec("i1", "m",
                  "anna moved to the port\nanna moved to the port"),
        meta, 200);
    CHECK(res.sigma == 0.0);
  }
  {
    auto res = analyze_trace(trace_rec("i1", "m", ""), meta, 200);
    CHECK(res.degenerate);
    CHECK(res.sigma == 0.0);
    CHECK(res.sigma_c == 1.0);
  }
  {
    std::string loop;
    for (int i = 0; i < 100; ++i) loop += "looping on the same line here\n";
    auto res = analyze_trace(trace_rec("i1", "m", loop), meta, 200);
    CHECK(res.sigma_c < 0.1);
  }
}

TEST_CASE("appending a verbatim copy strictly decreases sigma") {
  auto meta = meta_with("i1", 2, {{"location", "port"}});
  const std::string base = "anna moved to the port\nthen she waited for a while";
  auto before = analyze_trace(trace_rec("i1", "m", base), meta, 100);
  REQUIRE(before.sigma > 0.0);
  auto after = analyze_trace(trace_rec("i1", "m", base + "\n" + base), meta, 100);
  CHECK(after.sigma < before.sigma);
}

TEST_CASE("mask determinism across repeated runs") {
  auto meta = meta_with("i1", 2, {{"location", "port"}, {"hair", "red"}});
  const std::string text =
      "her hair is red\nanna moved to the port\nanna moved to the port\n"
      "p1 p2 p3 p4 p5 p6 p7 p8 p9 p10 p11 p12";
  const std::string prompt = "p1 p2 p3 p4 p5 p6 p7 p8 p9 p10 p11 p12 end";
  auto first = analyze_trace(trace_rec("i1", "m", text, prompt), meta, 500);
  for (int run = 0; run < 10; ++run) {
    auto again = analyze_trace(trace_rec("i1", "m", text, prompt), meta, 500);
    CHECK(again.grounded == first.grounded);
    CHECK(again.repetitive == first.repetitive);
    CHECK(again.copied == first.copied);
    CHECK(again.signal == first.signal);
    CHECK(again.sigma == first.sigma);
    CHECK(again.sigma_c == first.sigma_c);
  }
}

namespace {

// Two-model dataset realizing sigma = [1.0, 0.5] for model "a" on T = [100, 300]
// and an inline-doubled variant "b" (T doubled, new content repetitive).
RunDataset sigma_dataset() {
  RunDataset ds;
  ds.metadata.emplace("i1", meta_with("i1", 2, {{"location", "port"}}));
  ds.metadata.emplace("i2", meta_with("i2", 5, {{"location", "beach"}}));

  const std::string g1 = "anna moved to the port now";        // 6 tokens, grounded
  const std::string g2 = "anna moved to the beach ok";        // 6 tokens, grounded
  const std::string rep1 = "zig zag zug\nzig zag zug";        // 6 tokens, repetitive
  const std::string rep2 = "foo bar baz\nfoo bar baz";        // 6 tokens, repetitive
  const std::string rep3 = "hip hop hup\nhip hop hup";
  const std::string rep4 = "tic tac toe\ntic tac toe";

  auto out = [&ds](const char* id, const char* model, std::int64_t t) {
    OutcomeRecord r;
    r.instance_id = id;
    r.model_id = model;
    r.succ = 1;
    r.output_tokens = t;
    ds.outcomes.push_back(r);
  };
  auto tr = [&ds](const char* id, const char* model, const std::string& text) {
    ds.traces.emplace(std::make_pair(std::string(id), std::string(model)),
                      trace_rec(id, model, text));
  };

  out("i1", "a", 100);
  tr("i1", "a", g1);                         // sigma 1.0
  out("i2", "a", 300);
  tr("i2", "a", g2 + "\n" + rep1);           // sigma 0.5
  out("i1", "b", 200);
  tr("i1", "b", g1 + "\n" + rep2);           // sigma 0.5, T doubled
  out("i2", "b", 600);
  // doubles a's i2 trace (12 tokens) with 12 more repetitive tokens
  tr("i2", "b", g2 + "\n" + rep1 + "\n" + rep3 + "\n" + rep4);  // sigma 0.25
  return ds;
}

}  // namespace

TEST_CASE("summarize_trace_quality: token-weighted signal fraction") {
  RunDataset ds = sigma_dataset();
  auto a = summarize_trace_quality(ds, "a");
  CHECK(a.q_trace == doctest::Approx(0.625).epsilon(1e-12));  // (100+150)/400
  CHECK(a.coverage == doctest::Approx(1.0));
  // Grounded windows spill over the value span: i2 grounds 11 of 12 tokens,
  // five of which are also repetitive filler.
  CHECK(a.g_span == doctest::Approx(23.0 / 24.0).epsilon(1e-12));
  CHECK(a.g_rep == doctest::Approx(5.0 / 24.0).epsilon(1e-12));
  CHECK(a.g_rep <= a.g_span);
}

TEST_CASE("identical sigma across traces makes q_trace equal sigma") {
  RunDataset ds;
  ds.metadata.emplace("i1", meta_with("i1", 2, {{"location", "port"}}));
  ds.metadata.emplace("i2", meta_with("i2", 3, {{"location", "port"}}));
  for (const char* id : {"i1", "i2"}) {
    OutcomeRecord r;
    r.instance_id = id;
    r.model_id = "m";
    r.succ = 1;
    r.output_tokens = id[1] == '1' ? 100 : 900;
    ds.outcomes.push_back(r);
    ds.traces.emplace(std::make_pair(std::string(id), std::string("m")),
                      trace_rec(id, "m", "anna moved to the port"));
  }
  auto s = summarize_trace_quality(ds, "m");
  CHECK(s.q_trace == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trace decomposition: self zero; inline doubling costs ln 2 in q_trace") {
  RunDataset ds = sigma_dataset();
  std::vector<TraceQualitySummary> ss = {summarize_trace_quality(ds, "a"),
                                         summarize_trace_quality(ds, "b")};
  auto deltas = decompose_trace_relative(ss, "a");
  REQUIRE(deltas.size() == 2);
  CHECK(deltas[0].defined);
  CHECK(deltas[0].d_log_e0 == 0.0);
  CHECK(deltas[0].d_log_q_trace == 0.0);

  CHECK(deltas[1].defined);
  CHECK(deltas[1].d_log_q_trace == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
  CHECK(deltas[1].d_log_r_ctx == doctest::Approx(0.0));
  CHECK(deltas[1].d_log_r_logic == doctest::Approx(0.0));
  CHECK(deltas[1].d_log_vo_sig_bar == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(deltas[1].d_log_kappa_sig == doctest::Approx(0.0).epsilon(1e-9));
  const double sum = deltas[1].d_log_r_ctx + deltas[1].d_log_r_logic +
                     deltas[1].d_log_q_trace - deltas[1].d_log_vo_sig_bar -
                     deltas[1].d_log_kappa_sig;
  CHECK(std::abs(deltas[1].d_log_e0 - sum) <= 1e-12);
}

TEST_CASE("signal never exceeds grounded") {
  auto meta = meta_with("i1", 2, {{"location", "port"}});
  const std::string text =
      "anna moved to the port\nanna moved to the port\nsomething else entirely";
  auto res = analyze_trace(trace_rec("i1", "m", text), meta, 100);
  CHECK(count(res.signal) <= count(res.grounded));
}
