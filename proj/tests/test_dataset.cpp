#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "effdecomp/dataset.hpp"
#include "effdecomp/outcome.hpp"

using namespace effdecomp;

namespace {

RunDataset parse(const std::string& outcomes, const std::string& metadata = "",
                 const std::string& traces = "") {
  std::istringstream o(outcomes), m(metadata), t(traces);
  return parse_dataset(o, metadata.empty() ? nullptr : &m,
                       traces.empty() ? nullptr : &t);
}

const char* kTwoOutcomes =
    R"({"instance_id":"i1","model_id":"a","succ":1,"output_tokens":100,"truncated":false})"
    "\n"
    R"({"instance_id":"i2","model_id":"a","succ":0,"output_tokens":200,"truncated":false})"
    "\n";

}  // namespace

TEST_CASE("classify_outcome partitions records") {
  CHECK(classify_outcome({"i", "m", 0, 10, true, {}, {}}) == OutcomeClass::Truncation);
  CHECK(classify_outcome({"i", "m", 1, 10, false, {}, {}}) == OutcomeClass::Success);
  CHECK(classify_outcome({"i", "m", 0, 10, false, {}, {}}) ==
        OutcomeClass::LogicFailure);
}

TEST_CASE("flag_truncation rule and boundary") {
  CHECK(flag_truncation(30000, 3000, 32768));
  CHECK_FALSE(flag_truncation(1000, 3000, 32768));
  CHECK(flag_truncation(29768, 3000, 32768));  // equality is truncation
  CHECK_THROWS_AS(flag_truncation(10, 32768, 32768), IngestError);
}

TEST_CASE("minimal well-formed ingestion without metadata") {
  RunDataset ds = parse(kTwoOutcomes);
  CHECK(ds.outcomes.size() == 2);
  CHECK(ds.metadata.empty());
  CHECK(ds.model_ids() == std::vector<std::string>{"a"});
}

TEST_CASE("non-positive output_tokens reports line and field") {
  const std::string bad =
      R"({"instance_id":"i1","model_id":"a","succ":0,"output_tokens":0,"truncated":false})"
      "\n";
  CHECK_THROWS_WITH_AS(parse(bad), doctest::Contains("output_tokens"), IngestError);
  try {
    parse(std::string(kTwoOutcomes) + bad);
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("dangling metadata join lists the missing id") {
  const std::string outcomes =
      R"({"instance_id":"i7","model_id":"a","succ":1,"output_tokens":10,"truncated":false})"
      "\n";
  const std::string metadata =
      R"({"instance_id":"i1","N":1,"d":1,"rho":0.5,"statements":[{"k":1,"m":0,"needle":false}],"ontology":[],"poi":"anna"})"
      "\n";
  CHECK_THROWS_WITH_AS(parse(outcomes, metadata), doctest::Contains("i7"),
                       IngestError);
}

TEST_CASE("truncated records cannot be scored correct") {
  const std::string bad =
      R"({"instance_id":"i1","model_id":"a","succ":1,"output_tokens":10,"truncated":true})"
      "\n";
  CHECK_THROWS_AS(parse(bad), IngestError);
}

TEST_CASE("duplicate (instance_id, model_id) rejected") {
  const std::string dup =
      R"({"instance_id":"i1","model_id":"a","succ":1,"output_tokens":10,"truncated":false})"
      "\n"
      R"({"instance_id":"i1","model_id":"a","succ":0,"output_tokens":20,"truncated":false})"
      "\n";
  CHECK_THROWS_WITH_AS(parse(dup), doctest::Contains("duplicate"), IngestError);
}

TEST_CASE("stored w_poi must match the recomputed value") {
  const std::string outcomes =
      R"({"instance_id":"i1","model_id":"a","succ":1,"output_tokens":10,"truncated":false})"
      "\n";
  const std::string good =
      R"({"instance_id":"i1","N":2,"d":1,"rho":0.5,"statements":[{"k":2,"m":1,"needle":true},{"k":1,"m":3,"needle":false}],"ontology":[],"poi":"anna","w_poi":4})"
      "\n";
  CHECK(parse(outcomes, good).metadata.at("i1").w_poi == 4);
  const std::string bad =
      R"({"instance_id":"i1","N":2,"d":1,"rho":0.5,"statements":[{"k":2,"m":1,"needle":true},{"k":1,"m":3,"needle":false}],"ontology":[],"poi":"anna","w_poi":5})"
      "\n";
  CHECK_THROWS_WITH_AS(parse(outcomes, bad), doctest::Contains("w_poi"), IngestError);
}

TEST_CASE("serialize then re-ingest round-trips the dataset") {
  const std::string metadata =
      R"({"instance_id":"i1","N":1,"d":3,"rho":0.4,"statements":[{"k":2,"m":1,"needle":true}],"ontology":[{"category":"location","value":"Port"}],"poi":"anna","w_poi":3})"
      "\n"
      R"({"instance_id":"i2","N":1,"d":3,"rho":0.4,"statements":[{"k":1,"m":0,"needle":false}],"ontology":[],"poi":"bob"})"
      "\n";
  const std::string traces =
      R"({"instance_id":"i1","model_id":"a","trace_text":"she moved, to the \"port\"","prompt_text":"p"})"
      "\n";
  RunDataset ds = parse(kTwoOutcomes, metadata, traces);
  CHECK(ds.metadata.at("i1").ontology[0].second == "port");  // normalized

  std::ostringstream o, m, t;
  write_outcomes_jsonl(o, ds.outcomes);
  write_metadata_jsonl(m, ds.metadata);
  write_traces_jsonl(t, ds.traces);
  RunDataset again = parse(o.str(), m.str(), t.str());
  CHECK(again == ds);
}

TEST_CASE("line order does not affect analysis results") {
  const std::string fwd = kTwoOutcomes;
  std::string l1 = fwd.substr(0, fwd.find('\n') + 1);
  std::string l2 = fwd.substr(fwd.find('\n') + 1);
  auto a = summarize_outcomes(parse(l1 + l2).outcomes_for("a"));
  auto b = summarize_outcomes(parse(l2 + l1).outcomes_for("a"));
  CHECK(a.e0 == b.e0);
  CHECK(a.mean_tokens == b.mean_tokens);
  CHECK(a.r_ctx == b.r_ctx);
}
