#include "effdecomp/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "effdecomp/workload.hpp"

namespace effdecomp {

using nlohmann::json;

OutcomeClass classify_outcome(const OutcomeRecord& rec) {
  if (rec.truncated) return OutcomeClass::Truncation;
  return rec.succ ? OutcomeClass::Success : OutcomeClass::LogicFailure;
}

const char* to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::Truncation: return "truncation";
    case OutcomeClass::Success: return "success";
    case OutcomeClass::LogicFailure: return "logic_failure";
  }
  return "?";
}

bool flag_truncation(std::int64_t output_tokens, std::int64_t input_tokens,
                     std::int64_t budget) {
  if (output_tokens < 0 || input_tokens < 0 || budget < 0)
    throw IngestError("flag_truncation: negative argument");
  if (budget <= input_tokens)
    throw IngestError("flag_truncation: budget <= input_tokens, record unusable");
  return output_tokens >= budget - input_tokens;
}

std::vector<std::string> RunDataset::model_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& rec : outcomes)
    if (seen.insert(rec.model_id).second) ids.push_back(rec.model_id);
  return ids;
}

std::vector<OutcomeRecord> RunDataset::outcomes_for(const std::string& model_id) const {
  std::vector<OutcomeRecord> out;
  for (const auto& rec : outcomes)
    if (rec.model_id == model_id) out.push_back(rec);
  return out;
}

const TraceRecord* RunDataset::find_trace(const std::string& instance_id,
                                          const std::string& model_id) const {
  auto it = traces.find({instance_id, model_id});
  return it == traces.end() ? nullptr : &it->second;
}

namespace {

[[noreturn]] void fail(const std::string& file, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << file << ":" << line << ": " << what;
  throw IngestError(os.str());
}

json parse_line(const std::string& file, std::size_t line, const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(file, line, "malformed JSON object");
  return j;
}

template <typename T>
T require(const json& j, const char* field, const std::string& file, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end()) fail(file, line, std::string("missing field '") + field + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(file, line, std::string("field '") + field + "' has wrong type");
  }
}

OutcomeRecord parse_outcome(const json& j, const std::string& file, std::size_t line) {
  OutcomeRecord rec;
  rec.instance_id = require<std::string>(j, "instance_id", file, line);
  rec.model_id = require<std::string>(j, "model_id", file, line);
  rec.succ = require<int>(j, "succ", file, line);
  rec.output_tokens = require<std::int64_t>(j, "output_tokens", file, line);
  rec.truncated = require<bool>(j, "truncated", file, line);
  if (j.contains("input_tokens"))
    rec.input_tokens = require<std::int64_t>(j, "input_tokens", file, line);
  if (j.contains("output_chars"))
    rec.output_chars = require<std::int64_t>(j, "output_chars", file, line);

  if (rec.succ != 0 && rec.succ != 1) fail(file, line, "field 'succ' must be 0 or 1");
  if (rec.output_tokens < 1) fail(file, line, "field 'output_tokens' must be >= 1");
  if (rec.truncated && rec.succ == 1)
    fail(file, line, "truncated record cannot have succ=1");
  if (rec.input_tokens && *rec.input_tokens < 0)
    fail(file, line, "field 'input_tokens' must be >= 0");
  if (rec.output_chars && *rec.output_chars < 0)
    fail(file, line, "field 'output_chars' must be >= 0");
  return rec;
}

std::string normalize_value(std::string v) {
  for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return v;
}

InstanceMetadata parse_metadata(const json& j, const std::string& file, std::size_t line) {
  InstanceMetadata meta;
  meta.instance_id = require<std::string>(j, "instance_id", file, line);
  meta.n_statements = require<int>(j, "N", file, line);
  meta.difficulty = require<int>(j, "d", file, line);
  meta.needle_fraction = require<double>(j, "rho", file, line);
  if (meta.n_statements < 1) fail(file, line, "field 'N' must be >= 1");
  if (!(meta.needle_fraction > 0.0 && meta.needle_fraction < 1.0))
    fail(file, line, "field 'rho' must be in (0,1)");

  auto stmts = require<json>(j, "statements", file, line);
  if (!stmts.is_array()) fail(file, line, "field 'statements' must be an array");
  for (const auto& s : stmts) {
    StatementMeta sm;
    sm.k = require<int>(s, "k", file, line);
    sm.m = require<int>(s, "m", file, line);
    sm.needle = require<bool>(s, "needle", file, line);
    if (sm.k < 1) fail(file, line, "statement field 'k' must be >= 1");
    if (sm.m < 0) fail(file, line, "statement field 'm' must be >= 0");
    if (sm.needle && sm.m < 1) fail(file, line, "needle statement requires m >= 1");
    meta.statements.push_back(sm);
  }
  if (static_cast<int>(meta.statements.size()) != meta.n_statements)
    fail(file, line, "statement count does not match 'N'");

  auto onto = require<json>(j, "ontology", file, line);
  if (!onto.is_array()) fail(file, line, "field 'ontology' must be an array");
  for (const auto& p : onto) {
    auto cat = require<std::string>(p, "category", file, line);
    auto val = normalize_value(require<std::string>(p, "value", file, line));
    if (val.empty()) fail(file, line, "ontology value empty after normalization");
    meta.ontology.emplace_back(std::move(cat), std::move(val));
  }
  meta.poi = require<std::string>(j, "poi", file, line);
  if (j.contains("w_poi")) {
    meta.w_poi = require<std::int64_t>(j, "w_poi", file, line);
    if (*meta.w_poi < 1) fail(file, line, "field 'w_poi' must be >= 1");
    if (*meta.w_poi != compute_w_poi(meta))
      fail(file, line, "field 'w_poi' does not match recomputed value");
  }
  return meta;
}

TraceRecord parse_trace(const json& j, const std::string& file, std::size_t line) {
  TraceRecord tr;
  tr.instance_id = require<std::string>(j, "instance_id", file, line);
  tr.model_id = require<std::string>(j, "model_id", file, line);
  tr.trace_text = require<std::string>(j, "trace_text", file, line);
  tr.prompt_text = require<std::string>(j, "prompt_text", file, line);
  return tr;
}

}  // namespace

RunDataset parse_dataset(std::istream& outcomes, std::istream* metadata,
                         std::istream* traces, std::int64_t token_budget) {
  if (token_budget < 1) throw IngestError("token_budget must be positive");
  RunDataset ds;
  ds.token_budget = token_budget;

  std::string line;
  std::size_t lineno = 0;
  std::set<std::pair<std::string, std::string>> keys;
  while (std::getline(outcomes, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto rec = parse_outcome(parse_line("outcomes.jsonl", lineno, line),
                             "outcomes.jsonl", lineno);
    if (!keys.insert({rec.instance_id, rec.model_id}).second)
      fail("outcomes.jsonl", lineno,
           "duplicate (instance_id, model_id): (" + rec.instance_id + ", " +
               rec.model_id + ")");
    ds.outcomes.push_back(std::move(rec));
  }

  if (metadata) {
    lineno = 0;
    while (std::getline(*metadata, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto meta = parse_metadata(parse_line("metadata.jsonl", lineno, line),
                                 "metadata.jsonl", lineno);
      if (!ds.metadata.emplace(meta.instance_id, meta).second)
        fail("metadata.jsonl", lineno, "duplicate instance_id: " + meta.instance_id);
    }
    // Join check: every outcome must resolve when metadata is supplied.
    std::set<std::string> dangling;
    for (const auto& rec : ds.outcomes)
      if (!ds.metadata.count(rec.instance_id)) dangling.insert(rec.instance_id);
    if (!dangling.empty()) {
      std::ostringstream os;
      os << "outcomes reference unknown instance_id(s):";
      for (const auto& id : dangling) os << " " << id;
      throw IngestError(os.str());
    }
  }

  if (traces) {
    lineno = 0;
    while (std::getline(*traces, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto tr = parse_trace(parse_line("traces.jsonl", lineno, line),
                            "traces.jsonl", lineno);
      std::pair<std::string, std::string> key{tr.instance_id, tr.model_id};
      if (!ds.traces.emplace(key, std::move(tr)).second)
        fail("traces.jsonl", lineno, "duplicate (instance_id, model_id)");
    }
  }
  return ds;
}

RunDataset ingest_dataset(const std::string& outcomes_path,
                          const std::string& metadata_path,
                          const std::string& traces_path,
                          std::int64_t token_budget) {
  std::ifstream outcomes(outcomes_path);
  if (!outcomes) throw IngestError("cannot open " + outcomes_path);
  std::ifstream metadata, traces;
  if (!metadata_path.empty()) {
    metadata.open(metadata_path);
    if (!metadata) throw IngestError("cannot open " + metadata_path);
  }
  if (!traces_path.empty()) {
    traces.open(traces_path);
    if (!traces) throw IngestError("cannot open " + traces_path);
  }
  return parse_dataset(outcomes, metadata_path.empty() ? nullptr : &metadata,
                       traces_path.empty() ? nullptr : &traces, token_budget);
}

void write_outcomes_jsonl(std::ostream& out, const std::vector<OutcomeRecord>& recs) {
  for (const auto& r : recs) {
    json j{{"instance_id", r.instance_id},
           {"model_id", r.model_id},
           {"succ", r.succ},
           {"output_tokens", r.output_tokens},
           {"truncated", r.truncated}};
    if (r.input_tokens) j["input_tokens"] = *r.input_tokens;
    if (r.output_chars) j["output_chars"] = *r.output_chars;
    out << j.dump() << "\n";
  }
}

void write_metadata_jsonl(std::ostream& out,
                          const std::map<std::string, InstanceMetadata>& meta) {
  for (const auto& [id, m] : meta) {
    json stmts = json::array();
    for (const auto& s : m.statements)
      stmts.push_back({{"k", s.k}, {"m", s.m}, {"needle", s.needle}});
    json onto = json::array();
    for (const auto& [cat, val] : m.ontology)
      onto.push_back({{"category", cat}, {"value", val}});
    json j{{"instance_id", m.instance_id},
           {"N", m.n_statements},
           {"d", m.difficulty},
           {"rho", m.needle_fraction},
           {"statements", stmts},
           {"ontology", onto},
           {"poi", m.poi}};
    if (m.w_poi) j["w_poi"] = *m.w_poi;
    out << j.dump() << "\n";
  }
}

void write_traces_jsonl(
    std::ostream& out,
    const std::map<std::pair<std::string, std::string>, TraceRecord>& traces) {
  for (const auto& [key, t] : traces) {
    json j{{"instance_id", t.instance_id},
           {"model_id", t.model_id},
           {"trace_text", t.trace_text},
           {"prompt_text", t.prompt_text}};
    out << j.dump() << "\n";
  }
}

}  // namespace effdecomp
