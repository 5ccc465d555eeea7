#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace effdecomp {

// Thrown for malformed input files and schema violations. Message carries
// file/line context where available.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutcomeRecord {
  std::string instance_id;
  std::string model_id;
  int succ = 0;                       // 1 iff final answer correct
  std::int64_t output_tokens = 1;     // provider-reported model tokens
  bool truncated = false;             // token budget truncation
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_chars;

  bool operator==(const OutcomeRecord&) const = default;
};

enum class OutcomeClass { Truncation, Success, LogicFailure };

OutcomeClass classify_outcome(const OutcomeRecord& rec);
const char* to_string(OutcomeClass c);

// True iff output_tokens >= budget - input_tokens. Throws IngestError when
// budget <= input_tokens (record unusable).
bool flag_truncation(std::int64_t output_tokens, std::int64_t input_tokens,
                     std::int64_t budget);

struct StatementMeta {
  int k = 1;           // condition clause count
  int m = 0;           // update clause count
  bool needle = false;

  bool operator==(const StatementMeta&) const = default;
};

struct InstanceMetadata {
  std::string instance_id;
  int n_statements = 0;
  int difficulty = 1;
  double needle_fraction = 0.0;
  std::vector<StatementMeta> statements;
  std::vector<std::pair<std::string, std::string>> ontology;  // (category, value)
  std::string poi;
  std::optional<std::int64_t> w_poi;

  bool operator==(const InstanceMetadata&) const = default;
};

struct TraceRecord {
  std::string instance_id;
  std::string model_id;
  std::string trace_text;
  std::string prompt_text;

  bool operator==(const TraceRecord&) const = default;
};

struct RunDataset {
  std::vector<OutcomeRecord> outcomes;
  std::map<std::string, InstanceMetadata> metadata;
  std::map<std::pair<std::string, std::string>, TraceRecord> traces;
  std::int64_t token_budget = 32768;

  bool operator==(const RunDataset&) const = default;

  // Distinct model ids in first-seen order.
  std::vector<std::string> model_ids() const;
  std::vector<OutcomeRecord> outcomes_for(const std::string& model_id) const;
  const TraceRecord* find_trace(const std::string& instance_id,
                                const std::string& model_id) const;
};

// File-based ingestion. Empty paths mean "not supplied".
RunDataset ingest_dataset(const std::string& outcomes_path,
                          const std::string& metadata_path = "",
                          const std::string& traces_path = "",
                          std::int64_t token_budget = 32768);

// Stream-based ingestion (used by tests and ingest_dataset).
RunDataset parse_dataset(std::istream& outcomes, std::istream* metadata,
                         std::istream* traces, std::int64_t token_budget = 32768);

void write_outcomes_jsonl(std::ostream& out, const std::vector<OutcomeRecord>& recs);
void write_metadata_jsonl(std::ostream& out,
                          const std::map<std::string, InstanceMetadata>& meta);
void write_traces_jsonl(
    std::ostream& out,
    const std::map<std::pair<std::string, std::string>, TraceRecord>& traces);

}  // namespace effdecomp
