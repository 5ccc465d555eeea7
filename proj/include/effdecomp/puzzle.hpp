#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "effdecomp/dataset.hpp"

namespace effdecomp {

// Attribute categories tracked per person.
inline constexpr std::array<std::string_view, 12> kCategories = {
    "location",        "clothes_shirt", "clothes_pant",  "clothes_hat",
    "clothes_socks",   "clothes_gloves", "clothes_underwear", "hair",
    "recent_eat",      "recent_watch",  "recent_listen", "recent_read"};

using PersonState = std::map<std::string, std::string>;  // category -> value

struct Clause {
  std::string category;
  std::string value;
  bool operator==(const Clause&) const = default;
};

struct PuzzleStatement {
  std::vector<Clause> conditions;  // k_t clauses, distinct categories
  std::vector<Clause> updates;     // m_t clauses, distinct categories
  bool needle = false;
  bool operator==(const PuzzleStatement&) const = default;
};

struct PuzzleInstance {
  std::string instance_id;
  std::vector<std::pair<std::string, PersonState>> people;  // name -> initial state
  std::vector<PuzzleStatement> statements;
  std::string poi;
  std::string query_category;
  std::string gold_answer;
  int difficulty = 1;
  int n_statements = 0;
  double needle_fraction = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const PuzzleInstance&) const = default;
};

struct GeneratedInstance {
  PuzzleInstance instance;
  InstanceMetadata metadata;
  std::string prompt_text;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic for fixed (d, n, rho, seed). d in [1,10], n >= 1, rho in (0,1).
GeneratedInstance generate(int d, int n, double rho, std::uint64_t seed);

struct OracleResult {
  PersonState final_state;
  std::int64_t op_count = 0;  // condition checks + applied updates
};

// PoI-only solver: checks every statement's conditions against the PoI state,
// applies updates when all conditions hold.
OracleResult oracle_solve(const PuzzleInstance& instance);

// Full simulation: a statement applies to every person whose current state
// satisfies all conditions. Independent oracle for validation.
std::map<std::string, PersonState> brute_force_solve(const PuzzleInstance& instance);

enum class Archetype { concise_correct, verbose_engaged, degenerate_looper };

const char* to_string(Archetype a);

struct SimulatedRun {
  OutcomeRecord outcome;
  TraceRecord trace;
};

SimulatedRun simulate_archetype(const GeneratedInstance& gen, Archetype archetype,
                                std::uint64_t seed, std::int64_t token_budget = 32768);

}  // namespace effdecomp
