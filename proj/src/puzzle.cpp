#include "effdecomp/puzzle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "effdecomp/trace.hpp"
#include "effdecomp/workload.hpp"

namespace effdecomp {

namespace {

constexpr std::array<std::string_view, 12> kNames = {
    "anna",  "veronica", "alexander", "maria", "jonas",  "sophia",
    "david", "emma",     "lucas",     "olivia", "peter", "ingrid"};

constexpr std::array<std::string_view, 14> kLocations = {
    "port",   "inn",     "castle",   "school", "manor",  "courtyard", "pizzeria",
    "library", "harbor", "market",   "tavern", "garden", "bridge",    "tower"};
constexpr std::array<std::string_view, 14> kColors = {
    "red",    "blue",   "green", "yellow", "black", "white", "purple",
    "orange", "pink",   "gray",  "brown",  "cyan",  "teal",  "maroon"};
constexpr std::array<std::string_view, 14> kFoods = {
    "taco",  "pizza",    "sushi", "egg",  "sandwich", "salad", "burger",
    "soup",  "pasta",    "pancake", "waffle", "curry", "stew", "kebab"};
constexpr std::array<std::string_view, 14> kMovies = {
    "drama",   "mystery", "thriller",    "action",    "comedy",
    "romance", "horror",  "western",     "musical",   "documentary",
    "adventure", "sci-fi", "fantasy",    "crime"};
constexpr std::array<std::string_view, 14> kMusic = {
    "jazz",       "pop",       "rock",  "folk",    "disco",  "funk", "electronic",
    "classical",  "reggae",    "blues", "metal",   "country", "soul", "techno"};
constexpr std::array<std::string_view, 14> kBooks = {
    "novel",   "essay",     "sci-fi",  "thriller", "mystery",  "dictionary",
    "non-fiction", "poetry", "history", "biography", "fantasy", "romance",
    "travel",  "cookbook"};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic across platforms: bounded draws avoid
// std::uniform_int_distribution (implementation-defined sequences).
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  std::uint64_t next() { return engine(); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(static_cast<int>(v.size()))];
  }
};

struct Pools {
  std::vector<std::string> values_for(std::string_view category, int d) const {
    const std::size_t size = std::min<std::size_t>(4 + d, 14);
    auto take = [size](const auto& arr) {
      std::vector<std::string> out;
      for (std::size_t i = 0; i < size; ++i) out.emplace_back(arr[i]);
      return out;
    };
    if (category == "location") return take(kLocations);
    if (category == "hair") return take(kColors);
    if (category.starts_with("clothes_")) return take(kColors);
    if (category == "recent_eat") return take(kFoods);
    if (category == "recent_watch") return take(kMovies);
    if (category == "recent_listen") return take(kMusic);
    if (category == "recent_read") return take(kBooks);
    throw GenerationError("unknown category: " + std::string(category));
  }
};

std::vector<std::string> distinct_categories(Rng& rng, int count) {
  std::vector<int> idx(kCategories.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Fisher-Yates prefix shuffle
  for (int i = 0; i < count; ++i) {
    int j = i + rng.below(static_cast<int>(idx.size()) - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.emplace_back(kCategories[idx[i]]);
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

struct GarmentInfo {
  const char* noun;
  bool article;  // "a red shirt" vs "red socks"
};

GarmentInfo garment(std::string_view category) {
  if (category == "clothes_shirt") return {"shirt", true};
  if (category == "clothes_pant") return {"pant", true};
  if (category == "clothes_hat") return {"hat", true};
  if (category == "clothes_socks") return {"socks", false};
  if (category == "clothes_gloves") return {"gloves", false};
  if (category == "clothes_underwear") return {"underwear", false};
  throw GenerationError("not a garment category: " + std::string(category));
}

std::string condition_phrase(const Clause& c) {
  std::ostringstream os;
  if (c.category == "location") {
    os << "located in the " << c.value;
  } else if (c.category == "hair") {
    os << "having " << c.value << " hair";
  } else if (c.category == "recent_eat") {
    os << "which most recently ate a " << c.value;
  } else if (c.category == "recent_watch") {
    os << "which most recently watched a " << c.value << " movie";
  } else if (c.category == "recent_listen") {
    os << "which most recently listened to " << c.value << " music";
  } else if (c.category == "recent_read") {
    os << "which most recently read a " << c.value << " book";
  } else {
    auto g = garment(c.category);
    os << "wearing " << (g.article ? "a " : "") << c.value << " " << g.noun;
  }
  return os.str();
}

std::string update_phrase(const Clause& c) {
  std::ostringstream os;
  if (c.category == "location") {
    os << "move to the " << c.value;
  } else if (c.category == "hair") {
    os << "color their hair to " << c.value;
  } else if (c.category == "recent_eat") {
    os << "eat a " << c.value;
  } else if (c.category == "recent_watch") {
    os << "watch a " << c.value << " movie";
  } else if (c.category == "recent_listen") {
    os << "listen to " << c.value << " music";
  } else if (c.category == "recent_read") {
    os << "read a " << c.value << " book";
  } else {
    auto g = garment(c.category);
    if (c.category == "clothes_shirt" || c.category == "clothes_pant" ||
        c.category == "clothes_hat")
      os << "change into a " << c.value << " " << g.noun;
    else
      os << "put on " << c.value << " " << g.noun;
  }
  return os.str();
}

std::string query_text(const std::string& category, const std::string& name) {
  const std::string cap = capitalize(name);
  if (category == "location") return "Where is " + cap + " located now?";
  if (category == "hair") return "What is " + cap + "'s hair color now?";
  if (category == "recent_eat") return "What did " + cap + " most recently eat?";
  if (category == "recent_watch")
    return "What movie genre did " + cap + " most recently watch?";
  if (category == "recent_listen")
    return "What music genre did " + cap + " most recently listen to?";
  if (category == "recent_read")
    return "What book genre did " + cap + " most recently read?";
  auto g = garment(category);
  return "What is the color of " + cap + "'s " + g.noun + " now?";
}

std::string initial_state_line(const std::string& name, const PersonState& state) {
  std::ostringstream os;
  os << capitalize(name) << " is located in the " << state.at("location");
  for (std::string_view cat :
       {"clothes_shirt", "clothes_pant", "clothes_hat", "clothes_socks",
        "clothes_gloves", "clothes_underwear"}) {
    auto g = garment(cat);
    os << " and is wearing " << (g.article ? "a " : "")
       << state.at(std::string(cat)) << " " << g.noun;
  }
  os << " and has " << state.at("hair") << " hair";
  os << " and most recently ate a " << state.at("recent_eat");
  os << " and most recently watched a " << state.at("recent_watch") << " movie";
  os << " and most recently listened to " << state.at("recent_listen") << " music";
  os << " and most recently read a " << state.at("recent_read") << " book.";
  return os.str();
}

std::string render_prompt(const PuzzleInstance& inst) {
  std::ostringstream os;
  os << "Solve the following logic puzzle by tracking the people and their "
        "attributes.\n\n";
  for (const auto& [name, state] : inst.people)
    os << initial_state_line(name, state) << "\n";
  os << "\nApply the following statements in order:\n";
  for (std::size_t t = 0; t < inst.statements.size(); ++t) {
    const auto& st = inst.statements[t];
    os << (t + 1) << ". The people ";
    for (std::size_t i = 0; i < st.conditions.size(); ++i) {
      if (i) os << " and ";
      os << condition_phrase(st.conditions[i]);
    }
    os << " ";
    for (std::size_t i = 0; i < st.updates.size(); ++i) {
      if (i) os << " and ";
      os << update_phrase(st.updates[i]);
    }
    os << ".\n";
  }
  os << "\n" << query_text(inst.query_category, inst.poi)
     << " Answer with a single value.\n";
  return os.str();
}

bool matches(const PersonState& state, const std::vector<Clause>& conditions) {
  for (const auto& c : conditions)
    if (state.at(c.category) != c.value) return false;
  return true;
}

}  // namespace

GeneratedInstance generate(int d, int n, double rho, std::uint64_t seed) {
  if (d < 1 || d > 10) throw GenerationError("difficulty d must be in [1,10]");
  if (n < 1) throw GenerationError("N must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw GenerationError("rho must be in (0,1)");

  Rng rng(splitmix64(seed) ^ splitmix64(0x5eedULL + d) ^
          splitmix64(static_cast<std::uint64_t>(n) * 0x1000193ULL) ^
          splitmix64(static_cast<std::uint64_t>(std::llround(rho * 1e9))));
  Pools pools;

  PuzzleInstance inst;
  inst.difficulty = d;
  inst.n_statements = n;
  inst.needle_fraction = rho;
  inst.seed = seed;
  {
    std::ostringstream os;
    os << "d" << d << "-n" << n << "-r" << std::llround(rho * 1000.0) << "-s" << seed;
    inst.instance_id = os.str();
  }

  // people: 2 + d, names drawn without replacement
  const int n_people = 2 + d;
  {
    std::vector<int> idx(kNames.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < n_people; ++i) {
      int j = i + rng.below(static_cast<int>(idx.size()) - i);
      std::swap(idx[i], idx[j]);
    }
    for (int i = 0; i < n_people; ++i) {
      PersonState state;
      for (std::string_view cat : kCategories) {
        auto vals = pools.values_for(cat, d);
        state[std::string(cat)] = rng.pick(vals);
      }
      inst.people.emplace_back(std::string(kNames[idx[i]]), std::move(state));
    }
  }
  inst.poi = inst.people[rng.below(n_people)].first;

  PersonState poi_state;
  for (const auto& [name, state] : inst.people)
    if (name == inst.poi) poi_state = state;

  // needle placement: uniform among statement indices
  const int n_needles = static_cast<int>(std::lround(rho * n));
  std::vector<char> is_needle(n, 0);
  {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < n_needles; ++i) {
      int j = i + rng.below(n - i);
      std::swap(idx[i], idx[j]);
      is_needle[idx[i]] = 1;
    }
  }

  const int clause_max = std::min(1 + (d + 1) / 2, 4);
  for (int t = 0; t < n; ++t) {
    PuzzleStatement st;
    st.needle = is_needle[t];
    const int k = 1 + rng.below(clause_max);
    const int m = 1 + rng.below(clause_max);

    if (st.needle) {
      // conditions mirror the PoI's current state, so the statement fires
      for (const auto& cat : distinct_categories(rng, k))
        st.conditions.push_back({cat, poi_state.at(cat)});
      for (const auto& cat : distinct_categories(rng, m)) {
        auto vals = pools.values_for(cat, d);
        // a value different from the PoI's current one, so needles matter
        int i = rng.below(static_cast<int>(vals.size()));
        if (vals[i] == poi_state.at(cat))
          i = (i + 1 + rng.below(static_cast<int>(vals.size()) - 1)) %
              static_cast<int>(vals.size());
        st.updates.push_back({cat, vals[i]});
      }
      for (const auto& u : st.updates) poi_state[u.category] = u.value;
    } else {
      bool ok = false;
      for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
        st.conditions.clear();
        for (const auto& cat : distinct_categories(rng, k)) {
          auto vals = pools.values_for(cat, d);
          st.conditions.push_back({cat, rng.pick(vals)});
        }
        ok = !matches(poi_state, st.conditions);
      }
      if (!ok) {
        // force the first condition to a value the PoI does not hold
        auto& c = st.conditions.front();
        auto vals = pools.values_for(c.category, d);
        for (const auto& v : vals)
          if (v != poi_state.at(c.category)) {
            c.value = v;
            break;
          }
        if (matches(poi_state, st.conditions))
          throw GenerationError("cannot construct failing hay condition at seed " +
                                std::to_string(seed) + " statement " +
                                std::to_string(t + 1));
      }
      for (const auto& cat : distinct_categories(rng, m)) {
        auto vals = pools.values_for(cat, d);
        st.updates.push_back({cat, rng.pick(vals)});
      }
    }
    inst.statements.push_back(std::move(st));
  }

  inst.query_category = std::string(kCategories[rng.below(12)]);
  inst.gold_answer = oracle_solve(inst).final_state.at(inst.query_category);

  // replay verification of the generator invariant
  {
    PersonState s;
    for (const auto& [name, state] : inst.people)
      if (name == inst.poi) s = state;
    for (std::size_t t = 0; t < inst.statements.size(); ++t) {
      const auto& st = inst.statements[t];
      const bool fires = matches(s, st.conditions);
      if (fires != st.needle)
        throw GenerationError("generator invariant violated at seed " +
                              std::to_string(seed) + " statement " +
                              std::to_string(t + 1));
      if (fires)
        for (const auto& u : st.updates) s[u.category] = u.value;
    }
  }

  GeneratedInstance gen;
  gen.prompt_text = render_prompt(inst);

  InstanceMetadata meta;
  meta.instance_id = inst.instance_id;
  meta.n_statements = n;
  meta.difficulty = d;
  meta.needle_fraction = rho;
  for (const auto& st : inst.statements)
    meta.statements.push_back({static_cast<int>(st.conditions.size()),
                               static_cast<int>(st.updates.size()), st.needle});
  {
    std::set<std::pair<std::string, std::string>> onto;
    for (const auto& [name, state] : inst.people)
      for (const auto& [cat, val] : state) onto.insert({cat, val});
    for (const auto& st : inst.statements) {
      for (const auto& c : st.conditions) onto.insert({c.category, c.value});
      for (const auto& u : st.updates) onto.insert({u.category, u.value});
    }
    meta.ontology.assign(onto.begin(), onto.end());
  }
  meta.poi = inst.poi;
  meta.w_poi = compute_w_poi(meta);
  gen.metadata = std::move(meta);
  gen.instance = std::move(inst);
  return gen;
}

OracleResult oracle_solve(const PuzzleInstance& instance) {
  OracleResult result;
  for (const auto& [name, state] : instance.people)
    if (name == instance.poi) result.final_state = state;
  if (result.final_state.empty())
    throw GenerationError("oracle_solve: PoI not found: " + instance.poi);
  for (const auto& st : instance.statements) {
    result.op_count += static_cast<std::int64_t>(st.conditions.size());
    if (matches(result.final_state, st.conditions)) {
      for (const auto& u : st.updates) result.final_state[u.category] = u.value;
      result.op_count += static_cast<std::int64_t>(st.updates.size());
    }
  }
  return result;
}

std::map<std::string, PersonState> brute_force_solve(const PuzzleInstance& instance) {
  std::map<std::string, PersonState> states;
  for (const auto& [name, state] : instance.people) states[name] = state;
  for (const auto& st : instance.statements) {
    std::vector<std::string> affected;
    for (const auto& [name, state] : states)
      if (matches(state, st.conditions)) affected.push_back(name);
    for (const auto& name : affected)
      for (const auto& u : st.updates) states[name][u.category] = u.value;
  }
  return states;
}

const char* to_string(Archetype a) {
  switch (a) {
    case Archetype::concise_correct: return "concise_correct";
    case Archetype::verbose_engaged: return "verbose_engaged";
    case Archetype::degenerate_looper: return "degenerate_looper";
  }
  return "?";
}

namespace {

// Anchored mention of an ontology (category, value) pair; the category's
// anchor word always appears adjacent to the value.
std::string fact_phrase(const std::string& category, const std::string& value) {
  if (category == "location") return "moved to the " + value;
  if (category == "hair") return "has " + value + " hair";
  if (category == "recent_eat") return "ate a " + value;
  if (category == "recent_watch") return "watched a " + value + " movie";
  if (category == "recent_listen") return "listened to " + value + " music";
  if (category == "recent_read") return "read a " + value + " book";
  auto g = garment(category);
  return std::string("wears ") + (g.article ? "a " : "") + value + " " + g.noun;
}

constexpr std::array<std::pair<const char*, const char*>, 8> kSentenceFrames = {{
    {"step %d shows that %s ", " so I note it"},
    {"after statement %d I think %s ", " at this point"},
    {"checking rule %d because %s ", " here"},
    {"at line %d clearly %s ", " once more"},
    {"statement %d means %s ", " for now"},
    {"from clause %d we see %s ", " directly"},
    {"rule %d applies since %s ", " it seems"},
    {"next in %d maybe %s ", " instead"},
}};

// Varied grounded sentences about the instance ontology. The running
// sentence number keeps long traces free of repeated 8-grams.
std::string grounded_sentence(Rng& rng, int index, const std::string& person,
                              const std::vector<std::pair<std::string, std::string>>& ontology) {
  const auto& fact = ontology[rng.below(static_cast<int>(ontology.size()))];
  const auto& frame = kSentenceFrames[rng.below(kSentenceFrames.size())];
  char head[160];
  std::snprintf(head, sizeof(head), frame.first, index, capitalize(person).c_str());
  return std::string(head) + fact_phrase(fact.first, fact.second) + frame.second +
         ".\n";
}

}  // namespace

SimulatedRun simulate_archetype(const GeneratedInstance& gen, Archetype archetype,
                                std::uint64_t seed, std::int64_t token_budget) {
  const PuzzleInstance& inst = gen.instance;
  Rng rng(splitmix64(inst.seed) ^ splitmix64(seed + 17) ^
          splitmix64(static_cast<std::uint64_t>(archetype) * 0x2545f4914f6cdd1dULL));

  const std::int64_t w = *gen.metadata.w_poi;
  const std::int64_t input_tokens =
      static_cast<std::int64_t>(analysis_tokenize(gen.prompt_text).size());
  const std::int64_t max_output = token_budget - input_tokens - 1;
  if (max_output < 1)
    throw GenerationError("simulate_archetype: prompt exceeds token budget");

  SimulatedRun run;
  run.outcome.instance_id = inst.instance_id;
  run.outcome.model_id = to_string(archetype);
  run.outcome.input_tokens = input_tokens;
  run.trace.instance_id = inst.instance_id;
  run.trace.model_id = to_string(archetype);
  run.trace.prompt_text = gen.prompt_text;

  std::ostringstream trace;
  int sentence_no = 0;
  auto add_grounded = [&](int count) {
    for (int i = 0; i < count; ++i)
      trace << grounded_sentence(rng, ++sentence_no, inst.poi, gen.metadata.ontology);
  };

  switch (archetype) {
    case Archetype::concise_correct: {
      int needles = 0;
      for (const auto& st : inst.statements) needles += st.needle;
      add_grounded(2 + needles);
      trace << "The answer is " << inst.gold_answer << ".\n";
      run.outcome.succ = 1;
      run.outcome.truncated = false;
      run.outcome.output_tokens = std::min<std::int64_t>(
          std::max<std::int64_t>(1, std::llround((1.8 + 0.4 * rng.unit()) *
                                                 static_cast<double>(w))),
          max_output);
      break;
    }
    case Archetype::verbose_engaged: {
      add_grounded(4 + 2 * inst.n_statements);
      trace << "The answer is " << inst.gold_answer << ".\n";
      run.outcome.succ = 1;
      run.outcome.truncated = false;
      run.outcome.output_tokens = std::min<std::int64_t>(
          std::max<std::int64_t>(1, std::llround((9.0 + 2.0 * rng.unit()) *
                                                 static_cast<double>(w))),
          max_output);
      break;
    }
    case Archetype::degenerate_looper: {
      add_grounded(4);
      const std::string loop_line =
          "Wait, let me check all the statements again from the start because "
          "something seems off about this chain.\n";
      // loop dominates the trace: >= 15x the grounded prefix in tokens
      const int prefix_tokens =
          static_cast<int>(analysis_tokenize(trace.str()).size());
      const int loop_tokens =
          static_cast<int>(analysis_tokenize(loop_line).size());
      const int reps = std::max(20, (15 * prefix_tokens) / loop_tokens + 1);
      for (int i = 0; i < reps; ++i) trace << loop_line;
      const bool truncates = rng.unit() < 0.9;
      if (truncates) {
        run.outcome.truncated = true;
        run.outcome.succ = 0;
        run.outcome.output_tokens = token_budget - input_tokens;
      } else {
        run.outcome.truncated = false;
        run.outcome.succ = rng.unit() < 0.5 ? 1 : 0;
        run.outcome.output_tokens = std::min<std::int64_t>(
            std::max<std::int64_t>(
                1, std::llround(12.0 * static_cast<double>(w))),
            max_output);
      }
      break;
    }
  }
  run.trace.trace_text = trace.str();
  run.outcome.output_chars =
      static_cast<std::int64_t>(run.trace.trace_text.size());
  return run;
}

}  // namespace effdecomp
