#include "dsm/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dsm {

namespace {

using nlohmann::json;

struct BaseRow {
  double low;
  double high;
};

// Hand-digitized typical household interval, 8 AM through 7 AM.
constexpr std::array<BaseRow, 24> kDefaultBase{{
    {0.30, 1.00}, {0.25, 0.90}, {0.25, 0.85}, {0.25, 0.85}, {0.30, 0.95}, {0.30, 0.95},
    {0.30, 1.00}, {0.35, 1.10}, {0.45, 1.40}, {0.60, 1.80}, {0.75, 2.10}, {0.80, 2.20},
    {0.70, 2.00}, {0.55, 1.60}, {0.40, 1.30}, {0.30, 1.10}, {0.15, 0.30}, {0.12, 0.28},
    {0.10, 0.25}, {0.10, 0.25}, {0.10, 0.25}, {0.12, 0.28}, {0.15, 0.30}, {0.25, 0.90},
}};

double draw(std::mt19937_64& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail(where, "unknown field \"" + key + "\"");
    }
  }
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field \"" + key + "\"");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::uint64_t as_unsigned(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) fail(where, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

Profile as_profile(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  Profile out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json price_json(const SlotPrice& p) { return json{{"a", p.a}, {"b", p.b}, {"c", p.c}}; }

SlotPrice parse_price(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  reject_unknown(v, {"a", "b", "c"}, where);
  return SlotPrice{as_number(field(v, "a", where), where + ".a"),
                   as_number(field(v, "b", where), where + ".b"),
                   as_number(field(v, "c", where), where + ".c")};
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

json scenario_document(const ScenarioData& data) {
  const Scenario& s = data.scenario;
  json price = json::array();
  for (const auto& p : s.curve().slots()) price.push_back(price_json(p));
  json consumers = json::array();
  for (std::size_t n = 0; n < s.size(); ++n) {
    const ConsumerSpec& spec = s.consumer(n);
    json c{{"q_min", spec.q_min}, {"q_max", spec.q_max}, {"budget", spec.budget}};
    if (!data.initial.empty()) c["initial"] = data.initial[n];
    consumers.push_back(std::move(c));
  }
  return json{{"schema_version", kScenarioSchemaVersion},
              {"horizon", s.horizon()},
              {"price", std::move(price)},
              {"consumers", std::move(consumers)}};
}

json full_document(const ScenarioData& data) {
  json doc = scenario_document(data);
  if (!data.provenance.empty()) doc["provenance"] = data.provenance;
  return doc;
}

}  // namespace

std::string_view segment_name(Segment s) {
  switch (s) {
    case Segment::OffPeak:
      return "off";
    case Segment::MidPeak:
      return "mid";
    case Segment::OnPeak:
      return "on";
  }
  return "mid";
}

Segment parse_segment(std::string_view name) {
  if (name == "off") return Segment::OffPeak;
  if (name == "mid") return Segment::MidPeak;
  if (name == "on") return Segment::OnPeak;
  throw std::invalid_argument("unknown segment \"" + std::string(name) +
                              "\" (expected off, mid or on)");
}

Validation validate(const BaseInterval& base) {
  if (base.low.empty()) return {false, "base interval is empty"};
  if (base.low.size() != base.high.size()) {
    return {false, "base interval low/high lengths differ"};
  }
  for (std::size_t h = 0; h < base.low.size(); ++h) {
    const double lo = base.low[h];
    const double hi = base.high[h];
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || lo > hi) {
      return {false, "base interval slot " + std::to_string(h + 1) +
                         " needs 0 <= low <= high"};
    }
  }
  return {true, {}};
}

BaseInterval default_base_interval() {
  BaseInterval base;
  for (const auto& row : kDefaultBase) {
    base.low.push_back(row.low);
    base.high.push_back(row.high);
  }
  return base;
}

BaseInterval read_base_interval_csv(std::istream& in) {
  BaseInterval base;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!header) {
      if (line != "slot,low,high") fail(where, "expected header \"slot,low,high\"");
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell[3];
    for (auto& c : cell) {
      if (!std::getline(row, c, ',')) fail(where, "expected three columns");
    }
    std::string extra;
    if (std::getline(row, extra, ',')) fail(where, "expected three columns");
    std::size_t slot = 0;
    double lo = 0.0;
    double hi = 0.0;
    try {
      std::size_t used = 0;
      slot = std::stoul(cell[0], &used);
      if (used != cell[0].size()) throw std::invalid_argument("slot");
      lo = std::stod(cell[1], &used);
      if (used != cell[1].size()) throw std::invalid_argument("low");
      hi = std::stod(cell[2], &used);
      if (used != cell[2].size()) throw std::invalid_argument("high");
    } catch (const std::logic_error&) {
      fail(where, "malformed number");
    }
    if (slot != base.low.size() + 1) {
      fail(where, "slot " + std::to_string(slot) + " out of order (expected " +
                      std::to_string(base.low.size() + 1) + ")");
    }
    base.low.push_back(lo);
    base.high.push_back(hi);
  }
  if (!header) throw ParseError("base interval: missing header");
  if (const auto check = validate(base); !check) throw ParseError(check.message);
  return base;
}

void write_base_interval_csv(std::ostream& out, const BaseInterval& base) {
  out << "slot,low,high\n";
  for (std::size_t h = 0; h < base.horizon(); ++h) {
    out << (h + 1) << ',' << json(base.low[h]).dump() << ',' << json(base.high[h]).dump()
        << '\n';
  }
}

std::vector<Segment> classify_segments(std::size_t horizon, int start_hour) {
  if (horizon != 24) {
    throw std::invalid_argument("canonical segment map needs H = 24 (got " +
                                std::to_string(horizon) + "); supply explicit segments");
  }
  if (start_hour < 0 || start_hour > 23) {
    throw std::invalid_argument("start hour must be in 0..23");
  }
  std::vector<Segment> out;
  out.reserve(horizon);
  for (std::size_t s = 0; s < horizon; ++s) {
    const int hour = (start_hour + static_cast<int>(s)) % 24;
    if (hour < 7) {
      out.push_back(Segment::OffPeak);
    } else if (hour >= 16 && hour < 22) {
      out.push_back(Segment::OnPeak);
    } else {
      out.push_back(Segment::MidPeak);
    }
  }
  return out;
}

std::vector<Segment> GenerationRecipe::resolved_segments() const {
  if (segments.empty()) return classify_segments(horizon, start_hour);
  if (segments.size() != horizon) {
    throw std::invalid_argument("segment map has " + std::to_string(segments.size()) +
                                " slots, horizon is " + std::to_string(horizon));
  }
  return segments;
}

ScenarioData generate(const GenerationRecipe& recipe, const BaseInterval& base) {
  if (recipe.consumers == 0) throw std::invalid_argument("recipe needs at least one consumer");
  if (const auto check = validate(base); !check) throw std::invalid_argument(check.message);
  if (base.horizon() != recipe.horizon) {
    throw std::invalid_argument("base interval has " + std::to_string(base.horizon()) +
                                " slots, recipe horizon is " + std::to_string(recipe.horizon));
  }
  if (!(recipe.jitter >= 0.0) || !std::isfinite(recipe.jitter)) {
    throw std::invalid_argument("jitter must be finite and nonnegative");
  }
  if (!(recipe.offpeak_max_low >= 0.0) || !(recipe.offpeak_max_low <= recipe.offpeak_max_high) ||
      !std::isfinite(recipe.offpeak_max_high)) {
    throw std::invalid_argument("off-peak maximum interval must satisfy 0 <= low <= high");
  }
  const std::vector<Segment> segments = recipe.resolved_segments();
  const std::size_t horizon = recipe.horizon;

  std::vector<SlotPrice> prices;
  prices.reserve(horizon);
  for (Segment s : segments) {
    prices.push_back(s == Segment::OffPeak  ? recipe.off_peak
                     : s == Segment::OnPeak ? recipe.on_peak
                                            : recipe.mid_peak);
  }
  PriceCurve curve(std::move(prices));

  std::mt19937_64 rng(recipe.seed);
  std::vector<ConsumerSpec> specs;
  std::vector<Profile> initial;
  specs.reserve(recipe.consumers);
  initial.reserve(recipe.consumers);
  for (std::size_t n = 0; n < recipe.consumers; ++n) {
    Profile lo(horizon);
    Profile hi(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      lo[h] = base.low[h] + draw(rng, 0.0, recipe.jitter);
      hi[h] = std::max(base.high[h] + draw(rng, 0.0, recipe.jitter), lo[h]);
    }
    const double cap = *std::max_element(hi.begin(), hi.end());
    ConsumerSpec spec;
    spec.q_min.resize(horizon);
    spec.q_max.resize(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      if (segments[h] == Segment::OffPeak) {
        spec.q_max[h] = draw(rng, recipe.offpeak_max_low, recipe.offpeak_max_high);
        spec.q_min[h] = std::min(lo[h], spec.q_max[h]);
      } else {
        spec.q_max[h] = cap;
        spec.q_min[h] = lo[h];
      }
    }
    Profile q0(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      q0[h] = draw(rng, spec.q_min[h], std::min(hi[h], spec.q_max[h]));
    }
    double budget = 0.0;
    for (double v : q0) budget += v;
    spec.budget = budget;
    if (const auto check = validate(spec); !check) {
      throw std::invalid_argument("generated consumer " + std::to_string(n + 1) +
                                  " is infeasible: " + check.message);
    }
    specs.push_back(std::move(spec));
    initial.push_back(std::move(q0));
  }
  return ScenarioData{Scenario(std::move(curve), std::move(specs)), std::move(initial), {}};
}

GenerationRecipe parse_recipe(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("recipe: expected a JSON object");
  reject_unknown(doc,
                 {"schema_version", "consumers", "horizon", "seed", "jitter", "offpeak_max",
                  "start_hour", "segments", "prices"},
                 "recipe");
  if (const auto v = doc.find("schema_version"); v != doc.end()) {
    if (as_unsigned(*v, "recipe.schema_version") != kScenarioSchemaVersion) {
      fail("recipe.schema_version", "unsupported version");
    }
  }
  GenerationRecipe r;
  if (doc.contains("consumers")) r.consumers = as_unsigned(doc["consumers"], "recipe.consumers");
  if (doc.contains("horizon")) r.horizon = as_unsigned(doc["horizon"], "recipe.horizon");
  if (doc.contains("seed")) r.seed = as_unsigned(doc["seed"], "recipe.seed");
  if (doc.contains("jitter")) r.jitter = as_number(doc["jitter"], "recipe.jitter");
  if (doc.contains("start_hour")) {
    r.start_hour = static_cast<int>(as_unsigned(doc["start_hour"], "recipe.start_hour"));
  }
  if (doc.contains("offpeak_max")) {
    const Profile v = as_profile(doc["offpeak_max"], "recipe.offpeak_max");
    if (v.size() != 2) fail("recipe.offpeak_max", "expected [low, high]");
    r.offpeak_max_low = v[0];
    r.offpeak_max_high = v[1];
  }
  if (doc.contains("segments")) {
    const json& seg = doc["segments"];
    if (!seg.is_array()) fail("recipe.segments", "expected an array");
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const std::string where = "recipe.segments[" + std::to_string(i) + "]";
      if (!seg[i].is_string()) fail(where, "expected \"off\", \"mid\" or \"on\"");
      try {
        r.segments.push_back(parse_segment(seg[i].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        fail(where, e.what());
      }
    }
  }
  if (doc.contains("prices")) {
    const json& p = doc["prices"];
    if (!p.is_object()) fail("recipe.prices", "expected an object");
    reject_unknown(p, {"off", "mid", "on"}, "recipe.prices");
    if (p.contains("off")) r.off_peak = parse_price(p["off"], "recipe.prices.off");
    if (p.contains("mid")) r.mid_peak = parse_price(p["mid"], "recipe.prices.mid");
    if (p.contains("on")) r.on_peak = parse_price(p["on"], "recipe.prices.on");
  }
  return r;
}

std::string recipe_to_json(const GenerationRecipe& r) {
  json doc{{"schema_version", kScenarioSchemaVersion},
           {"consumers", r.consumers},
           {"horizon", r.horizon},
           {"seed", r.seed},
           {"jitter", r.jitter},
           {"offpeak_max", {r.offpeak_max_low, r.offpeak_max_high}},
           {"start_hour", r.start_hour},
           {"prices",
            {{"off", price_json(r.off_peak)},
             {"mid", price_json(r.mid_peak)},
             {"on", price_json(r.on_peak)}}}};
  if (!r.segments.empty()) {
    json seg = json::array();
    for (Segment s : r.segments) seg.push_back(std::string(segment_name(s)));
    doc["segments"] = std::move(seg);
  }
  return doc.dump(2) + "\n";
}

std::string scenario_to_json(const ScenarioData& data) {
  return full_document(data).dump(2) + "\n";
}

ScenarioData parse_scenario(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("scenario: expected a JSON object");
  reject_unknown(doc, {"schema_version", "horizon", "price", "consumers", "provenance"},
                 "scenario");
  const auto version = as_unsigned(field(doc, "schema_version", "scenario"),
                                   "scenario.schema_version");
  if (version != kScenarioSchemaVersion) {
    fail("scenario.schema_version", "unsupported version " + std::to_string(version));
  }
  const std::size_t horizon = as_unsigned(field(doc, "horizon", "scenario"), "scenario.horizon");

  const json& price = field(doc, "price", "scenario");
  if (!price.is_array()) fail("scenario.price", "expected an array");
  if (price.size() != horizon) {
    fail("scenario.price", "has " + std::to_string(price.size()) + " entries, horizon is " +
                               std::to_string(horizon));
  }
  std::vector<SlotPrice> slots;
  for (std::size_t h = 0; h < price.size(); ++h) {
    slots.push_back(parse_price(price[h], "scenario.price[" + std::to_string(h) + "]"));
  }

  const json& consumers = field(doc, "consumers", "scenario");
  if (!consumers.is_array()) fail("scenario.consumers", "expected an array");
  std::vector<ConsumerSpec> specs;
  std::vector<Profile> initial;
  bool any_initial = false;
  for (std::size_t n = 0; n < consumers.size(); ++n) {
    const std::string where = "scenario.consumers[" + std::to_string(n) + "]";
    const json& c = consumers[n];
    if (!c.is_object()) fail(where, "expected an object");
    reject_unknown(c, {"q_min", "q_max", "budget", "initial"}, where);
    ConsumerSpec spec{as_profile(field(c, "q_min", where), where + ".q_min"),
                      as_profile(field(c, "q_max", where), where + ".q_max"),
                      as_number(field(c, "budget", where), where + ".budget")};
    if (spec.q_min.size() != horizon || spec.q_max.size() != horizon) {
      fail(where, "bound lengths must equal the horizon");
    }
    if (const auto check = validate(spec); !check) fail(where, check.message);
    specs.push_back(std::move(spec));
    if (const auto it = c.find("initial"); it != c.end()) {
      if (n > 0 && !any_initial) fail(where, "\"initial\" must be given for all consumers or none");
      any_initial = true;
      Profile q0 = as_profile(*it, where + ".initial");
      if (q0.size() != horizon) fail(where + ".initial", "length must equal the horizon");
      initial.push_back(std::move(q0));
    } else if (any_initial) {
      fail(where, "\"initial\" must be given for all consumers or none");
    }
  }
  FlagSet provenance;
  if (const auto it = doc.find("provenance"); it != doc.end()) {
    if (!it->is_object()) fail("scenario.provenance", "expected an object of strings");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) fail("scenario.provenance." + key, "expected a string");
      provenance[key] = value.get<std::string>();
    }
  }
  try {
    return ScenarioData{Scenario(PriceCurve(std::move(slots)), std::move(specs)),
                        std::move(initial), std::move(provenance)};
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
}

void save_scenario(const std::filesystem::path& path, const ScenarioData& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << scenario_to_json(data);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ScenarioData load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + ": file not found");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string content_hash(const ScenarioData& data) {
  const std::string canonical = scenario_document(data).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dsm
