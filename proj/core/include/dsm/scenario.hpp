#pragma once

// Residential scenario generation and the versioned scenario file format.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/game.hpp"

namespace dsm {

/// Malformed input file; the message names the offending line or field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using FlagSet = std::map<std::string, std::string>;

enum class Segment { OffPeak, MidPeak, OnPeak };

std::string_view segment_name(Segment s);
Segment parse_segment(std::string_view name);

/// Representative per-slot consumption interval of one household.
struct BaseInterval {
  Profile low;
  Profile high;

  std::size_t horizon() const noexcept { return low.size(); }
  friend bool operator==(const BaseInterval&, const BaseInterval&) = default;
};

Validation validate(const BaseInterval& base);

/// The shipped 24-slot interval, slot 1 = 8-9 AM. Same values as
/// data/base_interval.csv.
BaseInterval default_base_interval();

/// CSV with header "slot,low,high", slots numbered 1..H in order.
BaseInterval read_base_interval_csv(std::istream& in);
void write_base_interval_csv(std::ostream& out, const BaseInterval& base);

/// Tariff segments for a day of hourly slots whose first slot starts at
/// start_hour: off-peak 0-7, on-peak 16-22, mid-peak otherwise. Only H = 24
/// has a canonical map; other horizons need an explicit segment list.
std::vector<Segment> classify_segments(std::size_t horizon, int start_hour = 8);

struct GenerationRecipe {
  std::size_t consumers = 50;
  std::size_t horizon = 24;
  std::uint64_t seed = 1;
  /// Uniform [0, jitter] added independently to each low and high limit.
  double jitter = 0.1;
  /// Off-peak q_max drawn uniformly from this interval.
  double offpeak_max_low = 0.4;
  double offpeak_max_high = 0.6;
  int start_hour = 8;
  /// Explicit per-slot segments; empty means classify_segments(horizon, start_hour).
  std::vector<Segment> segments;
  SlotPrice off_peak{0.003, 1.2, 0.0};
  SlotPrice mid_peak{0.004, 1.2, 0.0};
  SlotPrice on_peak{0.005, 1.2, 0.0};

  std::vector<Segment> resolved_segments() const;
};

/// A scenario plus the consumers' consumption before scheduling. The initial
/// profiles fix the budgets and lie inside the feasible sets; they are the
/// "before DSM" load and the default starting point of every solver.
struct ScenarioData {
  Scenario scenario;
  std::vector<Profile> initial;
  /// Free-form generator record (flags, hash); not part of the content hash.
  FlagSet provenance;
};

ScenarioData generate(const GenerationRecipe& recipe, const BaseInterval& base);

GenerationRecipe parse_recipe(std::string_view text);
std::string recipe_to_json(const GenerationRecipe& recipe);

inline constexpr int kScenarioSchemaVersion = 1;

std::string scenario_to_json(const ScenarioData& data);
ScenarioData parse_scenario(std::string_view text);
void save_scenario(const std::filesystem::path& path, const ScenarioData& data);
ScenarioData load_scenario(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of the compact canonical JSON without the provenance
/// block, as 16 hex digits.
std::string content_hash(const ScenarioData& data);

}  // namespace dsm
