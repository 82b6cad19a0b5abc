#pragma once

// Run artifacts: the per-iteration trace CSV and the JSON run summary /
// oracle result documents written by the command-line tools.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/algorithms.hpp"
#include "dsm/scenario.hpp"

namespace dsm {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// One CSV row: consumer n (1-based) at recorded iteration t.
struct TraceRow {
  std::size_t t = 0;
  std::size_t consumer = 0;
  double cost = 0.0;
  double residual = 0.0;
  Profile q;
};

/// Header "t,n,cost,residual,q1..qH"; cost is the consumer's instantaneous bill.
void write_trace_csv(std::ostream& out, const RunTrace& trace);
std::vector<TraceRow> read_trace_csv(std::istream& in);

struct RunSummary {
  std::string algorithm;
  std::string scenario_hash;
  FlagSet flags;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  double tol = 0.0;
  bool uniqueness_verified = false;
  double initial_par = 0.0;
  double final_par = 0.0;
  double initial_total_cost = 0.0;
  double total_cost = 0.0;
  std::vector<double> bills;
  std::vector<Profile> profiles;
};

std::string summary_to_json(const RunSummary& summary);
RunSummary parse_summary(std::string_view text);

struct OracleResult {
  std::string kind;  ///< "nash" or "welfare"
  std::string scenario_hash;
  FlagSet flags;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  double total_cost = 0.0;
  std::vector<Profile> profiles;
};

std::string oracle_to_json(const OracleResult& result);
OracleResult parse_oracle(std::string_view text);

}  // namespace dsm
