#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dsm/trace_io.hpp"
#include "support.hpp"

using namespace dsm;

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0, -2.5, 2.2250738585072014e-308}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("trace CSV layout and round trip") {
  const auto game = testing::toy_game(3);
  SolverOptions o;
  o.max_iterations = 5;
  const Run run = solve_central(game.scenario, 0.2, StepSchedule::power_decay(0.51), game.init, o);
  std::stringstream text;
  write_trace_csv(text, run.trace);
  const std::string csv = text.str();
  CHECK(csv.rfind("t,n,cost,residual,q1,q2,q3\n", 0) == 0);

  const auto rows = read_trace_csv(text);
  REQUIRE(rows.size() == run.trace.records.size() * game.scenario.size());
  for (std::size_t r = 0; r < run.trace.records.size(); ++r) {
    const auto& rec = run.trace.records[r];
    for (std::size_t n = 0; n < game.scenario.size(); ++n) {
      const auto& row = rows[r * game.scenario.size() + n];
      CHECK(row.t == rec.t);
      CHECK(row.consumer == n + 1);
      CHECK(row.cost == rec.bills[n]);
      CHECK(row.residual == rec.residual);
      CHECK(row.q == rec.profiles[n]);
    }
  }
}

TEST_CASE("malformed traces") {
  std::istringstream header("t,n,cost\n");
  CHECK_THROWS_AS(read_trace_csv(header), ParseError);
  std::istringstream short_row("t,n,cost,residual,q1\n1,1,0.5,0.1\n");
  CHECK_THROWS_WITH_AS(read_trace_csv(short_row), doctest::Contains("line 2"), ParseError);
  std::istringstream bad_number("t,n,cost,residual,q1\n1,1,abc,0.1,0.2\n");
  CHECK_THROWS_AS(read_trace_csv(bad_number), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_trace_csv(empty), ParseError);
}

TEST_CASE("summary and oracle documents round-trip") {
  RunSummary s;
  s.algorithm = "consensus";
  s.scenario_hash = "0123456789abcdef";
  s.flags = {{"alg", "2"}, {"tau", "0.5"}};
  s.converged = true;
  s.iterations = 42;
  s.residual = 3.5e-7;
  s.tol = 1e-6;
  s.uniqueness_verified = false;
  s.initial_par = 2.25;
  s.final_par = 1.1;
  s.initial_total_cost = 300.0;
  s.total_cost = 270.0;
  s.bills = {1.0, 2.0};
  s.profiles = {{0.1, 0.2}, {0.3, 0.4}};
  const std::string json = summary_to_json(s);
  CHECK(json.find("\"uniqueness\": \"unverified\"") != std::string::npos);
  const RunSummary back = parse_summary(json);
  CHECK(back.algorithm == s.algorithm);
  CHECK(back.flags == s.flags);
  CHECK(back.iterations == 42);
  CHECK(back.residual == s.residual);
  CHECK_FALSE(back.uniqueness_verified);
  CHECK(back.profiles == s.profiles);
  CHECK_THROWS_AS(parse_summary("{}"), ParseError);
  CHECK_THROWS_AS(parse_summary("{"), ParseError);

  OracleResult r;
  r.kind = "welfare";
  r.scenario_hash = "ffff";
  r.total_cost = 12.5;
  r.profiles = {{1.0}};
  const OracleResult rb = parse_oracle(oracle_to_json(r));
  CHECK(rb.kind == "welfare");
  CHECK(rb.total_cost == 12.5);
  CHECK(rb.profiles == r.profiles);
}
