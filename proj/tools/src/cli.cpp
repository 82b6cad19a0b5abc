#include "dsm_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dsm/algorithms.hpp"
#include "dsm/network.hpp"
#include "dsm/oracle.hpp"
#include "dsm/scenario.hpp"
#include "dsm/trace_io.hpp"

namespace dsm::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Bad flags or inconsistent inputs; maps to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + ": file not found");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

bool has_extension(const std::string& path, const char* ext) {
  return fs::path(path).extension() == ext;
}

std::vector<Profile> starting_profiles(const ScenarioData& data) {
  if (!data.initial.empty()) return data.initial;
  std::vector<Profile> flat;
  for (const auto& spec : data.scenario.consumers()) {
    flat.emplace_back(spec.horizon(), spec.budget / static_cast<double>(spec.horizon()));
  }
  return project_all(flat, data.scenario);
}

void check_hash(const std::string& expected, const std::string& got, const std::string& what) {
  if (expected != got) {
    throw UsageError(what + " was produced for scenario " + got + ", but --scenario has hash " +
                     expected);
  }
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string recipe;
  std::string base;
  std::optional<std::size_t> consumers;
  std::optional<std::size_t> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<double> jitter;
  std::string output;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GenerationRecipe recipe;
  if (!a.recipe.empty()) recipe = parse_recipe(read_file(a.recipe));
  if (a.consumers) recipe.consumers = *a.consumers;
  if (a.horizon) recipe.horizon = *a.horizon;
  if (a.seed) recipe.seed = *a.seed;
  if (a.jitter) recipe.jitter = *a.jitter;

  BaseInterval base = default_base_interval();
  if (!a.base.empty()) {
    std::ifstream in(a.base);
    if (!in) throw std::runtime_error("cannot open " + a.base + ": file not found");
    base = read_base_interval_csv(in);
  }
  ScenarioData data = generate(recipe, base);
  data.provenance = {{"command", "generate"},
                     {"recipe", a.recipe},
                     {"base", a.base.empty() ? "builtin" : a.base},
                     {"consumers", std::to_string(recipe.consumers)},
                     {"horizon", std::to_string(recipe.horizon)},
                     {"seed", std::to_string(recipe.seed)},
                     {"jitter", format_double(recipe.jitter)}};
  const std::string hash = content_hash(data);
  data.provenance["content_hash"] = hash;
  save_scenario(a.output, data);
  out << "wrote " << a.output << " (N = " << recipe.consumers << ", H = " << recipe.horizon
      << ", hash " << hash << ")\n";
  return kExitOk;
}

// --------------------------------------------------------------------- run

struct RunArgs {
  std::string scenario;
  int alg = 1;
  std::string graph;
  std::string topology;
  std::optional<double> degree;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  std::optional<std::size_t> max_iter;
  double theta = 0.2;
  double step_exponent = 0.51;
  double tau = 0.5;
  std::optional<std::size_t> record_stride;
  std::string trace;
  std::string summary;
  std::vector<std::string> outputs;
  bool strict = false;
};

const char* algorithm_name(int alg) {
  switch (alg) {
    case 1:
      return "central-proximal";
    case 2:
      return "consensus";
    default:
      return "gossip";
  }
}

int cmd_run(RunArgs a, std::ostream& out, std::ostream& err) {
  for (const auto& path : a.outputs) {
    if (has_extension(path, ".csv")) {
      a.trace = path;
    } else if (has_extension(path, ".json")) {
      a.summary = path;
    } else {
      throw UsageError("-o expects a .csv trace or a .json summary: " + path);
    }
  }
  if (a.alg != 1 && a.graph.empty() && a.topology.empty()) {
    throw UsageError("--alg " + std::to_string(a.alg) +
                     " needs --graph FILE or --topology random --degree D");
  }
  if (!a.graph.empty() && !a.topology.empty()) {
    throw UsageError("--graph and --topology are mutually exclusive");
  }
  if (!a.topology.empty() && !a.degree) throw UsageError("--topology random needs --degree");

  const ScenarioData data = load_scenario(a.scenario);
  const Scenario& scenario = data.scenario;
  const std::size_t consumers = scenario.size();
  const std::vector<Profile> init = starting_profiles(data);

  SolverOptions options;
  options.tol = a.tol;
  options.max_iterations = a.max_iter.value_or(a.alg == 3 ? 5000 : 1000);
  options.record_stride = a.record_stride.value_or(a.alg == 3 ? consumers : 1);

  FlagSet flags{{"alg", std::to_string(a.alg)},
                {"seed", std::to_string(a.seed)},
                {"tol", format_double(a.tol)},
                {"max_iter", std::to_string(options.max_iterations)},
                {"record_stride", std::to_string(options.record_stride)},
                {"strict", a.strict ? "true" : "false"}};

  std::mt19937_64 rng(a.seed);
  std::optional<CommGraph> graph;
  if (a.alg != 1) {
    if (!a.graph.empty()) {
      std::ifstream in(a.graph);
      if (!in) throw std::runtime_error("cannot open " + a.graph + ": file not found");
      graph = read_edge_list(in);
      flags["graph"] = a.graph;
    } else {
      graph = generate_topology(consumers, *a.degree, rng);
      flags["graph"] = "random";
      flags["degree"] = format_double(*a.degree);
    }
  }

  Run run;
  if (a.alg == 1) {
    flags["theta"] = format_double(a.theta);
    flags["step_exponent"] = format_double(a.step_exponent);
    run = solve_central(scenario, a.theta, StepSchedule::power_decay(a.step_exponent), init,
                        options);
  } else if (a.alg == 2) {
    flags["tau"] = format_double(a.tau);
    flags["step_exponent"] = format_double(a.step_exponent);
    run = solve_consensus(scenario, *graph, build_weights(*graph, a.tau),
                          StepSchedule::power_decay(a.step_exponent), init, options);
  } else {
    const auto events = gossip_stream(*graph, rng, options.max_iterations);
    run = solve_gossip(scenario, *graph, events, init, options);
  }

  RunSummary summary;
  summary.algorithm = algorithm_name(a.alg);
  summary.scenario_hash = content_hash(data);
  summary.flags = flags;
  summary.converged = run.result.converged;
  summary.iterations = run.result.iterations;
  summary.residual = run.result.residual;
  summary.tol = a.tol;
  summary.uniqueness_verified = run.result.uniqueness_verified;
  summary.initial_par = par(aggregate(init));
  summary.final_par = par(aggregate(run.result.profiles));
  summary.initial_total_cost = total_cost(init, scenario.curve());
  summary.total_cost = total_cost(run.result.profiles, scenario.curve());
  const Profile load = aggregate(run.result.profiles);
  for (const auto& q : run.result.profiles) {
    summary.bills.push_back(bill_instantaneous(q, load, scenario.curve()));
  }
  summary.profiles = run.result.profiles;

  if (!summary.uniqueness_verified) {
    err << "warning: uniqueness certificate failed for this scenario; convergence is not "
           "guaranteed\n";
  }
  if (!a.trace.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, run.trace);
    write_file(a.trace, csv.str());
  }
  if (!a.summary.empty()) write_file(a.summary, summary_to_json(summary));

  out << summary.algorithm << ": " << (summary.converged ? "converged" : "not converged")
      << " after " << summary.iterations << (a.alg == 3 ? " events" : " iterations")
      << ", residual " << format_double(summary.residual) << ", PAR "
      << format_double(summary.initial_par) << " -> " << format_double(summary.final_par)
      << ", total cost " << format_double(summary.total_cost) << "\n";
  if (a.strict && !summary.converged) {
    err << "error: no convergence within the budget (--strict)\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ------------------------------------------------------------------ oracle

struct OracleArgs {
  std::string scenario;
  std::string kind;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::string output;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const ScenarioData data = load_scenario(a.scenario);
  const Scenario& scenario = data.scenario;
  OracleResult result;
  result.kind = a.kind;
  result.scenario_hash = content_hash(data);
  if (a.kind == "nash") {
    if (scenario.size() > kNashOracleMaxConsumers || scenario.horizon() > kNashOracleMaxHorizon) {
      throw UsageError("nash oracle is limited to N <= " +
                       std::to_string(kNashOracleMaxConsumers) + " and H <= " +
                       std::to_string(kNashOracleMaxHorizon) + "; scenario has N = " +
                       std::to_string(scenario.size()) + ", H = " +
                       std::to_string(scenario.horizon()));
    }
    const double tol = a.tol.value_or(1e-10);
    const std::size_t sweeps = a.max_iter.value_or(10000);
    result.profiles = nash_best_response_iteration(scenario, tol, sweeps);
    result.converged = true;
    result.residual = fixed_point_residual(result.profiles, scenario);
    result.total_cost = total_cost(result.profiles, scenario.curve());
    result.flags = {{"kind", a.kind}, {"tol", format_double(tol)},
                    {"max_iter", std::to_string(sweeps)}};
  } else {
    const double tol = a.tol.value_or(1e-9);
    const std::size_t cap = a.max_iter.value_or(100000);
    WelfareOptimum opt = social_welfare_optimum(scenario, tol, cap);
    result.profiles = std::move(opt.profiles);
    result.converged = opt.converged;
    result.iterations = opt.iterations;
    result.residual = opt.residual;
    result.total_cost = opt.total_cost;
    result.flags = {{"kind", a.kind}, {"tol", format_double(tol)},
                    {"max_iter", std::to_string(cap)}};
  }
  write_file(a.output, oracle_to_json(result));
  out << a.kind << " oracle: total cost " << format_double(result.total_cost) << ", residual "
      << format_double(result.residual) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::string kind;
  std::string scenario;
  std::string summary;
  std::vector<std::string> oracles;
  std::string trace;
  std::vector<std::size_t> consumers;
  std::string output;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const ScenarioData data = load_scenario(a.scenario);
  const Scenario& scenario = data.scenario;
  const std::string hash = content_hash(data);
  const FlagSet flags{{"kind", a.kind}, {"scenario", a.scenario}};

  std::optional<RunSummary> summary;
  if (!a.summary.empty()) {
    summary = parse_summary(read_file(a.summary));
    check_hash(hash, summary->scenario_hash, a.summary);
    if (summary->profiles.size() != scenario.size()) {
      throw UsageError(a.summary + " has the wrong number of consumers");
    }
  }
  std::optional<OracleResult> nash;
  std::optional<OracleResult> welfare;
  for (const auto& path : a.oracles) {
    OracleResult r = parse_oracle(read_file(path));
    check_hash(hash, r.scenario_hash, path);
    (r.kind == "nash" ? nash : welfare) = std::move(r);
  }

  std::string text;
  if (a.kind == "par") {
    if (!summary) throw UsageError("--kind par needs --summary");
    const double initial = summary->initial_par;
    const double final_par = par(aggregate(summary->profiles));
    const json doc{{"kind", "par"},
                   {"scenario_hash", hash},
                   {"flags", flags},
                   {"run_flags", summary->flags},
                   {"initial_par", initial},
                   {"final_par", final_par},
                   {"reduction", 1.0 - final_par / initial}};
    text = doc.dump(2) + "\n";
  } else if (a.kind == "fairness") {
    if (!summary) throw UsageError("--kind fairness needs --summary");
    const auto rows = fairness_comparison(summary->profiles, scenario);
    std::ostringstream csv;
    csv << "n,budget,instantaneous_bill,total_load_bill,par\n";
    for (std::size_t n = 0; n < rows.size(); ++n) {
      csv << (n + 1) << ',' << format_double(rows[n].budget) << ','
          << format_double(rows[n].instantaneous_bill) << ','
          << format_double(rows[n].total_load_bill) << ',' << format_double(rows[n].par) << '\n';
    }
    text = csv.str();
  } else if (a.kind == "welfare-gap") {
    if (!welfare) throw UsageError("--kind welfare-gap needs a welfare --oracle result");
    if (!summary && !nash) {
      throw UsageError("--kind welfare-gap needs --summary or a nash --oracle result");
    }
    const double ne_cost = summary ? total_cost(summary->profiles, scenario.curve())
                                   : nash->total_cost;
    const double gap = (ne_cost - welfare->total_cost) / welfare->total_cost;
    const json doc{{"kind", "welfare-gap"},
                   {"scenario_hash", hash},
                   {"flags", flags},
                   {"ne_source", summary ? "summary" : "nash-oracle"},
                   {"ne_total_cost", ne_cost},
                   {"optimal_total_cost", welfare->total_cost},
                   {"relative_gap", gap}};
    text = doc.dump(2) + "\n";
  } else {
    if (a.trace.empty()) throw UsageError("--kind convergence needs --trace");
    std::ifstream in(a.trace);
    if (!in) throw std::runtime_error("cannot open " + a.trace + ": file not found");
    const auto rows = read_trace_csv(in);
    for (std::size_t n : a.consumers) {
      if (n == 0 || n > scenario.size()) {
        throw UsageError("consumer " + std::to_string(n) + " is outside 1.." +
                         std::to_string(scenario.size()));
      }
    }
    std::ostringstream csv;
    csv << "t,n,cost,residual\n";
    for (const auto& row : rows) {
      if (row.consumer == 0 || row.consumer > scenario.size() ||
          row.q.size() != scenario.horizon()) {
        throw UsageError(a.trace + " does not match the scenario's shape");
      }
      if (!a.consumers.empty() &&
          std::find(a.consumers.begin(), a.consumers.end(), row.consumer) == a.consumers.end()) {
        continue;
      }
      csv << row.t << ',' << row.consumer << ',' << format_double(row.cost) << ','
          << format_double(row.residual) << '\n';
    }
    text = csv.str();
  }

  if (a.output.empty() || a.output == "-") {
    out << text;
  } else {
    write_file(a.output, text);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- topology

struct TopologyArgs {
  std::size_t nodes = 0;
  double degree = 4.0;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_topology(const TopologyArgs& a, std::ostream& out) {
  std::mt19937_64 rng(a.seed);
  const CommGraph graph = generate_topology(a.nodes, a.degree, rng);
  std::ostringstream text;
  write_edge_list(text, graph);
  write_file(a.output, text.str());
  out << "wrote " << a.output << " (" << graph.size() << " nodes, " << graph.edges().size()
      << " edges)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Demand-side-management game simulator", "dsmgame"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "generate a residential scenario");
  // --h is the horizon here, so help is long-form only
  generate_cmd->set_help_flag("--help", "print this help message and exit");
  generate_cmd->add_option("--recipe", gen.recipe, "generation recipe JSON");
  generate_cmd->add_option("--base", gen.base, "base interval CSV (slot,low,high)");
  generate_cmd->add_option("--n", gen.consumers, "number of consumers")->check(CLI::PositiveNumber);
  generate_cmd->add_option("--h", gen.horizon, "number of time slots")->check(CLI::PositiveNumber);
  generate_cmd->add_option("--seed", gen.seed, "random seed");
  generate_cmd->add_option("--jitter", gen.jitter, "upper end of the uniform bound jitter");
  generate_cmd->add_option("-o,--output", gen.output, "scenario JSON to write")->required();

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run an equilibrium-seeking algorithm");
  run_cmd->add_option("scenario", run_args.scenario, "scenario JSON")->required();
  run_cmd->add_option("--alg", run_args.alg, "1 central, 2 consensus, 3 gossip")
      ->required()
      ->check(CLI::IsMember({1, 2, 3}));
  run_cmd->add_option("--graph", run_args.graph, "edge-list file");
  run_cmd->add_option("--topology", run_args.topology, "generated topology kind")
      ->check(CLI::IsMember({"random"}));
  run_cmd->add_option("--degree", run_args.degree, "target mean degree for --topology");
  run_cmd->add_option("--seed", run_args.seed, "seed for topology and gossip events");
  run_cmd->add_option("--tol", run_args.tol, "residual tolerance")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--max-iter", run_args.max_iter,
                      "iteration cap (events for --alg 3); default 1000, or 5000 events")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--theta", run_args.theta, "proximal weight (alg 1)");
  run_cmd->add_option("--step-exponent", run_args.step_exponent,
                      "step size t^-p (alg 1 and 2)");
  run_cmd->add_option("--tau", run_args.tau, "mixing parameter in (0,1) (alg 2)");
  run_cmd->add_option("--record-stride", run_args.record_stride,
                      "trace every k-th iteration; default 1, or N events");
  run_cmd->add_option("--trace", run_args.trace, "trace CSV to write");
  run_cmd->add_option("--summary", run_args.summary, "summary JSON to write");
  run_cmd->add_option("-o", run_args.outputs, "output file, .csv trace or .json summary");
  run_cmd->add_flag("--strict", run_args.strict, "exit 2 when the run does not converge");

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "compute a reference solution");
  oracle_cmd->add_option("scenario", oracle_args.scenario, "scenario JSON")->required();
  oracle_cmd->add_option("--kind", oracle_args.kind, "nash or welfare")
      ->required()
      ->check(CLI::IsMember({"nash", "welfare"}));
  oracle_cmd->add_option("--tol", oracle_args.tol, "solver tolerance");
  oracle_cmd->add_option("--max-iter", oracle_args.max_iter, "sweep or iteration cap");
  oracle_cmd->add_option("-o,--output", oracle_args.output, "result JSON to write")->required();

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "derive a report from run artifacts");
  report_cmd->add_option("--kind", report_args.kind, "par, fairness, welfare-gap, convergence")
      ->required()
      ->check(CLI::IsMember({"par", "fairness", "welfare-gap", "convergence"}));
  report_cmd->add_option("--scenario", report_args.scenario, "scenario JSON")->required();
  report_cmd->add_option("--summary", report_args.summary, "run summary JSON");
  report_cmd->add_option("--oracle", report_args.oracles, "oracle result JSON (repeatable)");
  report_cmd->add_option("--trace", report_args.trace, "trace CSV");
  report_cmd->add_option("--consumers", report_args.consumers,
                         "consumers to keep in a convergence report (1-based)")
      ->delimiter(',');
  report_cmd->add_option("-o,--output", report_args.output, "report file (default stdout)");

  TopologyArgs topo;
  auto* topology_cmd = app.add_subcommand("topology", "generate a connected random graph");
  topology_cmd->add_option("--nodes", topo.nodes, "number of nodes")->required();
  topology_cmd->add_option("--degree", topo.degree, "target mean degree");
  topology_cmd->add_option("--seed", topo.seed, "random seed");
  topology_cmd->add_option("-o,--output", topo.output, "edge-list file to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen, out);
    if (*run_cmd) return cmd_run(run_args, out, err);
    if (*oracle_cmd) return cmd_oracle(oracle_args, out);
    if (*report_cmd) return cmd_report(report_args, out);
    return cmd_topology(topo, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace dsm::cli
