// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance [id ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsm/algorithms.hpp"
#include "dsm/oracle.hpp"
#include "dsm/scenario.hpp"
#include "dsm/trace_io.hpp"
#include "support.hpp"

using namespace dsm;
using dsm::testing::Rng;
using dsm::testing::uniform;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCanonicalSeed = 1;
constexpr double kTopologyDegree = 4.0;
constexpr double kTheta = 0.2;
constexpr double kTau = 0.5;
const StepSchedule kStep = StepSchedule::power_decay(0.51);

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Trace files written by criteria 4-6, grouped per pass for criterion 10.
class TraceDir {
 public:
  explicit TraceDir(fs::path dir) : dir_(std::move(dir)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void write(const std::string& name, const RunTrace& trace) {
    std::ofstream out(dir_ / (name + ".csv"), std::ios::binary);
    write_trace_csv(out, trace);
    names_.push_back(name);
  }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

// ---------------------------------------------------------------- shared runs

struct CanonicalRuns {
  ScenarioData data;
  Run central;
  Run consensus;
  Run gossip;
};

CanonicalRuns run_canonical(std::uint64_t seed, bool with_gossip) {
  CanonicalRuns r{testing::canonical_scenario(seed), {}, {}, {}};
  const Scenario& s = r.data.scenario;
  SolverOptions o;
  o.tol = 1e-4;
  o.max_iterations = 500;
  r.central = solve_central(s, kTheta, kStep, r.data.initial, o);
  Rng rng(seed);
  const CommGraph graph = generate_topology(s.size(), kTopologyDegree, rng);
  r.consensus = solve_consensus(s, graph, build_weights(graph, kTau), kStep, r.data.initial, o);
  if (with_gossip) {
    SolverOptions g = o;
    g.max_iterations = 5000;
    g.record_stride = s.size();
    const auto events = gossip_stream(graph, rng, g.max_iterations);
    r.gossip = solve_gossip(s, graph, events, r.data.initial, g);
  }
  return r;
}

std::optional<CanonicalRuns> g_canonical;
std::vector<const RunTrace*> g_toy_traces;
std::vector<Run> g_toy_runs;

const CanonicalRuns& canonical() {
  if (!g_canonical) g_canonical = run_canonical(kCanonicalSeed, true);
  return *g_canonical;
}

// ------------------------------------------------------------------ criteria

Outcome criterion_gradient() {
  Rng rng(101);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t consumers = testing::uniform_index(rng, 1, 10);
    const std::size_t horizon = testing::uniform_index(rng, 1, 24);
    const PriceCurve curve = testing::random_curve(rng, horizon, 3.0);
    std::vector<Profile> q(consumers, Profile(horizon));
    for (auto& qn : q)
      for (auto& v : qn) v = uniform(rng, 0.1, 2.0);
    const std::size_t n = testing::uniform_index(rng, 0, consumers - 1);
    const Profile f = mapping_component(q[n], aggregate(q), curve);
    for (std::size_t h = 0; h < horizon; ++h) {
      const double step = 1e-5;
      auto plus = q;
      auto minus = q;
      plus[n][h] += step;
      minus[n][h] -= step;
      const double fd = (testing::own_bill(plus, n, curve) - testing::own_bill(minus, n, curve)) /
                        (2.0 * step);
      worst = std::max(worst, std::abs(fd - f[h]) / std::abs(f[h]));
      ++checked;
    }
  }
  return {worst <= 1e-6, "max relative error " + sci(worst) + " over " + std::to_string(checked) +
                             " components (tol 1e-6)"};
}

Outcome criterion_projection() {
  Rng rng(102);
  double oracle_gap = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t horizon = testing::uniform_index(rng, 1, 4);
    const ConsumerSpec spec = testing::random_spec(rng, horizon);
    Profile v(horizon);
    for (auto& x : v) x = uniform(rng, -2.0, 4.0);
    const Profile expected = testing::qp_projection_oracle(v, spec);
    oracle_gap = expected.empty() ? std::numeric_limits<double>::infinity()
                                  : std::max(oracle_gap,
                                             testing::sup_distance(project(v, spec), expected));
  }
  double idempotence = 0.0;
  double expansion = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t horizon = testing::uniform_index(rng, 1, 24);
    const ConsumerSpec spec = testing::random_spec(rng, horizon);
    Profile x(horizon);
    Profile y(horizon);
    for (auto& v : x) v = uniform(rng, -3.0, 3.0);
    for (auto& v : y) v = uniform(rng, -3.0, 3.0);
    const Profile px = project(x, spec);
    const Profile py = project(y, spec);
    idempotence = std::max(idempotence, testing::sup_distance(project(px, spec), px));
    expansion = std::max(expansion, testing::euclidean_distance(px, py) -
                                        testing::euclidean_distance(x, y));
  }
  const bool pass = oracle_gap <= 1e-8 && idempotence <= 1e-12 && expansion <= 1e-12;
  return {pass, "oracle L-inf gap " + sci(oracle_gap) + " (tol 1e-8), idempotence " +
                    sci(idempotence) + ", max ||Px-Py|| - ||x-y|| " + sci(expansion)};
}

Outcome criterion_certificate() {
  Rng rng(103);
  double min_eig = std::numeric_limits<double>::infinity();
  double rank_two_gap = 0.0;
  double library_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t consumers = testing::uniform_index(rng, 2, 10);
    const double bound = 3.0 + 4.0 / static_cast<double>(consumers - 1);
    const double a = uniform(rng, 0.1, 2.0);
    const double b = uniform(rng, 1.0, bound);
    std::vector<double> loads(consumers);
    for (auto& v : loads) v = uniform(rng, 0.01, 3.0);
    double total = 0.0;
    for (double v : loads) total += v;

    // G[n][m] = d/dq_m (p'(L) q_n + p(L)), built from the price derivatives.
    const auto dim = static_cast<Eigen::Index>(consumers);
    const double d1 = a * b * std::pow(total, b - 1.0);
    const double d2 = a * b * (b - 1.0) * std::pow(total, b - 2.0);
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j)
        g(i, j) = d2 * loads[static_cast<std::size_t>(i)] + d1 + (i == j ? d1 : 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(g + g.transpose(),
                                                       Eigen::EigenvaluesOnly);
    const double lowest = sym.eigenvalues()(0);
    min_eig = std::min(min_eig, lowest / (d1 * total));

    const PriceCurve curve({{a, b, 0.0}});
    const auto cert = monotonicity_certificate(loads, 0, curve);
    library_gap = std::max(library_gap, std::abs(cert.min_eigenvalue - lowest) /
                                            std::max(1.0, std::abs(lowest)));

    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = total + (b - 1.0) * loads[static_cast<std::size_t>(i)];
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r2(z * ones.transpose() + ones * z.transpose(),
                                                      Eigen::EigenvaluesOnly);
    const auto [hi, lo] = rank_two_eigenvalues(loads, b);
    rank_two_gap = std::max({rank_two_gap, std::abs(hi - r2.eigenvalues()(dim - 1)),
                             std::abs(lo - r2.eigenvalues()(0))});
  }
  const bool pass = min_eig > 0.0 && rank_two_gap <= 1e-9 && library_gap <= 1e-9;
  return {pass, "smallest normalised eigenvalue " + sci(min_eig) +
                    " (> 0), rank-2 closed form vs eigensolver " + sci(rank_two_gap) +
                    " (tol 1e-9), library certificate gap " + sci(library_gap)};
}

Outcome criterion_oracle(TraceDir& traces) {
  double oracle_residual = 0.0;
  double gap[3] = {0.0, 0.0, 0.0};
  g_toy_runs.clear();
  for (std::size_t k = 0; k < testing::kToyGames; ++k) {
    const auto game = testing::toy_game(k);
    const Scenario& s = game.scenario;
    const auto ne = nash_best_response_iteration(s, 1e-10);
    oracle_residual = std::max(oracle_residual, fixed_point_residual(ne, s));

    SolverOptions o;
    o.tol = 1e-7;
    o.max_iterations = 20000;
    Rng rng(k);
    const CommGraph graph = s.size() == 2 ? CommGraph::complete(2)
                                          : generate_topology(s.size(), 2.0, rng);
    Run runs[3] = {
        solve_central(s, kTheta, kStep, game.init, o),
        solve_consensus(s, graph, build_weights(graph, kTau), kStep, game.init, o),
        {}};
    SolverOptions g = o;
    g.max_iterations = 200000;
    g.record_stride = 100 * s.size();
    runs[2] = solve_gossip(s, graph, gossip_stream(graph, rng, g.max_iterations), game.init, g);
    for (int alg = 0; alg < 3; ++alg) {
      gap[alg] = std::max(gap[alg], testing::sup_distance(runs[alg].result.profiles, ne));
      traces.write("toy" + std::to_string(k) + "_alg" + std::to_string(alg + 1), runs[alg].trace);
      g_toy_runs.push_back(std::move(runs[alg]));
    }
  }
  const bool pass = oracle_residual <= 1e-6 && gap[0] <= 1e-3 && gap[1] <= 1e-3 && gap[2] <= 1e-3;
  return {pass, "oracle residual " + sci(oracle_residual) + " (tol 1e-6); L-inf to oracle: alg1 " +
                    sci(gap[0]) + ", alg2 " + sci(gap[1]) + ", alg3 " + sci(gap[2]) +
                    " (tol 1e-3)"};
}

double cost_drift_after(const RunTrace& trace, std::size_t from) {
  const TraceRecord* ref = nullptr;
  for (const auto& rec : trace.records) {
    if (rec.t == from) ref = &rec;
  }
  if (ref == nullptr) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& rec : trace.records) {
    if (rec.t < from) continue;
    for (std::size_t n = 0; n < rec.bills.size(); ++n) {
      worst = std::max(worst, std::abs(rec.bills[n] - ref->bills[n]) / ref->bills[n]);
    }
  }
  return worst;
}

// max_n ||q_n(T) - q_n(T-1)||_inf over the last two recorded iterates.
double last_step_change(const RunTrace& trace) {
  const auto& last = trace.records.back().profiles;
  const auto& prev = trace.records[trace.records.size() - 2].profiles;
  return testing::sup_distance(last, prev);
}

Outcome criterion_convergence(TraceDir& traces, bool fresh) {
  if (fresh) g_canonical.reset();
  const CanonicalRuns& r = canonical();
  traces.write("canonical_alg1", r.central.trace);
  traces.write("canonical_alg2", r.consensus.trace);
  traces.write("canonical_alg3", r.gossip.trace);

  const double drift1 = cost_drift_after(r.central.trace, 50);
  const double drift2 = cost_drift_after(r.consensus.trace, 50);
  const Profile reference = aggregate(r.central.result.profiles);
  const double agree3 = testing::relative_sup_distance(aggregate(r.gossip.result.profiles), reference);
  const double agree2 =
      testing::relative_sup_distance(aggregate(r.consensus.result.profiles), reference);

  const bool res1 = r.central.result.converged && r.central.result.iterations <= 500;
  const bool res2 = r.consensus.result.converged && r.consensus.result.iterations <= 500;
  const bool pass = res1 && res2 && drift1 < 0.01 && drift2 < 0.01 && agree3 <= 1e-2;
  return {pass, "residual after <=500 it: alg1 " + sci(r.central.result.residual) + ", alg2 " +
                    sci(r.consensus.result.residual) + " (tol 1e-4); cost drift after t=50: alg1 " +
                    sci(drift1) + ", alg2 " + sci(drift2) + " (< 1e-2); alg3 aggregate vs alg1 after " +
                    std::to_string(r.gossip.result.iterations) + " events " + sci(agree3) +
                    " (tol 1e-2); alg2 vs alg1 " + sci(agree2) + "; last step change (info): alg1 " +
                    sci(last_step_change(r.central.trace)) + ", alg2 " +
                    sci(last_step_change(r.consensus.trace))};
}

Outcome criterion_par(TraceDir& traces) {
  bool pass = true;
  std::string detail = "final/initial PAR per seed:";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CanonicalRuns r = run_canonical(seed, false);
    const double before = par(aggregate(r.data.initial));
    const double after1 = par(aggregate(r.central.result.profiles));
    const double after2 = par(aggregate(r.consensus.result.profiles));
    const double ratio = std::max(after1, after2) / before;
    pass = pass && ratio <= 0.8;
    detail += " " + std::to_string(seed) + ": " + sci(before) + "->" + sci(after1) + " (" +
              sci(ratio) + ")";
    traces.write("par_seed" + std::to_string(seed) + "_alg1", r.central.trace);
    traces.write("par_seed" + std::to_string(seed) + "_alg2", r.consensus.trace);
  }
  return {pass, detail + " (bar 0.8)"};
}

Outcome criterion_fairness() {
  const Scenario s = testing::fairness_pair();
  const auto ne = nash_best_response_iteration(s, 1e-12);
  const auto rows = fairness_comparison(ne, s);
  const auto& a = rows[0];
  const auto& b = rows[1];
  const double inst_sum = a.instantaneous_bill + b.instantaneous_bill;
  const double share_sum = a.total_load_bill + b.total_load_bill;
  const bool shape = a.budget > b.budget && ne[0][0] < ne[1][0];
  const bool pass = shape && a.instantaneous_bill < b.instantaneous_bill &&
                    a.total_load_bill > b.total_load_bill &&
                    std::abs(inst_sum - share_sum) <= 1e-10;
  return {pass, "E_A " + sci(a.budget) + " > E_B " + sci(b.budget) + ", on-peak A " +
                    sci(ne[0][0]) + " < B " + sci(ne[1][0]) + "; instantaneous A " +
                    sci(a.instantaneous_bill) + " vs B " + sci(b.instantaneous_bill) +
                    "; total-load A " + sci(a.total_load_bill) + " vs B " +
                    sci(b.total_load_bill) + "; bill-sum difference " +
                    sci(std::abs(inst_sum - share_sum))};
}

Outcome criterion_welfare() {
  // Ordering check allows floating-point slack of 1e-12 relative.
  double worst_gap = -std::numeric_limits<double>::infinity();
  double lowest_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < testing::kToyGames; ++k) {
    const auto game = testing::toy_game(k);
    const auto ne = nash_best_response_iteration(game.scenario, 1e-10);
    const double ne_cost = total_cost(ne, game.scenario.curve());
    const WelfareOptimum w = social_welfare_optimum(game.scenario);
    const double gap = (ne_cost - w.total_cost) / w.total_cost;
    worst_gap = std::max(worst_gap, gap);
    lowest_gap = std::min(lowest_gap, gap);
  }
  const CanonicalRuns& r = canonical();
  const double ne_cost = total_cost(r.central.result.profiles, r.data.scenario.curve());
  const WelfareOptimum w = social_welfare_optimum(r.data.scenario);
  const double big_gap = (ne_cost - w.total_cost) / w.total_cost;
  const bool pass = lowest_gap >= -1e-12 && worst_gap <= 0.05 && big_gap >= -1e-12 &&
                    big_gap <= 0.05 && w.converged;
  return {pass, "toy games gap in [" + sci(lowest_gap) + ", " + sci(worst_gap) +
                    "]; N=50 gap " + sci(big_gap) + " (NE " + sci(ne_cost) + ", optimum " +
                    sci(w.total_cost) + "); bar [0, 5%]"};
}

Outcome criterion_conservation() {
  const CanonicalRuns& r = canonical();
  const double cons = std::max(r.consensus.trace.max_conservation_error,
                               r.gossip.trace.max_conservation_error);
  double budget = std::max({r.central.trace.max_budget_error, r.consensus.trace.max_budget_error,
                            r.gossip.trace.max_budget_error});
  double bounds = std::max({r.central.trace.max_bound_violation,
                            r.consensus.trace.max_bound_violation,
                            r.gossip.trace.max_bound_violation});
  for (const auto& run : g_toy_runs) {
    budget = std::max(budget, run.trace.max_budget_error);
    bounds = std::max(bounds, run.trace.max_bound_violation);
  }
  const bool pass = cons <= 1e-9 && budget <= 1e-8 && bounds <= 1e-8;
  return {pass, "estimate-sum gap " + sci(cons) + " (tol 1e-9), budget error " + sci(budget) +
                    " (tol 1e-8), bound violation " + sci(bounds) +
                    (g_toy_runs.empty() ? "" : "; includes criterion-4 runs")};
}

bool same_bytes(const fs::path& x, const fs::path& y) {
  std::ifstream a(x, std::ios::binary);
  std::ifstream b(y, std::ios::binary);
  if (!a || !b) return false;
  std::ostringstream sa;
  std::ostringstream sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  return sa.str() == sb.str();
}

std::optional<TraceDir> g_first_pass;

Outcome criterion_determinism() {
  if (!g_first_pass) {
    g_first_pass.emplace("acceptance_traces/first");
    criterion_oracle(*g_first_pass);
    criterion_convergence(*g_first_pass, true);
    criterion_par(*g_first_pass);
  }
  TraceDir second("acceptance_traces/second");
  criterion_oracle(second);
  criterion_convergence(second, true);
  criterion_par(second);
  std::size_t differing = 0;
  for (const auto& name : g_first_pass->names()) {
    if (!same_bytes(g_first_pass->dir() / (name + ".csv"), second.dir() / (name + ".csv"))) {
      ++differing;
    }
  }
  const bool pass = differing == 0 && g_first_pass->names() == second.names();
  return {pass, std::to_string(g_first_pass->names().size() - differing) + "/" +
                    std::to_string(g_first_pass->names().size()) +
                    " trace files byte-identical across reruns of criteria 4-6"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  const auto wanted = [&](int id) {
    return selected.empty() || std::find(selected.begin(), selected.end(), id) != selected.end();
  };
  if (wanted(4) || wanted(5) || wanted(6) || wanted(10)) {
    g_first_pass.emplace("acceptance_traces/first");
  }

  const std::vector<Criterion> criteria{
      {1, "gradient correctness", 5, criterion_gradient},
      {2, "projection correctness", 5, criterion_projection},
      {3, "certificate soundness", 10, criterion_certificate},
      {4, "oracle equivalence", 30, [] { return criterion_oracle(*g_first_pass); }},
      {5, "canonical-scale convergence", 60,
       [] { return criterion_convergence(*g_first_pass, true); }},
      {6, "PAR reduction", 60, [] { return criterion_par(*g_first_pass); }},
      {7, "fairness reversal", 5, criterion_fairness},
      {8, "welfare gap", 60, criterion_welfare},
      {9, "conservation invariants", 60, criterion_conservation},
      {10, "determinism", 600, criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_s;
    const bool pass = outcome.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL",
                c.id, c.name, outcome.detail.c_str(), seconds, c.budget_s,
                in_time ? "" : " OVER TIME");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
