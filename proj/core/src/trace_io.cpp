#include "dsm/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <nlohmann/json.hpp>

#include "dsm/scenario.hpp"

namespace dsm {

namespace {

using nlohmann::json;

double parse_double(std::string_view text, const std::string& where) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ParseError(where + ": malformed number \"" + std::string(text) + "\"");
  }
  return x;
}

std::size_t parse_index(std::string_view text, const std::string& where) {
  std::size_t x = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ParseError(where + ": malformed integer \"" + std::string(text) + "\"");
  }
  return x;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

json parse_object(std::string_view text, const char* what) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!doc.is_object()) throw ParseError(std::string(what) + ": expected a JSON object");
  return doc;
}

template <class T>
T get(const json& doc, const char* key, const char* what) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw ParseError(std::string(what) + ": missing field \"" + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string(what) + "." + key + ": wrong type");
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  std::size_t horizon = 0;
  if (!trace.records.empty() && !trace.records.front().profiles.empty()) {
    horizon = trace.records.front().profiles.front().size();
  }
  out << "t,n,cost,residual";
  for (std::size_t h = 1; h <= horizon; ++h) out << ",q" << h;
  out << '\n';
  for (const auto& rec : trace.records) {
    const std::string residual = format_double(rec.residual);
    for (std::size_t n = 0; n < rec.profiles.size(); ++n) {
      out << rec.t << ',' << (n + 1) << ',' << format_double(rec.bills[n]) << ',' << residual;
      for (double v : rec.profiles[n]) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace: empty file");
  const auto header = split(line);
  if (header.size() < 4 || header[0] != "t" || header[1] != "n" || header[2] != "cost" ||
      header[3] != "residual") {
    throw ParseError("trace line 1: expected header t,n,cost,residual,q1..qH");
  }
  const std::size_t horizon = header.size() - 4;
  for (std::size_t h = 0; h < horizon; ++h) {
    if (header[4 + h] != "q" + std::to_string(h + 1)) {
      throw ParseError("trace line 1: column " + std::to_string(5 + h) + " should be q" +
                       std::to_string(h + 1));
    }
  }
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "trace line " + std::to_string(line_no);
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " columns");
    }
    TraceRow row;
    row.t = parse_index(cells[0], where);
    row.consumer = parse_index(cells[1], where);
    row.cost = parse_double(cells[2], where);
    row.residual = parse_double(cells[3], where);
    row.q.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) row.q.push_back(parse_double(cells[4 + h], where));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string summary_to_json(const RunSummary& s) {
  const json doc{{"algorithm", s.algorithm},
                 {"scenario_hash", s.scenario_hash},
                 {"flags", s.flags},
                 {"converged", s.converged},
                 {"iterations", s.iterations},
                 {"residual", s.residual},
                 {"tol", s.tol},
                 {"uniqueness", s.uniqueness_verified ? "verified" : "unverified"},
                 {"initial_par", s.initial_par},
                 {"final_par", s.final_par},
                 {"initial_total_cost", s.initial_total_cost},
                 {"total_cost", s.total_cost},
                 {"bills", s.bills},
                 {"profiles", s.profiles}};
  return doc.dump(2) + "\n";
}

RunSummary parse_summary(std::string_view text) {
  const json doc = parse_object(text, "summary");
  RunSummary s;
  s.algorithm = get<std::string>(doc, "algorithm", "summary");
  s.scenario_hash = get<std::string>(doc, "scenario_hash", "summary");
  s.flags = get<FlagSet>(doc, "flags", "summary");
  s.converged = get<bool>(doc, "converged", "summary");
  s.iterations = get<std::size_t>(doc, "iterations", "summary");
  s.residual = get<double>(doc, "residual", "summary");
  s.tol = get<double>(doc, "tol", "summary");
  const auto uniqueness = get<std::string>(doc, "uniqueness", "summary");
  if (uniqueness != "verified" && uniqueness != "unverified") {
    throw ParseError("summary.uniqueness: expected \"verified\" or \"unverified\"");
  }
  s.uniqueness_verified = uniqueness == "verified";
  s.initial_par = get<double>(doc, "initial_par", "summary");
  s.final_par = get<double>(doc, "final_par", "summary");
  s.initial_total_cost = get<double>(doc, "initial_total_cost", "summary");
  s.total_cost = get<double>(doc, "total_cost", "summary");
  s.bills = get<std::vector<double>>(doc, "bills", "summary");
  s.profiles = get<std::vector<Profile>>(doc, "profiles", "summary");
  return s;
}

std::string oracle_to_json(const OracleResult& r) {
  const json doc{{"kind", r.kind},
                 {"scenario_hash", r.scenario_hash},
                 {"flags", r.flags},
                 {"converged", r.converged},
                 {"iterations", r.iterations},
                 {"residual", r.residual},
                 {"total_cost", r.total_cost},
                 {"profiles", r.profiles}};
  return doc.dump(2) + "\n";
}

OracleResult parse_oracle(std::string_view text) {
  const json doc = parse_object(text, "oracle result");
  OracleResult r;
  r.kind = get<std::string>(doc, "kind", "oracle result");
  r.scenario_hash = get<std::string>(doc, "scenario_hash", "oracle result");
  r.flags = get<FlagSet>(doc, "flags", "oracle result");
  r.converged = get<bool>(doc, "converged", "oracle result");
  r.iterations = get<std::size_t>(doc, "iterations", "oracle result");
  r.residual = get<double>(doc, "residual", "oracle result");
  r.total_cost = get<double>(doc, "total_cost", "oracle result");
  r.profiles = get<std::vector<Profile>>(doc, "profiles", "oracle result");
  return r;
}

}  // namespace dsm
