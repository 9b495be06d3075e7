#include "secinv/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace secinv {

namespace {

// Collects every problem in a scenario instead of stopping at the first.
class ScenarioReader {
 public:
  std::vector<Diagnostic> diagnostics;

  void error(const YAML::Node& at, std::string message) {
    std::size_t line = 0, column = 0;
    if (at.IsDefined()) {
      const auto mark = at.Mark();
      if (!mark.is_null()) {
        line = static_cast<std::size_t>(mark.line) + 1;
        column = static_cast<std::size_t>(mark.column) + 1;
      }
    }
    diagnostics.push_back({line, column, std::move(message)});
  }

  void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                  const std::string& where) {
    for (auto it = map.begin(); it != map.end(); ++it) {
      const auto key = it->first.as<std::string>();
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) error(it->first, fmt::format("{}: unknown key '{}'", where, key));
    }
  }

  std::optional<double> real(const YAML::Node& map, const char* key, const std::string& where,
                             std::optional<double> fallback = std::nullopt) {
    const YAML::Node node = map[key];
    if (!node.IsDefined() || node.IsNull()) {
      if (!fallback) error(map, fmt::format("{}: missing required field '{}'", where, key));
      return fallback;
    }
    try {
      const double v = node.as<double>();
      if (std::isnan(v)) throw YAML::BadConversion(node.Mark());
      return v;
    } catch (const YAML::Exception&) {
      error(node, fmt::format("{}.{}: expected a number, got '{}'", where, key,
                              node.IsScalar() ? node.Scalar() : std::string("<non-scalar>")));
      return std::nullopt;
    }
  }

  std::optional<long long> integer(const YAML::Node& map, const char* key,
                                   const std::string& where, long long fallback) {
    const YAML::Node node = map[key];
    if (!node.IsDefined() || node.IsNull()) return fallback;
    try {
      return node.as<long long>();
    } catch (const YAML::Exception&) {
      error(node, fmt::format("{}.{}: expected an integer, got '{}'", where, key,
                              node.IsScalar() ? node.Scalar() : std::string("<non-scalar>")));
      return std::nullopt;
    }
  }

  std::optional<std::string> text(const YAML::Node& map, const char* key,
                                  const std::string& where,
                                  std::optional<std::string> fallback = std::nullopt) {
    const YAML::Node node = map[key];
    if (!node.IsDefined() || node.IsNull()) {
      if (!fallback) error(map, fmt::format("{}: missing required field '{}'", where, key));
      return fallback;
    }
    if (!node.IsScalar()) {
      error(node, fmt::format("{}.{}: expected a string", where, key));
      return std::nullopt;
    }
    return node.Scalar();
  }

  // Anchors a semantic check to the field's line, or the owner's if absent.
  void require(bool ok, const YAML::Node& owner, const char* key, std::string message) {
    if (ok) return;
    const YAML::Node node = owner[key];
    error(node.IsDefined() ? node : owner, std::move(message));
  }
};

TargetSpec read_target(ScenarioReader& r, const YAML::Node& node, std::size_t index) {
  TargetSpec t;
  std::string where = fmt::format("targets[{}]", index);
  if (!node.IsMap()) {
    r.error(node, where + ": expected a mapping");
    return t;
  }
  r.check_keys(node, {"id", "loss", "probability", "baseline", "demand_lower", "demand_upper"},
               where);
  t.id = r.text(node, "id", where).value_or("");
  if (!t.id.empty()) where = fmt::format("target '{}'", t.id);
  const auto loss = r.real(node, "loss", where);
  const auto family = r.text(node, "probability", where, std::string("exponential"));
  const auto baseline = r.real(node, "baseline", where, 1.0);
  const auto lower = r.real(node, "demand_lower", where, 0.0);
  const auto upper = r.real(node, "demand_upper", where, kInfinity);

  if (loss) {
    t.loss_value = *loss;
    r.require(*loss > 0.0 && std::isfinite(*loss), node, "loss",
              fmt::format("{}.loss: must be a finite value > 0, got {}", where, *loss));
  }
  if (family && baseline) {
    if (*family == "exponential") {
      if (*baseline > 0.0 && std::isfinite(*baseline)) {
        t.prob_model = AttackProbabilityModel::exponential(*baseline);
      } else {
        r.require(false, node, "baseline",
                  fmt::format("{}.baseline: exponential baseline must be > 0, got {}", where,
                              *baseline));
      }
    } else if (*family == "reciprocal") {
      if (*baseline > 1.0 && std::isfinite(*baseline)) {
        t.prob_model = AttackProbabilityModel::reciprocal(*baseline);
      } else {
        r.require(false, node, "baseline",
                  fmt::format("{}.baseline: reciprocal baseline must be > 1, got {}", where,
                              *baseline));
      }
    } else {
      r.require(false, node, "probability",
                fmt::format("{}.probability: expected 'exponential' or 'reciprocal', got '{}'",
                            where, *family));
    }
  }
  if (lower) {
    t.demand_lower = *lower;
    r.require(*lower >= 0.0 && std::isfinite(*lower), node, "demand_lower",
              fmt::format("{}.demand_lower: must be a finite value >= 0, got {}", where, *lower));
  }
  if (upper) {
    t.demand_upper = *upper;
    r.require(*upper > 0.0, node, "demand_upper",
              fmt::format("{}.demand_upper: must be > 0, got {}", where, *upper));
  }
  if (lower && upper && *lower > *upper) {
    r.error(node, fmt::format("{}: demand_lower {} exceeds demand_upper {}", where, *lower, *upper));
  }
  return t;
}

SourceSpec read_source(ScenarioReader& r, const YAML::Node& node, std::size_t index) {
  SourceSpec s;
  std::string where = fmt::format("sources[{}]", index);
  if (!node.IsMap()) {
    r.error(node, where + ": expected a mapping");
    return s;
  }
  r.check_keys(node,
               {"id", "supply_lower", "supply_upper", "tau", "utility_slope", "utility_slopes"},
               where);
  s.id = r.text(node, "id", where).value_or("");
  if (!s.id.empty()) where = fmt::format("source '{}'", s.id);
  const auto lower = r.real(node, "supply_lower", where, 0.0);
  const auto upper = r.real(node, "supply_upper", where);
  const auto tau = r.real(node, "tau", where, 0.0);
  const auto slope = r.real(node, "utility_slope", where, 1.0);
  if (lower) {
    s.supply_lower = *lower;
    r.require(*lower >= 0.0 && std::isfinite(*lower), node, "supply_lower",
              fmt::format("{}.supply_lower: must be a finite value >= 0, got {}", where, *lower));
  }
  if (upper) {
    s.supply_upper = *upper;
    r.require(*upper > 0.0 && std::isfinite(*upper), node, "supply_upper",
              fmt::format("{}.supply_upper: must be a finite value > 0, got {}", where, *upper));
  }
  if (lower && upper && *lower > *upper) {
    r.error(node, fmt::format("{}: supply_lower {} exceeds supply_upper {}", where, *lower, *upper));
  }
  if (tau) {
    s.weight_tau = *tau;
    r.require(*tau >= 0.0 && std::isfinite(*tau), node, "tau",
              fmt::format("{}.tau: must be a finite value >= 0, got {}", where, *tau));
  }
  if (slope) {
    s.default_utility_slope = *slope;
    r.require(std::isfinite(*slope), node, "utility_slope",
              fmt::format("{}.utility_slope: must be finite", where));
  }
  const YAML::Node slopes = node["utility_slopes"];
  if (slopes.IsDefined() && !slopes.IsNull()) {
    if (!slopes.IsMap()) {
      r.error(slopes, where + ".utility_slopes: expected a mapping of target id to slope");
    } else {
      for (auto it = slopes.begin(); it != slopes.end(); ++it) {
        const auto key = it->first.as<std::string>();
        try {
          const double v = it->second.as<double>();
          if (!std::isfinite(v)) throw YAML::BadConversion(it->second.Mark());
          s.utility_slopes[key] = v;
        } catch (const YAML::Exception&) {
          r.error(it->second,
                  fmt::format("{}.utility_slopes.{}: expected a finite number", where, key));
        }
      }
    }
  }
  return s;
}

void check_solver(ScenarioReader& r, const YAML::Node& node, ScenarioFile& out) {
  const std::string where = "solver";
  if (!node.IsMap()) {
    r.error(node, "solver: expected a mapping");
    return;
  }
  r.check_keys(node,
               {"mode", "step_size", "max_iterations", "gradient_tolerance", "objective_tolerance"},
               where);
  const SolverConfig defaults;
  if (auto mode = r.text(node, "mode", where, std::string("op_a"))) {
    if (*mode == "op_a") {
      out.mode = ProblemMode::op_a;
    } else if (*mode == "op_b") {
      out.mode = ProblemMode::op_b;
    } else {
      r.require(false, node, "mode",
                fmt::format("solver.mode: expected 'op_a' or 'op_b', got '{}'", *mode));
    }
  }
  auto positive = [&](const char* key, double fallback, double& dest) {
    if (auto v = r.real(node, key, where, fallback)) {
      dest = *v;
      r.require(*v > 0.0 && std::isfinite(*v), node, key,
                fmt::format("solver.{}: must be a finite value > 0, got {}", key, *v));
    }
  };
  positive("step_size", defaults.step_size, out.solver.step_size);
  positive("gradient_tolerance", defaults.gradient_tolerance, out.solver.gradient_tolerance);
  positive("objective_tolerance", defaults.objective_tolerance, out.solver.objective_tolerance);
  if (auto v = r.integer(node, "max_iterations", where,
                         static_cast<long long>(defaults.max_iterations))) {
    r.require(*v >= 1, node, "max_iterations",
              fmt::format("solver.max_iterations: must be >= 1, got {}", *v));
    if (*v >= 1) out.solver.max_iterations = static_cast<std::size_t>(*v);
  }
}

void check_admm(ScenarioReader& r, const YAML::Node& node, ScenarioFile& out) {
  const std::string where = "admm";
  if (!node.IsMap()) {
    r.error(node, "admm: expected a mapping");
    return;
  }
  r.check_keys(node, {"eta", "max_iterations", "primal_tolerance", "dual_tolerance"}, where);
  const AdmmConfig defaults;
  auto positive = [&](const char* key, double fallback, double& dest) {
    if (auto v = r.real(node, key, where, fallback)) {
      dest = *v;
      r.require(*v > 0.0 && std::isfinite(*v), node, key,
                fmt::format("admm.{}: must be a finite value > 0, got {}", key, *v));
    }
  };
  positive("eta", defaults.eta, out.admm.eta);
  positive("primal_tolerance", defaults.primal_tolerance, out.admm.primal_tolerance);
  positive("dual_tolerance", defaults.dual_tolerance, out.admm.dual_tolerance);
  if (auto v = r.integer(node, "max_iterations", where,
                         static_cast<long long>(defaults.max_iterations))) {
    r.require(*v >= 1, node, "max_iterations",
              fmt::format("admm.max_iterations: must be >= 1, got {}", *v));
    if (*v >= 1) out.admm.max_iterations = static_cast<std::size_t>(*v);
  }
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Shortest text that reads back to the same double.
std::string exact_real(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  return fmt::format("{}", v);
}

}  // namespace

TransportNetwork ScenarioFile::network() const {
  if (complete) return TransportNetwork::complete(targets, sources);
  return {targets, sources, edges};
}

ScenarioFile parse_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError({{static_cast<std::size_t>(e.mark.line) + 1,
                       static_cast<std::size_t>(e.mark.column) + 1, "syntax error: " + e.msg}});
  }
  if (!root.IsMap()) throw ParseError({{1, 1, "scenario must be a YAML mapping"}});

  ScenarioReader r;
  ScenarioFile out;
  r.check_keys(root, {"gamma", "targets", "sources", "edges", "solver", "admm"}, "scenario");

  if (auto g = r.real(root, "gamma", "scenario", 1.0)) {
    out.gamma = *g;
    r.require(*g > 0.0 && *g <= 1.0, root, "gamma",
              fmt::format("gamma: must lie in (0, 1], got {}", *g));
  }

  const YAML::Node targets = root["targets"];
  if (!targets.IsDefined() || !targets.IsSequence() || targets.size() == 0) {
    r.error(targets.IsDefined() ? targets : root, "targets: expected a non-empty list");
  } else {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      out.targets.push_back(read_target(r, targets[i], i));
    }
  }
  const YAML::Node sources = root["sources"];
  if (!sources.IsDefined() || !sources.IsSequence() || sources.size() == 0) {
    r.error(sources.IsDefined() ? sources : root, "sources: expected a non-empty list");
  } else {
    for (std::size_t i = 0; i < sources.size(); ++i) {
      out.sources.push_back(read_source(r, sources[i], i));
    }
  }

  std::set<std::string> target_ids, source_ids;
  for (std::size_t i = 0; i < out.targets.size(); ++i) {
    const auto& id = out.targets[i].id;
    if (!id.empty() && !target_ids.insert(id).second) {
      r.error(targets[i], fmt::format("duplicate target id '{}'", id));
    }
  }
  for (std::size_t i = 0; i < out.sources.size(); ++i) {
    const auto& id = out.sources[i].id;
    if (!id.empty() && !source_ids.insert(id).second) {
      r.error(sources[i], fmt::format("duplicate source id '{}'", id));
    }
    for (const auto& [target, slope] : out.sources[i].utility_slopes) {
      if (!target_ids.count(target)) {
        r.error(sources[i]["utility_slopes"],
                fmt::format("source '{}': utility slope names undeclared target '{}'", id, target));
      }
    }
  }

  const YAML::Node edges = root["edges"];
  if (!edges.IsDefined() || edges.IsNull()) {
    out.complete = true;
  } else if (edges.IsScalar()) {
    if (edges.Scalar() == "complete") {
      out.complete = true;
    } else {
      r.error(edges, fmt::format("edges: expected 'complete' or a list of [target, source] "
                                 "pairs, got '{}'",
                                 edges.Scalar()));
    }
  } else if (edges.IsSequence()) {
    out.complete = false;
    std::set<TransportNetwork::EdgeKey> seen;
    std::set<std::string> linked_targets, linked_sources;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const YAML::Node e = edges[i];
      if (!e.IsSequence() || e.size() != 2 || !e[0].IsScalar() || !e[1].IsScalar()) {
        r.error(e, fmt::format("edges[{}]: expected a [target, source] pair", i));
        continue;
      }
      TransportNetwork::EdgeKey key{e[0].Scalar(), e[1].Scalar()};
      bool ok = true;
      if (!target_ids.count(key.first)) {
        r.error(e, fmt::format("edges[{}]: dangling reference to undeclared target '{}'", i,
                               key.first));
        ok = false;
      }
      if (!source_ids.count(key.second)) {
        r.error(e, fmt::format("edges[{}]: dangling reference to undeclared source '{}'", i,
                               key.second));
        ok = false;
      }
      if (!seen.insert(key).second) {
        r.error(e, fmt::format("edges[{}]: duplicate edge ({}, {})", i, key.first, key.second));
        ok = false;
      }
      if (ok) {
        linked_targets.insert(key.first);
        linked_sources.insert(key.second);
        out.edges.push_back(key);
      }
    }
    for (std::size_t i = 0; i < out.targets.size(); ++i) {
      const auto& id = out.targets[i].id;
      if (!id.empty() && !linked_targets.count(id)) {
        r.error(targets[i], fmt::format("target '{}' has no incident edge", id));
      }
    }
    for (std::size_t i = 0; i < out.sources.size(); ++i) {
      const auto& id = out.sources[i].id;
      if (!id.empty() && !linked_sources.count(id)) {
        r.error(sources[i], fmt::format("source '{}' has no incident edge", id));
      }
    }
  } else {
    r.error(edges, "edges: expected 'complete' or a list of [target, source] pairs");
  }

  const YAML::Node solver = root["solver"];
  if (solver.IsDefined() && !solver.IsNull()) check_solver(r, solver, out);
  const YAML::Node admm = root["admm"];
  if (admm.IsDefined() && !admm.IsNull()) check_admm(r, admm, out);

  if (!r.diagnostics.empty()) throw ParseError(std::move(r.diagnostics));
  try {
    (void)out.network();
  } catch (const InvalidInputError& e) {
    throw ParseError({{0, 0, e.what()}});
  }
  return out;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read scenario file '{}'", path.string()), path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string write_scenario(const ScenarioFile& s) {
  std::string out;
  out += fmt::format("gamma: {}\n", exact_real(s.gamma));
  out += "targets:\n";
  for (const auto& t : s.targets) {
    out += fmt::format("  - id: {}\n", quote(t.id));
    out += fmt::format("    loss: {}\n", exact_real(t.loss_value));
    out += fmt::format("    probability: {}\n", to_string(t.prob_model.family()));
    out += fmt::format("    baseline: {}\n", exact_real(t.prob_model.baseline()));
    out += fmt::format("    demand_lower: {}\n", exact_real(t.demand_lower));
    out += fmt::format("    demand_upper: {}\n", exact_real(t.demand_upper));
  }
  out += "sources:\n";
  for (const auto& src : s.sources) {
    out += fmt::format("  - id: {}\n", quote(src.id));
    out += fmt::format("    supply_lower: {}\n", exact_real(src.supply_lower));
    out += fmt::format("    supply_upper: {}\n", exact_real(src.supply_upper));
    out += fmt::format("    tau: {}\n", exact_real(src.weight_tau));
    out += fmt::format("    utility_slope: {}\n", exact_real(src.default_utility_slope));
    if (!src.utility_slopes.empty()) {
      out += "    utility_slopes:\n";
      for (const auto& [target, slope] : src.utility_slopes) {
        out += fmt::format("      {}: {}\n", quote(target), exact_real(slope));
      }
    }
  }
  if (s.complete) {
    out += "edges: complete\n";
  } else {
    out += "edges:\n";
    for (const auto& [target, source] : s.edges) {
      out += fmt::format("  - [{}, {}]\n", quote(target), quote(source));
    }
  }
  out += "solver:\n";
  out += fmt::format("  mode: {}\n", to_string(s.mode));
  out += fmt::format("  step_size: {}\n", exact_real(s.solver.step_size));
  out += fmt::format("  max_iterations: {}\n", s.solver.max_iterations);
  out += fmt::format("  gradient_tolerance: {}\n", exact_real(s.solver.gradient_tolerance));
  out += fmt::format("  objective_tolerance: {}\n", exact_real(s.solver.objective_tolerance));
  out += "admm:\n";
  out += fmt::format("  eta: {}\n", exact_real(s.admm.eta));
  out += fmt::format("  max_iterations: {}\n", s.admm.max_iterations);
  out += fmt::format("  primal_tolerance: {}\n", exact_real(s.admm.primal_tolerance));
  out += fmt::format("  dual_tolerance: {}\n", exact_real(s.admm.dual_tolerance));
  return out;
}

ScenarioFile case_study_scenario() {
  ScenarioFile s;
  const double losses[] = {12.0, 9.0, 5.0, 3.0, 2.0};
  for (std::size_t i = 0; i < 5; ++i) {
    TargetSpec t;
    t.id = fmt::format("t{}", i + 1);
    t.loss_value = losses[i];
    t.prob_model = AttackProbabilityModel::exponential(1.0);
    s.targets.push_back(t);
  }
  const double capacities[] = {10.0, 4.0};
  for (std::size_t i = 0; i < 2; ++i) {
    SourceSpec src;
    src.id = fmt::format("s{}", i + 1);
    src.supply_upper = capacities[i];
    src.weight_tau = 0.25;
    src.default_utility_slope = 1.0;
    s.sources.push_back(src);
  }
  s.complete = true;
  s.gamma = 0.5;
  return s;
}

std::pair<TransportNetwork, BehavioralModel> build_case_study() {
  const auto s = case_study_scenario();
  return {s.network(), s.behavior()};
}

std::string format_real(double value) { return fmt::format("{:.9g}", value); }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()), path.string());
  out << content;
  out.flush();
  if (!out) throw IoError(fmt::format("failed while writing '{}'", path.string()), path.string());
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "param";
  for (std::size_t i = 1; i <= result.target_count; ++i) out << ",target_" << i;
  out << ",true_loss,perceived_loss,active_targets\n";
  for (const auto& s : result.samples) {
    out << format_real(s.param);
    for (double a : s.aggregates) out << ',' << format_real(a);
    out << ',' << format_real(s.true_loss) << ',' << format_real(s.perceived_loss) << ','
        << s.active_targets << '\n';
  }
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& destination) {
  std::ostringstream text;
  write_sweep_csv(result, text);
  write_text_file(destination, text.str());
}

SweepResult read_sweep_csv(std::istream& in, std::string axis) {
  SweepResult result;
  result.axis = std::move(axis);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInputError("sweep CSV is empty");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 4) throw InvalidInputError("sweep CSV header has too few columns");
  result.target_count = columns - 4;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) {
      throw InvalidInputError(fmt::format("sweep CSV row has {} cells, expected {}", cells.size(),
                                          columns));
    }
    SweepSample s;
    s.param = std::stod(cells[0]);
    for (std::size_t i = 0; i < result.target_count; ++i) s.aggregates.push_back(std::stod(cells[1 + i]));
    s.true_loss = std::stod(cells[columns - 3]);
    s.perceived_loss = std::stod(cells[columns - 2]);
    s.active_targets = static_cast<std::size_t>(std::stoull(cells[columns - 1]));
    result.samples.push_back(std::move(s));
  }
  return result;
}

void write_trace_csv(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out << "iteration,primal_residual,objective\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << format_real(r.primal_residual) << ',' << format_real(r.objective)
        << '\n';
  }
}

void write_trace_csv(const SolveReport& report, std::ostream& out) {
  write_trace_csv(report.residual_trace, out);
}

void write_trace_csv(const SolveReport& report, const std::filesystem::path& destination) {
  std::ostringstream text;
  write_trace_csv(report, text);
  write_text_file(destination, text.str());
}

void write_plan_csv(const TransportNetwork& network, const AllocationPlan& plan,
                    std::ostream& out) {
  check_plan(network, plan.amounts());
  out << "target,source,amount\n";
  for (std::size_t e = 0; e < network.edge_count(); ++e) {
    const auto [x, y] = network.edges()[e];
    out << network.targets()[x].id << ',' << network.sources()[y].id << ','
        << format_real(plan[e]) << '\n';
  }
}

}  // namespace secinv
