#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "secinv/scenario_io.hpp"
#include "support.hpp"

using namespace secinv;
using namespace secinv::testing;

namespace fs = std::filesystem;

namespace {

std::vector<Diagnostic> diagnostics_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<Diagnostic>& diags, const std::string& needle) {
  for (const auto& d : diags) {
    if (d.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

const char* kMinimal = R"(targets:
  - {id: a, loss: 3}
sources:
  - {id: s, supply_upper: 2}
)";

}  // namespace

TEST_CASE("shipped scenarios parse") {
  for (const auto& entry : fs::directory_iterator(SECINV_SCENARIO_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_scenario(entry.path()));
  }
}

TEST_CASE("shipped case study equals the builder") {
  const auto file = load_scenario(fs::path(SECINV_SCENARIO_DIR) / "case_study.yaml");
  CHECK(file == case_study_scenario());
  const auto net = file.network();
  CHECK(net.source_count() == 2);
  CHECK(net.target_count() == 5);
  CHECK(net.edge_count() == 10);
  CHECK(net.is_complete());
  for (std::size_t i = 0; i < 5; ++i) CHECK(net.targets()[i].loss_value == kCaseStudyLosses[i]);
  CHECK(net.sources()[0].supply_upper == 10.0);
  CHECK(net.sources()[1].supply_upper == 4.0);

  const auto [built, behavior] = build_case_study();
  double supply = 0.0;
  for (const auto& s : built.sources()) supply += s.supply_upper;
  CHECK(supply == 14.0);
  CHECK(behavior.gamma() == 0.5);
  CHECK(built.targets()[2].prob_model == AttackProbabilityModel::exponential(1.0));
}

TEST_CASE("defaults for omitted fields") {
  const auto s = parse_scenario(kMinimal);
  CHECK(s.gamma == 1.0);
  CHECK(s.complete);
  CHECK(s.mode == ProblemMode::op_a);
  CHECK(s.targets[0].prob_model == AttackProbabilityModel::exponential(1.0));
  CHECK(s.targets[0].demand_upper == kInfinity);
  CHECK(s.sources[0].weight_tau == 0.0);
  CHECK(s.solver == SolverConfig{});
  CHECK(s.admm == AdmmConfig{});
}

TEST_CASE("semantic errors name the field") {
  const auto d = diagnostics_of(std::string("gamma: 1.5\n") + kMinimal);
  REQUIRE(d.size() == 1);
  CHECK(d[0].line == 1);
  CHECK(d[0].message.find("gamma") != std::string::npos);
  CHECK(d[0].message.find("(0, 1]") != std::string::npos);
}

TEST_CASE("dangling edges are reported") {
  const auto d = diagnostics_of(std::string(kMinimal) + "edges:\n  - [ghost, s]\n");
  CHECK(mentions(d, "dangling reference to undeclared target 'ghost'"));
}

TEST_CASE("every problem is reported, each with its line") {
  const std::string text = R"(gamma: 0
targets:
  - {id: a, loss: -1}
  - {id: b, loss: 2, probability: reciprocal, baseline: 0.5}
  - {id: c, loss: 2, demand_lower: 3, demand_upper: 1}
sources:
  - {id: s, supply_lower: 4, supply_upper: 2, colour: red}
solver:
  mode: op_c
  max_iterations: 0
)";
  const auto d = diagnostics_of(text);
  CHECK(d.size() == 8);
  CHECK(mentions(d, "max_iterations"));
  CHECK(mentions(d, "gamma"));
  CHECK(mentions(d, "loss: must be"));
  CHECK(mentions(d, "reciprocal baseline must be > 1"));
  CHECK(mentions(d, "demand_lower 3 exceeds demand_upper 1"));
  CHECK(mentions(d, "supply_lower 4 exceeds supply_upper 2"));
  CHECK(mentions(d, "unknown key 'colour'"));
  CHECK(mentions(d, "solver.mode"));
  for (const auto& diag : d) CHECK(diag.line > 0);
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry a location") {
  const auto d = diagnostics_of("targets: [\n  {id: a\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].line >= 1);
  CHECK(d[0].message.find("syntax error") != std::string::npos);
}

TEST_CASE("missing files are I/O errors naming the path") {
  try {
    load_scenario("/nonexistent/dir/scenario.yaml");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.path() == "/nonexistent/dir/scenario.yaml");
    CHECK(std::string(e.what()).find("/nonexistent/dir/scenario.yaml") != std::string::npos);
  }
}

TEST_CASE("write then parse is lossless") {
  auto a = case_study_scenario();
  CHECK(parse_scenario(write_scenario(a)) == a);

  ScenarioFile b;
  b.gamma = 0.123456789012345;
  b.targets = {target("harbor \"north\"", 10.1, AttackProbabilityModel::reciprocal(2.5), 0.25, 7.0),
               target("plant", 1.0 / 3.0)};
  auto s = source("depot", 2.0, 0.3, 0.5);
  s.default_utility_slope = 0.75;
  s.utility_slopes = {{"plant", 1.5}};
  b.sources = {s, source("other", 1e-3)};
  b.complete = false;
  b.edges = {{"harbor \"north\"", "depot"}, {"plant", "depot"}, {"plant", "other"}};
  b.mode = ProblemMode::op_b;
  b.solver.step_size = 0.5;
  b.solver.max_iterations = 123;
  b.admm.eta = 2.5;
  b.admm.dual_tolerance = 1e-8;
  const auto text = write_scenario(b);
  CHECK(parse_scenario(text) == b);
  CHECK(write_scenario(parse_scenario(text)) == text);
}

TEST_CASE("sweep CSV format") {
  SweepResult r;
  r.axis = "gamma";
  r.target_count = 2;
  std::ostringstream empty;
  write_sweep_csv(r, empty);
  CHECK(empty.str() == "param,target_1,target_2,true_loss,perceived_loss,active_targets\n");

  r.samples = {{0.5, {1.0 / 3.0, 2.0}, 0.123456789123, 1e-12, 2},
               {1.0, {3.0, 0.0}, 4.0, 5.0, 1}};
  std::ostringstream out;
  write_sweep_csv(r, out);
  const auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("0.5,0.333333333,2,0.123456789,1e-12,2\n") != std::string::npos);

  std::istringstream in(text);
  const auto back = read_sweep_csv(in, "gamma");
  REQUIRE(back.samples.size() == 2);
  CHECK(back.target_count == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(back.samples[i].param - r.samples[i].param) <= 1e-9);
    CHECK(max_abs_diff(back.samples[i].aggregates, r.samples[i].aggregates) <= 1e-9);
    CHECK(std::abs(back.samples[i].true_loss - r.samples[i].true_loss) <= 1e-9);
    CHECK(back.samples[i].active_targets == r.samples[i].active_targets);
  }
}

TEST_CASE("trace CSV format") {
  std::ostringstream empty;
  write_trace_csv(std::vector<TraceRecord>{}, empty);
  CHECK(empty.str() == "iteration,primal_residual,objective\n");
  std::ostringstream out;
  write_trace_csv(std::vector<TraceRecord>{{1, 0.5, 2.0, 1.25}, {2, 1e-7, 2.0, 1.0}}, out);
  CHECK(out.str() == "iteration,primal_residual,objective\n1,0.5,1.25\n2,1e-07,1\n");
}

TEST_CASE("writing to an unwritable path names it") {
  SweepResult r;
  r.axis = "tau";
  try {
    write_sweep_csv(r, fs::path("/proc/secinv-no-such-dir/out.csv"));
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/proc/secinv-no-such-dir/out.csv") != std::string::npos);
  }
}
