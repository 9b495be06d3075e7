#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secinv/admm.hpp"
#include "secinv/centralized.hpp"
#include "secinv/model.hpp"

namespace secinv {

/// In-memory form of a scenario file: network, behavior and solver settings.
struct ScenarioFile {
  std::vector<TargetSpec> targets;
  std::vector<SourceSpec> sources;
  bool complete = true;
  std::vector<TransportNetwork::EdgeKey> edges;  // used when !complete
  double gamma = 1.0;
  ProblemMode mode = ProblemMode::op_a;
  SolverConfig solver;
  AdmmConfig admm;

  TransportNetwork network() const;
  BehavioralModel behavior() const { return BehavioralModel(gamma); }

  bool operator==(const ScenarioFile&) const = default;
};

/// Parses and validates YAML scenario text. Throws ParseError listing every
/// problem found, each anchored to a line when one applies.
ScenarioFile parse_scenario(std::string_view text);

/// Reads and parses a file. Throws IoError when it cannot be read.
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(write_scenario(s)) == s.
std::string write_scenario(const ScenarioFile& scenario);

/// Two sources (capacities 10 and 4) fully connected to five targets with
/// losses {12, 9, 5, 3, 2}; exponential attack probability with r = 1,
/// unit utility slopes, tau = 0.25, no demand bounds, gamma = 0.5.
ScenarioFile case_study_scenario();
std::pair<TransportNetwork, BehavioralModel> build_case_study();

struct SweepSample {
  double param = 0.0;
  std::vector<double> aggregates;  // per target, network order
  double true_loss = 0.0;
  double perceived_loss = 0.0;
  std::size_t active_targets = 0;

  bool operator==(const SweepSample&) const = default;
};

struct SweepResult {
  std::string axis;  // "gamma" or "tau"
  std::size_t target_count = 0;
  std::vector<SweepSample> samples;  // ascending param

  bool operator==(const SweepResult&) const = default;
};

/// Columns: param, target_1..target_n, true_loss, perceived_loss,
/// active_targets. Reals use 9 significant digits.
void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_sweep_csv(const SweepResult& result, const std::filesystem::path& destination);
SweepResult read_sweep_csv(std::istream& in, std::string axis = "");

/// Columns: iteration, primal_residual, objective.
void write_trace_csv(const std::vector<TraceRecord>& trace, std::ostream& out);
void write_trace_csv(const SolveReport& report, std::ostream& out);
void write_trace_csv(const SolveReport& report, const std::filesystem::path& destination);

/// Columns: target, source, amount.
void write_plan_csv(const TransportNetwork& network, const AllocationPlan& plan,
                    std::ostream& out);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Formats a real with 9 significant digits, the convention of every CSV.
std::string format_real(double value);

}  // namespace secinv
