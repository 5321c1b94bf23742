#pragma once

// Scenario configuration (presets or an INI-style file) and its execution.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdgm/baselines.hpp"
#include "fdgm/certify.hpp"
#include "fdgm/graph.hpp"
#include "fdgm/oracle.hpp"
#include "fdgm/solver.hpp"

namespace fdgm {

enum class AlgorithmKind { FdgmLaplacian, FdgmMetropolis, Subgrad, Diging };

std::string to_string(AlgorithmKind kind);
AlgorithmKind algorithm_kind_from_string(const std::string& name);

// How the step of an algorithm is chosen. Auto means the default for its
// kind: 1/(L n) for Laplacian weights, 1/2 for Metropolis weights, 1 (a/k)
// for the subgradient method and 0.05 for DIGing.
enum class StepMode { Auto, InverseDelta, Value };

struct AlgorithmSpec {
  std::string label;
  AlgorithmKind kind = AlgorithmKind::FdgmMetropolis;
  StepMode step_mode = StepMode::Auto;
  double step = 0.0;      // used when step_mode == Value
  double step_min = 0.0;  // > 0 selects alpha^k ~ U[step_min * alpha, alpha]
  std::uint64_t step_seed = 0;
  std::optional<DeltaRule> delta_rule;  // default per weight kind
  double delta = 0.0;                   // for DeltaRule::Manual
  bool unchecked = false;               // skip the alpha < 2/delta check
};

struct ScenarioConfig {
  std::string name = "custom";
  InstanceSpec instance;
  std::string instance_file;
  SequenceKind graph_kind = SequenceKind::WindowedTree;
  int window = 10;
  int horizon = 1000;
  std::uint64_t graph_seed = 0;
  std::string graph_file;
  int record_every = 1;
  bool certify = false;
  InitKind init = InitKind::Zeros;
  std::uint64_t init_seed = 0;
  Eigen::VectorXd resource_target;  // empty means zero
  double oracle_tol = kDefaultOracleTolerance;
  bool save_inputs = false;
  std::vector<AlgorithmSpec> algorithms;
};

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
// Throws InvalidConfig for unknown names.
ScenarioConfig make_preset(const std::string& name);

// Overrides from the command line; seed s sets instance seed s and graph seed
// s + 1.
void apply_seed(ScenarioConfig& config, std::uint64_t seed);

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const ScenarioConfig& config);

// Throws InvalidConfig naming the offending key.
void validate_config(const ScenarioConfig& config);

struct AlgorithmOutcome {
  std::string label;
  AlgorithmKind kind = AlgorithmKind::FdgmMetropolis;
  std::vector<MetricsRecord> records;
  std::optional<InvariantSummary> invariants;  // dual method only
  std::optional<BaselineInvariants> baseline_invariants;
  std::optional<TheoryConstants> constants;
  std::optional<CertificationReport> certification;
  double resolved_step = 0.0;
  double resolved_delta = 0.0;
  double final_dual_norm = 0.0;  // ||w^K||, dual method only
};

struct ScenarioOutcome {
  ScenarioConfig resolved;  // steps and deltas filled in
  ReferenceSolution reference;
  std::vector<AlgorithmOutcome> algorithms;
  bool certification_passed() const;
};

struct MaterializedScenario {
  ProblemInstance instance;
  GraphSequence sequence;
};

// Builds (or loads) the instance and a graph sequence of at least
// `min_horizon` steps.
MaterializedScenario materialize(const ScenarioConfig& config, int min_horizon);

// Validates, checks B-connectivity over the run horizon, runs every algorithm
// (concurrently) and, when out_dir is given, writes <label>.csv,
// config.resolved and certification.txt atomically.
ScenarioOutcome execute_scenario(const ScenarioConfig& config,
                                 const std::optional<std::filesystem::path>& out_dir = {});

}  // namespace fdgm
