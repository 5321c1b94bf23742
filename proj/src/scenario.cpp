#include "fdgm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fdgm/error.hpp"

namespace fdgm {

namespace pt = boost::property_tree;

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::FdgmLaplacian:
      return "fdgm_laplacian";
    case AlgorithmKind::FdgmMetropolis:
      return "fdgm_metropolis";
    case AlgorithmKind::Subgrad:
      return "subgrad";
    case AlgorithmKind::Diging:
      return "diging";
  }
  return "?";
}

AlgorithmKind algorithm_kind_from_string(const std::string& name) {
  if (name == "fdgm_laplacian") return AlgorithmKind::FdgmLaplacian;
  if (name == "fdgm_metropolis") return AlgorithmKind::FdgmMetropolis;
  if (name == "subgrad") return AlgorithmKind::Subgrad;
  if (name == "diging") return AlgorithmKind::Diging;
  throw InvalidConfig("unknown algorithm kind '" + name + "'");
}

namespace {

bool is_dual_method(AlgorithmKind kind) {
  return kind == AlgorithmKind::FdgmLaplacian || kind == AlgorithmKind::FdgmMetropolis;
}

WeightKind weight_kind(AlgorithmKind kind) {
  return kind == AlgorithmKind::FdgmLaplacian ? WeightKind::Laplacian : WeightKind::Metropolis;
}

AlgorithmSpec algo(std::string label, AlgorithmKind kind, StepMode mode = StepMode::Auto,
                   double step = 0.0) {
  AlgorithmSpec a;
  a.label = std::move(label);
  a.kind = kind;
  a.step_mode = mode;
  a.step = step;
  return a;
}

struct Fig1Row {
  const char* name;
  int n;
  int window;
  double theta_lo;
  double theta_hi;
};

constexpr Fig1Row kFig1[] = {
    {"fig1a", 50, 10, 2.0, 3.0},  {"fig1b", 500, 10, 2.0, 3.0}, {"fig1c", 50, 10, 0.2, 0.4},
    {"fig1d", 50, 50, 2.0, 3.0},  {"fig1e", 500, 50, 2.0, 3.0}, {"fig1f", 50, 10, 5.0, 10.0},
};

constexpr std::uint64_t kDefaultSeed = 42;

ScenarioConfig fig1(const Fig1Row& row) {
  ScenarioConfig c;
  c.name = row.name;
  c.instance.node_count = row.n;
  c.instance.dim = 5;
  c.instance.theta_lo = row.theta_lo;
  c.instance.theta_hi = row.theta_hi;
  c.instance.l1_weight = 1.0 / row.n;
  c.graph_kind = SequenceKind::WindowedTree;
  c.window = row.window;
  c.horizon = 10000;
  c.record_every = 10;
  AlgorithmSpec lap_degree = algo("fdgm_laplacian_degree", AlgorithmKind::FdgmLaplacian,
                                  StepMode::InverseDelta);
  lap_degree.delta_rule = DeltaRule::LaplacianDegree;
  c.algorithms = {algo("subgrad", AlgorithmKind::Subgrad),
                  algo("fdgm_laplacian", AlgorithmKind::FdgmLaplacian), lap_degree,
                  algo("fdgm_metropolis", AlgorithmKind::FdgmMetropolis)};
  apply_seed(c, kDefaultSeed);
  return c;
}

ScenarioConfig fig2(bool empirical) {
  ScenarioConfig c;
  c.name = empirical ? "fig2b" : "fig2a";
  c.instance.node_count = 50;
  c.instance.dim = 5;
  c.instance.theta_lo = 2.0;
  c.instance.theta_hi = 3.0;
  c.instance.unconstrained = true;
  c.instance.l1_weight = 0.0;
  c.graph_kind = SequenceKind::WindowedTree;
  c.window = 10;
  c.horizon = 1000;
  c.record_every = 1;
  AlgorithmSpec metro = algo("fdgm_metropolis", AlgorithmKind::FdgmMetropolis);
  if (empirical) {
    metro.step_mode = StepMode::Value;
    metro.step = 1.7;
    metro.unchecked = true;
  }
  c.algorithms = {algo("fdgm_laplacian", AlgorithmKind::FdgmLaplacian), metro,
                  algo("diging", AlgorithmKind::Diging, StepMode::Value, 0.05)};
  if (empirical) {
    c.algorithms.push_back(algo("subgrad", AlgorithmKind::Subgrad, StepMode::Value, 0.15));
    c.algorithms.push_back(algo("diging_004", AlgorithmKind::Diging, StepMode::Value, 0.04));
  }
  apply_seed(c, kDefaultSeed);
  return c;
}

ScenarioConfig gossip_demo() {
  ScenarioConfig c;
  c.name = "gossip-demo";
  c.instance.node_count = 10;
  c.instance.dim = 3;
  c.instance.l1_weight = 0.1;
  c.graph_kind = SequenceKind::Gossip;
  c.window = 9;
  c.horizon = 9000;
  c.record_every = 9;
  AlgorithmSpec lap = algo("fdgm_laplacian_gossip", AlgorithmKind::FdgmLaplacian,
                           StepMode::InverseDelta);
  lap.delta_rule = DeltaRule::LaplacianDegree;
  c.algorithms = {lap, algo("fdgm_metropolis", AlgorithmKind::FdgmMetropolis)};
  apply_seed(c, kDefaultSeed);
  return c;
}

ScenarioConfig resource_allocation_demo() {
  ScenarioConfig c;
  c.name = "resource-allocation-demo";
  c.instance.node_count = 20;
  c.instance.dim = 3;
  c.instance.l1_weight = 0.0;
  c.graph_kind = SequenceKind::WindowedTree;
  c.window = 5;
  c.horizon = 2000;
  c.record_every = 5;
  c.init = InitKind::RandomSumC;
  c.init_seed = 7;
  c.resource_target = Eigen::Vector3d(1.0, 0.0, 0.0);
  c.algorithms = {algo("fdgm_metropolis", AlgorithmKind::FdgmMetropolis)};
  apply_seed(c, kDefaultSeed);
  return c;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& row : kFig1) {
    std::ostringstream desc;
    desc << "problem (box + l1), n=" << row.n << ", B=" << row.window << ", " << row.theta_lo
         << "<theta_i<" << row.theta_hi << "; subgrad vs Laplacian vs Metropolis";
    out.push_back({row.name, desc.str()});
  }
  out.push_back({"fig2a", "unconstrained QP, n=50, B=10, 2<theta_i<3; theoretically-selected steps"});
  out.push_back({"fig2b", "unconstrained QP, n=50, B=10, 2<theta_i<3; empirically-selected steps"});
  out.push_back({"gossip-demo", "one edge per step, n=10, B=9; Laplacian and Metropolis weights"});
  out.push_back({"resource-allocation-demo",
                 "sum_i w_i = c initialization, n=20, B=5, c=(1,0,0)"});
  return out;
}

ScenarioConfig make_preset(const std::string& name) {
  for (const auto& row : kFig1) {
    if (name == row.name) return fig1(row);
  }
  if (name == "fig2a") return fig2(false);
  if (name == "fig2b") return fig2(true);
  if (name == "gossip-demo") return gossip_demo();
  if (name == "resource-allocation-demo") return resource_allocation_demo();
  throw InvalidConfig("preset: unknown preset '" + name + "'");
}

void apply_seed(ScenarioConfig& config, std::uint64_t seed) {
  config.instance.seed = seed;
  config.graph_seed = seed + 1;
}

// ---------------------------------------------------------------------------
// Config file

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw InvalidConfig(key + ": cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidConfig(key + ": expected true/false, got '" + text + "'");
}

Eigen::VectorXd parse_vector(const std::string& key, const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(parse_value<double>(key, item));
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> take(const std::string& key) {
    used_.insert(key);
    auto child = tree_.get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return child->data();
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    if (auto v = take(key)) target = parse_value<T>(qualified(key), *v);
  }

  void read_bool(const std::string& key, bool& target) {
    if (auto v = take(key)) target = parse_bool(qualified(key), *v);
  }

  std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  void reject_unknown() const {
    for (const auto& [key, child] : tree_) {
      if (child.empty() && !used_.count(key)) {
        throw InvalidConfig(qualified(key) + ": unknown key");
      }
    }
  }

 private:
  std::string name_;
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

}  // namespace

ScenarioConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
  ScenarioConfig c;
  c.algorithms.clear();

  Section top("", tree);
  if (auto v = top.take("name")) c.name = *v;

  for (const auto& [section_name, body] : tree) {
    if (body.empty()) continue;  // top-level key
    Section s(section_name, body);
    if (section_name == "instance") {
      s.read("n", c.instance.node_count);
      s.read("d", c.instance.dim);
      s.read("theta_lo", c.instance.theta_lo);
      s.read("theta_hi", c.instance.theta_hi);
      s.read("box_lo", c.instance.box_lo);
      s.read("box_hi", c.instance.box_hi);
      s.read("b_lo", c.instance.b_lo);
      s.read("b_hi", c.instance.b_hi);
      s.read("l1_weight", c.instance.l1_weight);
      s.read_bool("unconstrained", c.instance.unconstrained);
      s.read("seed", c.instance.seed);
      if (auto v = s.take("file")) c.instance_file = *v;
    } else if (section_name == "graph") {
      if (auto v = s.take("kind")) {
        try {
          c.graph_kind = sequence_kind_from_string(*v);
        } catch (const InvalidInput& e) {
          throw InvalidConfig("graph.kind: " + std::string(e.what()));
        }
      }
      s.read("B", c.window);
      s.read("horizon", c.horizon);
      s.read("seed", c.graph_seed);
      if (auto v = s.take("file")) c.graph_file = *v;
    } else if (section_name == "run") {
      s.read("record_every", c.record_every);
      s.read_bool("certify", c.certify);
      if (auto v = s.take("init")) {
        if (*v == "zeros") {
          c.init = InitKind::Zeros;
        } else if (*v == "random_sum_c") {
          c.init = InitKind::RandomSumC;
        } else {
          throw InvalidConfig("run.init: expected zeros or random_sum_c, got '" + *v + "'");
        }
      }
      s.read("init_seed", c.init_seed);
      if (auto v = s.take("resource_target"); v && !v->empty()) {
        c.resource_target = parse_vector("run.resource_target", *v);
      }
      s.read("oracle_tol", c.oracle_tol);
      s.read_bool("save_inputs", c.save_inputs);
    } else if (section_name.rfind("algorithm:", 0) == 0) {
      AlgorithmSpec a;
      a.label = section_name.substr(std::string("algorithm:").size());
      if (a.label.empty()) throw InvalidConfig(section_name + ": empty algorithm label");
      auto kind = s.take("kind");
      if (!kind) throw InvalidConfig(s.qualified("kind") + ": missing");
      a.kind = algorithm_kind_from_string(*kind);
      if (auto v = s.take("step")) {
        if (*v == "auto") {
          a.step_mode = StepMode::Auto;
        } else if (*v == "inv_delta") {
          a.step_mode = StepMode::InverseDelta;
        } else {
          a.step_mode = StepMode::Value;
          a.step = parse_value<double>(s.qualified("step"), *v);
        }
      }
      s.read("random_step_fraction", a.step_min);
      s.read("step_seed", a.step_seed);
      if (auto v = s.take("delta_rule")) {
        try {
          a.delta_rule = delta_rule_from_string(*v);
        } catch (const InvalidInput& e) {
          throw InvalidConfig(s.qualified("delta_rule") + ": " + e.what());
        }
      }
      s.read("delta", a.delta);
      s.read_bool("unchecked", a.unchecked);
      s.reject_unknown();
      c.algorithms.push_back(a);
      continue;
    } else {
      throw InvalidConfig(section_name + ": unknown section");
    }
    s.reject_unknown();
  }
  top.reject_unknown();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("config: cannot open " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  out << "name = " << c.name << "\n\n[instance]\n";
  if (!c.instance_file.empty()) {
    out << "file = " << c.instance_file << '\n';
  } else {
    out << "n = " << c.instance.node_count << "\nd = " << c.instance.dim
        << "\ntheta_lo = " << fmt(c.instance.theta_lo) << "\ntheta_hi = " << fmt(c.instance.theta_hi)
        << "\nbox_lo = " << fmt(c.instance.box_lo) << "\nbox_hi = " << fmt(c.instance.box_hi)
        << "\nb_lo = " << fmt(c.instance.b_lo) << "\nb_hi = " << fmt(c.instance.b_hi)
        << "\nl1_weight = "
        << fmt(c.instance.l1_weight < 0.0 ? 1.0 / c.instance.node_count : c.instance.l1_weight)
        << "\nunconstrained = " << (c.instance.unconstrained ? "true" : "false")
        << "\nseed = " << c.instance.seed << '\n';
  }
  out << "\n[graph]\n";
  if (!c.graph_file.empty()) out << "file = " << c.graph_file << '\n';
  out << "kind = " << to_string(c.graph_kind) << "\nB = " << c.window
      << "\nhorizon = " << c.horizon << "\nseed = " << c.graph_seed << '\n';
  out << "\n[run]\nrecord_every = " << c.record_every
      << "\ncertify = " << (c.certify ? "true" : "false")
      << "\ninit = " << (c.init == InitKind::Zeros ? "zeros" : "random_sum_c")
      << "\ninit_seed = " << c.init_seed << "\nresource_target = ";
  for (Eigen::Index k = 0; k < c.resource_target.size(); ++k) {
    out << (k ? "," : "") << fmt(c.resource_target(k));
  }
  out << "\noracle_tol = " << fmt(c.oracle_tol)
      << "\nsave_inputs = " << (c.save_inputs ? "true" : "false") << '\n';
  for (const auto& a : c.algorithms) {
    out << "\n[algorithm:" << a.label << "]\nkind = " << to_string(a.kind) << "\nstep = ";
    switch (a.step_mode) {
      case StepMode::Auto:
        out << "auto";
        break;
      case StepMode::InverseDelta:
        out << "inv_delta";
        break;
      case StepMode::Value:
        out << fmt(a.step);
        break;
    }
    out << '\n';
    if (a.step_min > 0.0) {
      out << "random_step_fraction = " << fmt(a.step_min) << "\nstep_seed = " << a.step_seed
          << '\n';
    }
    if (a.delta_rule) out << "delta_rule = " << to_string(*a.delta_rule) << '\n';
    if (a.delta_rule == DeltaRule::Manual) out << "delta = " << fmt(a.delta) << '\n';
    if (a.unchecked) out << "unchecked = true\n";
  }
}

void validate_config(const ScenarioConfig& c) {
  if (c.instance_file.empty()) {
    if (c.instance.node_count < 2) throw InvalidConfig("instance.n: must be >= 2");
    if (c.instance.dim < 1) throw InvalidConfig("instance.d: must be >= 1");
    if (!(0.0 < c.instance.theta_lo && c.instance.theta_lo < c.instance.theta_hi)) {
      throw InvalidConfig("instance.theta_lo/theta_hi: need 0 < theta_lo < theta_hi");
    }
    if (!c.instance.unconstrained &&
        !(0.0 < c.instance.box_lo && c.instance.box_lo <= c.instance.box_hi)) {
      throw InvalidConfig("instance.box_lo/box_hi: need 0 < box_lo <= box_hi");
    }
    if (!(c.instance.b_lo <= c.instance.b_hi)) throw InvalidConfig("instance.b_lo/b_hi: need lo <= hi");
  }
  if (c.graph_file.empty()) {
    if (c.window < 1) throw InvalidConfig("graph.B: must be >= 1");
    if (c.graph_kind == SequenceKind::Gossip && c.window < c.instance.node_count - 1 &&
        c.instance_file.empty()) {
      throw InvalidConfig("graph.B: gossip needs B >= n-1");
    }
  }
  if (c.horizon < 1) throw InvalidConfig("graph.horizon: must be >= 1");
  if (c.record_every < 1) throw InvalidConfig("run.record_every: must be >= 1");
  if (!(c.oracle_tol > 0.0)) throw InvalidConfig("run.oracle_tol: must be positive");
  if (c.resource_target.size() != 0 && c.instance_file.empty() &&
      c.resource_target.size() != c.instance.dim) {
    throw InvalidConfig("run.resource_target: length must equal instance.d");
  }
  if (c.algorithms.empty()) throw InvalidConfig("algorithm: scenario lists no algorithms");
  std::set<std::string> labels;
  for (const auto& a : c.algorithms) {
    const std::string key = "algorithm:" + a.label;
    if (!labels.insert(a.label).second) throw InvalidConfig(key + ": duplicate label");
    if (a.step_mode == StepMode::Value && !(a.step > 0.0)) {
      throw InvalidConfig(key + ".step: must be positive");
    }
    if (a.step_min < 0.0 || a.step_min > 1.0) {
      throw InvalidConfig(key + ".random_step_fraction: must lie in (0, 1]");
    }
    if (!is_dual_method(a.kind) && (a.delta_rule || a.step_min > 0.0)) {
      throw InvalidConfig(key + ": delta_rule/random_step_fraction only apply to fdgm methods");
    }
    if (a.kind == AlgorithmKind::Diging && c.instance_file.empty() && !c.instance.unconstrained) {
      throw InvalidConfig(key + ".kind: diging requires instance.unconstrained = true");
    }
    if (a.delta_rule == DeltaRule::MetropolisTwo && a.kind != AlgorithmKind::FdgmMetropolis) {
      throw InvalidConfig(key + ".delta_rule: metropolis_two requires fdgm_metropolis");
    }
    if (a.delta_rule == DeltaRule::LaplacianDegree && a.kind != AlgorithmKind::FdgmLaplacian) {
      throw InvalidConfig(key + ".delta_rule: laplacian_degree requires fdgm_laplacian");
    }
    if (a.delta_rule == DeltaRule::Manual && !(a.delta > 0.0)) {
      throw InvalidConfig(key + ".delta: manual rule needs delta > 0");
    }
  }
}

// ---------------------------------------------------------------------------
// Execution

MaterializedScenario materialize(const ScenarioConfig& config, int min_horizon) {
  ProblemInstance instance = [&] {
    if (config.instance_file.empty()) return generate_instance(config.instance);
    std::ifstream in(config.instance_file);
    if (!in) throw InvalidConfig("instance.file: cannot open " + config.instance_file);
    return read_instance(in);
  }();
  const int needed = std::max(min_horizon, config.horizon);
  if (config.graph_file.empty()) {
    auto seq = generate_sequence(config.graph_kind, instance.node_count(), config.window, needed,
                                 config.graph_seed);
    return {std::move(instance), std::move(seq)};
  }
  std::ifstream in(config.graph_file);
  if (!in) throw InvalidConfig("graph.file: cannot open " + config.graph_file);
  GraphSequence loaded = read_sequence(in);
  if (loaded.horizon() >= needed) return {std::move(instance), std::move(loaded)};
  if (loaded.horizon() == 0) throw InvalidConfig("graph.file: sequence is empty");
  // Replayed sequences are repeated cyclically.
  std::vector<GraphSnapshot> snaps;
  snaps.reserve(needed);
  for (int k = 0; k < needed; ++k) snaps.push_back(loaded.at(k % loaded.horizon()));
  return {std::move(instance),
          GraphSequence(loaded.node_count(), loaded.window(), std::move(snaps))};
}

bool ScenarioOutcome::certification_passed() const {
  return std::all_of(algorithms.begin(), algorithms.end(), [](const AlgorithmOutcome& a) {
    return !a.certification || a.certification->passed();
  });
}

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidConfig("output: cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

struct ResolvedDualPolicy {
  StepSizePolicy policy;
  WeightKind weights;
};

ResolvedDualPolicy resolve_dual_policy(const AlgorithmSpec& a, const ProblemInstance& instance,
                                       const GraphSequence& seq, int horizon) {
  const WeightKind weights = weight_kind(a.kind);
  const DeltaRule rule = a.delta_rule.value_or(
      weights == WeightKind::Laplacian ? DeltaRule::ConservativeLhn : DeltaRule::MetropolisTwo);
  const std::string key = "algorithm:" + a.label;
  double delta = 0.0;
  try {
    delta = rule == DeltaRule::Manual ? a.delta
                                      : compute_delta(rule, instance, seq, weights, horizon);
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(key + ".delta_rule: " + e.what());
  }
  double alpha = 0.0;
  switch (a.step_mode) {
    case StepMode::Auto:
      alpha = weights == WeightKind::Laplacian
                  ? 1.0 / (instance.lipschitz() * instance.node_count())
                  : 0.5;
      break;
    case StepMode::InverseDelta:
      alpha = 1.0 / delta;
      break;
    case StepMode::Value:
      alpha = a.step;
      break;
  }
  StepSizePolicy p = StepSizePolicy::constant(delta, alpha, rule);
  p.enforce_step_condition = !a.unchecked;
  if (a.step_min > 0.0) {
    p.schedule = ScheduleKind::UniformRandom;
    p.alpha_lo = a.step_min * alpha;
    p.seed = a.step_seed;
  }
  try {
    p.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(key + ".step: " + e.what());
  }
  return {p, weights};
}

double default_baseline_step(AlgorithmKind kind) {
  return kind == AlgorithmKind::Subgrad ? 1.0 : 0.05;
}

}  // namespace

ScenarioOutcome execute_scenario(const ScenarioConfig& config,
                                 const std::optional<std::filesystem::path>& out_dir) {
  validate_config(config);
  const int horizon = config.horizon;
  const int estimate_steps = 10 * horizon;
  MaterializedScenario scenario = materialize(config, config.certify ? estimate_steps : horizon);
  const ProblemInstance& instance = scenario.instance;
  const GraphSequence& seq = scenario.sequence;
  if (seq.node_count() != instance.node_count()) {
    throw InvalidConfig("graph: node count differs from instance.n");
  }
  const int checked = (horizon / seq.window()) * seq.window();
  if (!verify_b_connectivity(seq, seq.window(), checked)) {
    throw InvalidConfig("graph.B: sequence is not B-connected over the horizon");
  }
  if (config.resource_target.size() != 0 && config.resource_target.size() != instance.dim()) {
    throw InvalidConfig("run.resource_target: length must equal instance dimension");
  }

  ScenarioOutcome outcome;
  outcome.resolved = config;
  const bool resource_mode =
      config.resource_target.size() != 0 && config.resource_target.squaredNorm() > 0.0;
  outcome.reference = solve_centralized(instance, kCentralizedTolerance, config.resource_target);

  InitSpec init;
  init.kind = config.init;
  init.seed = config.init_seed;
  init.c = config.resource_target;
  RunOptions options;
  options.horizon = horizon;
  options.record_every = config.record_every;
  options.oracle_tol = config.oracle_tol;
  options.keep_window_starts = config.certify;

  // Resolve and validate every policy before anything runs.
  std::vector<std::optional<ResolvedDualPolicy>> policies;
  for (const auto& a : config.algorithms) {
    if (is_dual_method(a.kind)) {
      policies.push_back(resolve_dual_policy(a, instance, seq, horizon));
    } else {
      policies.emplace_back();
    }
  }

  // Any dual optimum serves the bounds, so one estimate from the fastest
  // certified configuration (Metropolis weights, alpha = 1/2) is shared.
  ReferenceSolution certified_reference = outcome.reference;
  if (config.certify && !resource_mode &&
      std::any_of(policies.begin(), policies.end(), [](const auto& p) {
        return p && p->policy.enforce_step_condition;
      })) {
    estimate_dual_optimum(certified_reference, instance, seq, WeightKind::Metropolis,
                          StepSizePolicy::constant(2.0, 0.5, DeltaRule::MetropolisTwo), init,
                          estimate_steps, config.oracle_tol);
    outcome.reference = certified_reference;
  }

  auto run_one = [&](std::size_t idx) {
    const AlgorithmSpec& a = config.algorithms[idx];
    AlgorithmOutcome out;
    out.label = a.label;
    out.kind = a.kind;
    if (policies[idx]) {
      const auto& [policy, weights] = *policies[idx];
      out.resolved_step = policy.alpha_hi;
      out.resolved_delta = policy.delta;
      const bool certify = config.certify && policy.enforce_step_condition && !resource_mode;
      const ReferenceSolution& reference = certify ? certified_reference : outcome.reference;
      RunResult result = run(instance, seq, weights, policy, init, options, &reference);
      if (certify) {
        out.constants = theory_constants(policy, seq, instance, weights, result, reference, horizon);
        out.certification = check_rate_bounds(result, *out.constants, reference);
      }
      out.invariants = result.invariants;
      out.final_dual_norm = result.final_state.w.norm();
      out.records = std::move(result.records);
    } else {
      BaselineConfig bc;
      bc.kind = a.kind == AlgorithmKind::Subgrad ? BaselineKind::SubgradProjection
                                                 : BaselineKind::Diging;
      bc.step = a.step_mode == StepMode::Value ? a.step : default_baseline_step(a.kind);
      bc.diminishing = a.kind == AlgorithmKind::Subgrad;
      out.resolved_step = bc.step;
      auto result = run_baseline(instance, seq, bc, options, &outcome.reference);
      out.baseline_invariants = result.invariants;
      out.records = std::move(result.records);
    }
    return out;
  };

  std::vector<std::future<AlgorithmOutcome>> jobs;
  for (std::size_t i = 0; i < config.algorithms.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, run_one, i));
  }
  for (auto& job : jobs) outcome.algorithms.push_back(job.get());

  // Resolved echo: every step becomes an explicit value.
  for (std::size_t i = 0; i < config.algorithms.size(); ++i) {
    auto& a = outcome.resolved.algorithms[i];
    a.step_mode = StepMode::Value;
    a.step = outcome.algorithms[i].resolved_step;
    if (policies[i]) {
      a.delta_rule = DeltaRule::Manual;
      a.delta = outcome.algorithms[i].resolved_delta;
    }
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    for (const auto& a : outcome.algorithms) {
      std::ostringstream csv;
      write_metrics_csv(csv, a.records);
      write_atomic(*out_dir / (a.label + ".csv"), csv.str());
    }
    std::ostringstream echo;
    write_config(echo, outcome.resolved);
    write_atomic(*out_dir / "config.resolved", echo.str());
    if (config.certify) {
      std::ostringstream report;
      for (const auto& a : outcome.algorithms) {
        if (!is_dual_method(a.kind)) continue;
        report << "# " << a.label << '\n';
        if (!a.certification) {
          report << "skipped (unchecked step policy or resource-allocation mode)\n";
          continue;
        }
        report << std::setprecision(10) << "rho=" << a.constants->rho
               << " eta=" << a.constants->eta << " lambda_lower=" << a.constants->lambda_lower
               << " varpi_upper=" << a.constants->varpi_upper
               << " dual_norm_bound=" << a.constants->dual_norm_bound << '\n';
        report << "# w* from a 10x-horizon Metropolis run (alpha=1/2)\n";
        write_report(report, *a.certification);
      }
      write_atomic(*out_dir / "certification.txt", report.str());
    }
    if (config.save_inputs) {
      std::ostringstream inst, graph;
      write_instance(inst, instance);
      write_atomic(*out_dir / "instance.json", inst.str());
      write_sequence(graph, GraphSequence(seq.node_count(), seq.window(),
                                          std::vector<GraphSnapshot>(seq.snapshots().begin(),
                                                                     seq.snapshots().begin() + horizon)));
      write_atomic(*out_dir / "graph.txt", graph.str());
    }
  }
  return outcome;
}

}  // namespace fdgm
