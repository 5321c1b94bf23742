#include "fdgm/graph.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include "fdgm/error.hpp"

namespace fdgm {

namespace {

std::vector<Edge> normalize_edges(int n, std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.first == e.second) {
      throw InvalidInput("self-loop at node " + std::to_string(e.first + 1));
    }
    if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n) {
      throw InvalidInput("edge endpoint out of range for n=" + std::to_string(n));
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

// Streams are keyed by (seed, tag, index) so that windows can be generated
// independently of each other.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t tag, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    tag, index};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kBaseTag = 0xBA5E;
constexpr std::uint32_t kWindowTag = 0x57EF;

std::vector<Edge> random_tree(int n, std::mt19937_64& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> tree;
  tree.reserve(n - 1);
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    int a = order[i];
    int b = order[pick(rng)];
    tree.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

std::vector<Edge> ring_edges(int n) {
  if (n == 2) return {{0, 1}};
  std::vector<Edge> ring;
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    ring.emplace_back(std::min(i, j), std::max(i, j));
  }
  return ring;
}

}  // namespace

GraphSnapshot::GraphSnapshot(int node_count, std::vector<Edge> edges) : n_(node_count) {
  if (n_ < 2) throw InvalidInput("graph needs at least 2 nodes");
  edges_ = normalize_edges(n_, std::move(edges));
  if (edges_.empty()) throw InvalidInput("snapshot edge set is empty");
  neighbors_.resize(n_);
  for (const auto& [i, j] : edges_) {
    neighbors_[i].push_back(j);
    neighbors_[j].push_back(i);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

bool GraphSnapshot::has_edge(int i, int j) const {
  Edge e{std::min(i, j), std::max(i, j)};
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

std::string to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::Gossip:
      return "gossip";
    case SequenceKind::WindowedTree:
      return "windowed_tree";
    case SequenceKind::FullStatic:
      return "full_static";
  }
  return "?";
}

SequenceKind sequence_kind_from_string(const std::string& name) {
  if (name == "gossip") return SequenceKind::Gossip;
  if (name == "windowed_tree") return SequenceKind::WindowedTree;
  if (name == "full_static") return SequenceKind::FullStatic;
  throw InvalidInput("unknown graph kind '" + name + "'");
}

GraphSequence::GraphSequence(int node_count, int window, std::vector<GraphSnapshot> snapshots,
                             SequenceDescriptor descriptor)
    : n_(node_count), window_(window), snapshots_(std::move(snapshots)),
      descriptor_(descriptor) {
  if (window_ < 1) throw InvalidInput("window B must be >= 1");
  for (const auto& s : snapshots_) {
    if (s.node_count() != n_) throw InvalidInput("snapshot node count differs from sequence");
  }
  descriptor_.node_count = n_;
  descriptor_.window = window_;
}

WeightMatrix::WeightMatrix(int node_count, std::vector<Edge> edges,
                           std::vector<double> edge_weights, double h_lower, double h_upper)
    : n_(node_count), edges_(std::move(edges)), weights_(std::move(edge_weights)),
      h_lower_(h_lower), h_upper_(h_upper) {
  if (edges_.size() != weights_.size()) throw InvalidInput("edge/weight count mismatch");
  if (!(h_lower_ > 0.0) || h_lower_ > h_upper_) throw InvalidInput("invalid weight bounds");
}

Eigen::MatrixXd WeightMatrix::dense() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, n_);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [i, j] = edges_[e];
    h(i, j) = -weights_[e];
    h(j, i) = -weights_[e];
    h(i, i) += weights_[e];
    h(j, j) += weights_[e];
  }
  return h;
}

Eigen::MatrixXd WeightMatrix::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [i, j] = edges_[e];
    Eigen::RowVectorXd diff = weights_[e] * (x.row(i) - x.row(j));
    out.row(i) += diff;
    out.row(j) -= diff;
  }
  return out;
}

double WeightMatrix::quadratic_form(const Eigen::MatrixXd& x) const {
  double total = 0.0;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [i, j] = edges_[e];
    total += weights_[e] * (x.row(i) - x.row(j)).squaredNorm();
  }
  return total;
}

WeightMatrix laplacian_weights(const GraphSnapshot& g) {
  std::vector<double> w(g.edges().size(), 1.0);
  return WeightMatrix(g.node_count(), g.edges(), std::move(w), 1.0, 1.0);
}

WeightMatrix metropolis_weights(const GraphSnapshot& g, const std::vector<double>& lipschitz) {
  const int n = g.node_count();
  if (static_cast<int>(lipschitz.size()) != n) {
    throw InvalidInput("need one Lipschitz constant per node");
  }
  for (double l : lipschitz) {
    if (!(l > 0.0)) throw InvalidInput("Lipschitz constants must be positive");
  }
  double max_scaled_degree = 0.0;
  for (int i = 0; i < n; ++i) {
    max_scaled_degree = std::max(max_scaled_degree, g.degree(i) * lipschitz[i]);
  }
  std::vector<double> w;
  w.reserve(g.edges().size());
  double h_upper = 0.0;
  for (const auto& [i, j] : g.edges()) {
    double h = 1.0 / std::max(g.degree(i) * lipschitz[i], g.degree(j) * lipschitz[j]);
    h_upper = std::max(h_upper, h);
    w.push_back(h);
  }
  return WeightMatrix(n, g.edges(), std::move(w), 1.0 / max_scaled_degree, h_upper);
}

std::string to_string(WeightKind kind) {
  return kind == WeightKind::Laplacian ? "laplacian" : "metropolis";
}

WeightMatrix build_weights(WeightKind kind, const GraphSnapshot& g,
                           const std::vector<double>& lipschitz) {
  return kind == WeightKind::Laplacian ? laplacian_weights(g) : metropolis_weights(g, lipschitz);
}

GraphSnapshot window_union(const GraphSequence& seq, int first, int count) {
  std::vector<Edge> edges;
  for (int k = first; k < first + count; ++k) {
    const auto& e = seq.at(k).edges();
    edges.insert(edges.end(), e.begin(), e.end());
  }
  return GraphSnapshot(seq.node_count(), std::move(edges));
}

bool is_connected(int node_count, const std::vector<Edge>& edges) {
  DisjointSets sets(node_count);
  int components = node_count;
  for (const auto& [i, j] : edges) {
    if (sets.unite(i, j)) --components;
  }
  return components == 1;
}

bool verify_b_connectivity(const GraphSequence& seq, int window, int horizon) {
  if (window < 1) throw InvalidInput("window B must be >= 1");
  if (horizon < 0 || horizon % window != 0) {
    throw InvalidInput("horizon " + std::to_string(horizon) + " is not a multiple of B=" +
                       std::to_string(window));
  }
  if (horizon > seq.horizon()) throw InvalidInput("horizon exceeds materialized sequence");
  for (int start = 0; start < horizon; start += window) {
    DisjointSets sets(seq.node_count());
    int components = seq.node_count();
    for (int k = start; k < start + window && components > 1; ++k) {
      for (const auto& [i, j] : seq.at(k).edges()) {
        if (sets.unite(i, j)) --components;
      }
    }
    if (components != 1) return false;
  }
  return true;
}

GraphSequence generate_sequence(SequenceKind kind, int node_count, int window, int horizon,
                                std::uint64_t seed) {
  if (node_count < 2) throw InvalidInput("n must be >= 2");
  if (window < 1) throw InvalidInput("B must be >= 1");
  if (horizon < 0) throw InvalidInput("horizon must be nonnegative");
  const int n = node_count;
  std::vector<GraphSnapshot> snapshots;
  snapshots.reserve(horizon);
  const int windows = (horizon + window - 1) / window;

  switch (kind) {
    case SequenceKind::FullStatic: {
      GraphSnapshot ring(n, ring_edges(n));
      snapshots.assign(horizon, ring);
      break;
    }
    case SequenceKind::Gossip: {
      if (window < n - 1) {
        throw InfeasibleWindow("gossip needs B >= n-1 to cover a spanning tree (n=" +
                               std::to_string(n) + ", B=" + std::to_string(window) + ")");
      }
      auto base_rng = make_stream(seed, kBaseTag, 0);
      const auto tree = random_tree(n, base_rng);
      for (int t = 0; t < windows; ++t) {
        auto rng = make_stream(seed, kWindowTag, static_cast<std::uint32_t>(t));
        std::vector<int> slots(window);
        std::iota(slots.begin(), slots.end(), 0);
        std::shuffle(slots.begin(), slots.end(), rng);
        std::vector<Edge> schedule(window);
        std::uniform_int_distribution<std::size_t> pick(0, tree.size() - 1);
        for (int s = 0; s < window; ++s) {
          schedule[slots[s]] = s < n - 1 ? tree[s] : tree[pick(rng)];
        }
        for (int s = 0; s < window && static_cast<int>(snapshots.size()) < horizon; ++s) {
          snapshots.emplace_back(n, std::vector<Edge>{schedule[s]});
        }
      }
      break;
    }
    case SequenceKind::WindowedTree: {
      // Base graph: random spanning tree plus extra random pairs (mean
      // degree about 4). Tree edges are spread over each window; extra edges
      // flicker on independently with probability 1/B per step.
      auto base_rng = make_stream(seed, kBaseTag, 0);
      const auto tree = random_tree(n, base_rng);
      std::vector<Edge> extra;
      const double p_extra = std::min(1.0, 2.0 / (n - 1));
      std::bernoulli_distribution coin(p_extra);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (coin(base_rng) && !std::binary_search(tree.begin(), tree.end(), Edge{i, j})) {
            extra.emplace_back(i, j);
          }
        }
      }
      std::bernoulli_distribution flicker(1.0 / window);
      std::uniform_int_distribution<int> slot(0, window - 1);
      for (int t = 0; t < windows; ++t) {
        auto rng = make_stream(seed, kWindowTag, static_cast<std::uint32_t>(t));
        std::vector<std::vector<Edge>> steps(window);
        for (const auto& e : tree) steps[slot(rng)].push_back(e);
        for (auto& step_edges : steps) {
          for (const auto& e : extra) {
            if (flicker(rng)) step_edges.push_back(e);
          }
          if (step_edges.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, tree.size() - 1);
            step_edges.push_back(tree[pick(rng)]);
          }
        }
        for (int s = 0; s < window && static_cast<int>(snapshots.size()) < horizon; ++s) {
          snapshots.emplace_back(n, std::move(steps[s]));
        }
      }
      break;
    }
  }
  return GraphSequence(n, window, std::move(snapshots), SequenceDescriptor{kind, n, window, seed});
}

std::vector<Edge> bfs_spanning_tree(const GraphSnapshot& g) {
  const int n = g.node_count();
  std::vector<bool> seen(n, false);
  std::vector<Edge> tree;
  std::queue<int> frontier;
  seen[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop();
    for (int u : g.neighbors(v)) {  // neighbors are sorted ascending
      if (!seen[u]) {
        seen[u] = true;
        tree.emplace_back(std::min(u, v), std::max(u, v));
        frontier.push(u);
      }
    }
  }
  if (static_cast<int>(tree.size()) != n - 1) {
    throw CertificationUnavailable("window union graph is disconnected");
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

Eigen::MatrixXd laplacian_matrix(int node_count, const std::vector<Edge>& edges) {
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(node_count, node_count);
  for (const auto& [i, j] : edges) {
    lap(i, j) -= 1.0;
    lap(j, i) -= 1.0;
    lap(i, i) += 1.0;
    lap(j, j) += 1.0;
  }
  return lap;
}

double spectral_radius(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const WeightMatrix& h) { return spectral_radius(h.dense()); }

double algebraic_connectivity(const Eigen::MatrixXd& laplacian) {
  if (laplacian.rows() < 2) throw InvalidInput("need at least 2 nodes");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1);  // ascending order
}

int max_degree(const GraphSnapshot& g) {
  int best = 0;
  for (int i = 0; i < g.node_count(); ++i) best = std::max(best, g.degree(i));
  return best;
}

int max_degree(int node_count, const std::vector<Edge>& edges) {
  std::vector<int> deg(node_count, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return *std::max_element(deg.begin(), deg.end());
}

void write_sequence(std::ostream& out, const GraphSequence& seq) {
  out << seq.node_count() << ' ' << seq.window() << ' ' << seq.horizon() << '\n';
  for (const auto& snap : seq.snapshots()) {
    bool first = true;
    for (const auto& [i, j] : snap.edges()) {
      if (!first) out << ' ';
      out << (i + 1) << '-' << (j + 1);
      first = false;
    }
    out << '\n';
  }
}

GraphSequence read_sequence(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("graph sequence: missing header");
  std::istringstream header(line);
  int n = 0, window = 0, horizon = 0;
  if (!(header >> n >> window >> horizon)) {
    throw InvalidInput("graph sequence: header must be 'n B horizon'");
  }
  std::vector<GraphSnapshot> snapshots;
  snapshots.reserve(horizon);
  for (int k = 0; k < horizon; ++k) {
    if (!std::getline(in, line)) {
      throw InvalidInput("graph sequence: expected " + std::to_string(horizon) + " steps, got " +
                         std::to_string(k));
    }
    std::istringstream tokens(line);
    std::string tok;
    std::vector<Edge> edges;
    while (tokens >> tok) {
      auto dash = tok.find('-');
      if (dash == std::string::npos) {
        throw InvalidInput("graph sequence: bad edge token '" + tok + "' at step " +
                           std::to_string(k));
      }
      try {
        edges.emplace_back(std::stoi(tok.substr(0, dash)) - 1, std::stoi(tok.substr(dash + 1)) - 1);
      } catch (const std::logic_error&) {
        throw InvalidInput("graph sequence: bad edge token '" + tok + "'");
      }
    }
    snapshots.emplace_back(n, std::move(edges));
  }
  return GraphSequence(n, window, std::move(snapshots));
}

}  // namespace fdgm
