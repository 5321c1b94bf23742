#pragma once

// Time-varying undirected graphs with their weight matrices.
//
// Nodes are 0-based internally. The text format (write_sequence /
// read_sequence) and all user-facing messages use 1-based indices.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fdgm {

using Edge = std::pair<int, int>;  // always stored with first < second

class GraphSnapshot {
 public:
  // Throws InvalidInput on self-loops, out-of-range nodes, n < 2 or an
  // empty edge set. Duplicate and reversed pairs are folded together.
  GraphSnapshot(int node_count, std::vector<Edge> edges);

  int node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }
  bool has_edge(int i, int j) const;

  friend bool operator==(const GraphSnapshot& a, const GraphSnapshot& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
};

enum class SequenceKind { Gossip, WindowedTree, FullStatic };

std::string to_string(SequenceKind kind);
SequenceKind sequence_kind_from_string(const std::string& name);

struct SequenceDescriptor {
  SequenceKind kind = SequenceKind::WindowedTree;
  int node_count = 0;
  int window = 1;  // B
  std::uint64_t seed = 0;
};

class GraphSequence {
 public:
  GraphSequence(int node_count, int window, std::vector<GraphSnapshot> snapshots,
                SequenceDescriptor descriptor = {});

  int node_count() const { return n_; }
  int window() const { return window_; }
  int horizon() const { return static_cast<int>(snapshots_.size()); }
  const GraphSnapshot& at(int k) const { return snapshots_.at(k); }
  const std::vector<GraphSnapshot>& snapshots() const { return snapshots_; }
  const SequenceDescriptor& descriptor() const { return descriptor_; }

 private:
  int n_;
  int window_;
  std::vector<GraphSnapshot> snapshots_;
  SequenceDescriptor descriptor_;
};

// Symmetric weight matrix supported on one snapshot's edges. Stored as
// per-edge weights h_ij > 0 plus the diagonal; dense() materializes
// [H]_ii = sum_j h_ij, [H]_ij = -h_ij.
class WeightMatrix {
 public:
  WeightMatrix(int node_count, std::vector<Edge> edges, std::vector<double> edge_weights,
               double h_lower, double h_upper);

  int node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& edge_weights() const { return weights_; }
  double h_lower() const { return h_lower_; }
  double h_upper() const { return h_upper_; }

  Eigen::MatrixXd dense() const;

  // (H (x) I_d) x for an n-by-d block matrix x (rows are nodes).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;

  // x^T (H (x) I_d) x = sum over edges of h_ij ||x_i - x_j||^2.
  double quadratic_form(const Eigen::MatrixXd& x) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  double h_lower_;
  double h_upper_;
};

WeightMatrix laplacian_weights(const GraphSnapshot& g);

// Metropolis-type weights h_ij = 1 / max(|N_i| L_i, |N_j| L_j).
WeightMatrix metropolis_weights(const GraphSnapshot& g, const std::vector<double>& lipschitz);

enum class WeightKind { Laplacian, Metropolis };

std::string to_string(WeightKind kind);

WeightMatrix build_weights(WeightKind kind, const GraphSnapshot& g,
                           const std::vector<double>& lipschitz);

// Union of the edge sets of snapshots [first, first + count).
GraphSnapshot window_union(const GraphSequence& seq, int first, int count);

bool is_connected(int node_count, const std::vector<Edge>& edges);

// True iff every window [kB, (k+1)B - 1] with (k+1)B <= horizon has a
// connected union. horizon must be a multiple of B and at most seq.horizon().
bool verify_b_connectivity(const GraphSequence& seq, int window, int horizon);

// Deterministic in (kind, n, B, seed); window t only depends on (seed, t),
// so generating a longer horizon extends a shorter one.
GraphSequence generate_sequence(SequenceKind kind, int node_count, int window, int horizon,
                                std::uint64_t seed);

// BFS spanning tree of a connected graph rooted at node 0, neighbors visited
// in ascending order. Throws CertificationUnavailable if disconnected.
std::vector<Edge> bfs_spanning_tree(const GraphSnapshot& g);

Eigen::MatrixXd laplacian_matrix(int node_count, const std::vector<Edge>& edges);

// Largest eigenvalue of a symmetric matrix.
double spectral_radius(const Eigen::MatrixXd& symmetric);
double spectral_radius(const WeightMatrix& h);

// Second-smallest eigenvalue of a Laplacian.
double algebraic_connectivity(const Eigen::MatrixXd& laplacian);

int max_degree(const GraphSnapshot& g);
int max_degree(int node_count, const std::vector<Edge>& edges);

// Line-oriented replay format: header "n B horizon", then one line per step
// with space-separated "i-j" pairs (1-based).
void write_sequence(std::ostream& out, const GraphSequence& seq);
GraphSequence read_sequence(std::istream& in);

}  // namespace fdgm
