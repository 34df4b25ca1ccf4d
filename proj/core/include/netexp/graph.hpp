#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace netexp {

using Node = std::uint32_t;
using ClusterId = std::uint32_t;
using Label = std::int64_t;

/// Immutable undirected simple graph in CSR form.
///
/// Nodes are dense 0..n-1; `label(i)` recovers the identifier used in the
/// source file. Neighbor lists are sorted and free of self-loops and
/// duplicates.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an unordered edge list over dense ids 0..n-1.
  /// Self-loops and duplicate edges (in either orientation) are dropped and
  /// counted in the optional out-parameters.
  static Graph from_edges(std::size_t node_count,
                          std::span<const std::pair<Node, Node>> edges,
                          std::size_t* self_loops_dropped = nullptr,
                          std::size_t* duplicates_dropped = nullptr);

  /// Attaches original labels; `labels.size()` must equal node_count().
  void set_labels(std::vector<Label> labels);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return adjacency_.size() / 2; }

  std::span<const Node> neighbors(Node i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(Node i) const { return offsets_[i + 1] - offsets_[i]; }
  double mean_degree() const;
  bool has_edge(Node u, Node v) const;

  Label label(Node i) const { return labels_.empty() ? static_cast<Label>(i) : labels_[i]; }
  std::span<const Label> labels() const noexcept { return labels_; }

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const Node> adjacency() const noexcept { return adjacency_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Node> adjacency_;
  std::vector<Label> labels_;
};

enum class EdgeListFormat { detect, plain, matrix_market };

struct LoadResult {
  Graph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

/// Parses a plain "u v" edge list or a MatrixMarket coordinate file.
///
/// Plain lists skip blank lines and lines starting with '#' or '%'; labels
/// may be any integers and are compacted to dense ids in sorted label order.
/// MatrixMarket files use the header's row count as n (isolated nodes are
/// kept) and their 1-based indices are shifted to 0-based ids.
/// Throws ParseError on malformed input and Error on an empty graph.
LoadResult load_edge_list(std::istream& in, EdgeListFormat format = EdgeListFormat::detect);
LoadResult load_edge_list_file(const std::filesystem::path& path,
                               EdgeListFormat format = EdgeListFormat::detect);

/// Writes "%%MatrixMarket matrix coordinate pattern symmetric" with the
/// lower triangle, preserving n (and therefore isolated nodes).
void write_matrix_market(const Graph& g, std::ostream& out);
/// Writes one "u v" line per edge (u < v) using original labels.
void write_edge_list(const Graph& g, std::ostream& out);

/// Nodes at shortest-path distance exactly `radius` from `source`, sorted.
std::vector<Node> neighborhood(const Graph& g, Node source, unsigned radius);

/// Cluster partition with its interior/boundary decomposition.
///
/// A node is interior when every neighbor shares its cluster. The touch
/// count of a node is the number of distinct clusters over its closed
/// neighborhood, so touch_count == 1 exactly on interior nodes.
struct Partition {
  std::vector<ClusterId> cluster_of;
  std::vector<std::vector<Node>> clusters;
  std::vector<std::vector<Node>> interior_sets;
  std::vector<std::vector<Node>> boundary_sets;
  std::vector<std::uint32_t> touch_counts;
  std::vector<char> interior;

  std::size_t node_count() const noexcept { return cluster_of.size(); }
  std::size_t cluster_count() const noexcept { return clusters.size(); }
  bool is_interior(Node i) const { return interior[i] != 0; }
  std::size_t interior_count() const;
};

/// Throws Error when `cluster_of` has the wrong length or its ids are not
/// exactly 0..K-1.
Partition decompose(const Graph& g, std::vector<ClusterId> cluster_of);

/// "label cluster" lines, one per node, in node order.
void write_partition(const Graph& g, const Partition& part, std::ostream& out);
/// Reads the format produced by write_partition; labels are mapped through
/// the graph's label table and cluster ids are compacted in order of first
/// appearance by node.
Partition read_partition(const Graph& g, std::istream& in);

}  // namespace netexp
