#include "netexp/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "netexp/error.hpp"

namespace netexp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == ',')) ++pos;
    if (pos >= s.size()) break;
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t' && s[end] != ',') ++end;
    tokens.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

bool parse_int(std::string_view tok, Label& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_number(std::string_view tok) {
  double value = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

LoadResult finish(std::size_t n, std::vector<std::pair<Node, Node>>& edges,
                  std::vector<Label> labels) {
  if (n == 0) throw Error("edge list contains no nodes");
  LoadResult result;
  result.graph = Graph::from_edges(n, edges, &result.self_loops_dropped,
                                   &result.duplicates_dropped);
  result.graph.set_labels(std::move(labels));
  if (result.graph.edge_count() == 0) throw Error("edge list contains no edges");
  return result;
}

LoadResult load_plain(std::istream& in) {
  std::vector<std::pair<Label, Label>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#' || body.front() == '%') continue;
    const auto tokens = split_ws(body);
    Label u = 0;
    Label v = 0;
    if (tokens.size() < 2 || !parse_int(tokens[0], u) || !parse_int(tokens[1], v))
      throw ParseError(line_no, "expected two integer node labels");
    // A trailing edge weight is tolerated and ignored.
    if (tokens.size() > 3 || (tokens.size() == 3 && !parse_number(tokens[2])))
      throw ParseError(line_no, "unexpected trailing tokens");
    raw.emplace_back(u, v);
  }

  std::vector<Label> labels;
  labels.reserve(raw.size() * 2);
  for (const auto& [u, v] : raw) {
    labels.push_back(u);
    labels.push_back(v);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  auto dense = [&labels](Label l) {
    return static_cast<Node>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
  };
  std::vector<std::pair<Node, Node>> edges;
  edges.reserve(raw.size());
  for (const auto& [u, v] : raw) edges.emplace_back(dense(u), dense(v));
  const std::size_t n = labels.size();
  return finish(n, edges, std::move(labels));
}

LoadResult load_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error("empty MatrixMarket stream");
  ++line_no;
  {
    std::string lowered(line);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered.rfind("%%matrixmarket", 0) != 0)
      throw ParseError(line_no, "missing %%MatrixMarket banner");
    if (lowered.find("coordinate") == std::string::npos)
      throw ParseError(line_no, "only coordinate MatrixMarket files are supported");
  }

  std::size_t rows = 0;
  std::size_t cols = 0;
  bool have_size = false;
  std::vector<std::pair<Node, Node>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '%') continue;
    const auto tokens = split_ws(body);
    if (!have_size) {
      Label r = 0;
      Label c = 0;
      Label nnz = 0;
      if (tokens.size() != 3 || !parse_int(tokens[0], r) || !parse_int(tokens[1], c) ||
          !parse_int(tokens[2], nnz) || r <= 0 || c <= 0 || nnz < 0)
        throw ParseError(line_no, "malformed MatrixMarket size line");
      rows = static_cast<std::size_t>(r);
      cols = static_cast<std::size_t>(c);
      if (rows != cols) throw ParseError(line_no, "adjacency matrix must be square");
      edges.reserve(static_cast<std::size_t>(nnz));
      have_size = true;
      continue;
    }
    Label u = 0;
    Label v = 0;
    if (tokens.size() < 2 || !parse_int(tokens[0], u) || !parse_int(tokens[1], v))
      throw ParseError(line_no, "expected two integer indices");
    for (std::size_t k = 2; k < tokens.size(); ++k)
      if (!parse_number(tokens[k])) throw ParseError(line_no, "non-numeric entry value");
    if (u < 1 || v < 1 || static_cast<std::size_t>(u) > rows ||
        static_cast<std::size_t>(v) > rows)
      throw ParseError(line_no, "index outside the declared matrix size");
    edges.emplace_back(static_cast<Node>(u - 1), static_cast<Node>(v - 1));
  }
  if (!have_size) throw Error("MatrixMarket stream has no size line");

  std::vector<Label> labels(rows);
  std::iota(labels.begin(), labels.end(), Label{1});
  return finish(rows, edges, std::move(labels));
}

}  // namespace

Graph Graph::from_edges(std::size_t node_count, std::span<const std::pair<Node, Node>> edges,
                        std::size_t* self_loops_dropped, std::size_t* duplicates_dropped) {
  std::vector<std::pair<Node, Node>> canon;
  canon.reserve(edges.size());
  std::size_t loops = 0;
  for (auto [u, v] : edges) {
    if (u >= node_count || v >= node_count)
      throw OutOfRangeError("edge endpoint outside 0..n-1");
    if (u == v) {
      ++loops;
      continue;
    }
    if (u > v) std::swap(u, v);
    canon.emplace_back(u, v);
  }
  std::sort(canon.begin(), canon.end());
  const auto unique_end = std::unique(canon.begin(), canon.end());
  const std::size_t dups = static_cast<std::size_t>(canon.end() - unique_end);
  canon.erase(unique_end, canon.end());
  if (self_loops_dropped) *self_loops_dropped = loops;
  if (duplicates_dropped) *duplicates_dropped = dups;

  Graph g;
  g.offsets_.assign(node_count + 1, 0);
  for (const auto& [u, v] : canon) {
    ++g.offsets_[u + 1];
    ++g.offsets_[v + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.adjacency_.resize(canon.size() * 2);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : canon) {
    g.adjacency_[cursor[u]++] = v;
    g.adjacency_[cursor[v]++] = u;
  }
  for (std::size_t i = 0; i < node_count; ++i)
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
  return g;
}

void Graph::set_labels(std::vector<Label> labels) {
  if (labels.size() != node_count()) throw Error("label table size does not match node count");
  labels_ = std::move(labels);
}

double Graph::mean_degree() const {
  const auto n = node_count();
  return n == 0 ? 0.0 : static_cast<double>(adjacency_.size()) / static_cast<double>(n);
}

bool Graph::has_edge(Node u, Node v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

LoadResult load_edge_list(std::istream& in, EdgeListFormat format) {
  if (format == EdgeListFormat::detect) {
    std::string first;
    std::getline(in, first);
    std::string lowered(first);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const bool mm = lowered.rfind("%%matrixmarket", 0) == 0;
    std::stringstream rest;
    rest << first << '\n';
    // Streaming an exhausted buffer would set failbit on `rest`.
    if (in.peek() != std::char_traits<char>::eof()) rest << in.rdbuf();
    return mm ? load_matrix_market(rest) : load_plain(rest);
  }
  return format == EdgeListFormat::matrix_market ? load_matrix_market(in) : load_plain(in);
}

LoadResult load_edge_list_file(const std::filesystem::path& path, EdgeListFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file: " + path.string());
  return load_edge_list(in, format);
}

void write_matrix_market(const Graph& g, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate pattern symmetric\n";
  out << g.node_count() << ' ' << g.node_count() << ' ' << g.edge_count() << '\n';
  for (Node u = 0; u < g.node_count(); ++u)
    for (Node v : g.neighbors(u))
      if (v < u) out << (u + 1) << ' ' << (v + 1) << '\n';
}

void write_edge_list(const Graph& g, std::ostream& out) {
  for (Node u = 0; u < g.node_count(); ++u)
    for (Node v : g.neighbors(u))
      if (u < v) out << g.label(u) << ' ' << g.label(v) << '\n';
}

std::vector<Node> neighborhood(const Graph& g, Node source, unsigned radius) {
  if (source >= g.node_count()) throw OutOfRangeError("node id out of range");
  std::vector<Node> frontier{source};
  std::vector<char> seen(g.node_count(), 0);
  seen[source] = 1;
  for (unsigned hop = 0; hop < radius && !frontier.empty(); ++hop) {
    std::vector<Node> next;
    for (Node u : frontier)
      for (Node v : g.neighbors(u))
        if (!seen[v]) {
          seen[v] = 1;
          next.push_back(v);
        }
    frontier = std::move(next);
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

std::size_t Partition::interior_count() const {
  return static_cast<std::size_t>(std::count(interior.begin(), interior.end(), char{1}));
}

Partition decompose(const Graph& g, std::vector<ClusterId> cluster_of) {
  const std::size_t n = g.node_count();
  if (cluster_of.size() != n) throw Error("cluster assignment must cover every node");
  std::size_t k = 0;
  for (ClusterId c : cluster_of) k = std::max<std::size_t>(k, std::size_t{c} + 1);
  std::vector<char> used(k, 0);
  for (ClusterId c : cluster_of) used[c] = 1;
  if (std::find(used.begin(), used.end(), char{0}) != used.end())
    throw Error("cluster ids must be dense 0..K-1");

  Partition p;
  p.cluster_of = std::move(cluster_of);
  p.clusters.resize(k);
  p.interior_sets.resize(k);
  p.boundary_sets.resize(k);
  p.touch_counts.resize(n);
  p.interior.resize(n);

  std::vector<ClusterId> touched;
  for (Node i = 0; i < n; ++i) {
    const ClusterId own = p.cluster_of[i];
    touched.assign(1, own);
    for (Node j : g.neighbors(i)) touched.push_back(p.cluster_of[j]);
    std::sort(touched.begin(), touched.end());
    const auto distinct = std::unique(touched.begin(), touched.end()) - touched.begin();
    p.touch_counts[i] = static_cast<std::uint32_t>(distinct);
    p.interior[i] = distinct == 1 ? 1 : 0;
    p.clusters[own].push_back(i);
    (distinct == 1 ? p.interior_sets : p.boundary_sets)[own].push_back(i);
  }
  return p;
}

void write_partition(const Graph& g, const Partition& part, std::ostream& out) {
  for (Node i = 0; i < part.node_count(); ++i)
    out << g.label(i) << ' ' << part.cluster_of[i] << '\n';
}

Partition read_partition(const Graph& g, std::istream& in) {
  std::unordered_map<Label, Node> index;
  index.reserve(g.node_count());
  for (Node i = 0; i < g.node_count(); ++i) index.emplace(g.label(i), i);

  constexpr auto unset = static_cast<Label>(-1);
  std::vector<Label> raw(g.node_count(), unset);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#' || body.front() == '%') continue;
    const auto tokens = split_ws(body);
    Label node = 0;
    Label cluster = 0;
    if (tokens.size() != 2 || !parse_int(tokens[0], node) || !parse_int(tokens[1], cluster) ||
        cluster < 0)
      throw ParseError(line_no, "expected \"node cluster\"");
    const auto it = index.find(node);
    if (it == index.end()) throw ParseError(line_no, "unknown node label");
    raw[it->second] = cluster;
  }
  std::unordered_map<Label, ClusterId> dense;
  std::vector<ClusterId> cluster_of(g.node_count());
  for (Node i = 0; i < g.node_count(); ++i) {
    if (raw[i] == unset) throw Error("partition file does not assign every node");
    const auto [it, inserted] = dense.emplace(raw[i], static_cast<ClusterId>(dense.size()));
    cluster_of[i] = it->second;
  }
  return decompose(g, std::move(cluster_of));
}

}  // namespace netexp
