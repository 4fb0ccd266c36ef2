#pragma once

#include "blockprop/events.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace blockprop {

enum class GraphKind : std::uint8_t { Follows, Likes, Replies, Reposts };

inline constexpr std::array<GraphKind, 4> kGraphKinds = {GraphKind::Follows, GraphKind::Likes, GraphKind::Replies,
                                                         GraphKind::Reposts};

std::string_view to_string(GraphKind k);
EventKind event_kind_of(GraphKind k);

/// Simple directed graph over user ids: one edge per distinct (actor, subject)
/// pair, no self-loops. Node ids are dense indices into `nodes`.
class InteractionGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  InteractionGraph() = default;
  /// Edges may repeat and may include self-loops; both are removed.
  InteractionGraph(GraphKind kind, std::vector<std::string> nodes, std::vector<Edge> edges);

  [[nodiscard]] GraphKind kind() const { return kind_; }
  [[nodiscard]] const std::vector<std::string>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }  // sorted, unique
  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
  [[nodiscard]] std::optional<std::uint32_t> find(std::string_view user) const;

 private:
  GraphKind kind_ = GraphKind::Follows;
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<Edge> edges_;
};

/// Graph of create events of the matching kind; deletes do not remove edges.
InteractionGraph build_graph(const EventLog& log, GraphKind kind);

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-10;  // L1 change between iterations
  int max_iterations = 200;
};

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
/// Values are indexed like `g.nodes()` and sum to 1.
std::vector<double> pagerank(const InteractionGraph& g, const PageRankOptions& options = {});

/// k-core number on the undirected projection (bucket peeling).
std::vector<std::uint32_t> coreness(const InteractionGraph& g);

/// In-degree plus out-degree on the simple directed graph.
std::vector<std::uint32_t> total_degree(const InteractionGraph& g);

struct CentralityTable {
  std::vector<std::uint32_t> coreness;
  std::vector<std::uint32_t> total_degree;
  std::vector<double> pagerank;
};

CentralityTable centrality(const InteractionGraph& g, const PageRankOptions& options = {});

/// Per-user graph columns named `<graph>_{coreness,degree,pagerank}` for the
/// four interaction graphs. Users absent from a graph get zeros there.
class GraphFeatures {
 public:
  static constexpr std::size_t kColumns = 12;
  using Row = std::array<double, kColumns>;

  GraphFeatures() = default;
  static GraphFeatures compute(const EventLog& log, const PageRankOptions& options = {});

  static const std::array<std::string, kColumns>& column_names();
  [[nodiscard]] Row row(std::string_view user) const;

 private:
  std::unordered_map<std::string, Row> rows_;
};

}  // namespace blockprop
