#include "blockprop/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blockprop {

std::string_view to_string(GraphKind k) {
  constexpr std::array<std::string_view, 4> names = {"follows", "likes", "replies", "reposts"};
  return names[static_cast<std::size_t>(k)];
}

EventKind event_kind_of(GraphKind k) {
  switch (k) {
    case GraphKind::Follows: return EventKind::Follow;
    case GraphKind::Likes: return EventKind::Like;
    case GraphKind::Replies: return EventKind::Reply;
    case GraphKind::Reposts: return EventKind::Repost;
  }
  return EventKind::Follow;
}

InteractionGraph::InteractionGraph(GraphKind kind, std::vector<std::string> nodes, std::vector<Edge> edges)
    : kind_(kind), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_.reserve(nodes_.size());
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i], i);
  std::erase_if(edges_, [](const Edge& e) { return e.first == e.second; });
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

std::optional<std::uint32_t> InteractionGraph::find(std::string_view user) const {
  auto it = index_.find(std::string(user));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

InteractionGraph build_graph(const EventLog& log, GraphKind kind) {
  const auto ek = event_kind_of(kind);
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::string> nodes;
  std::vector<InteractionGraph::Edge> edges;
  auto id_of = [&](std::string_view u) {
    auto [it, inserted] = ids.emplace(u, static_cast<std::uint32_t>(nodes.size()));
    if (inserted) nodes.emplace_back(u);
    return it->second;
  };
  for (const auto& e : log.events()) {
    if (e.kind != ek || e.action != EventAction::Create || !e.subject || e.actor == *e.subject) continue;
    const auto a = id_of(e.actor);
    const auto b = id_of(*e.subject);
    edges.emplace_back(a, b);
  }
  return InteractionGraph(kind, std::move(nodes), std::move(edges));
}

std::vector<double> pagerank(const InteractionGraph& g, const PageRankOptions& options) {
  const std::size_t n = g.node_count();
  if (n == 0) return {};
  std::vector<std::uint32_t> out_degree(n, 0);
  for (const auto& [s, t] : g.edges()) ++out_degree[s];

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n);
  for (int it = 0; it < options.max_iterations; ++it) {
    double dangling = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (out_degree[i] == 0) dangling += rank[i];
    const double base = (1.0 - options.damping) * inv_n + options.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (const auto& [s, t] : g.edges()) next[t] += options.damping * rank[s] / out_degree[s];

    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= sum;
      change += std::abs(next[i] - rank[i]);
    }
    rank.swap(next);
    if (change < options.tolerance) break;
  }
  return rank;
}

std::vector<std::uint32_t> coreness(const InteractionGraph& g) {
  const std::size_t n = g.node_count();
  // Undirected projection: A→B and B→A collapse to one neighbour relation.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> undirected;
  undirected.reserve(g.edge_count());
  for (auto [s, t] : g.edges()) undirected.emplace_back(std::min(s, t), std::max(s, t));
  std::sort(undirected.begin(), undirected.end());
  undirected.erase(std::unique(undirected.begin(), undirected.end()), undirected.end());

  std::vector<std::uint32_t> degree(n, 0);
  for (auto [a, b] : undirected) ++degree[a], ++degree[b];
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + degree[i];
  std::vector<std::uint32_t> adj(offset[n]);
  std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
  for (auto [a, b] : undirected) adj[fill[a]++] = b, adj[fill[b]++] = a;

  // Batagelj–Zaversnik bucket ordering.
  const std::uint32_t max_deg = n ? *std::max_element(degree.begin(), degree.end()) : 0;
  std::vector<std::size_t> bin(max_deg + 1, 0);
  for (auto d : degree) ++bin[d];
  std::size_t start = 0;
  for (auto& b : bin) {
    const auto count = b;
    b = start;
    start += count;
  }
  std::vector<std::uint32_t> order(n), pos(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    pos[v] = static_cast<std::uint32_t>(bin[degree[v]]++);
    order[pos[v]] = v;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;

  auto core = degree;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = order[i];
    for (std::size_t k = offset[v]; k < offset[v + 1]; ++k) {
      const auto u = adj[k];
      if (core[u] > core[v]) {
        const auto du = core[u];
        const auto pu = pos[u];
        const auto pw = static_cast<std::uint32_t>(bin[du]);
        const auto w = order[pw];
        if (u != w) {
          order[pu] = w;
          order[pw] = u;
          pos[u] = pw;
          pos[w] = pu;
        }
        ++bin[du];
        --core[u];
      }
    }
  }
  return core;
}

std::vector<std::uint32_t> total_degree(const InteractionGraph& g) {
  std::vector<std::uint32_t> deg(g.node_count(), 0);
  for (auto [s, t] : g.edges()) ++deg[s], ++deg[t];
  return deg;
}

CentralityTable centrality(const InteractionGraph& g, const PageRankOptions& options) {
  return {coreness(g), total_degree(g), pagerank(g, options)};
}

const std::array<std::string, GraphFeatures::kColumns>& GraphFeatures::column_names() {
  static const auto names = [] {
    std::array<std::string, kColumns> out;
    std::size_t i = 0;
    for (auto k : kGraphKinds)
      for (std::string_view m : {"coreness", "degree", "pagerank"}) out[i++] = std::string(to_string(k)) + "_" + std::string(m);
    return out;
  }();
  return names;
}

GraphFeatures GraphFeatures::compute(const EventLog& log, const PageRankOptions& options) {
  GraphFeatures out;
  for (std::size_t gi = 0; gi < kGraphKinds.size(); ++gi) {
    const auto g = build_graph(log, kGraphKinds[gi]);
    const auto table = centrality(g, options);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      auto& row = out.rows_.try_emplace(g.nodes()[v], Row{}).first->second;
      row[gi * 3 + 0] = table.coreness[v];
      row[gi * 3 + 1] = table.total_degree[v];
      row[gi * 3 + 2] = table.pagerank[v];
    }
  }
  return out;
}

GraphFeatures::Row GraphFeatures::row(std::string_view user) const {
  auto it = rows_.find(std::string(user));
  return it == rows_.end() ? Row{} : it->second;
}

}  // namespace blockprop
