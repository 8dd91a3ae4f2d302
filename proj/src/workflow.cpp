#include "fogsim/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "fogsim/error.hpp"

namespace fogsim {

namespace {

// Dinic max-flow on a small dense-ish graph.
class FlowNetwork {
public:
    explicit FlowNetwork(std::size_t n) : adj_(n), level_(n), next_(n) {}

    void add_undirected(std::size_t u, std::size_t v, double cap) {
        adj_[u].push_back(arcs_.size());
        arcs_.push_back({v, cap});
        adj_[v].push_back(arcs_.size());
        arcs_.push_back({u, cap});
    }

    double max_flow(std::size_t s, std::size_t t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            std::ranges::fill(next_, 0);
            while (true) {
                const double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
                if (pushed <= 0.0) break;
                flow += pushed;
            }
        }
        return flow;
    }

    // Nodes reachable from s in the residual graph.
    std::vector<bool> source_side(std::size_t s) const {
        std::vector<bool> seen(adj_.size(), false);
        std::vector<std::size_t> stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t a : adj_[u]) {
                if (arcs_[a].cap > kEps && !seen[arcs_[a].to]) {
                    seen[arcs_[a].to] = true;
                    stack.push_back(arcs_[a].to);
                }
            }
        }
        return seen;
    }

private:
    struct Arc {
        std::size_t to;
        double cap;
    };
    static constexpr double kEps = 1e-12;

    bool bfs(std::size_t s, std::size_t t) {
        std::ranges::fill(level_, -1);
        level_[s] = 0;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t a : adj_[u]) {
                if (arcs_[a].cap > kEps && level_[arcs_[a].to] < 0) {
                    level_[arcs_[a].to] = level_[u] + 1;
                    q.push(arcs_[a].to);
                }
            }
        }
        return level_[t] >= 0;
    }

    double dfs(std::size_t u, std::size_t t, double limit) {
        if (u == t) return limit;
        for (std::size_t& i = next_[u]; i < adj_[u].size(); ++i) {
            const std::size_t a = adj_[u][i];
            Arc& arc = arcs_[a];
            if (arc.cap > kEps && level_[arc.to] == level_[u] + 1) {
                const double got = dfs(arc.to, t, std::min(limit, arc.cap));
                if (got > 0.0) {
                    arc.cap -= got;
                    arcs_[a ^ 1].cap += got;
                    return got;
                }
            }
        }
        return 0.0;
    }

    std::vector<std::vector<std::size_t>> adj_;
    std::vector<Arc> arcs_;
    std::vector<int> level_;
    std::vector<std::size_t> next_;
};

std::vector<NodeId> in_topo_order(const Workflow& w, std::span<const NodeId> members) {
    std::vector<NodeId> out(members.begin(), members.end());
    std::ranges::sort(out, {}, [&](NodeId id) { return w.topo_rank(id); });
    return out;
}

MicroservicePartition make_partition(const Workflow& w, std::vector<NodeId> members) {
    MicroservicePartition p;
    p.members = in_topo_order(w, members);
    p.deadline = partition_deadline(w, p.members);
    return p;
}

}  // namespace

Workflow::Workflow(std::string name, std::vector<Microservice> nodes, std::vector<WorkflowEdge> edges,
                   NodeId entry, NodeId exit)
    : name_(std::move(name)), nodes_(std::move(nodes)), edges_(std::move(edges)), entry_(entry), exit_(exit) {
    const std::size_t n = nodes_.size();
    if (n == 0) throw Error(ErrorCode::InvalidWorkflow, "workflow has no nodes");
    if (entry_ >= n || exit_ >= n) throw Error(ErrorCode::InvalidWorkflow, "entry/exit out of range");
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes_[i].id != i) throw Error(ErrorCode::InvalidWorkflow, "node ids must be 0..n-1 in order");
        if (!(nodes_[i].deadline > 0.0) || !std::isfinite(nodes_[i].deadline)) {
            throw Error(ErrorCode::InvalidWorkflow, "node deadline must be positive",
                        "nodes[" + std::to_string(i) + "]");
        }
    }
    in_.assign(n, {});
    out_.assign(n, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        const std::string where = "edges[" + std::to_string(e) + "]";
        if (edge.from >= n || edge.to >= n) throw Error(ErrorCode::InvalidWorkflow, "edge endpoint out of range", where);
        if (edge.from == edge.to) throw Error(ErrorCode::InvalidWorkflow, "self loop", where);
        if (!(edge.payload_bits > 0.0) || !std::isfinite(edge.payload_bits)) {
            throw Error(ErrorCode::InvalidWorkflow, "edge weight must be positive", where);
        }
        out_[edge.from].push_back(e);
        in_[edge.to].push_back(e);
    }

    // Kahn's algorithm; smallest ready id first keeps the order stable.
    std::vector<std::size_t> indegree(n);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = in_[i].size();
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.push(i);
    }
    while (!ready.empty()) {
        const NodeId u = ready.top();
        ready.pop();
        topo_.push_back(u);
        for (std::size_t e : out_[u]) {
            if (--indegree[edges_[e].to] == 0) ready.push(edges_[e].to);
        }
    }
    if (topo_.size() != n) throw Error(ErrorCode::InvalidWorkflow, "workflow has a cycle");
    rank_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) rank_[topo_[i]] = i;

    auto reach = [&](NodeId start, bool forward) {
        std::vector<bool> seen(n, false);
        std::vector<NodeId> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            for (std::size_t e : forward ? out_[u] : in_[u]) {
                const NodeId v = forward ? edges_[e].to : edges_[e].from;
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return seen;
    };
    const auto from_entry = reach(entry_, true);
    const auto to_exit = reach(exit_, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!from_entry[i]) throw Error(ErrorCode::InvalidWorkflow, "node unreachable from entry", nodes_[i].name);
        if (!to_exit[i]) throw Error(ErrorCode::InvalidWorkflow, "node cannot reach exit", nodes_[i].name);
    }
}

Workflow Workflow::with_deadlines(std::span<const double> deadlines) const {
    if (deadlines.size() != nodes_.size()) {
        throw Error(ErrorCode::InvalidParameter, "one deadline per node required");
    }
    Workflow out = *this;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!(deadlines[i] > 0.0)) throw Error(ErrorCode::InvalidWorkflow, "node deadline must be positive");
        out.nodes_[i].deadline = deadlines[i];
    }
    return out;
}

double workflow_deadline(const Workflow& w) {
    double sum = 0.0;
    for (const auto& node : w.nodes()) sum += node.deadline;
    return sum;
}

double partition_deadline(const Workflow& w, std::span<const NodeId> members) {
    double sum = 0.0;
    for (NodeId id : members) sum += w.nodes().at(id).deadline;
    return sum;
}

double subset_success_probability(const Workflow& w, std::span<const NodeId> members, FogId fog,
                                  const LatencyMatrices& m) {
    if (members.empty()) throw Error(ErrorCode::InvalidParameter, "empty member set");
    LatencyDistribution total = lookup_computation(m, w.nodes().at(members[0]).type, fog);
    for (std::size_t i = 1; i < members.size(); ++i) {
        total = convolve(total, lookup_computation(m, w.nodes().at(members[i]).type, fog));
    }
    return success_probability(total, partition_deadline(w, members));
}

double workflow_success_probability(const Workflow& w, FogId fog, const LatencyMatrices& m) {
    return subset_success_probability(w, w.topological_order(), fog, m);
}

double best_success_probability(const Workflow& w, std::span<const NodeId> members, FogId receiving,
                                const Federation& fed, const LatencyMatrices& m) {
    double best = 0.0;
    for (FogId f : fed.candidates(receiving)) {
        best = std::max(best, subset_success_probability(w, members, f, m));
    }
    return best;
}

Bipartition min_cut_bipartition(const Workflow& w, std::span<const NodeId> members) {
    if (members.size() < 2) throw Error(ErrorCode::Unpartitionable, "a single node cannot be split");
    const std::vector<NodeId> order = in_topo_order(w, members);
    std::vector<std::size_t> local(w.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < order.size(); ++i) local[order[i]] = i;

    FlowNetwork net(order.size());
    for (const auto& e : w.edges()) {
        const std::size_t a = local[e.from];
        const std::size_t b = local[e.to];
        if (a < order.size() && b < order.size()) net.add_undirected(a, b, e.payload_bits);
    }
    const std::size_t s = 0;
    const std::size_t t = order.size() - 1;
    Bipartition out;
    out.cut_weight = net.max_flow(s, t);
    const auto side = net.source_side(s);
    if (side[t]) throw Error(ErrorCode::Unpartitionable, "sub-graph is disconnected from its sink");
    for (std::size_t i = 0; i < order.size(); ++i) {
        (side[i] ? out.source_side : out.sink_side).push_back(order[i]);
    }
    // Report the exact crossing payload rather than the accumulated flow.
    double crossing = 0.0;
    for (const auto& e : w.edges()) {
        const std::size_t a = local[e.from];
        const std::size_t b = local[e.to];
        if (a < order.size() && b < order.size() && side[a] != side[b]) crossing += e.payload_bits;
    }
    out.cut_weight = crossing;
    return out;
}

Bipartition min_cut_bipartition(const Workflow& w) {
    if (w.size() < 2) throw Error(ErrorCode::Unpartitionable, "a single node cannot be split");
    // The whole graph's first/last topological nodes are the entry and exit.
    return min_cut_bipartition(w, w.topological_order());
}

namespace {

void propart_split(const Workflow& w, std::vector<NodeId> members, double alpha, bool root, FogId receiving,
                   const Federation& fed, const LatencyMatrices& m, std::vector<MicroservicePartition>& out) {
    const double p = root ? subset_success_probability(w, members, receiving, m)
                          : best_success_probability(w, members, receiving, fed, m);
    if (p >= alpha || members.size() == 1) {
        out.push_back(make_partition(w, std::move(members)));
        return;
    }
    Bipartition cut = min_cut_bipartition(w, members);
    const double pi = best_success_probability(w, cut.source_side, receiving, fed, m);
    const double pj = best_success_probability(w, cut.sink_side, receiving, fed, m);
    if (std::min(pi, pj) < p) {
        out.push_back(make_partition(w, std::move(members)));
        return;
    }
    propart_split(w, std::move(cut.source_side), alpha, false, receiving, fed, m, out);
    propart_split(w, std::move(cut.sink_side), alpha, false, receiving, fed, m, out);
}

}  // namespace

std::vector<MicroservicePartition> propart(const Workflow& w, double alpha, FogId receiving,
                                           const Federation& fed, const LatencyMatrices& m) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0,1)");
    std::vector<MicroservicePartition> out;
    propart_split(w, w.topological_order(), alpha, true, receiving, fed, m, out);
    return out;
}

std::vector<MicroservicePartition> mincut_partition(const Workflow& w) {
    if (w.size() < 2) return whole_partition(w);
    Bipartition cut = min_cut_bipartition(w);
    return {make_partition(w, std::move(cut.source_side)), make_partition(w, std::move(cut.sink_side))};
}

std::vector<MicroservicePartition> least_data_transfer_partition(const Workflow& w) {
    if (w.size() < 2) return whole_partition(w);
    const auto& order = w.topological_order();
    std::size_t best = 0;
    double best_out = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        double produced = 0.0;
        for (std::size_t e : w.out_edges(order[k])) produced += w.edges()[e].payload_bits;
        if (produced < best_out) {
            best_out = produced;
            best = k;
        }
    }
    std::vector<NodeId> head(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best + 1));
    std::vector<NodeId> tail(order.begin() + static_cast<std::ptrdiff_t>(best + 1), order.end());
    return {make_partition(w, std::move(head)), make_partition(w, std::move(tail))};
}

std::vector<MicroservicePartition> whole_partition(const Workflow& w) {
    return {make_partition(w, w.topological_order())};
}

}  // namespace fogsim
