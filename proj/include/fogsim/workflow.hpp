#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fogsim/federation.hpp"
#include "fogsim/types.hpp"

namespace fogsim {

using NodeId = std::size_t;

struct Microservice {
    NodeId id = 0;
    std::string name;
    TaskTypeId type = 0;
    double deadline = 0.0;  // relative budget in seconds
};

struct WorkflowEdge {
    NodeId from = 0;
    NodeId to = 0;
    double payload_bits = 0.0;
};

// Validated micro-service DAG. Node ids are positions in nodes().
class Workflow {
public:
    Workflow() = default;
    Workflow(std::string name, std::vector<Microservice> nodes, std::vector<WorkflowEdge> edges,
             NodeId entry, NodeId exit);

    const std::string& name() const noexcept { return name_; }
    const std::vector<Microservice>& nodes() const noexcept { return nodes_; }
    const std::vector<WorkflowEdge>& edges() const noexcept { return edges_; }
    NodeId entry() const noexcept { return entry_; }
    NodeId exit() const noexcept { return exit_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    const std::vector<NodeId>& topological_order() const noexcept { return topo_; }
    // Position of each node in topological_order().
    std::size_t topo_rank(NodeId id) const { return rank_.at(id); }
    // Indices into edges().
    const std::vector<std::size_t>& in_edges(NodeId id) const { return in_.at(id); }
    const std::vector<std::size_t>& out_edges(NodeId id) const { return out_.at(id); }

    // Copy with replaced per-node deadlines.
    Workflow with_deadlines(std::span<const double> deadlines) const;

private:
    std::string name_;
    std::vector<Microservice> nodes_;
    std::vector<WorkflowEdge> edges_;
    NodeId entry_ = 0;
    NodeId exit_ = 0;
    std::vector<NodeId> topo_;
    std::vector<std::size_t> rank_;
    std::vector<std::vector<std::size_t>> in_;
    std::vector<std::vector<std::size_t>> out_;
};

struct MicroservicePartition {
    std::vector<NodeId> members;  // topological order
    double deadline = 0.0;
};

double workflow_deadline(const Workflow& w);

// Sum of member deadlines.
double partition_deadline(const Workflow& w, std::span<const NodeId> members);

// P(m_1 + ... + m_k <= deadline) with computation latencies only.
double workflow_success_probability(const Workflow& w, FogId fog, const LatencyMatrices& m);
double subset_success_probability(const Workflow& w, std::span<const NodeId> members, FogId fog,
                                  const LatencyMatrices& m);

// Highest subset_success_probability over the receiving fog and its neighbors.
double best_success_probability(const Workflow& w, std::span<const NodeId> members, FogId receiving,
                                const Federation& fed, const LatencyMatrices& m);

struct Bipartition {
    std::vector<NodeId> source_side;  // contains the entry (or the sub-graph's first node)
    std::vector<NodeId> sink_side;
    double cut_weight = 0.0;
};

// Minimum entry/exit separating cut. Edges count in both directions with
// their payload as capacity, so the cut weight is the data volume on edges
// crossing the two sides.
Bipartition min_cut_bipartition(const Workflow& w);

// Same on the sub-graph induced by `members`, separating its topologically
// first and last nodes.
Bipartition min_cut_bipartition(const Workflow& w, std::span<const NodeId> members);

std::vector<MicroservicePartition> propart(const Workflow& w, double alpha, FogId receiving,
                                           const Federation& fed, const LatencyMatrices& m);

// Baselines: one min-cut bipartition; a split after the node with the least
// outgoing data in topological order; no partitioning.
std::vector<MicroservicePartition> mincut_partition(const Workflow& w);
std::vector<MicroservicePartition> least_data_transfer_partition(const Workflow& w);
std::vector<MicroservicePartition> whole_partition(const Workflow& w);

}  // namespace fogsim
