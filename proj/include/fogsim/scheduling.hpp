#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fogsim/federation.hpp"
#include "fogsim/stochastic.hpp"
#include "fogsim/types.hpp"
#include "fogsim/workflow.hpp"

namespace fogsim {

inline constexpr double kDefaultCiLevel = 0.95;

struct CandidateEvaluation {
    FogId fog = 0;
    double probability = 0.0;
    CentralInterval interval;
};

struct AssignmentDecision {
    std::size_t subject = 0;  // task id or partition index
    FogId chosen = 0;
    double success_probability = 0.0;
    std::vector<CandidateEvaluation> considered;
};

enum class TaskPolicy { MR, MECT, MCC, EC };

std::string_view to_string(TaskPolicy p) noexcept;
TaskPolicy parse_task_policy(std::string_view name);

// Maximum Robustness. The receiving fog is judged on its computation
// latency alone; a neighbor j on ETT(j) convolved with ETC(j). A neighbor
// wins only with a strictly higher success probability and a central
// interval disjoint from the receiving fog's.
AssignmentDecision assign_mr(const Task& task, FogId receiving, const Federation& fed,
                             const LatencyMatrices& m, double ci_level = kDefaultCiLevel);

// Lowest mean computation latency; ties go to the lowest fog id.
AssignmentDecision assign_mect(const Task& task, FogId receiving, const Federation& fed,
                               const LatencyMatrices& m);

// Highest (budget - mean computation latency); ties go to the lowest fog id.
AssignmentDecision assign_mcc(const Task& task, FogId receiving, const Federation& fed,
                              const LatencyMatrices& m);

// Urgent tasks stay on the receiving fog, the rest go to the cloud. With
// matrices the decision also reports the chosen target's success probability.
AssignmentDecision assign_ec(const Task& task, FogId receiving, const Federation& fed,
                             const LatencyMatrices* m = nullptr);

AssignmentDecision assign_task(TaskPolicy policy, const Task& task, FogId receiving, const Federation& fed,
                               const LatencyMatrices& m, double ci_level = kDefaultCiLevel);

// Per-partition Maximum Robustness: the partition's budget is the sum of its
// members' deadlines and its latency on fog j is the convolution over
// members of ETT(j) and ETC(j) (ETC only on the receiving fog).
std::vector<AssignmentDecision> assign_partitions_mr(std::span<const MicroservicePartition> partitions,
                                                     const Workflow& w, FogId receiving, const Federation& fed,
                                                     const LatencyMatrices& m,
                                                     double ci_level = kDefaultCiLevel);

// Partition-level baselines over summed mean computation latency.
std::vector<AssignmentDecision> assign_partitions_mect(std::span<const MicroservicePartition> partitions,
                                                       const Workflow& w, FogId receiving,
                                                       const Federation& fed, const LatencyMatrices& m);
std::vector<AssignmentDecision> assign_partitions_mcc(std::span<const MicroservicePartition> partitions,
                                                      const Workflow& w, FogId receiving,
                                                      const Federation& fed, const LatencyMatrices& m);

std::vector<AssignmentDecision> assign_partitions(TaskPolicy policy,
                                                  std::span<const MicroservicePartition> partitions,
                                                  const Workflow& w, FogId receiving, const Federation& fed,
                                                  const LatencyMatrices& m, double ci_level = kDefaultCiLevel);

}  // namespace fogsim
