#include "fogsim/scheduling.hpp"

#include <algorithm>
#include <string>

#include "fogsim/error.hpp"

namespace fogsim {

namespace {

struct Option {
    FogId fog;
    LatencyDistribution dist;
};

// Shared walk of the robustness rule over pre-computed latency options.
// options[0] is the receiving fog.
AssignmentDecision robust_choice(std::size_t subject, std::span<const Option> options, double budget,
                                 double ci_level) {
    AssignmentDecision d;
    d.subject = subject;
    for (const auto& o : options) {
        d.considered.push_back({o.fog, success_probability(o.dist, budget), central_interval(o.dist, ci_level)});
    }
    const CandidateEvaluation& local = d.considered.front();
    std::vector<const CandidateEvaluation*> better;
    for (std::size_t i = 1; i < d.considered.size(); ++i) {
        if (d.considered[i].probability > local.probability) better.push_back(&d.considered[i]);
    }
    std::ranges::stable_sort(better, [](const CandidateEvaluation* a, const CandidateEvaluation* b) {
        if (a->probability != b->probability) return a->probability > b->probability;
        return a->fog < b->fog;
    });
    d.chosen = local.fog;
    d.success_probability = local.probability;
    for (const CandidateEvaluation* c : better) {
        if (!intervals_overlap(c->interval, local.interval)) {
            d.chosen = c->fog;
            d.success_probability = c->probability;
            break;
        }
    }
    return d;
}

// Picks the candidate with the smallest score; ties go to the lowest id.
AssignmentDecision argmin_choice(std::size_t subject, std::span<const FogId> fogs,
                                 std::span<const double> scores, std::span<const double> probabilities) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < fogs.size(); ++i) {
        if (scores[i] < scores[best] || (scores[i] == scores[best] && fogs[i] < fogs[best])) best = i;
    }
    AssignmentDecision d;
    d.subject = subject;
    d.chosen = fogs[best];
    d.success_probability = probabilities[best];
    for (std::size_t i = 0; i < fogs.size(); ++i) d.considered.push_back({fogs[i], probabilities[i], {}});
    return d;
}

LatencyDistribution end_to_end(const LatencyMatrices& m, TaskTypeId type, FogId receiving, FogId fog) {
    const LatencyDistribution& comp = lookup_computation(m, type, fog);
    if (fog == receiving) return comp;
    return convolve(lookup_transfer(m, type, fog), comp);
}

AssignmentDecision mean_choice(const Task& task, FogId receiving, const Federation& fed, const LatencyMatrices& m,
                               bool certainty) {
    const auto fogs = fed.candidates(receiving);
    std::vector<double> scores;
    std::vector<double> probs;
    for (FogId f : fogs) {
        const double mean = lookup_computation(m, task.type, f).mean();
        // Certainty is budget - mean; its argmax is the argmin of mean - budget.
        scores.push_back(certainty ? -(task.budget() - mean) : mean);
        probs.push_back(success_probability(end_to_end(m, task.type, receiving, f), task.budget()));
    }
    return argmin_choice(task.id, fogs, scores, probs);
}

LatencyDistribution partition_latency(const MicroservicePartition& p, const Workflow& w, FogId receiving,
                                      FogId fog, const LatencyMatrices& m) {
    if (p.members.empty()) throw Error(ErrorCode::InvalidParameter, "empty partition");
    LatencyDistribution total = end_to_end(m, w.nodes().at(p.members[0]).type, receiving, fog);
    for (std::size_t i = 1; i < p.members.size(); ++i) {
        total = convolve(total, end_to_end(m, w.nodes().at(p.members[i]).type, receiving, fog));
    }
    return total;
}

std::vector<AssignmentDecision> partition_means(std::span<const MicroservicePartition> partitions,
                                                const Workflow& w, FogId receiving, const Federation& fed,
                                                const LatencyMatrices& m, bool certainty) {
    const auto fogs = fed.candidates(receiving);
    std::vector<AssignmentDecision> out;
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        const auto& p = partitions[k];
        const double budget = partition_deadline(w, p.members);
        std::vector<double> scores;
        std::vector<double> probs;
        for (FogId f : fogs) {
            double mean = 0.0;
            for (NodeId id : p.members) mean += lookup_computation(m, w.nodes()[id].type, f).mean();
            scores.push_back(certainty ? -(budget - mean) : mean);
            probs.push_back(success_probability(partition_latency(p, w, receiving, f, m), budget));
        }
        out.push_back(argmin_choice(k, fogs, scores, probs));
    }
    return out;
}

}  // namespace

std::string_view to_string(TaskPolicy p) noexcept {
    switch (p) {
        case TaskPolicy::MR: return "mr";
        case TaskPolicy::MECT: return "mect";
        case TaskPolicy::MCC: return "mcc";
        case TaskPolicy::EC: return "ec";
    }
    return "unknown";
}

TaskPolicy parse_task_policy(std::string_view name) {
    if (name == "mr") return TaskPolicy::MR;
    if (name == "mect") return TaskPolicy::MECT;
    if (name == "mcc") return TaskPolicy::MCC;
    if (name == "ec") return TaskPolicy::EC;
    throw Error(ErrorCode::ConfigError, "unknown policy '" + std::string(name) + "'");
}

AssignmentDecision assign_mr(const Task& task, FogId receiving, const Federation& fed, const LatencyMatrices& m,
                             double ci_level) {
    std::vector<Option> options;
    for (FogId f : fed.candidates(receiving)) options.push_back({f, end_to_end(m, task.type, receiving, f)});
    return robust_choice(task.id, options, task.budget(), ci_level);
}

AssignmentDecision assign_mect(const Task& task, FogId receiving, const Federation& fed,
                               const LatencyMatrices& m) {
    return mean_choice(task, receiving, fed, m, false);
}

AssignmentDecision assign_mcc(const Task& task, FogId receiving, const Federation& fed,
                              const LatencyMatrices& m) {
    return mean_choice(task, receiving, fed, m, true);
}

AssignmentDecision assign_ec(const Task& task, FogId receiving, const Federation& fed, const LatencyMatrices* m) {
    AssignmentDecision d;
    d.subject = task.id;
    if (task.urgency == Urgency::Urgent) {
        d.chosen = receiving;
    } else {
        if (!fed.cloud()) throw Error(ErrorCode::ConfigError, "EC needs a cloud datacenter");
        d.chosen = kCloud;
    }
    if (m != nullptr) {
        d.success_probability = success_probability(end_to_end(*m, task.type, receiving, d.chosen), task.budget());
        d.considered.push_back({d.chosen, d.success_probability, {}});
    }
    return d;
}

AssignmentDecision assign_task(TaskPolicy policy, const Task& task, FogId receiving, const Federation& fed,
                               const LatencyMatrices& m, double ci_level) {
    switch (policy) {
        case TaskPolicy::MR: return assign_mr(task, receiving, fed, m, ci_level);
        case TaskPolicy::MECT: return assign_mect(task, receiving, fed, m);
        case TaskPolicy::MCC: return assign_mcc(task, receiving, fed, m);
        case TaskPolicy::EC: return assign_ec(task, receiving, fed, &m);
    }
    throw Error(ErrorCode::ConfigError, "unknown policy");
}

std::vector<AssignmentDecision> assign_partitions_mr(std::span<const MicroservicePartition> partitions,
                                                     const Workflow& w, FogId receiving, const Federation& fed,
                                                     const LatencyMatrices& m, double ci_level) {
    const auto fogs = fed.candidates(receiving);
    std::vector<AssignmentDecision> out;
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        std::vector<Option> options;
        for (FogId f : fogs) options.push_back({f, partition_latency(partitions[k], w, receiving, f, m)});
        out.push_back(robust_choice(k, options, partition_deadline(w, partitions[k].members), ci_level));
    }
    return out;
}

std::vector<AssignmentDecision> assign_partitions_mect(std::span<const MicroservicePartition> partitions,
                                                       const Workflow& w, FogId receiving,
                                                       const Federation& fed, const LatencyMatrices& m) {
    return partition_means(partitions, w, receiving, fed, m, false);
}

std::vector<AssignmentDecision> assign_partitions_mcc(std::span<const MicroservicePartition> partitions,
                                                      const Workflow& w, FogId receiving,
                                                      const Federation& fed, const LatencyMatrices& m) {
    return partition_means(partitions, w, receiving, fed, m, true);
}

std::vector<AssignmentDecision> assign_partitions(TaskPolicy policy,
                                                  std::span<const MicroservicePartition> partitions,
                                                  const Workflow& w, FogId receiving, const Federation& fed,
                                                  const LatencyMatrices& m, double ci_level) {
    switch (policy) {
        case TaskPolicy::MR: return assign_partitions_mr(partitions, w, receiving, fed, m, ci_level);
        case TaskPolicy::MECT: return assign_partitions_mect(partitions, w, receiving, fed, m);
        case TaskPolicy::MCC: return assign_partitions_mcc(partitions, w, receiving, fed, m);
        case TaskPolicy::EC: break;
    }
    throw Error(ErrorCode::ConfigError, "policy '" + std::string(to_string(policy)) +
                                            "' does not place workflow partitions");
}

}  // namespace fogsim
