#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fogsim/federation.hpp"
#include "fogsim/scheduling.hpp"
#include "fogsim/types.hpp"
#include "fogsim/workload.hpp"

namespace fogsim {

// Ordering of simultaneous events follows the enumerator order.
enum class EventKind { ExecutionComplete, TransferComplete, MatrixRefresh, Arrival, ExecutionStart };

std::string_view to_string(EventKind k) noexcept;

enum class Partitioner { ProPart, MinCut, LeastDataTransfer, None };

std::string_view to_string(Partitioner p) noexcept;
Partitioner parse_partitioner(std::string_view name);

struct SimulationOptions {
    TaskPolicy policy = TaskPolicy::MR;
    Partitioner partitioner = Partitioner::ProPart;
    double propart_alpha = 0.5;
    double ci_level = kDefaultCiLevel;
    // Execution time = length / mips * exp(sigma * Z).
    double exec_noise_sigma = 0.0;
    // Link service time ~ Normal(t, cv * t) clipped at zero, t from the link model.
    double transfer_cv = 0.1;
    // Matrices refresh after each such fraction of arrivals.
    double refresh_fraction = 0.1;
    // Work still running at the horizon is counted as missed.
    std::optional<double> horizon;
    std::uint64_t seed = 0;
    bool record_events = false;

    void validate() const;
};

struct EventRecord {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    std::size_t request = 0;
    std::size_t node = 0;
    FogId fog = 0;
};

struct JobRecord {
    std::size_t request = 0;
    std::size_t node = 0;
    TaskTypeId type = 0;
    FogId fog = 0;
    FogId origin = 0;       // receiving fog of the request
    double ready = 0.0;     // all inputs present, queued at the fog
    double start = 0.0;
    double end = 0.0;
    bool transferred = false;
    double transfer_latency = 0.0;  // longest inbound transfer
    std::uint64_t sequence = 0;     // completion order
};

struct RequestRecord {
    std::size_t id = 0;
    FogId receiving = 0;
    double arrival = 0.0;
    double deadline = 0.0;
    std::optional<double> completion;
    double comm_overhead = 0.0;
    std::size_t partitions = 1;

    bool met() const noexcept { return completion && *completion <= deadline; }
};

struct ExperimentResult {
    std::size_t total = 0;
    std::size_t completed = 0;
    double deadline_miss_rate = 0.0;
    double deadline_meet_rate = 0.0;
    double mean_makespan = 0.0;
    double mean_comm_overhead = 0.0;
    std::vector<RequestRecord> requests;
    std::vector<JobRecord> jobs;  // completed jobs in completion order
    std::vector<EventRecord> events;
};

ExperimentResult run_trial(const Federation& fed, const MatrixBook& seeds, std::span<const Task> tasks,
                           const SimulationOptions& options);

ExperimentResult run_trial(const Federation& fed, const MatrixBook& seeds,
                           std::span<const WorkflowRequest> requests, const SimulationOptions& options);

// One computation entry per job, plus one transfer entry per job whose
// inputs crossed a link.
std::vector<HistoryEntry> record_history(std::span<const JobRecord> jobs);

}  // namespace fogsim
