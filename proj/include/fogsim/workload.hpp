#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fogsim/federation.hpp"
#include "fogsim/types.hpp"
#include "fogsim/workflow.hpp"

namespace fogsim {

struct WorkflowTemplate {
    std::shared_ptr<const Workflow> workflow;
    // When false, node deadlines come from the deadline formula per node.
    bool explicit_deadlines = false;
    double share = 1.0;
    double arrival_rate = 1.0;
};

struct WorkloadSpec {
    std::size_t total_tasks = 0;
    std::vector<TaskType> task_types;
    std::vector<WorkflowTemplate> workflows;
    double beta = 1.0;
    double alpha_comm = 1.0;
    double epsilon = 0.0;
    // Arrival rates are given for this many tasks; other totals scale the
    // rates so that the arrival window keeps its length.
    std::optional<std::size_t> reference_tasks;
    // Probability of each fog being the receiving fog; empty means uniform.
    std::vector<double> receiving_weights;
    double length_floor = 1.0;  // million instructions
    std::uint64_t seed = 0;

    void validate() const;
};

struct TypeAverages {
    double comp = 0.0;  // mean over fogs of ETC means
    double comm = 0.0;  // mean over fog-to-fog links of ETT means
};

TypeAverages type_averages(TaskTypeId type, const Federation& fed, const MatrixBook& book);

// arrival + beta * avg_comp + alpha * avg_comm + epsilon.
double deadline_for(double arrival, double avg_comp, double avg_comm, const WorkloadSpec& spec);

// Counts per share that sum exactly to `total` (largest remainder).
std::vector<std::size_t> split_counts(std::size_t total, std::span<const double> shares);

// Independent task streams, one per type, merged by arrival time.
std::vector<Task> generate(const WorkloadSpec& spec, const Federation& fed, const MatrixBook& book);

struct WorkflowRequest {
    std::size_t id = 0;
    std::size_t template_index = 0;
    std::shared_ptr<const Workflow> workflow;  // deadlines already resolved
    double arrival = 0.0;
    FogId receiving = 0;
    std::vector<double> lengths;  // per node, million instructions
    PayloadSpec entry_payload;    // input moved when the entry leaves the receiving fog

    double deadline() const { return arrival + workflow_deadline(*workflow); }
};

std::vector<WorkflowRequest> generate_workflows(const WorkloadSpec& spec, const Federation& fed,
                                                const MatrixBook& book);

// Benchmark trace ingestion. Columns: app_type, machine_type, attempt,
// inference_time_ms.
struct TraceGroup {
    std::string app_type;
    std::string machine_type;
    std::vector<double> times_ms;
};

struct TraceLoadResult {
    std::vector<TraceGroup> groups;  // in order of first appearance
    std::vector<std::string> warnings;
};

TraceLoadResult parse_benchmark_trace(std::istream& in);
TraceLoadResult load_benchmark_trace(const std::filesystem::path& path);

}  // namespace fogsim
