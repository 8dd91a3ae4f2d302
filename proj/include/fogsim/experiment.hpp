#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fogsim/federation.hpp"
#include "fogsim/simulator.hpp"
#include "fogsim/trace_stats.hpp"
#include "fogsim/workload.hpp"

namespace fogsim {

struct PolicySpec {
    std::string name;  // as written in results.csv
    TaskPolicy policy = TaskPolicy::MR;
    Partitioner partitioner = Partitioner::ProPart;
};

// "mr" or "propart+mr" style names.
PolicySpec parse_policy(const std::string& name);

struct FederationConfig {
    std::vector<double> mips;
    int cores = 8;
    int degree = -1;  // -1: full mesh
    LinkSpec fog_link;
    std::optional<CloudDatacenter> cloud;
};

struct SeedCell {
    TaskTypeId type = 0;
    FogId fog = 0;
    std::optional<FogId> owner;  // set for ETT cells
    double mean = 0.0;
    double stddev = 0.0;
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::size_t trials = 30;
    std::vector<PolicySpec> policies;
    std::vector<std::size_t> levels;
    std::vector<int> degrees;  // empty: the federation's own degree
    FederationConfig federation;
    WorkloadSpec workload;     // total_tasks is set per level
    SeedOptions seed_options;
    bool derive_seeds = true;  // false: only the listed cells exist
    std::vector<SeedCell> etc_seeds;
    std::vector<SeedCell> ett_seeds;
    SimulationOptions simulation;

    bool uses_workflows() const noexcept { return !workload.workflows.empty(); }
    std::vector<int> degree_axis() const;
};

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Workflow template in its own document. Type names resolve against `types`.
std::shared_ptr<const Workflow> parse_workflow(const std::string& json_text, std::span<const TaskType> types,
                                               bool* explicit_deadlines = nullptr);

Federation build_federation(const ExperimentConfig& config, int degree);
MatrixBook build_matrices(const ExperimentConfig& config, const Federation& fed);

// Counter-based per-trial seed. Independent of the policy, so every policy
// sees the same workload in a given trial.
std::uint64_t trial_seed(std::uint64_t master, std::size_t level, int degree, std::size_t trial);

struct TrialRow {
    std::string policy;
    int degree = 0;
    std::size_t level = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t total = 0;
    std::size_t completed = 0;
    double miss_rate = 0.0;
    double meet_rate = 0.0;
    double mean_makespan = 0.0;
    double mean_comm_overhead = 0.0;
};

struct MeanCI {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Student-t interval over per-trial values.
MeanCI mean_ci(std::span<const double> values, double level = 0.95);

struct AggregateRow {
    std::string policy;
    int degree = 0;
    std::size_t level = 0;
    std::size_t trials = 0;
    MeanCI miss_rate;
    MeanCI meet_rate;
    MeanCI makespan;
    MeanCI comm_overhead;
};

struct SweepOptions {
    std::size_t jobs = 1;
    bool record_events = false;  // trial 0 of every combination
};

struct SweepResult {
    std::vector<TrialRow> rows;  // ordered by (policy, degree, level, trial)
    std::vector<AggregateRow> aggregates;
    std::vector<std::string> event_lines;
};

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

std::vector<AggregateRow> aggregate(std::span<const TrialRow> rows, double level = 0.95);

void write_results_csv(std::ostream& out, std::span<const TrialRow> rows);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);

// Writes results.csv, aggregate.csv and optionally events.log into out_dir.
// Files are written to temporaries and renamed; nothing is left behind on failure.
void write_outputs(const std::filesystem::path& out_dir, const SweepResult& result, bool with_events);

// Benchmark trace report, one row per (app, machine) group.
struct TraceReportOptions {
    std::map<std::string, double> instructions;  // per app_type
    std::size_t bootstrap_k = 100;
    double bootstrap_alpha = 0.05;
    double significance = stats::kDefaultSignificance;
    std::uint64_t seed = 0;
};

struct TraceReportRow {
    std::string app_type;
    std::string machine_type;
    std::size_t n = 0;
    double mean_ms = 0.0;
    double stddev_ms = 0.0;
    std::optional<stats::ShapiroWilkResult> shapiro;
    std::optional<stats::FitResult> best_fit;
    bool any_fit_accepted = false;
    std::optional<double> mips;
    std::string ci_metric;
    std::optional<stats::ResampledCI> jackknife;
    std::optional<stats::ResampledCI> bootstrap;
    std::string note;
};

std::vector<TraceReportRow> analyze_trace(const TraceLoadResult& trace, const TraceReportOptions& options);
void write_trace_report_csv(std::ostream& out, std::span<const TraceReportRow> rows);

}  // namespace fogsim
