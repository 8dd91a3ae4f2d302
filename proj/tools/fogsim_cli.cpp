// fogsim command line: experiment sweeps, trace statistics, one-shot partitioning.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fogsim/error.hpp"
#include "fogsim/experiment.hpp"
#include "fogsim/scheduling.hpp"
#include "fogsim/workflow.hpp"

namespace {

using fogsim::Error;
using fogsim::ErrorCode;

void report_error(const std::string& code, const std::string& message, const std::string& context) {
    nlohmann::json rec = {{"error", code}, {"message", message}};
    if (!context.empty()) rec["context"] = context;
    std::cerr << rec.dump() << '\n';
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open file", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
            const std::optional<std::size_t>& trials, std::size_t jobs, const std::vector<std::string>& policies,
            bool events) {
    fogsim::ExperimentConfig config = fogsim::load_config(config_path);
    if (seed) config.seed = *seed;
    if (trials) {
        if (*trials < 1) throw Error(ErrorCode::ConfigError, "trials must be >= 1", "--trials");
        config.trials = *trials;
    }
    if (!policies.empty()) {
        config.policies.clear();
        for (const auto& p : policies) {
            try {
                config.policies.push_back(fogsim::parse_policy(p));
            } catch (const Error& e) {
                throw Error(ErrorCode::ConfigError, e.what(), "--policy");
            }
        }
    }
    fogsim::SweepOptions opts;
    opts.jobs = jobs;
    opts.record_events = events;
    const auto result = fogsim::run_sweep(config, opts);
    fogsim::write_outputs(out_dir, result, events);
    std::cout << "wrote " << result.rows.size() << " result rows and " << result.aggregates.size()
              << " aggregate rows to " << out_dir << '\n';
    return 0;
}

int cmd_analyze(const std::string& trace_path, const std::vector<std::string>& instructions, std::uint64_t seed,
                std::size_t k, double alpha, const std::string& out_path) {
    fogsim::TraceReportOptions opts;
    opts.seed = seed;
    opts.bootstrap_k = k;
    opts.bootstrap_alpha = alpha;
    for (const auto& spec : instructions) {
        const auto eq = spec.rfind('=');
        double value = 0.0;
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorCode::ConfigError, "expected APP=COUNT", "--instructions");
        }
        const std::string number = spec.substr(eq + 1);
        const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
        if (ec != std::errc() || ptr != number.data() + number.size()) {
            throw Error(ErrorCode::ConfigError, "bad instruction count '" + number + "'", "--instructions");
        }
        opts.instructions[spec.substr(0, eq)] = value;
    }
    const auto trace = fogsim::load_benchmark_trace(trace_path);
    for (const auto& w : trace.warnings) {
        report_error("Warning", w, trace_path);
    }
    const auto rows = fogsim::analyze_trace(trace, opts);
    if (out_path.empty() || out_path == "-") {
        fogsim::write_trace_report_csv(std::cout, rows);
    } else {
        std::ostringstream ss;
        fogsim::write_trace_report_csv(ss, rows);
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot write report", out_path);
        out << ss.str();
    }
    return 0;
}

int cmd_partition(const std::string& config_path, const std::string& workflow_path, int receiving,
                  std::optional<double> alpha, std::optional<int> degree) {
    const fogsim::ExperimentConfig config = fogsim::load_config(config_path);
    bool explicit_deadlines = false;
    auto wf = fogsim::parse_workflow(read_text(workflow_path), config.workload.task_types, &explicit_deadlines);
    const int d = degree ? *degree : config.degree_axis().front();
    const fogsim::Federation fed = fogsim::build_federation(config, d);
    const fogsim::MatrixBook book = fogsim::build_matrices(config, fed);
    if (!fed.contains(receiving) || receiving == fogsim::kCloud) {
        throw Error(ErrorCode::ConfigError, "receiving fog is not in the federation", "--receiving");
    }
    if (!explicit_deadlines) {
        std::vector<double> deadlines;
        for (const auto& node : wf->nodes()) {
            const auto avg = fogsim::type_averages(node.type, fed, book);
            deadlines.push_back(fogsim::deadline_for(0.0, avg.comp, avg.comm, config.workload));
        }
        wf = std::make_shared<const fogsim::Workflow>(wf->with_deadlines(deadlines));
    }
    const double a = alpha ? *alpha : config.simulation.propart_alpha;
    const auto& view = book.view(receiving);
    const auto parts = fogsim::propart(*wf, a, receiving, fed, view);
    const auto decisions = fogsim::assign_partitions_mr(parts, *wf, receiving, fed, view, config.simulation.ci_level);

    std::cout << std::fixed << std::setprecision(6);
    std::cout << "workflow " << wf->name() << ": " << wf->size() << " nodes, deadline "
              << fogsim::workflow_deadline(*wf) << " s, P(local) "
              << fogsim::workflow_success_probability(*wf, receiving, view) << '\n';
    for (std::size_t k = 0; k < parts.size(); ++k) {
        std::cout << "partition " << k << ": ";
        for (std::size_t i = 0; i < parts[k].members.size(); ++i) {
            std::cout << (i ? "," : "") << wf->nodes()[parts[k].members[i]].name;
        }
        std::cout << " deadline " << parts[k].deadline << " s, best P "
                  << fogsim::best_success_probability(*wf, parts[k].members, receiving, fed, view) << ", fog "
                  << decisions[k].chosen << " (P " << decisions[k].success_probability << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fog federation simulator and scheduling toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::string> policies;
    bool events = false;
    auto* run = app.add_subcommand("run", "Run an experiment sweep");
    run->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
    run->add_option("--out-dir", out_dir, "Output directory");
    run->add_option("--seed", seed, "Master seed (overrides the config)");
    run->add_option("--trials", trials, "Trials per combination (overrides the config)");
    run->add_option("--jobs", jobs, "Worker threads");
    run->add_option("--policy", policies, "Policies to run (overrides the config)")->delimiter(',');
    run->add_flag("--events", events, "Write events.log for trial 0 of every combination");

    std::string trace_path;
    std::vector<std::string> instructions;
    std::uint64_t trace_seed = 0;
    std::size_t k = 100;
    double alpha = 0.05;
    std::string report_path;
    auto* analyze = app.add_subcommand("analyze-trace", "Statistics for a benchmark trace CSV");
    analyze->add_option("trace", trace_path, "Trace CSV")->required();
    analyze->add_option("--instructions", instructions, "APP=COUNT instruction counts for MIPS")->delimiter(',');
    analyze->add_option("--seed", trace_seed, "Bootstrap seed");
    analyze->add_option("--bootstrap-k", k, "Bootstrap resamples");
    analyze->add_option("--bootstrap-alpha", alpha, "Bootstrap alpha");
    analyze->add_option("--out", report_path, "Report CSV (default: stdout)");

    std::string workflow_path;
    int receiving = 0;
    std::optional<double> part_alpha;
    std::optional<int> degree;
    auto* partition = app.add_subcommand("partition", "Partition one workflow and place its parts");
    partition->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
    partition->add_option("--workflow", workflow_path, "Workflow document (JSON)")->required();
    partition->add_option("--receiving", receiving, "Receiving fog index");
    partition->add_option("--alpha", part_alpha, "Partitioning threshold");
    partition->add_option("--degree", degree, "Federation degree");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        report_error("UsageError", e.what(), "");
        return 2;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir, seed, trials, jobs, policies, events);
        if (*analyze) return cmd_analyze(trace_path, instructions, trace_seed, k, alpha, report_path);
        if (*partition) return cmd_partition(config_path, workflow_path, receiving, part_alpha, degree);
    } catch (const Error& e) {
        report_error(std::string(fogsim::to_string(e.code())), e.what(), e.context());
        return 1;
    } catch (const std::exception& e) {
        report_error("InternalError", e.what(), "");
        return 1;
    }
    return 0;
}
