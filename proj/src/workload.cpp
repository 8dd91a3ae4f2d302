#include "fogsim/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <random>

#include "fogsim/error.hpp"
#include "fogsim/seeding.hpp"

namespace fogsim {

namespace {

void check_receiving_weights(const WorkloadSpec& spec, const Federation& fed) {
    if (!spec.receiving_weights.empty() && spec.receiving_weights.size() != fed.size()) {
        throw Error(ErrorCode::ConfigError, "one receiving weight per fog required", "workload.receiving_weights");
    }
}

std::discrete_distribution<int> receiving_picker(const WorkloadSpec& spec, const Federation& fed) {
    if (spec.receiving_weights.empty()) {
        std::vector<double> uniform(fed.size(), 1.0);
        return {uniform.begin(), uniform.end()};
    }
    return {spec.receiving_weights.begin(), spec.receiving_weights.end()};
}

double rate_scale(const WorkloadSpec& spec, std::size_t total) {
    if (!spec.reference_tasks) return 1.0;
    return static_cast<double>(total) / static_cast<double>(*spec.reference_tasks);
}

// Normal length truncated below at the floor, by rejection.
class LengthSampler {
public:
    LengthSampler(double mean, double stddev, double floor) : mean_(mean), stddev_(stddev), floor_(floor) {
        const double below = stddev > 0.0 ? standard_normal_cdf((floor - mean) / stddev) : (mean < floor ? 1.0 : 0.0);
        if (below > 0.5) {
            throw Error(ErrorCode::DegenerateSpec, "more than half of the length distribution lies below the floor");
        }
    }

    template <class Rng>
    double operator()(Rng& rng) const {
        if (stddev_ == 0.0) return std::max(mean_, floor_);
        std::normal_distribution<double> draw(mean_, stddev_);
        while (true) {
            const double x = draw(rng);
            if (x >= floor_) return x;
        }
    }

private:
    double mean_;
    double stddev_;
    double floor_;
};

void split_csv_line(const std::string& line, std::vector<std::string>& fields) {
    fields.clear();
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
}

double parse_number(const std::string& s, std::size_t line_no, const char* column) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, std::string("bad ") + column + " value '" + s + "'",
                    "line " + std::to_string(line_no));
    }
    return v;
}

}  // namespace

void WorkloadSpec::validate() const {
    if (total_tasks == 0) throw Error(ErrorCode::ConfigError, "total_tasks must be > 0", "workload.total_tasks");
    if (!(beta >= 0.0)) throw Error(ErrorCode::ConfigError, "beta must be >= 0", "workload.beta");
    if (!(alpha_comm >= 0.0)) throw Error(ErrorCode::ConfigError, "alpha must be >= 0", "workload.alpha");
    if (!(epsilon >= 0.0)) throw Error(ErrorCode::ConfigError, "epsilon must be >= 0", "workload.epsilon");
    if (!(length_floor > 0.0)) throw Error(ErrorCode::ConfigError, "length floor must be > 0", "workload.length_floor");
    if (reference_tasks && *reference_tasks == 0) {
        throw Error(ErrorCode::ConfigError, "reference_tasks must be > 0", "workload.reference_tasks");
    }
    for (std::size_t i = 0; i < task_types.size(); ++i) {
        const auto& t = task_types[i];
        const std::string where = "task_types[" + std::to_string(i) + "]";
        if (!(t.arrival_rate > 0.0)) throw Error(ErrorCode::ConfigError, "arrival rate must be > 0", where);
        if (!(t.share >= 0.0)) throw Error(ErrorCode::ConfigError, "share must be >= 0", where);
        if (!(t.length_mean > 0.0) || !(t.length_stddev >= 0.0)) {
            throw Error(ErrorCode::ConfigError, "length distribution invalid", where);
        }
    }
    for (std::size_t i = 0; i < workflows.size(); ++i) {
        const auto& t = workflows[i];
        const std::string where = "workflows[" + std::to_string(i) + "]";
        if (!t.workflow) throw Error(ErrorCode::ConfigError, "missing workflow", where);
        if (!(t.arrival_rate > 0.0)) throw Error(ErrorCode::ConfigError, "arrival rate must be > 0", where);
        if (!(t.share >= 0.0)) throw Error(ErrorCode::ConfigError, "share must be >= 0", where);
    }
    for (double w : receiving_weights) {
        if (!(w >= 0.0)) throw Error(ErrorCode::ConfigError, "receiving weights must be >= 0", "workload.receiving_weights");
    }
}

TypeAverages type_averages(TaskTypeId type, const Federation& fed, const MatrixBook& book) {
    TypeAverages avg;
    const auto& any = book.view(0);
    for (const auto& f : fed.fogs()) avg.comp += lookup_computation(any, type, f.id).mean();
    avg.comp /= static_cast<double>(fed.size());
    std::size_t links = 0;
    for (const auto& f : fed.fogs()) {
        for (const auto& n : f.neighbors) {
            avg.comm += lookup_transfer(book.view(f.id), type, n.id).mean();
            ++links;
        }
    }
    if (links > 0) avg.comm /= static_cast<double>(links);
    return avg;
}

double deadline_for(double arrival, double avg_comp, double avg_comm, const WorkloadSpec& spec) {
    return arrival + spec.beta * avg_comp + spec.alpha_comm * avg_comm + spec.epsilon;
}

std::vector<std::size_t> split_counts(std::size_t total, std::span<const double> shares) {
    const double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
    if (shares.empty() || !(sum > 0.0)) throw Error(ErrorCode::ConfigError, "shares must have a positive sum");
    std::vector<std::size_t> counts(shares.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        const double exact = static_cast<double>(total) * shares[i] / sum;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::ranges::stable_sort(remainders, [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
    return counts;
}

std::vector<Task> generate(const WorkloadSpec& spec, const Federation& fed, const MatrixBook& book) {
    spec.validate();
    check_receiving_weights(spec, fed);
    if (spec.task_types.empty()) throw Error(ErrorCode::ConfigError, "no task types", "workload.task_types");
    std::vector<double> shares;
    for (const auto& t : spec.task_types) shares.push_back(t.share);
    const auto counts = split_counts(spec.total_tasks, shares);
    const double scale = rate_scale(spec, spec.total_tasks);

    std::vector<Task> tasks;
    tasks.reserve(spec.total_tasks);
    for (TaskTypeId t = 0; t < spec.task_types.size(); ++t) {
        const TaskType& type = spec.task_types[t];
        const LengthSampler lengths(type.length_mean, type.length_stddev, spec.length_floor);
        const TypeAverages avg = type_averages(t, fed, book);
        std::mt19937_64 rng(derive_seed(spec.seed, {0x776bu, t}));
        std::exponential_distribution<double> gap(type.arrival_rate * scale);
        auto pick = receiving_picker(spec, fed);
        double clock = 0.0;
        for (std::size_t k = 0; k < counts[t]; ++k) {
            clock += gap(rng);
            Task task;
            task.type = t;
            task.urgency = type.urgency;
            task.arrival = clock;
            task.length = lengths(rng);
            task.payload = type.payload;
            task.receiving = pick(rng);
            task.deadline = deadline_for(clock, avg.comp, avg.comm, spec);
            tasks.push_back(task);
        }
    }
    std::ranges::stable_sort(tasks, [](const Task& a, const Task& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.type < b.type;
    });
    for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i].id = i;
    return tasks;
}

std::vector<WorkflowRequest> generate_workflows(const WorkloadSpec& spec, const Federation& fed,
                                                const MatrixBook& book) {
    spec.validate();
    check_receiving_weights(spec, fed);
    if (spec.workflows.empty()) throw Error(ErrorCode::ConfigError, "no workflow templates", "workload.workflows");
    std::vector<double> shares;
    for (const auto& t : spec.workflows) shares.push_back(t.share);
    const auto counts = split_counts(spec.total_tasks, shares);
    const double scale = rate_scale(spec, spec.total_tasks);

    std::vector<WorkflowRequest> out;
    out.reserve(spec.total_tasks);
    for (std::size_t t = 0; t < spec.workflows.size(); ++t) {
        const WorkflowTemplate& tmpl = spec.workflows[t];
        std::shared_ptr<const Workflow> resolved = tmpl.workflow;
        std::vector<LengthSampler> lengths;
        std::vector<double> node_deadlines;
        for (const auto& node : tmpl.workflow->nodes()) {
            if (node.type >= spec.task_types.size()) {
                throw Error(ErrorCode::ConfigError, "workflow node has an unknown type",
                            "workflows[" + std::to_string(t) + "]." + node.name);
            }
            const TaskType& type = spec.task_types[node.type];
            lengths.emplace_back(type.length_mean, type.length_stddev, spec.length_floor);
            const TypeAverages avg = type_averages(node.type, fed, book);
            node_deadlines.push_back(deadline_for(0.0, avg.comp, avg.comm, spec));
        }
        if (!tmpl.explicit_deadlines) {
            resolved = std::make_shared<const Workflow>(tmpl.workflow->with_deadlines(node_deadlines));
        }
        std::mt19937_64 rng(derive_seed(spec.seed, {0x77666cu, t}));
        std::exponential_distribution<double> gap(tmpl.arrival_rate * scale);
        auto pick = receiving_picker(spec, fed);
        double clock = 0.0;
        for (std::size_t k = 0; k < counts[t]; ++k) {
            clock += gap(rng);
            WorkflowRequest r;
            r.template_index = t;
            r.workflow = resolved;
            r.arrival = clock;
            r.receiving = pick(rng);
            r.entry_payload = spec.task_types[resolved->nodes()[resolved->entry()].type].payload;
            for (const auto& sampler : lengths) r.lengths.push_back(sampler(rng));
            out.push_back(std::move(r));
        }
    }
    std::ranges::stable_sort(out, [](const WorkflowRequest& a, const WorkflowRequest& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.template_index < b.template_index;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i;
    return out;
}

TraceLoadResult parse_benchmark_trace(std::istream& in) {
    TraceLoadResult result;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::string line;
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        split_csv_line(line, fields);
        if (!header_seen) {
            if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
            const std::vector<std::string> expected{"app_type", "machine_type", "attempt", "inference_time_ms"};
            if (fields != expected) {
                throw Error(ErrorCode::ParseError,
                            "header must be app_type,machine_type,attempt,inference_time_ms",
                            "line " + std::to_string(line_no));
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw Error(ErrorCode::ParseError, "expected 4 columns, got " + std::to_string(fields.size()),
                        "line " + std::to_string(line_no));
        }
        if (fields[0].empty() || fields[1].empty()) {
            throw Error(ErrorCode::ParseError, "empty app or machine type", "line " + std::to_string(line_no));
        }
        parse_number(fields[2], line_no, "attempt");
        const double t = parse_number(fields[3], line_no, "inference_time_ms");
        if (t < 0.0) {
            throw Error(ErrorCode::ParseError, "negative inference time", "line " + std::to_string(line_no));
        }
        const auto key = std::make_pair(fields[0], fields[1]);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, result.groups.size()).first;
            result.groups.push_back({fields[0], fields[1], {}});
        }
        result.groups[it->second].times_ms.push_back(t);
    }
    if (result.groups.empty()) result.warnings.push_back("trace contains no samples");
    return result;
}

TraceLoadResult load_benchmark_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open trace file", path.string());
    return parse_benchmark_trace(in);
}

}  // namespace fogsim
