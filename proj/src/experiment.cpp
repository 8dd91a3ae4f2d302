#include "fogsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "fogsim/error.hpp"
#include "fogsim/seeding.hpp"

namespace fogsim {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message, const std::string& path) {
    throw Error(ErrorCode::ConfigError, message, path);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json* find(const json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    const auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    const json* v = find(obj, key);
    if (v == nullptr) config_error("missing field", join(path, key));
    return *v;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) config_error("expected a number", path);
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_error("expected a finite number", path);
    return x;
}

double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
    const json* v = find(obj, key);
    if (v == nullptr) {
        if (!fallback) config_error("missing field", join(path, key));
        return *fallback;
    }
    return as_number(*v, join(path, key));
}

std::uint64_t count(const json& obj, const std::string& key, const std::string& path,
                    std::optional<std::uint64_t> fallback = {}) {
    const json* v = find(obj, key);
    if (v == nullptr) {
        if (!fallback) config_error("missing field", join(path, key));
        return *fallback;
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) config_error("expected a non-negative integer", join(path, key));
    return v->get<std::uint64_t>();
}

std::string text(const json& obj, const std::string& key, const std::string& path,
                 std::optional<std::string> fallback = {}) {
    const json* v = find(obj, key);
    if (v == nullptr) {
        if (!fallback) config_error("missing field", join(path, key));
        return *fallback;
    }
    if (!v->is_string()) config_error("expected a string", join(path, key));
    return v->get<std::string>();
}

const json& array(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_array()) config_error("expected an array", join(path, key));
    return v;
}

json parse_json(const std::string& text_in, const std::string& what) {
    try {
        return json::parse(text_in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what(), what);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open file", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LinkSpec parse_link(const json& j, const std::string& path) {
    LinkSpec l;
    l.uplink_rate = number(j, "uplink_bps", path);
    l.downlink_rate = number(j, "downlink_bps", path, l.uplink_rate);
    l.tti = number(j, "tti_s", path, 0.001);
    l.distance = number(j, "distance_m", path, 0.0);
    l.medium_speed = number(j, "medium_speed_mps", path, 3.0e8);
    try {
        l.validate();
    } catch (const Error& e) {
        config_error(e.what(), path);
    }
    return l;
}

TaskTypeId type_index(std::span<const TaskType> types, const std::string& name, const std::string& path) {
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (types[i].name == name) return i;
    }
    config_error("unknown task type '" + name + "'", path);
}

FogId fog_ref(const json& v, const std::string& path) {
    if (v.is_string() && v.get<std::string>() == "cloud") return kCloud;
    if (!v.is_number_integer()) config_error("expected a fog index or \"cloud\"", path);
    return v.get<FogId>();
}

std::shared_ptr<const Workflow> workflow_from_json(const json& j, std::span<const TaskType> types,
                                                   const std::string& path, bool* explicit_deadlines) {
    const std::string name = text(j, "name", path, "workflow");
    const json& nodes = array(j, "nodes", path);
    std::map<std::string, NodeId> ids;
    std::vector<Microservice> ms;
    std::size_t with_deadline = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = join(join(path, "nodes"), i);
        Microservice m;
        m.id = i;
        m.name = text(nodes[i], "name", p);
        m.type = type_index(types, text(nodes[i], "type", p), join(p, "type"));
        if (find(nodes[i], "deadline") != nullptr) {
            m.deadline = number(nodes[i], "deadline", p);
            ++with_deadline;
        } else {
            m.deadline = 1.0;  // replaced by the deadline formula
        }
        if (!ids.emplace(m.name, i).second) config_error("duplicate node name", join(p, "name"));
        ms.push_back(std::move(m));
    }
    if (with_deadline != 0 && with_deadline != ms.size()) {
        config_error("either every node or no node sets a deadline", join(path, "nodes"));
    }
    auto node_ref = [&](const std::string& key, const json& obj, const std::string& p) {
        const std::string n = text(obj, key, p);
        const auto it = ids.find(n);
        if (it == ids.end()) config_error("unknown node '" + n + "'", join(p, key));
        return it->second;
    };
    std::vector<WorkflowEdge> edges;
    const json& es = array(j, "edges", path);
    for (std::size_t i = 0; i < es.size(); ++i) {
        const std::string p = join(join(path, "edges"), i);
        edges.push_back({node_ref("from", es[i], p), node_ref("to", es[i], p), number(es[i], "payload_bits", p)});
    }
    const NodeId entry = node_ref("entry", j, path);
    const NodeId exit = node_ref("exit", j, path);
    if (explicit_deadlines != nullptr) *explicit_deadlines = with_deadline == ms.size();
    try {
        return std::make_shared<const Workflow>(name, std::move(ms), std::move(edges), entry, exit);
    } catch (const Error& e) {
        throw Error(e.code(), e.what(), path);
    }
}

std::string fixed(double v, int precision = 6) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

std::string opt_fixed(const std::optional<double>& v, int precision = 6) { return v ? fixed(*v, precision) : ""; }

void write_atomic(const std::filesystem::path& target, const std::string& content,
                  std::vector<std::filesystem::path>& temps) {
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write output", tmp.string());
    out << content;
    out.close();
    if (!out) throw Error(ErrorCode::ConfigError, "failed writing output", tmp.string());
}

}  // namespace

PolicySpec parse_policy(const std::string& name) {
    PolicySpec spec;
    spec.name = name;
    const auto plus = name.find('+');
    if (plus == std::string::npos) {
        spec.policy = parse_task_policy(name);
    } else {
        spec.partitioner = parse_partitioner(name.substr(0, plus));
        spec.policy = parse_task_policy(name.substr(plus + 1));
    }
    return spec;
}

std::vector<int> ExperimentConfig::degree_axis() const {
    if (!degrees.empty()) return degrees;
    const int full = static_cast<int>(federation.mips.size()) - 1;
    return {federation.degree < 0 ? full : std::min(federation.degree, full)};
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    const json root = parse_json(json_text, "config");
    if (!root.is_object()) config_error("config must be an object", "");
    ExperimentConfig c;
    c.name = text(root, "name", "", "experiment");
    c.seed = count(root, "seed", "", 0);
    c.trials = count(root, "trials", "", 30);
    if (c.trials < 1) config_error("trials must be >= 1", "trials");

    // Federation
    const json& fed = require(root, "federation", "");
    const json& mips = array(fed, "mips", "federation");
    for (std::size_t i = 0; i < mips.size(); ++i) {
        c.federation.mips.push_back(as_number(mips[i], join("federation.mips", i)));
        if (!(c.federation.mips.back() > 0.0)) config_error("mips must be positive", join("federation.mips", i));
    }
    if (c.federation.mips.empty()) config_error("at least one fog required", "federation.mips");
    c.federation.cores = static_cast<int>(count(fed, "cores", "federation", 8));
    if (c.federation.cores < 1) config_error("cores must be >= 1", "federation.cores");
    if (const json* d = find(fed, "degree")) {
        if (!d->is_number_integer() || d->get<int>() < 0) config_error("degree must be a non-negative integer", "federation.degree");
        c.federation.degree = d->get<int>();
    }
    c.federation.fog_link = parse_link(require(fed, "fog_link", "federation"), "federation.fog_link");
    if (const json* cl = find(fed, "cloud")) {
        CloudDatacenter cloud;
        cloud.mips = number(*cl, "mips", "federation.cloud");
        if (!(cloud.mips > 0.0)) config_error("mips must be positive", "federation.cloud.mips");
        cloud.cores = static_cast<int>(count(*cl, "cores", "federation.cloud", 1));
        if (cloud.cores < 1) config_error("cores must be >= 1", "federation.cloud.cores");
        cloud.link = parse_link(require(*cl, "link", "federation.cloud"), "federation.cloud.link");
        if (const json* shared = find(*cl, "shared_link")) {
            if (!shared->is_boolean()) config_error("expected true or false", "federation.cloud.shared_link");
            cloud.shared_link = shared->get<bool>();
        }
        c.federation.cloud = cloud;
    }

    // Task types
    const json& types = array(root, "task_types", "");
    for (std::size_t i = 0; i < types.size(); ++i) {
        const std::string p = join("task_types", i);
        TaskType t;
        t.name = text(types[i], "name", p);
        const std::string urgency = text(types[i], "urgency", p, "urgent");
        if (urgency == "urgent") {
            t.urgency = Urgency::Urgent;
        } else if (urgency == "non-urgent") {
            t.urgency = Urgency::NonUrgent;
        } else {
            config_error("urgency must be \"urgent\" or \"non-urgent\"", join(p, "urgency"));
        }
        t.length_mean = number(types[i], "length_mean_mi", p);
        t.length_stddev = number(types[i], "length_stddev_mi", p, 0.0);
        t.arrival_rate = number(types[i], "arrival_rate", p, 1.0);
        t.share = number(types[i], "share", p, 1.0);
        if (const json* pl = find(types[i], "payload")) {
            t.payload.uplink_bits = number(*pl, "uplink_bits", join(p, "payload"), 0.0);
            t.payload.downlink_bits = number(*pl, "downlink_bits", join(p, "payload"), 0.0);
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (c.workload.task_types[k].name == t.name) config_error("duplicate task type", join(p, "name"));
        }
        c.workload.task_types.push_back(t);
    }
    if (c.workload.task_types.empty()) config_error("at least one task type required", "task_types");

    // Workflows
    if (const json* wfs = find(root, "workflows")) {
        if (!wfs->is_array()) config_error("expected an array", "workflows");
        for (std::size_t i = 0; i < wfs->size(); ++i) {
            const std::string p = join("workflows", i);
            const json& entry = (*wfs)[i];
            WorkflowTemplate tmpl;
            if (const json* file = find(entry, "file")) {
                if (!file->is_string()) config_error("expected a string", join(p, "file"));
                const auto path = base_dir / file->get<std::string>();
                const json doc = parse_json(read_file(path), path.string());
                tmpl.workflow = workflow_from_json(doc, c.workload.task_types, p, &tmpl.explicit_deadlines);
            } else {
                tmpl.workflow = workflow_from_json(require(entry, "workflow", p), c.workload.task_types,
                                                   join(p, "workflow"), &tmpl.explicit_deadlines);
            }
            tmpl.share = number(entry, "share", p, 1.0);
            tmpl.arrival_rate = number(entry, "arrival_rate", p, 1.0);
            c.workload.workflows.push_back(std::move(tmpl));
        }
    }

    // Workload shape
    const json empty = json::object();
    const json& wl = find(root, "workload") ? require(root, "workload", "") : empty;
    c.workload.beta = number(wl, "beta", "workload", 1.0);
    c.workload.alpha_comm = number(wl, "alpha", "workload", 1.0);
    c.workload.epsilon = number(wl, "epsilon", "workload", 0.0);
    c.workload.length_floor = number(wl, "length_floor_mi", "workload", 1.0);
    if (find(wl, "reference_tasks") != nullptr) c.workload.reference_tasks = count(wl, "reference_tasks", "workload");
    if (const json* rw = find(wl, "receiving_weights")) {
        if (!rw->is_array()) config_error("expected an array", "workload.receiving_weights");
        for (std::size_t i = 0; i < rw->size(); ++i) {
            c.workload.receiving_weights.push_back(as_number((*rw)[i], join("workload.receiving_weights", i)));
        }
        if (c.workload.receiving_weights.size() != c.federation.mips.size()) {
            config_error("one receiving weight per fog required", "workload.receiving_weights");
        }
    }

    // Sweep axes
    const json& levels = array(root, "levels", "");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!levels[i].is_number_integer() || levels[i].get<std::int64_t>() <= 0) {
            config_error("levels must be positive integers", join("levels", i));
        }
        c.levels.push_back(levels[i].get<std::size_t>());
    }
    if (c.levels.empty()) config_error("at least one level required", "levels");
    if (const json* ds = find(root, "degrees")) {
        if (!ds->is_array()) config_error("expected an array", "degrees");
        for (std::size_t i = 0; i < ds->size(); ++i) {
            if (!(*ds)[i].is_number_integer() || (*ds)[i].get<int>() < 0) {
                config_error("degrees must be non-negative integers", join("degrees", i));
            }
            c.degrees.push_back((*ds)[i].get<int>());
        }
    }
    const json& policies = array(root, "policies", "");
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const std::string p = join("policies", i);
        if (!policies[i].is_string()) config_error("expected a string", p);
        PolicySpec spec;
        try {
            spec = parse_policy(policies[i].get<std::string>());
        } catch (const Error& e) {
            config_error(e.what(), p);
        }
        if (c.uses_workflows() && spec.policy == TaskPolicy::EC) {
            config_error("policy 'ec' does not place workflow partitions", p);
        }
        if (spec.policy == TaskPolicy::EC && !c.federation.cloud) config_error("EC needs a cloud datacenter", p);
        c.policies.push_back(spec);
    }
    if (c.policies.empty()) config_error("at least one policy required", "policies");

    // Scheduler and engine knobs
    c.simulation.ci_level = number(root, "ci_level", "", kDefaultCiLevel);
    c.simulation.propart_alpha = number(root, "propart_alpha", "", 0.5);
    const json& sim = find(root, "simulation") ? require(root, "simulation", "") : empty;
    c.simulation.exec_noise_sigma = number(sim, "exec_noise_sigma", "simulation", 0.0);
    c.simulation.transfer_cv = number(sim, "transfer_cv", "simulation", 0.1);
    c.simulation.refresh_fraction = number(sim, "refresh_fraction", "simulation", 0.1);
    if (find(sim, "horizon_s") != nullptr) c.simulation.horizon = number(sim, "horizon_s", "simulation");
    c.simulation.validate();

    // Matrix seeds
    const json& seeds = find(root, "matrix_seeds") ? require(root, "matrix_seeds", "") : empty;
    const std::string mode = text(seeds, "mode", "matrix_seeds", "derived");
    if (mode == "derived") {
        c.derive_seeds = true;
    } else if (mode == "explicit") {
        c.derive_seeds = false;
    } else {
        config_error("mode must be \"derived\" or \"explicit\"", "matrix_seeds.mode");
    }
    c.seed_options.transfer_cv = number(seeds, "transfer_cv", "matrix_seeds", 0.1);
    auto read_cells = [&](const char* key, bool transfer, std::vector<SeedCell>& out) {
        const json* cells = find(seeds, key);
        if (cells == nullptr) return;
        const std::string base = join("matrix_seeds", key);
        if (!cells->is_array()) config_error("expected an array", base);
        for (std::size_t i = 0; i < cells->size(); ++i) {
            const std::string p = join(base, i);
            const json& cell = (*cells)[i];
            SeedCell s;
            s.type = type_index(c.workload.task_types, text(cell, "type", p), join(p, "type"));
            s.fog = fog_ref(require(cell, "fog", p), join(p, "fog"));
            if (transfer) s.owner = fog_ref(require(cell, "owner", p), join(p, "owner"));
            s.mean = number(cell, "mean_s", p);
            s.stddev = number(cell, "stddev_s", p);
            if (s.stddev < 0.0) config_error("stddev must be >= 0", join(p, "stddev_s"));
            const auto n = static_cast<FogId>(c.federation.mips.size());
            if (s.fog != kCloud && (s.fog < 0 || s.fog >= n)) config_error("unknown fog", join(p, "fog"));
            if (s.owner && (*s.owner < 0 || *s.owner >= n)) config_error("unknown fog", join(p, "owner"));
            out.push_back(s);
        }
    };
    read_cells("etc", false, c.etc_seeds);
    read_cells("ett", true, c.ett_seeds);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path), path.parent_path());
}

std::shared_ptr<const Workflow> parse_workflow(const std::string& json_text, std::span<const TaskType> types,
                                               bool* explicit_deadlines) {
    return workflow_from_json(parse_json(json_text, "workflow"), types, "workflow", explicit_deadlines);
}

Federation build_federation(const ExperimentConfig& config, int degree) {
    const auto& f = config.federation;
    const int d = degree < 0 ? static_cast<int>(f.mips.size()) - 1 : degree;
    return Federation::with_degree(f.mips, f.cores, d, f.fog_link, f.cloud);
}

MatrixBook build_matrices(const ExperimentConfig& config, const Federation& fed) {
    MatrixBook book;
    if (config.derive_seeds) {
        book = seed_matrices(fed, config.workload.task_types, config.seed_options);
    } else {
        for (const auto& f : fed.fogs()) {
            LatencyMatrices m(f.id, config.workload.task_types.size(), fed.size());
            for (TaskTypeId t = 0; t < config.workload.task_types.size(); ++t) {
                m.set_ett(t, f.id, LatencyDistribution::point_mass(0.0));
            }
            book.views.push_back(std::move(m));
        }
    }
    for (const auto& s : config.etc_seeds) {
        for (auto& v : book.views) v.set_etc(s.type, s.fog, LatencyDistribution::normal(s.mean, s.stddev));
    }
    for (const auto& s : config.ett_seeds) {
        book.views.at(static_cast<std::size_t>(*s.owner)).set_ett(s.type, s.fog, LatencyDistribution::normal(s.mean, s.stddev));
    }
    return book;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t level, int degree, std::size_t trial) {
    return derive_seed(master, {static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(degree + 1),
                                static_cast<std::uint64_t>(trial)});
}

MeanCI mean_ci(std::span<const double> values, double level) {
    MeanCI out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    out.lower = out.upper = out.mean;
    if (values.size() < 2) return out;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    const double t = boost::math::quantile(boost::math::students_t_distribution<double>(n - 1.0), 0.5 * (1.0 + level));
    out.lower = out.mean - t * se;
    out.upper = out.mean + t * se;
    return out;
}

std::vector<AggregateRow> aggregate(std::span<const TrialRow> rows, double level) {
    std::vector<AggregateRow> out;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].policy == rows[i].policy && rows[j].degree == rows[i].degree &&
               rows[j].level == rows[i].level) {
            ++j;
        }
        std::vector<double> miss, meet, makespan, comm;
        for (std::size_t k = i; k < j; ++k) {
            miss.push_back(rows[k].miss_rate);
            meet.push_back(rows[k].meet_rate);
            makespan.push_back(rows[k].mean_makespan);
            comm.push_back(rows[k].mean_comm_overhead);
        }
        out.push_back({rows[i].policy, rows[i].degree, rows[i].level, j - i, mean_ci(miss, level),
                       mean_ci(meet, level), mean_ci(makespan, level), mean_ci(comm, level)});
        i = j;
    }
    return out;
}

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
    struct Unit {
        std::size_t level_index;
        std::size_t degree_index;
        std::size_t trial;
    };
    const std::vector<int> degrees = config.degree_axis();
    std::vector<Unit> units;
    for (std::size_t l = 0; l < config.levels.size(); ++l) {
        for (std::size_t d = 0; d < degrees.size(); ++d) {
            for (std::size_t t = 0; t < config.trials; ++t) units.push_back({l, d, t});
        }
    }
    std::vector<Federation> feds;
    std::vector<MatrixBook> books;
    for (int d : degrees) {
        feds.push_back(build_federation(config, d));
        books.push_back(build_matrices(config, feds.back()));
    }

    const std::size_t np = config.policies.size();
    // results[unit][policy]
    std::vector<std::vector<TrialRow>> results(units.size(), std::vector<TrialRow>(np));
    std::vector<std::vector<std::string>> events(units.size() * np);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        while (true) {
            const std::size_t u = next.fetch_add(1);
            if (u >= units.size()) return;
            {
                std::lock_guard lock(error_mutex);
                if (failure) return;
            }
            try {
                const Unit& unit = units[u];
                const std::size_t level = config.levels[unit.level_index];
                const int degree = degrees[unit.degree_index];
                const Federation& fed = feds[unit.degree_index];
                const MatrixBook& book = books[unit.degree_index];
                const std::uint64_t seed = trial_seed(config.seed, level, degree, unit.trial);
                WorkloadSpec spec = config.workload;
                spec.total_tasks = level;
                spec.seed = seed;
                std::vector<Task> tasks;
                std::vector<WorkflowRequest> requests;
                if (config.uses_workflows()) {
                    requests = generate_workflows(spec, fed, book);
                } else {
                    tasks = generate(spec, fed, book);
                }
                for (std::size_t p = 0; p < np; ++p) {
                    SimulationOptions sim = config.simulation;
                    sim.policy = config.policies[p].policy;
                    sim.partitioner = config.policies[p].partitioner;
                    sim.seed = derive_seed(seed, {0x73696dU});
                    sim.record_events = options.record_events && unit.trial == 0;
                    const ExperimentResult r = config.uses_workflows() ? run_trial(fed, book, requests, sim)
                                                                       : run_trial(fed, book, tasks, sim);
                    results[u][p] = {config.policies[p].name, degree, level, unit.trial, seed, r.total, r.completed,
                                     r.deadline_miss_rate, r.deadline_meet_rate, r.mean_makespan,
                                     r.mean_comm_overhead};
                    if (sim.record_events) {
                        auto& lines = events[u * np + p];
                        for (const auto& e : r.events) {
                            json rec = {{"policy", config.policies[p].name}, {"degree", degree}, {"level", level},
                                        {"time", e.time}, {"kind", std::string(to_string(e.kind))},
                                        {"request", e.request}, {"node", e.node}, {"fog", e.fog}};
                            lines.push_back(rec.dump());
                        }
                    }
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, units.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    // Deterministic merge: policy, degree, level, trial.
    SweepResult out;
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t d = 0; d < degrees.size(); ++d) {
            for (std::size_t l = 0; l < config.levels.size(); ++l) {
                for (std::size_t u = 0; u < units.size(); ++u) {
                    if (units[u].degree_index == d && units[u].level_index == l) {
                        out.rows.push_back(results[u][p]);
                        for (auto& line : events[u * np + p]) out.event_lines.push_back(std::move(line));
                    }
                }
            }
        }
    }
    out.aggregates = aggregate(out.rows);
    return out;
}

void write_results_csv(std::ostream& out, std::span<const TrialRow> rows) {
    out << "policy,degree,level,trial,seed,total,completed,miss_rate,meet_rate,mean_makespan_s,mean_comm_overhead_s\n";
    for (const auto& r : rows) {
        out << r.policy << ',' << r.degree << ',' << r.level << ',' << r.trial << ',' << r.seed << ',' << r.total
            << ',' << r.completed << ',' << fixed(r.miss_rate) << ',' << fixed(r.meet_rate) << ','
            << fixed(r.mean_makespan) << ',' << fixed(r.mean_comm_overhead) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
    out << "policy,degree,level,trials,"
           "miss_rate_mean,miss_rate_ci_low,miss_rate_ci_high,"
           "meet_rate_mean,meet_rate_ci_low,meet_rate_ci_high,"
           "makespan_mean_s,makespan_ci_low_s,makespan_ci_high_s,"
           "comm_overhead_mean_s,comm_overhead_ci_low_s,comm_overhead_ci_high_s\n";
    auto triple = [&](const MeanCI& m) { out << ',' << fixed(m.mean) << ',' << fixed(m.lower) << ',' << fixed(m.upper); };
    for (const auto& r : rows) {
        out << r.policy << ',' << r.degree << ',' << r.level << ',' << r.trials;
        triple(r.miss_rate);
        triple(r.meet_rate);
        triple(r.makespan);
        triple(r.comm_overhead);
        out << '\n';
    }
}

void write_outputs(const std::filesystem::path& out_dir, const SweepResult& result, bool with_events) {
    std::vector<std::filesystem::path> temps;
    try {
        std::filesystem::create_directories(out_dir);
        std::ostringstream results, agg, events;
        write_results_csv(results, result.rows);
        write_aggregate_csv(agg, result.aggregates);
        write_atomic(out_dir / "results.csv", results.str(), temps);
        write_atomic(out_dir / "aggregate.csv", agg.str(), temps);
        if (with_events) {
            for (const auto& line : result.event_lines) events << line << '\n';
            write_atomic(out_dir / "events.log", events.str(), temps);
        }
        for (const auto& tmp : temps) {
            auto target = tmp;
            target.replace_extension();
            std::filesystem::rename(tmp, target);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& tmp : temps) std::filesystem::remove(tmp, ec);
        throw;
    }
}

std::vector<TraceReportRow> analyze_trace(const TraceLoadResult& trace, const TraceReportOptions& options) {
    std::vector<TraceReportRow> out;
    for (const auto& g : trace.groups) {
        TraceReportRow row;
        row.app_type = g.app_type;
        row.machine_type = g.machine_type;
        row.n = g.times_ms.size();
        std::vector<std::string> notes;
        if (!g.times_ms.empty()) {
            row.mean_ms = std::accumulate(g.times_ms.begin(), g.times_ms.end(), 0.0) / static_cast<double>(row.n);
            if (row.n > 1) {
                double ss = 0.0;
                for (double x : g.times_ms) ss += (x - row.mean_ms) * (x - row.mean_ms);
                row.stddev_ms = std::sqrt(ss / static_cast<double>(row.n - 1));
            }
        }
        auto attempt = [&](auto&& fn) {
            try {
                fn();
            } catch (const Error& e) {
                const std::string code(to_string(e.code()));
                if (std::ranges::find(notes, code) == notes.end()) notes.push_back(code);
            }
        };
        attempt([&] { row.shapiro = stats::shapiro_wilk(g.times_ms); });
        attempt([&] {
            const auto fits = stats::ks_all_families(g.times_ms, options.significance);
            for (const auto& f : fits) {
                if (!row.best_fit || f.p_value > row.best_fit->p_value) row.best_fit = f;
                row.any_fit_accepted = row.any_fit_accepted || f.accepted;
            }
        });
        std::vector<double> metric = g.times_ms;
        row.ci_metric = "time_ms";
        if (const auto it = options.instructions.find(g.app_type); it != options.instructions.end()) {
            attempt([&] {
                row.mips = stats::compute_mips(it->second, row.mean_ms / 1000.0);
                std::vector<double> per_attempt;
                for (double t : g.times_ms) per_attempt.push_back(stats::compute_mips(it->second, t / 1000.0));
                metric = std::move(per_attempt);
                row.ci_metric = "mips";
            });
        }
        attempt([&] { row.jackknife = stats::jackknife_ci(metric, 0.95); });
        attempt([&] {
            row.bootstrap = stats::bootstrap_ci(metric, options.bootstrap_k, options.bootstrap_alpha, options.seed);
        });
        for (std::size_t i = 0; i < notes.size(); ++i) row.note += (i ? ";" : "") + notes[i];
        out.push_back(std::move(row));
    }
    return out;
}

void write_trace_report_csv(std::ostream& out, std::span<const TraceReportRow> rows) {
    out << "app_type,machine_type,n,mean_ms,stddev_ms,sw_w,sw_p,sw_normal,best_family,best_ks_d,best_ks_p,"
           "fit_accepted,mips,ci_metric,jackknife_low,jackknife_high,bootstrap_low,bootstrap_high,note\n";
    for (const auto& r : rows) {
        out << r.app_type << ',' << r.machine_type << ',' << r.n << ',' << fixed(r.mean_ms) << ','
            << fixed(r.stddev_ms) << ',';
        if (r.shapiro) {
            out << fixed(r.shapiro->w) << ',' << fixed(r.shapiro->p_value) << ','
                << (r.shapiro->looks_normal() ? "yes" : "no");
        } else {
            out << ",,";
        }
        out << ',';
        if (r.best_fit) {
            out << stats::to_string(r.best_fit->family) << ',' << fixed(r.best_fit->statistic) << ','
                << fixed(r.best_fit->p_value);
        } else {
            out << ",,";
        }
        out << ',' << (r.best_fit ? (r.any_fit_accepted ? "yes" : "no") : "") << ',' << opt_fixed(r.mips, 2) << ','
            << r.ci_metric << ',';
        out << (r.jackknife ? fixed(r.jackknife->lower) : "") << ',' << (r.jackknife ? fixed(r.jackknife->upper) : "")
            << ',' << (r.bootstrap ? fixed(r.bootstrap->lower) : "") << ','
            << (r.bootstrap ? fixed(r.bootstrap->upper) : "") << ',' << r.note << '\n';
    }
}

}  // namespace fogsim
