#include "fogsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <random>
#include <string>

#include "fogsim/error.hpp"
#include "fogsim/seeding.hpp"

namespace fogsim {

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::ExecutionComplete: return "execution_complete";
        case EventKind::TransferComplete: return "transfer_complete";
        case EventKind::MatrixRefresh: return "matrix_refresh";
        case EventKind::Arrival: return "arrival";
        case EventKind::ExecutionStart: return "execution_start";
    }
    return "unknown";
}

std::string_view to_string(Partitioner p) noexcept {
    switch (p) {
        case Partitioner::ProPart: return "propart";
        case Partitioner::MinCut: return "mincut";
        case Partitioner::LeastDataTransfer: return "ldt";
        case Partitioner::None: return "none";
    }
    return "unknown";
}

Partitioner parse_partitioner(std::string_view name) {
    if (name == "propart") return Partitioner::ProPart;
    if (name == "mincut") return Partitioner::MinCut;
    if (name == "ldt") return Partitioner::LeastDataTransfer;
    if (name == "none") return Partitioner::None;
    throw Error(ErrorCode::ConfigError, "unknown partitioner '" + std::string(name) + "'");
}

void SimulationOptions::validate() const {
    if (!(propart_alpha > 0.0 && propart_alpha < 1.0)) {
        throw Error(ErrorCode::ConfigError, "propart alpha must lie in (0,1)", "propart_alpha");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw Error(ErrorCode::ConfigError, "ci_level must lie in (0,1)", "ci_level");
    if (!(exec_noise_sigma >= 0.0)) throw Error(ErrorCode::ConfigError, "noise sigma must be >= 0", "exec_noise_sigma");
    if (!(transfer_cv >= 0.0)) throw Error(ErrorCode::ConfigError, "transfer cv must be >= 0", "transfer_cv");
    if (!(refresh_fraction > 0.0 && refresh_fraction <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "refresh fraction must lie in (0,1]", "refresh_fraction");
    }
    if (horizon && !(*horizon > 0.0)) throw Error(ErrorCode::ConfigError, "horizon must be positive", "horizon");
}

std::vector<HistoryEntry> record_history(std::span<const JobRecord> jobs) {
    std::vector<HistoryEntry> out;
    out.reserve(jobs.size());
    for (const auto& j : jobs) {
        out.push_back({j.type, j.fog, j.origin, j.end - j.ready, LatencyKind::Computation, 2 * j.sequence});
        if (j.transferred) {
            out.push_back({j.type, j.fog, j.origin, j.transfer_latency, LatencyKind::Transfer, 2 * j.sequence + 1});
        }
    }
    return out;
}

namespace {

struct RequestInput {
    double arrival = 0.0;
    double deadline = 0.0;
    FogId receiving = 0;
    const Task* task = nullptr;
    const WorkflowRequest* workflow = nullptr;
};

struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    std::size_t subject;

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (kind != o.kind) return kind > o.kind;
        return seq > o.seq;
    }
};

struct Station {
    int cores = 1;
    int busy = 0;
    double mips = 1.0;
    std::deque<std::size_t> queue;
};

struct Job {
    std::size_t request = 0;
    std::size_t node = 0;
    TaskTypeId type = 0;
    double length = 0.0;
    FogId fog = 0;
    std::size_t pending = 0;
    double ready = 0.0;
    double start = 0.0;
    bool transferred = false;
    double transfer_latency = 0.0;
};

struct Transfer {
    std::size_t job = 0;
    PayloadSpec payload;
    std::vector<std::pair<FogId, FogId>> hops;
    std::size_t hop = 0;
    double started = 0.0;
};

struct RequestState {
    RequestRecord record;
    std::size_t first_job = 0;
    std::size_t remaining = 0;
};

class Engine {
public:
    Engine(const Federation& fed, const MatrixBook& seeds, const SimulationOptions& options,
           std::vector<RequestInput> inputs)
        : fed_(fed),
          book_(seeds),
          opt_(options),
          inputs_(std::move(inputs)),
          exec_rng_(derive_seed(options.seed, {0x65786563u})),
          link_rng_(derive_seed(options.seed, {0x6c696e6bu})) {
        for (const auto& f : fed.fogs()) stations_.push_back({f.cores, 0, f.mips, {}});
        if (fed.cloud()) stations_.push_back({fed.cloud()->cores, 0, fed.cloud()->mips, {}});
        requests_.resize(inputs_.size());
        for (std::size_t i = 0; i < inputs_.size(); ++i) {
            auto& rec = requests_[i].record;
            rec.id = i;
            rec.receiving = inputs_[i].receiving;
            rec.arrival = inputs_[i].arrival;
            rec.deadline = inputs_[i].deadline;
        }
        const double n = static_cast<double>(inputs_.size());
        for (int k = 1;; ++k) {
            const auto b = static_cast<std::size_t>(std::ceil(k * opt_.refresh_fraction * n - 1e-9));
            if (b >= inputs_.size()) break;
            if (boundaries_.empty() || boundaries_.back() != b) boundaries_.push_back(b);
        }
        for (std::size_t i = 0; i < inputs_.size(); ++i) push(inputs_[i].arrival, EventKind::Arrival, i);
    }

    ExperimentResult run() {
        while (!events_.empty()) {
            const Event e = events_.top();
            if (opt_.horizon && e.time > *opt_.horizon) break;
            events_.pop();
            now_ = e.time;
            switch (e.kind) {
                case EventKind::Arrival: on_arrival(e.subject); break;
                case EventKind::TransferComplete: on_transfer(e.subject); break;
                case EventKind::ExecutionComplete: on_complete(e.subject); break;
                case EventKind::MatrixRefresh: on_refresh(); break;
                case EventKind::ExecutionStart: break;
            }
        }
        return finish();
    }

private:
    void push(double t, EventKind kind, std::size_t subject) { events_.push({t, kind, next_seq_++, subject}); }

    void log(EventKind kind, std::size_t request, std::size_t node, FogId fog) {
        if (opt_.record_events) result_.events.push_back({now_, kind, request, node, fog});
    }

    std::size_t station_index(FogId f) const {
        return f == kCloud ? fed_.size() : static_cast<std::size_t>(f);
    }

    std::vector<std::pair<FogId, FogId>> path(FogId from, FogId to, FogId receiving) const {
        if (from == to) return {};
        if (from == kCloud || to == kCloud) return {{from, to}};
        if (fed_.fog(from).has_neighbor(to)) return {{from, to}};
        return {{from, receiving}, {receiving, to}};
    }

    void on_arrival(std::size_t r) {
        const RequestInput& in = inputs_[r];
        RequestState& st = requests_[r];
        st.first_job = jobs_.size();
        log(EventKind::Arrival, r, 0, in.receiving);
        const LatencyMatrices& view = book_.view(in.receiving);

        if (in.task != nullptr) {
            const Task& task = *in.task;
            const AssignmentDecision d = assign_task(opt_.policy, task, in.receiving, fed_, view, opt_.ci_level);
            Job job;
            job.request = r;
            job.type = task.type;
            job.length = task.length;
            job.fog = d.chosen;
            jobs_.push_back(job);
            st.remaining = 1;
            dispatch_entry(jobs_.size() - 1, task.payload, in.receiving);
        } else {
            const WorkflowRequest& req = *in.workflow;
            const Workflow& w = *req.workflow;
            std::vector<MicroservicePartition> parts;
            switch (opt_.partitioner) {
                case Partitioner::ProPart:
                    parts = propart(w, opt_.propart_alpha, in.receiving, fed_, view);
                    break;
                case Partitioner::MinCut: parts = mincut_partition(w); break;
                case Partitioner::LeastDataTransfer: parts = least_data_transfer_partition(w); break;
                case Partitioner::None: parts = whole_partition(w); break;
            }
            const auto decisions = assign_partitions(opt_.policy, parts, w, in.receiving, fed_, view, opt_.ci_level);
            std::vector<FogId> placement(w.size(), in.receiving);
            for (std::size_t k = 0; k < parts.size(); ++k) {
                for (NodeId id : parts[k].members) placement[id] = decisions[k].chosen;
            }
            st.record.partitions = parts.size();
            for (std::size_t i = 0; i < w.size(); ++i) {
                Job job;
                job.request = r;
                job.node = i;
                job.type = w.nodes()[i].type;
                job.length = req.lengths.at(i);
                job.fog = placement[i];
                job.pending = w.in_edges(i).size();
                jobs_.push_back(job);
            }
            st.remaining = w.size();
            dispatch_entry(st.first_job + w.entry(), req.entry_payload, in.receiving);
        }

        ++arrivals_;
        if (next_boundary_ < boundaries_.size() && arrivals_ == boundaries_[next_boundary_]) {
            ++next_boundary_;
            push(now_, EventKind::MatrixRefresh, 0);
        }
    }

    void dispatch_entry(std::size_t j, const PayloadSpec& payload, FogId receiving) {
        Job& job = jobs_[j];
        if (job.fog == receiving) {
            enqueue(j);
            return;
        }
        ++job.pending;
        start_transfer(j, payload, path(receiving, job.fog, receiving));
    }

    void start_transfer(std::size_t j, const PayloadSpec& payload, std::vector<std::pair<FogId, FogId>> hops) {
        transfers_.push_back({j, payload, std::move(hops), 0, now_});
        start_hop(transfers_.size() - 1);
    }

    void start_hop(std::size_t t) {
        const Transfer& tr = transfers_[t];
        const auto [from, to] = tr.hops[tr.hop];
        const LinkSpec& link = fed_.link(from, to);
        const double base = round_trip_transmission(tr.payload, link);
        double service = base;
        if (opt_.transfer_cv > 0.0 && base > 0.0) {
            std::normal_distribution<double> noise(base, opt_.transfer_cv * base);
            service = std::max(0.0, noise(link_rng_));
        }
        std::pair<FogId, FogId> channel{from, to};
        if ((from == kCloud || to == kCloud) && fed_.cloud()->shared_link) channel = {kCloud, kCloud};
        double& free_at = link_free_[channel];
        const double begin = std::max(now_, free_at);
        free_at = begin + service;
        push(free_at + propagation_latency(link.distance, link.medium_speed), EventKind::TransferComplete, t);
    }

    void on_transfer(std::size_t t) {
        Transfer& tr = transfers_[t];
        const auto& hop = tr.hops[tr.hop];
        Job& job = jobs_[tr.job];
        log(EventKind::TransferComplete, job.request, job.node, hop.second);
        if (++tr.hop < tr.hops.size()) {
            start_hop(t);
            return;
        }
        job.transferred = true;
        job.transfer_latency = std::max(job.transfer_latency, now_ - tr.started);
        if (--job.pending == 0) enqueue(tr.job);
    }

    void enqueue(std::size_t j) {
        jobs_[j].ready = now_;
        Station& s = stations_[station_index(jobs_[j].fog)];
        if (s.busy < s.cores) {
            start(j);
        } else {
            s.queue.push_back(j);
        }
    }

    void start(std::size_t j) {
        Job& job = jobs_[j];
        Station& s = stations_[station_index(job.fog)];
        ++s.busy;
        job.start = now_;
        double exec = job.length / s.mips;
        if (opt_.exec_noise_sigma > 0.0) {
            std::normal_distribution<double> z(0.0, 1.0);
            exec *= std::exp(opt_.exec_noise_sigma * z(exec_rng_));
        }
        log(EventKind::ExecutionStart, job.request, job.node, job.fog);
        push(now_ + exec, EventKind::ExecutionComplete, j);
    }

    void on_complete(std::size_t j) {
        Job& job = jobs_[j];
        Station& s = stations_[station_index(job.fog)];
        --s.busy;
        log(EventKind::ExecutionComplete, job.request, job.node, job.fog);

        RequestState& st = requests_[job.request];
        JobRecord rec;
        rec.request = job.request;
        rec.node = job.node;
        rec.type = job.type;
        rec.fog = job.fog;
        rec.origin = st.record.receiving;
        rec.ready = job.ready;
        rec.start = job.start;
        rec.end = now_;
        rec.transferred = job.transferred;
        rec.transfer_latency = job.transfer_latency;
        rec.sequence = result_.jobs.size();
        result_.jobs.push_back(rec);
        st.record.comm_overhead += job.transfer_latency;

        // Jobs already waiting get the freed core before newly released successors.
        if (!s.queue.empty()) {
            const std::size_t next = s.queue.front();
            s.queue.pop_front();
            start(next);
        }

        const RequestInput& in = inputs_[job.request];
        if (in.workflow != nullptr) {
            const Workflow& w = *in.workflow->workflow;
            for (std::size_t e : w.out_edges(job.node)) {
                const auto& edge = w.edges()[e];
                const std::size_t v = st.first_job + edge.to;
                if (jobs_[v].fog == job.fog) {
                    if (--jobs_[v].pending == 0) enqueue(v);
                } else {
                    start_transfer(v, PayloadSpec{edge.payload_bits, 0.0},
                                   path(job.fog, jobs_[v].fog, st.record.receiving));
                }
            }
        }
        if (--st.remaining == 0) st.record.completion = now_;
    }

    void on_refresh() {
        log(EventKind::MatrixRefresh, 0, 0, 0);
        const std::span<const JobRecord> fresh(result_.jobs.begin() + static_cast<std::ptrdiff_t>(history_mark_),
                                               result_.jobs.end());
        history_mark_ = result_.jobs.size();
        if (fresh.empty()) return;
        book_ = book_.refreshed(record_history(fresh));
    }

    ExperimentResult finish() {
        ExperimentResult& out = result_;
        out.total = requests_.size();
        std::size_t met = 0;
        double makespan = 0.0;
        double comm = 0.0;
        for (const auto& st : requests_) {
            const RequestRecord& rec = st.record;
            if (rec.completion) {
                ++out.completed;
                makespan += *rec.completion - rec.arrival;
                comm += rec.comm_overhead;
            }
            if (rec.met()) ++met;
            out.requests.push_back(rec);
        }
        if (out.total > 0) {
            out.deadline_meet_rate = static_cast<double>(met) / static_cast<double>(out.total);
            out.deadline_miss_rate = 1.0 - out.deadline_meet_rate;
        }
        if (out.completed > 0) {
            out.mean_makespan = makespan / static_cast<double>(out.completed);
            out.mean_comm_overhead = comm / static_cast<double>(out.completed);
        }
        return std::move(out);
    }

    const Federation& fed_;
    MatrixBook book_;
    SimulationOptions opt_;
    std::vector<RequestInput> inputs_;
    std::mt19937_64 exec_rng_;
    std::mt19937_64 link_rng_;
    std::vector<Station> stations_;
    std::vector<Job> jobs_;
    std::vector<Transfer> transfers_;
    std::vector<RequestState> requests_;
    std::map<std::pair<FogId, FogId>, double> link_free_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::vector<std::size_t> boundaries_;
    std::size_t next_boundary_ = 0;
    std::size_t arrivals_ = 0;
    std::size_t history_mark_ = 0;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
    ExperimentResult result_;
};

void check_seeds(const Federation& fed, const MatrixBook& book, std::span<const TaskTypeId> types) {
    if (book.views.size() != fed.size()) {
        throw Error(ErrorCode::ConfigError, "one matrix view per fog required", "matrix_seeds");
    }
    try {
        for (const auto& f : fed.fogs()) {
            const auto& view = book.view(f.id);
            for (TaskTypeId t : types) {
                for (FogId c : fed.candidates(f.id)) {
                    lookup_computation(view, t, c);
                    lookup_transfer(view, t, c);
                }
            }
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("missing matrix seed: ") + e.what(), "matrix_seeds");
    }
}

void check_sorted(std::span<const RequestInput> inputs) {
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (inputs[i].arrival < inputs[i - 1].arrival) {
            throw Error(ErrorCode::ConfigError, "workload must be sorted by arrival");
        }
    }
    for (const auto& in : inputs) {
        if (!std::isfinite(in.arrival) || in.arrival < 0.0) {
            throw Error(ErrorCode::ConfigError, "arrival times must be finite and >= 0");
        }
    }
}

}  // namespace

ExperimentResult run_trial(const Federation& fed, const MatrixBook& seeds, std::span<const Task> tasks,
                           const SimulationOptions& options) {
    options.validate();
    if (options.policy == TaskPolicy::EC && !fed.cloud()) {
        throw Error(ErrorCode::ConfigError, "EC needs a cloud datacenter", "cloud");
    }
    std::vector<RequestInput> inputs;
    std::vector<TaskTypeId> types;
    for (const auto& t : tasks) {
        if (!fed.contains(t.receiving) || t.receiving == kCloud) {
            throw Error(ErrorCode::ConfigError, "task receiving fog is not in the federation");
        }
        if (!(t.length > 0.0)) throw Error(ErrorCode::ConfigError, "task length must be positive");
        inputs.push_back({t.arrival, t.deadline, t.receiving, &t, nullptr});
        types.push_back(t.type);
    }
    std::ranges::sort(types);
    types.erase(std::unique(types.begin(), types.end()), types.end());
    check_seeds(fed, seeds, types);
    check_sorted(inputs);
    Engine engine(fed, seeds, options, std::move(inputs));
    return engine.run();
}

ExperimentResult run_trial(const Federation& fed, const MatrixBook& seeds,
                           std::span<const WorkflowRequest> requests, const SimulationOptions& options) {
    options.validate();
    if (options.policy == TaskPolicy::EC) {
        throw Error(ErrorCode::ConfigError, "policy 'ec' does not place workflow partitions", "policies");
    }
    std::vector<RequestInput> inputs;
    std::vector<TaskTypeId> types;
    for (const auto& r : requests) {
        if (!r.workflow) throw Error(ErrorCode::ConfigError, "request without workflow");
        if (!fed.contains(r.receiving) || r.receiving == kCloud) {
            throw Error(ErrorCode::ConfigError, "request receiving fog is not in the federation");
        }
        if (r.lengths.size() != r.workflow->size()) {
            throw Error(ErrorCode::ConfigError, "one length per workflow node required");
        }
        inputs.push_back({r.arrival, r.deadline(), r.receiving, nullptr, &r});
        for (const auto& node : r.workflow->nodes()) types.push_back(node.type);
    }
    std::ranges::sort(types);
    types.erase(std::unique(types.begin(), types.end()), types.end());
    check_seeds(fed, seeds, types);
    check_sorted(inputs);
    Engine engine(fed, seeds, options, std::move(inputs));
    return engine.run();
}

}  // namespace fogsim
