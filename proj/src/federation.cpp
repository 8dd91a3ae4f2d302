#include "fogsim/federation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "fogsim/error.hpp"

namespace fogsim {

bool FogSystem::has_neighbor(FogId other) const noexcept {
    return std::ranges::any_of(neighbors, [&](const Neighbor& n) { return n.id == other; });
}

Federation::Federation(std::vector<FogSystem> fogs, std::optional<CloudDatacenter> cloud)
    : fogs_(std::move(fogs)), cloud_(std::move(cloud)) {
    if (fogs_.empty()) throw Error(ErrorCode::InvalidParameter, "federation needs at least one fog");
    for (std::size_t i = 0; i < fogs_.size(); ++i) {
        auto& f = fogs_[i];
        const std::string where = "fogs[" + std::to_string(i) + "]";
        if (f.id != static_cast<FogId>(i)) {
            throw Error(ErrorCode::InvalidParameter, "fog ids must be 0..n-1 in order", where);
        }
        if (f.cores < 1) throw Error(ErrorCode::InvalidParameter, "cores must be >= 1", where);
        if (!(f.mips > 0.0)) throw Error(ErrorCode::InvalidParameter, "mips must be positive", where);
        for (const auto& n : f.neighbors) {
            if (n.id < 0 || n.id >= static_cast<FogId>(fogs_.size()) || n.id == f.id) {
                throw Error(ErrorCode::InvalidParameter, "bad neighbor id", where);
            }
            n.link.validate();
        }
        std::ranges::sort(f.neighbors, {}, &Neighbor::id);
    }
    if (cloud_) {
        if (!(cloud_->mips > 0.0)) throw Error(ErrorCode::InvalidParameter, "cloud mips must be positive");
        if (cloud_->cores < 1) throw Error(ErrorCode::InvalidParameter, "cloud cores must be >= 1");
        cloud_->link.validate();
    }
}

Federation Federation::with_degree(std::span<const double> mips, int cores, int degree,
                                   const LinkSpec& fog_link, std::optional<CloudDatacenter> cloud) {
    const int n = static_cast<int>(mips.size());
    if (degree < 0) throw Error(ErrorCode::InvalidParameter, "degree must be >= 0");
    std::vector<FogSystem> fogs(mips.size());
    for (int i = 0; i < n; ++i) {
        fogs[i].id = i;
        fogs[i].cores = cores;
        fogs[i].mips = mips[i];
    }
    const int reach = std::min(degree, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int k = 1; k <= reach; ++k) {
            const int j = (i + k) % n;
            if (!fogs[i].has_neighbor(j)) fogs[i].neighbors.push_back({j, fog_link});
            if (!fogs[j].has_neighbor(i)) fogs[j].neighbors.push_back({i, fog_link});
        }
    }
    return Federation(std::move(fogs), std::move(cloud));
}

bool Federation::contains(FogId id) const noexcept {
    if (id == kCloud) return cloud_.has_value();
    return id >= 0 && id < static_cast<FogId>(fogs_.size());
}

const FogSystem& Federation::fog(FogId id) const {
    if (id < 0 || id >= static_cast<FogId>(fogs_.size())) {
        throw Error(ErrorCode::UnknownPair, "unknown fog " + std::to_string(id));
    }
    return fogs_[static_cast<std::size_t>(id)];
}

const LinkSpec& Federation::link(FogId from, FogId to) const {
    if (from == to) throw Error(ErrorCode::UnknownPair, "no link from a fog to itself");
    if (from == kCloud || to == kCloud) {
        if (!cloud_) throw Error(ErrorCode::UnknownPair, "federation has no cloud");
        fog(from == kCloud ? to : from);
        return cloud_->link;
    }
    for (const auto& n : fog(from).neighbors) {
        if (n.id == to) return n.link;
    }
    throw Error(ErrorCode::UnknownPair,
                "fogs " + std::to_string(from) + " and " + std::to_string(to) + " are not neighbors");
}

std::vector<FogId> Federation::candidates(FogId receiving) const {
    std::vector<FogId> out{receiving};
    for (const auto& n : fog(receiving).neighbors) out.push_back(n.id);
    return out;
}

double Federation::mips(FogId id) const {
    if (id == kCloud) {
        if (!cloud_) throw Error(ErrorCode::UnknownPair, "federation has no cloud");
        return cloud_->mips;
    }
    return fog(id).mips;
}

int Federation::cores(FogId id) const {
    if (id == kCloud) {
        if (!cloud_) throw Error(ErrorCode::UnknownPair, "federation has no cloud");
        return cloud_->cores;
    }
    return fog(id).cores;
}

LatencyMatrices::LatencyMatrices(FogId owner, std::size_t types, std::size_t fogs)
    : owner_(owner), types_(types), fogs_(fogs), etc_(types * (fogs + 1)), ett_(types * (fogs + 1)) {}

std::size_t LatencyMatrices::index(TaskTypeId type, FogId fog) const {
    if (type >= types_) {
        throw Error(ErrorCode::UnknownPair, "unknown task type " + std::to_string(type));
    }
    std::size_t column;
    if (fog == kCloud) {
        column = fogs_;
    } else if (fog >= 0 && static_cast<std::size_t>(fog) < fogs_) {
        column = static_cast<std::size_t>(fog);
    } else {
        throw Error(ErrorCode::UnknownPair, "unknown fog " + std::to_string(fog));
    }
    return type * (fogs_ + 1) + column;
}

void LatencyMatrices::set_etc(TaskTypeId type, FogId fog, LatencyDistribution dist) {
    etc_[index(type, fog)].dist = std::move(dist);
}

void LatencyMatrices::set_ett(TaskTypeId type, FogId fog, LatencyDistribution dist) {
    ett_[index(type, fog)].dist = std::move(dist);
}

const MatrixCell& LatencyMatrices::etc_cell(TaskTypeId type, FogId fog) const { return etc_[index(type, fog)]; }
const MatrixCell& LatencyMatrices::ett_cell(TaskTypeId type, FogId fog) const { return ett_[index(type, fog)]; }
MatrixCell& LatencyMatrices::etc_cell(TaskTypeId type, FogId fog) { return etc_[index(type, fog)]; }
MatrixCell& LatencyMatrices::ett_cell(TaskTypeId type, FogId fog) { return ett_[index(type, fog)]; }

const LatencyDistribution& lookup_computation(const LatencyMatrices& m, TaskTypeId type, FogId fog) {
    const auto& cell = m.etc_cell(type, fog);
    if (!cell.dist) {
        throw Error(ErrorCode::UnknownPair, "no ETC entry for type " + std::to_string(type) + " on fog " +
                                                std::to_string(fog));
    }
    return *cell.dist;
}

LatencyDistribution lookup_transfer(const LatencyMatrices& m, TaskTypeId type, FogId fog) {
    const auto& cell = m.ett_cell(type, fog);
    if (fog == m.owner()) return LatencyDistribution::point_mass(0.0);
    if (!cell.dist) {
        throw Error(ErrorCode::UnknownPair, "no ETT entry for type " + std::to_string(type) + " to fog " +
                                                std::to_string(fog));
    }
    return *cell.dist;
}

namespace {

void ingest(MatrixCell& cell, const HistoryEntry& e) {
    if (cell.last_sequence && e.sequence <= *cell.last_sequence) return;
    cell.last_sequence = e.sequence;
    cell.window.push_back(e.latency);
    if (cell.window.size() > kHistoryWindow) cell.window.pop_front();
    ++cell.pending;
}

void refit(MatrixCell& cell) {
    if (cell.pending < 2) return;
    const std::vector<double> samples(cell.window.begin(), cell.window.end());
    cell.dist = fit_normal(samples);
    cell.pending = 0;
}

}  // namespace

LatencyMatrices refresh_matrices(const LatencyMatrices& m, std::span<const HistoryEntry> history) {
    LatencyMatrices out = m;
    std::vector<const HistoryEntry*> ordered;
    ordered.reserve(history.size());
    for (const auto& e : history) {
        if (e.kind == LatencyKind::Transfer && (e.origin != m.owner() || e.fog == m.owner())) continue;
        if (!std::isfinite(e.latency)) continue;
        ordered.push_back(&e);
    }
    std::ranges::stable_sort(ordered, {}, &HistoryEntry::sequence);

    std::vector<MatrixCell*> touched;
    for (const HistoryEntry* e : ordered) {
        MatrixCell& cell = e->kind == LatencyKind::Computation ? out.etc_cell(e->type, e->fog)
                                                                : out.ett_cell(e->type, e->fog);
        ingest(cell, *e);
        touched.push_back(&cell);
    }
    for (MatrixCell* cell : touched) refit(*cell);
    return out;
}

const LatencyMatrices& MatrixBook::view(FogId owner) const {
    if (owner < 0 || static_cast<std::size_t>(owner) >= views.size()) {
        throw Error(ErrorCode::UnknownPair, "no matrices for fog " + std::to_string(owner));
    }
    return views[static_cast<std::size_t>(owner)];
}

MatrixBook MatrixBook::refreshed(std::span<const HistoryEntry> history) const {
    MatrixBook out;
    out.views.reserve(views.size());
    for (const auto& v : views) out.views.push_back(refresh_matrices(v, history));
    return out;
}

MatrixBook seed_matrices(const Federation& fed, std::span<const TaskType> types, const SeedOptions& options) {
    if (!(options.transfer_cv >= 0.0)) throw Error(ErrorCode::InvalidParameter, "transfer_cv must be >= 0");
    const std::size_t n = fed.size();
    MatrixBook book;
    for (std::size_t o = 0; o < n; ++o) {
        const FogId owner = static_cast<FogId>(o);
        LatencyMatrices m(owner, types.size(), n);
        for (TaskTypeId t = 0; t < types.size(); ++t) {
            const TaskType& type = types[t];
            auto etc_for = [&](double mips) {
                return LatencyDistribution::normal(type.length_mean / mips, type.length_stddev / mips);
            };
            auto ett_for = [&](const LinkSpec& link) {
                const double mean = link_comm_latency(type.payload, link);
                return LatencyDistribution::normal(mean, options.transfer_cv * mean);
            };
            for (const auto& f : fed.fogs()) m.set_etc(t, f.id, etc_for(f.mips));
            for (const auto& nb : fed.fog(owner).neighbors) m.set_ett(t, nb.id, ett_for(nb.link));
            m.set_ett(t, owner, LatencyDistribution::point_mass(0.0));
            if (fed.cloud()) {
                m.set_etc(t, kCloud, etc_for(fed.cloud()->mips));
                m.set_ett(t, kCloud, ett_for(fed.cloud()->link));
            }
        }
        book.views.push_back(std::move(m));
    }
    return book;
}

}  // namespace fogsim
