#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "fogsim/network_model.hpp"
#include "fogsim/stochastic.hpp"
#include "fogsim/types.hpp"

namespace fogsim {

struct Neighbor {
    FogId id = 0;
    LinkSpec link;
};

struct FogSystem {
    FogId id = 0;
    int cores = 1;
    double mips = 1.0;
    std::vector<Neighbor> neighbors;

    bool has_neighbor(FogId other) const noexcept;
};

struct CloudDatacenter {
    double mips = 1.0;
    int cores = 1;
    LinkSpec link;  // satellite link used by every fog
    // One channel for the whole federation instead of one per fog.
    bool shared_link = true;
};

class Federation {
public:
    Federation() = default;
    Federation(std::vector<FogSystem> fogs, std::optional<CloudDatacenter> cloud);

    // Fog i is linked to fogs (i+1..i+degree) mod n in both directions.
    // degree >= n-1 gives a full mesh.
    static Federation with_degree(std::span<const double> mips, int cores, int degree,
                                  const LinkSpec& fog_link, std::optional<CloudDatacenter> cloud);

    std::size_t size() const noexcept { return fogs_.size(); }
    const std::vector<FogSystem>& fogs() const noexcept { return fogs_; }
    const FogSystem& fog(FogId id) const;
    const std::optional<CloudDatacenter>& cloud() const noexcept { return cloud_; }
    bool contains(FogId id) const noexcept;

    // Link used to move data from `from` to `to`. Either end may be kCloud.
    const LinkSpec& link(FogId from, FogId to) const;

    // Receiving fog first, then its neighbors in ascending id order.
    std::vector<FogId> candidates(FogId receiving) const;

    double mips(FogId id) const;
    int cores(FogId id) const;

private:
    std::vector<FogSystem> fogs_;
    std::optional<CloudDatacenter> cloud_;
};

enum class LatencyKind { Computation, Transfer };

// One observation fed back to the matrices. Transfer observations are
// attributed to the fog that sent the work (`origin`); computation
// observations are shared by every fog's view. `sequence` identifies the
// observation so that replaying the same history is a no-op.
struct HistoryEntry {
    TaskTypeId type = 0;
    FogId fog = 0;
    FogId origin = 0;
    double latency = 0.0;
    LatencyKind kind = LatencyKind::Computation;
    std::uint64_t sequence = 0;
};

inline constexpr std::size_t kHistoryWindow = 100;

struct MatrixCell {
    std::optional<LatencyDistribution> dist;
    std::deque<double> window;
    std::optional<std::uint64_t> last_sequence;
    std::size_t pending = 0;  // observations since the last refit

    bool operator==(const MatrixCell&) const = default;
};

// ETC and ETT matrices as seen by one fog's load balancer. Columns are the
// fogs 0..n-1 followed by the cloud.
class LatencyMatrices {
public:
    LatencyMatrices() = default;
    LatencyMatrices(FogId owner, std::size_t types, std::size_t fogs);

    FogId owner() const noexcept { return owner_; }
    std::size_t type_count() const noexcept { return types_; }
    std::size_t fog_count() const noexcept { return fogs_; }

    void set_etc(TaskTypeId type, FogId fog, LatencyDistribution dist);
    void set_ett(TaskTypeId type, FogId fog, LatencyDistribution dist);

    const MatrixCell& etc_cell(TaskTypeId type, FogId fog) const;
    const MatrixCell& ett_cell(TaskTypeId type, FogId fog) const;
    MatrixCell& etc_cell(TaskTypeId type, FogId fog);
    MatrixCell& ett_cell(TaskTypeId type, FogId fog);

    bool operator==(const LatencyMatrices&) const = default;

private:
    std::size_t index(TaskTypeId type, FogId fog) const;

    FogId owner_ = 0;
    std::size_t types_ = 0;
    std::size_t fogs_ = 0;
    std::vector<MatrixCell> etc_;
    std::vector<MatrixCell> ett_;
};

// Computation latency M for a task type on a fog (queueing plus execution).
const LatencyDistribution& lookup_computation(const LatencyMatrices& m, TaskTypeId type, FogId fog);

// Communication latency N for moving a task from the owner to `fog`.
// The owner's own entry is PointMass(0).
LatencyDistribution lookup_transfer(const LatencyMatrices& m, TaskTypeId type, FogId fog);

// Cells with at least two new observations are refitted with fit_normal
// over the last kHistoryWindow observations.
LatencyMatrices refresh_matrices(const LatencyMatrices& m, std::span<const HistoryEntry> history);

// All fogs' views.
struct MatrixBook {
    std::vector<LatencyMatrices> views;

    const LatencyMatrices& view(FogId owner) const;
    MatrixBook refreshed(std::span<const HistoryEntry> history) const;

    bool operator==(const MatrixBook&) const = default;
};

struct SeedOptions {
    // Standard deviation of seeded ETT entries relative to their mean.
    double transfer_cv = 0.1;
};

// ETC(type, fog) = Normal(length_mean / mips, length_stddev / mips) seconds.
// ETT(type, fog) = Normal(link latency of the type's payload, cv * mean).
MatrixBook seed_matrices(const Federation& fed, std::span<const TaskType> types,
                         const SeedOptions& options = {});

}  // namespace fogsim
