#include <random>
#include <vector>

#include "fogsim/scheduling.hpp"
#include "support.hpp"

using namespace fogsim;
using doctest::Approx;

namespace {

const LinkSpec kLink{200e6, 200e6, 0.001};

Federation mesh(bool cloud = false) {
    const std::vector<double> mips{1000, 1000, 1000};
    std::optional<CloudDatacenter> c;
    if (cloud) c = CloudDatacenter{10000, 4, LinkSpec{200e6, 200e6, 0.001, 85.5e6}};
    return Federation::with_degree(mips, 1, 2, kLink, c);
}

struct Cell {
    double mean;
    double sd;
};

// View owned by fog 0 with one task type. ett[0] is ignored.
LatencyMatrices view(std::vector<Cell> etc, std::vector<double> ett_shift) {
    LatencyMatrices m(0, 1, etc.size());
    for (std::size_t f = 0; f < etc.size(); ++f) {
        const auto id = static_cast<FogId>(f);
        m.set_etc(0, id, LatencyDistribution::normal(etc[f].mean, etc[f].sd));
        m.set_ett(0, id, LatencyDistribution::point_mass(f == 0 ? 0.0 : ett_shift[f]));
    }
    return m;
}

Task task(double budget, Urgency u = Urgency::Urgent) {
    Task t;
    t.id = 7;
    t.urgency = u;
    t.arrival = 100.0;
    t.deadline = 100.0 + budget;
    return t;
}

}  // namespace

TEST_CASE("MR moves the task to a clearly better neighbor") {
    const auto m = view({{10, 2}, {3, 0.5}, {2, 0.5}}, {0, 1, 1});
    const auto d = assign_mr(task(12), 0, mesh(), m);
    REQUIRE(d.considered.size() == 3);
    CHECK(d.subject == 7);
    CHECK(d.considered[0].probability == Approx(0.8413447460685429).epsilon(1e-12));
    CHECK(d.considered[0].interval.lower == Approx(10 - 2 * 1.959963984540054));
    // Fogs 1 and 2 both reach probability 1.0; the tie goes to the lower id.
    CHECK(d.considered[1].probability == d.considered[2].probability);
    CHECK(d.chosen == 1);
    CHECK(d.considered[1].interval.lower == Approx(4 - 0.5 * 1.959963984540054));
}

TEST_CASE("MR skips a better neighbor whose interval overlaps") {
    // Local N(10, 0.1) against a 9.5 s budget. Fog 1 is far more likely to
    // finish in time but its interval overlaps; fog 2 is only slightly better
    // than local and its interval is disjoint.
    const auto m = view({{10, 0.1}, {8, 1.0}, {10.3, 0.5}}, {0, 1, 1});
    const auto d = assign_mr(task(9.5), 0, mesh(), m);
    CHECK(d.considered[1].probability > d.considered[2].probability);
    CHECK(d.considered[2].probability > d.considered[0].probability);
    CHECK(d.chosen == 2);
    CHECK(d.success_probability == Approx(standard_normal_cdf((9.5 - 11.3) / 0.5)));

    const auto stay = view({{10, 0.1}, {8, 1.0}, {10.0, 0.1}}, {0, 1, 1});
    CHECK(assign_mr(task(9.5), 0, mesh(), stay).chosen == 0);
}

TEST_CASE("MR needs a strictly higher probability") {
    // Both sides saturate at 1.0, so the disjoint neighbor is not taken.
    const auto m = view({{1, 0.01}, {0.4, 0.01}, {0.4, 0.01}}, {0, 0.1, 0.1});
    const auto d = assign_mr(task(10), 0, mesh(), m);
    CHECK(d.considered[0].probability == 1.0);
    CHECK(d.considered[1].probability == 1.0);
    CHECK(d.chosen == 0);
}

TEST_CASE("MECT uses mean computation latency only") {
    // Fog 2 computes fastest even though its transfer is long.
    const auto m = view({{5, 1}, {4, 1}, {3, 1}}, {0, 0.5, 30});
    const auto d = assign_mect(task(10), 0, mesh(), m);
    CHECK(d.chosen == 2);
    CHECK(d.success_probability == Approx(standard_normal_cdf((10 - 33.0) / 1.0)));
    const auto tie = view({{3, 1}, {3, 1}, {3, 1}}, {0, 1, 1});
    CHECK(assign_mect(task(10), 0, mesh(), tie).chosen == 0);
    CHECK(assign_mcc(task(10), 0, mesh(), tie).chosen == 0);
}

TEST_CASE("property: MECT and MCC agree on a shared budget") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mean(0.5, 20.0);
    std::uniform_int_distribution<int> coarse(1, 4);
    for (int i = 0; i < 500; ++i) {
        // Coarse means produce plenty of ties.
        const bool tie_heavy = i % 2 == 0;
        std::vector<Cell> etc;
        for (int f = 0; f < 3; ++f) etc.push_back({tie_heavy ? coarse(rng) * 1.0 : mean(rng), 0.5});
        const auto m = view(etc, {0, 1, 1});
        const auto t = task(mean(rng));
        const auto a = assign_mect(t, 0, mesh(), m);
        const auto b = assign_mcc(t, 0, mesh(), m);
        CHECK(a.chosen == b.chosen);
        int expected = 0;
        for (int f = 1; f < 3; ++f) {
            if (etc[f].mean < etc[expected].mean) expected = f;
        }
        CHECK(a.chosen == expected);
    }
}

TEST_CASE("EC splits by urgency") {
    const auto fed = mesh(true);
    CHECK(assign_ec(task(5, Urgency::Urgent), 1, fed).chosen == 1);
    CHECK(assign_ec(task(5, Urgency::NonUrgent), 1, fed).chosen == kCloud);
    CHECK_ERROR_CODE(assign_ec(task(5, Urgency::NonUrgent), 1, mesh()), ErrorCode::ConfigError);
    CHECK(assign_ec(task(5, Urgency::Urgent), 1, mesh()).chosen == 1);

    LatencyMatrices m(0, 1, 3);
    for (FogId f : {0, 1, 2, kCloud}) m.set_etc(0, f, LatencyDistribution::normal(2, 1));
    m.set_ett(0, kCloud, LatencyDistribution::point_mass(1.0));
    const auto d = assign_task(TaskPolicy::EC, task(4, Urgency::NonUrgent), 0, fed, m);
    CHECK(d.chosen == kCloud);
    CHECK(d.success_probability == Approx(standard_normal_cdf(1.0)));
}

TEST_CASE("policy names") {
    CHECK(parse_task_policy("mr") == TaskPolicy::MR);
    CHECK(parse_task_policy("mcc") == TaskPolicy::MCC);
    CHECK(to_string(TaskPolicy::MECT) == "mect");
    CHECK_ERROR_CODE(parse_task_policy("fastest"), ErrorCode::ConfigError);
}

TEST_CASE("partition latency adds transfer and computation of every member") {
    std::vector<Microservice> nodes{{0, "a", 0, 3.0}, {1, "b", 1, 3.0}};
    const Workflow w("w", nodes, {{0, 1, 1e6}}, 0, 1);
    LatencyMatrices m(0, 2, 3);
    for (TaskTypeId t = 0; t < 2; ++t) {
        m.set_etc(t, 0, LatencyDistribution::normal(4.0, 0.5));
        m.set_etc(t, 1, LatencyDistribution::normal(1.0, 0.3));
        m.set_etc(t, 2, LatencyDistribution::normal(1.5, 0.2));
        m.set_ett(t, 1, LatencyDistribution::normal(0.5, 0.1));
        m.set_ett(t, 2, LatencyDistribution::normal(0.2, 0.1));
    }
    const auto parts = whole_partition(w);
    const auto d = assign_partitions_mr(parts, w, 0, mesh(), m);
    REQUIRE(d.size() == 1);
    const auto& c = d[0].considered;
    CHECK(c[0].probability == Approx(standard_normal_cdf((6.0 - 8.0) / std::sqrt(0.5))));
    CHECK(c[1].probability == Approx(standard_normal_cdf((6.0 - 3.0) / std::sqrt(0.2))));
    CHECK(c[2].probability == Approx(standard_normal_cdf((6.0 - 3.4) / std::sqrt(0.1))));
    // Fog 2 is the likelier of the two and its interval clears the local one.
    CHECK(d[0].chosen == 2);

    const auto mect = assign_partitions_mect(parts, w, 0, mesh(), m);
    CHECK(mect[0].chosen == 1);
    CHECK(assign_partitions_mcc(parts, w, 0, mesh(), m)[0].chosen == 1);
    CHECK_ERROR_CODE(assign_partitions(TaskPolicy::EC, parts, w, 0, mesh(), m), ErrorCode::ConfigError);
}
