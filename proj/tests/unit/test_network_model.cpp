#include <cmath>

#include "fogsim/network_model.hpp"
#include "support.hpp"

using namespace fogsim;
using doctest::Approx;

TEST_CASE("transmission rounds up to whole TTIs") {
    CHECK(transmission_ttis(25e6, 200e6, 0.001) == 125);
    CHECK(transmission_ttis(25e6 + 1, 200e6, 0.001) == 126);
    CHECK(transmission_ttis(0, 200e6, 0.001) == 0);
    CHECK(transmission_ttis(1, 200e6, 0.001) == 1);
    // 0.3 / 0.1 is 2.9999999999999996 in floating point; still three TTIs.
    CHECK(transmission_ttis(0.3, 100.0, 0.001) == 3);
}

TEST_CASE("round trip adds uplink and downlink") {
    LinkSpec link{200e6, 100e6, 0.001};
    CHECK(round_trip_transmission({25e6, 1e6}, link) == Approx(0.125 + 0.010));
}

TEST_CASE("satellite propagation is a round trip") {
    CHECK(propagation_latency(85.5e6, 3e8) == Approx(0.57));
    CHECK(propagation_latency(0, 3e8) == 0.0);
    LinkSpec sat{200e6, 200e6, 0.001, 85.5e6};
    CHECK(link_comm_latency({25e6, 1e6}, sat) == Approx(0.130 + 0.57));
    CHECK(cloud_comm_latency(0.2, 0.57) == Approx(0.77));
}

TEST_CASE("fog links have no propagation term") {
    LinkSpec fog{200e6, 200e6, 0.001};
    CHECK(link_comm_latency({50e6, 0}, fog) == Approx(0.25));
}

TEST_CASE("OFDM rate sums allocated subchannels only") {
    SubchannelAllocation alloc;
    alloc.subchannel_bandwidth = 180e3;
    alloc.subchannels = {{true, 1.0}, {true, 3.0}, {false, 7.0}};
    CHECK(ofdm_downlink_rate(alloc) == Approx(180e3 * 3.0));
    CHECK(alloc.total_bandwidth() == Approx(540e3));
    alloc.subchannels.clear();
    CHECK(ofdm_downlink_rate(alloc) == 0.0);
}

TEST_CASE("invalid link parameters") {
    CHECK_ERROR_CODE(transmission_ttis(1, 0, 0.001), ErrorCode::DivisionDomain);
    CHECK_ERROR_CODE(transmission_ttis(1, 1e6, 0), ErrorCode::DivisionDomain);
    CHECK_ERROR_CODE(transmission_ttis(-1, 1e6, 0.001), ErrorCode::InvalidParameter);
    CHECK_ERROR_CODE(propagation_latency(10, 0), ErrorCode::DivisionDomain);
    CHECK_ERROR_CODE((LinkSpec{0, 1, 0.001}.validate()), ErrorCode::InvalidParameter);
    CHECK_ERROR_CODE((LinkSpec{1, 1, 0.001, -1}.validate()), ErrorCode::InvalidParameter);
    CHECK_NOTHROW((LinkSpec{1, 1, 0.001}.validate()));
}

TEST_CASE("property: transmission is monotone in payload and rate") {
    for (double bits = 0; bits < 5e6; bits += 12345.0) {
        const auto t = transmission_ttis(bits, 1e8, 0.001);
        CHECK(t >= static_cast<std::int64_t>(std::floor(bits / 1e5)));
        CHECK(transmission_ttis(bits + 1e5, 1e8, 0.001) >= t);
        CHECK(transmission_ttis(bits, 2e8, 0.001) <= t);
    }
}
