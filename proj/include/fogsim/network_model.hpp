#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace fogsim {

// Point-to-point link between two fog systems, or between a fog and the
// cloud. Rates in bits per second, times in seconds.
struct LinkSpec {
    double uplink_rate = 0.0;
    double downlink_rate = 0.0;
    double tti = 0.001;
    // One-way distance to the relay (satellite) and signal speed. Zero
    // distance means negligible propagation, as between neighbouring fogs.
    double distance = 0.0;
    double medium_speed = 3.0e8;

    void validate() const;
};

struct Subchannel {
    bool allocated = false;
    double sinr = 0.0;  // linear ratio
};

struct SubchannelAllocation {
    double subchannel_bandwidth = 0.0;  // hertz
    std::vector<Subchannel> subchannels;

    double total_bandwidth() const noexcept {
        return subchannel_bandwidth * static_cast<double>(subchannels.size());
    }
};

struct PayloadSpec {
    double uplink_bits = 0.0;
    double downlink_bits = 0.0;
};

// ceil(bits / (rate * tti)). Multiply by tti for seconds.
std::int64_t transmission_ttis(double payload_bits, double rate, double tti);

// Uplink plus downlink transmission latency in seconds.
double round_trip_transmission(const PayloadSpec& payload, const LinkSpec& link);

// w * sum over allocated subchannels of log2(1 + sinr).
double ofdm_downlink_rate(const SubchannelAllocation& alloc);

// Round-trip propagation 2d / speed.
double propagation_latency(double distance, double medium_speed);

double cloud_comm_latency(double round_trip, double propagation);

// Full communication latency over a link: round-trip transmission plus the
// link's propagation (zero for fog-to-fog links).
double link_comm_latency(const PayloadSpec& payload, const LinkSpec& link);

}  // namespace fogsim
