#include "fogsim/network_model.hpp"

#include <algorithm>
#include <cmath>

#include "fogsim/error.hpp"

namespace fogsim {

void LinkSpec::validate() const {
    if (!(uplink_rate > 0.0) || !(downlink_rate > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "link rates must be positive");
    }
    if (!(tti > 0.0)) throw Error(ErrorCode::InvalidParameter, "tti must be positive");
    if (!(distance >= 0.0)) throw Error(ErrorCode::InvalidParameter, "distance must be >= 0");
    if (!(medium_speed > 0.0)) throw Error(ErrorCode::InvalidParameter, "medium speed must be positive");
}

std::int64_t transmission_ttis(double payload_bits, double rate, double tti) {
    const double per_tti = rate * tti;
    if (!(per_tti > 0.0) || !std::isfinite(per_tti)) {
        throw Error(ErrorCode::DivisionDomain, "rate * tti must be positive");
    }
    if (!(payload_bits >= 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "payload must be >= 0");
    }
    const double ratio = payload_bits / per_tti;
    // Exact multiples must not round up because of representation error.
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
        return static_cast<std::int64_t>(nearest);
    }
    return static_cast<std::int64_t>(std::ceil(ratio));
}

double round_trip_transmission(const PayloadSpec& payload, const LinkSpec& link) {
    const auto up = transmission_ttis(payload.uplink_bits, link.uplink_rate, link.tti);
    const auto down = transmission_ttis(payload.downlink_bits, link.downlink_rate, link.tti);
    return static_cast<double>(up + down) * link.tti;
}

double ofdm_downlink_rate(const SubchannelAllocation& alloc) {
    double sum = 0.0;
    for (const auto& k : alloc.subchannels) {
        if (k.allocated) sum += std::log2(1.0 + k.sinr);
    }
    return alloc.subchannel_bandwidth * sum;
}

double propagation_latency(double distance, double medium_speed) {
    if (!(medium_speed > 0.0)) {
        throw Error(ErrorCode::DivisionDomain, "medium speed must be positive");
    }
    return 2.0 * distance / medium_speed;
}

double cloud_comm_latency(double round_trip, double propagation) { return round_trip + propagation; }

double link_comm_latency(const PayloadSpec& payload, const LinkSpec& link) {
    return cloud_comm_latency(round_trip_transmission(payload, link),
                              propagation_latency(link.distance, link.medium_speed));
}

}  // namespace fogsim
