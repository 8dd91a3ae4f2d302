#pragma once

#include <cstddef>
#include <string>

#include "fogsim/network_model.hpp"

namespace fogsim {

// Fog systems are numbered 0..n-1; the cloud datacenter is kCloud.
using FogId = int;
inline constexpr FogId kCloud = -1;

// Index into the experiment's task-type table.
using TaskTypeId = std::size_t;

enum class Urgency { Urgent, NonUrgent };

struct TaskType {
    std::string name;
    Urgency urgency = Urgency::Urgent;
    // Execution length in million instructions.
    double length_mean = 0.0;
    double length_stddev = 0.0;
    // Poisson arrival rate (per second) and share of the total task count.
    double arrival_rate = 1.0;
    double share = 1.0;
    PayloadSpec payload;
};

struct Task {
    std::size_t id = 0;
    TaskTypeId type = 0;
    Urgency urgency = Urgency::Urgent;
    double arrival = 0.0;
    double deadline = 0.0;  // absolute
    double length = 0.0;    // million instructions
    PayloadSpec payload;
    FogId receiving = 0;

    double budget() const noexcept { return deadline - arrival; }
};

}  // namespace fogsim
