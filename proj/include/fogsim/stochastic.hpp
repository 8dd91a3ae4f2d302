#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace fogsim {

// Parametric Normal latency model. Never truncated at zero: a Normal fitted
// to latency data may carry mass below 0 and the CDF reports it as-is.
struct Normal {
    double mean = 0.0;
    double stddev = 0.0;

    bool operator==(const Normal&) const = default;
};

struct PointMass {
    double value = 0.0;

    bool operator==(const PointMass&) const = default;
};

// Discrete distribution over sorted support points with probability weights
// summing to one. Built either from raw samples (equal weights) or as the
// result of a grid convolution.
class Empirical {
public:
    static Empirical from_samples(std::span<const double> samples);
    static Empirical from_weighted(std::vector<double> points, std::vector<double> weights);

    std::span<const double> points() const noexcept { return points_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return points_.size(); }

    bool operator==(const Empirical&) const = default;

private:
    Empirical(std::vector<double> points, std::vector<double> weights);

    std::vector<double> points_;
    std::vector<double> weights_;
};

// A latency distribution in seconds: the Nᵢ / Mᵢ / Eᵢ values the scheduler
// reasons about. Immutable value type.
class LatencyDistribution {
public:
    using Kind = std::variant<Normal, Empirical, PointMass>;

    static LatencyDistribution normal(double mean, double stddev);
    static LatencyDistribution empirical(std::span<const double> samples);
    static LatencyDistribution point_mass(double value);
    static LatencyDistribution from(Empirical e) { return LatencyDistribution(std::move(e)); }

    const Kind& kind() const noexcept { return kind_; }
    bool is_normal() const noexcept { return std::holds_alternative<Normal>(kind_); }
    bool is_empirical() const noexcept { return std::holds_alternative<Empirical>(kind_); }
    bool is_point_mass() const noexcept { return std::holds_alternative<PointMass>(kind_); }

    double mean() const;
    double variance() const;
    double stddev() const;

    // P(X <= x).
    double cdf(double x) const;

    // Quantile at p in [0,1]. Empirical uses linear interpolation between
    // plotting positions; for equally weighted samples this is the usual
    // (n-1)p interpolation rule.
    double quantile(double p) const;

    bool operator==(const LatencyDistribution&) const = default;

private:
    explicit LatencyDistribution(Kind kind) : kind_(std::move(kind)) {}

    Kind kind_;
};

struct CentralInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
};

// Grid resolution for convolutions involving an Empirical operand.
inline constexpr std::size_t kConvolutionGridPoints = 2048;

LatencyDistribution fit_normal(std::span<const double> samples);

// Distribution of A + B for independent A, B.
LatencyDistribution convolve(const LatencyDistribution& a, const LatencyDistribution& b);

// P(X <= deadline).
double success_probability(const LatencyDistribution& dist, double deadline);

CentralInterval central_interval(const LatencyDistribution& dist, double level);

// Closed-interval overlap; touching intervals overlap.
bool intervals_overlap(const CentralInterval& a, const CentralInterval& b) noexcept;

// Standard normal helpers shared with the statistics code.
double standard_normal_cdf(double z) noexcept;
double standard_normal_quantile(double p);

}  // namespace fogsim
