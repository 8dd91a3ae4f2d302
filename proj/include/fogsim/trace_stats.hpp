#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fogsim::stats {

// One observed inference time from a benchmark trace.
struct TraceSample {
    std::string app_type;
    std::string machine_type;
    int attempt = 0;
    double inference_time_ms = 0.0;
};

inline constexpr double kDefaultSignificance = 0.05;

struct ShapiroWilkResult {
    double w = 1.0;
    double p_value = 1.0;

    bool looks_normal(double significance = kDefaultSignificance) const noexcept {
        return p_value >= significance;
    }
};

// Royston's AS R94 approximation, valid for 3 <= n <= 5000.
ShapiroWilkResult shapiro_wilk(std::span<const double> samples);

enum class Family { Normal, StudentT, LogNormal, Exponential };

inline constexpr Family kAllFamilies[] = {Family::Normal, Family::StudentT, Family::LogNormal,
                                          Family::Exponential};

std::string_view to_string(Family family) noexcept;

// Parameters fitted from the data under test:
//   Normal: location = mean, scale = stddev
//   StudentT: location = mean, scale from the moment match, df by maximum likelihood
//   LogNormal: location = mean of log, scale = stddev of log
//   Exponential: scale = mean (rate = 1/scale)
struct FittedFamily {
    Family family = Family::Normal;
    double location = 0.0;
    double scale = 1.0;
    int df = 0;

    double cdf(double x) const;
};

FittedFamily fit_family(std::span<const double> samples, Family family);

struct FitResult {
    Family family = Family::Normal;
    double statistic = 0.0;  // D
    double p_value = 1.0;
    bool accepted = false;
    FittedFamily fit;
};

// sup_x |EDF(x) - F(x)|.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

// Asymptotic p-value for a one-sample statistic D over n observations.
double ks_p_value(double d, std::size_t n);

// Fits `family` to the samples and tests the fit. The parameters come from
// the same data, so the p-value is optimistic (the Lilliefors effect).
FitResult ks_test(std::span<const double> samples, Family family,
                  double significance = kDefaultSignificance);

// One FitResult per candidate family; families that cannot be fitted are skipped.
std::vector<FitResult> ks_all_families(std::span<const double> samples,
                                       double significance = kDefaultSignificance);

// Million instructions per second: n / (t * 1e6).
double compute_mips(double instruction_count, double exec_time_seconds);

double harmonic_mean(std::span<const double> samples);

enum class ResampleMethod { Jackknife, Bootstrap };

struct ResampledCI {
    ResampleMethod method = ResampleMethod::Jackknife;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    double estimate = 0.0;

    double width() const noexcept { return upper - lower; }
};

// Leave-one-out harmonic means y_i = (p-1) / sum_{j != i} 1/x_j.
std::vector<double> pseudo_harmonic_values(std::span<const double> samples);

// Student-t interval around the mean of the pseudo-harmonic values using
// the jackknife standard error.
ResampledCI jackknife_ci(std::span<const double> samples, double level = 0.95);

// 1-indexed ranks ceil(alpha/2 * k) and ceil((1 - alpha/2) * k).
std::pair<std::size_t, std::size_t> bootstrap_ranks(std::size_t k, double alpha);

// Percentile bootstrap of the harmonic mean over k resamples.
ResampledCI bootstrap_ci(std::span<const double> samples, std::size_t k = 100,
                         double alpha = 0.05, std::uint64_t seed = 0);

}  // namespace fogsim::stats
