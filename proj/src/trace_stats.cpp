#include "fogsim/trace_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "fogsim/error.hpp"
#include "fogsim/stochastic.hpp"

namespace fogsim::stats {

namespace {

// c[0] + c[1] x + ... + c[n-1] x^(n-1)
template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double acc = 0.0;
    for (std::size_t i = N; i-- > 0;) acc = acc * x + c[i];
    return acc;
}

std::vector<double> sorted_copy(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::ranges::sort(v);
    return v;
}

void require_finite_samples(std::span<const double> xs) {
    for (double x : xs) {
        if (!std::isfinite(x)) throw Error(ErrorCode::InvalidSample, "sample must be finite");
    }
}

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs, double mean) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double student_t_loglik(std::span<const double> xs, double loc, double scale, int df) {
    const double nu = df;
    const double norm = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                        0.5 * std::log(nu * std::numbers::pi) - std::log(scale);
    double ll = 0.0;
    for (double x : xs) {
        const double t = (x - loc) / scale;
        ll += norm - (nu + 1.0) / 2.0 * std::log1p(t * t / nu);
    }
    return ll;
}

// Snap near-integral values before taking the ceiling.
std::size_t ceil_rank(double value) {
    const double nearest = std::round(value);
    if (std::abs(value - nearest) <= 1e-9 * std::max(1.0, value)) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::ceil(value));
}

}  // namespace

std::string_view to_string(Family family) noexcept {
    switch (family) {
        case Family::Normal: return "Normal";
        case Family::StudentT: return "StudentT";
        case Family::LogNormal: return "LogNormal";
        case Family::Exponential: return "Exponential";
    }
    return "Unknown";
}

ShapiroWilkResult shapiro_wilk(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 3) throw Error(ErrorCode::InsufficientData, "Shapiro-Wilk needs at least 3 samples");
    if (n > 5000) throw Error(ErrorCode::InvalidParameter, "Shapiro-Wilk supports at most 5000 samples");
    require_finite_samples(samples);
    const std::vector<double> x = sorted_copy(samples);
    if (x.front() == x.back()) {
        throw Error(ErrorCode::DegenerateSample, "all samples are equal");
    }

    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
    static constexpr double g[] = {-2.273, 0.459};

    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half + 1, 0.0);  // 1-indexed half-vector of coefficients

    if (n == 3) {
        a[1] = std::sqrt(0.5);
    } else {
        std::vector<double> m(half + 1, 0.0);
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= half; ++i) {
            m[i] = standard_normal_quantile((static_cast<double>(i) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[1] / ssumm2;
        std::size_t first_scaled;
        double fac;
        if (n > 5) {
            first_scaled = 3;
            const double a2 = -m[2] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[2] = a2;
        } else {
            first_scaled = 2;
            fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
        }
        a[1] = a1;
        for (std::size_t i = first_scaled; i <= half; ++i) a[i] = -m[i] / fac;
    }

    // W is the squared correlation between the ordered data and the full
    // antisymmetric coefficient vector.
    std::vector<double> full(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        full[i] = -a[i + 1];
        full[n - 1 - i] = a[i + 1];
    }
    const double a_mean = mean_of(full);
    const double x_mean = mean_of(x);
    const double range = x.back() - x.front();
    double saa = 0.0;
    double sxx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = full[i] - a_mean;
        const double dx = (x[i] - x_mean) / range;
        saa += da * da;
        sxx += dx * dx;
        sax += da * dx;
    }
    const double root = std::sqrt(saa * sxx);
    const double w1 = (root - sax) * (root + sax) / (saa * sxx);
    const double w = 1.0 - w1;

    ShapiroWilkResult out;
    out.w = w;
    if (n == 3) {
        constexpr double pi6 = 6.0 / std::numbers::pi;
        constexpr double stqr = std::numbers::pi / 3.0;
        out.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
        return out;
    }
    if (w1 <= 0.0) {
        out.p_value = 1.0;
        return out;
    }
    double y = std::log(w1);
    double mu;
    double sigma;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) {
            out.p_value = 1e-99;
            return out;
        }
        y = -std::log(gamma - y);
        mu = poly(c3, an);
        sigma = std::exp(poly(c4, an));
    } else {
        const double xx = std::log(an);
        mu = poly(c5, xx);
        sigma = std::exp(poly(c6, xx));
    }
    out.p_value = std::clamp(1.0 - standard_normal_cdf((y - mu) / sigma), 0.0, 1.0);
    return out;
}

double FittedFamily::cdf(double x) const {
    switch (family) {
        case Family::Normal:
            return standard_normal_cdf((x - location) / scale);
        case Family::StudentT:
            return boost::math::cdf(boost::math::students_t_distribution<double>(df),
                                    (x - location) / scale);
        case Family::LogNormal:
            if (x <= 0.0) return 0.0;
            return boost::math::cdf(boost::math::lognormal_distribution<double>(location, scale), x);
        case Family::Exponential:
            if (x <= 0.0) return 0.0;
            return boost::math::cdf(boost::math::exponential_distribution<double>(1.0 / scale), x);
    }
    return 0.0;
}

FittedFamily fit_family(std::span<const double> samples, Family family) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::InsufficientData, "family fitting needs at least 2 samples");
    }
    require_finite_samples(samples);
    FittedFamily fit;
    fit.family = family;
    switch (family) {
        case Family::Normal: {
            fit.location = mean_of(samples);
            fit.scale = sample_stddev(samples, fit.location);
            break;
        }
        case Family::StudentT: {
            fit.location = mean_of(samples);
            const double sd = sample_stddev(samples, fit.location);
            if (!(sd > 0.0)) break;
            double best = -std::numeric_limits<double>::infinity();
            for (int df = 3; df <= 100; ++df) {
                const double scale = sd * std::sqrt((df - 2.0) / df);
                const double ll = student_t_loglik(samples, fit.location, scale, df);
                if (ll > best) {
                    best = ll;
                    fit.df = df;
                    fit.scale = scale;
                }
            }
            break;
        }
        case Family::LogNormal: {
            std::vector<double> logs;
            logs.reserve(samples.size());
            for (double x : samples) {
                if (!(x > 0.0)) {
                    throw Error(ErrorCode::UnfittableFamily, "log-normal needs positive samples");
                }
                logs.push_back(std::log(x));
            }
            fit.location = mean_of(logs);
            fit.scale = sample_stddev(logs, fit.location);
            break;
        }
        case Family::Exponential: {
            for (double x : samples) {
                if (x < 0.0) {
                    throw Error(ErrorCode::UnfittableFamily, "exponential needs non-negative samples");
                }
            }
            fit.scale = mean_of(samples);
            break;
        }
    }
    if (!(fit.scale > 0.0)) {
        throw Error(ErrorCode::UnfittableFamily,
                    std::string(to_string(family)) + " fit is degenerate (zero spread)");
    }
    return fit;
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error(ErrorCode::InsufficientData, "K-S needs at least 1 sample");
    require_finite_samples(samples);
    const std::vector<double> x = sorted_copy(samples);
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.18) {
        // Small-lambda form of the CDF converges quickly here.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
            cdf += term;
            if (term < 1e-17) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_p_value(double d, std::size_t n) {
    return kolmogorov_survival(std::sqrt(static_cast<double>(n)) * d);
}

FitResult ks_test(std::span<const double> samples, Family family, double significance) {
    FitResult out;
    out.family = family;
    out.fit = fit_family(samples, family);
    out.statistic = ks_statistic(samples, [&](double x) { return out.fit.cdf(x); });
    out.p_value = ks_p_value(out.statistic, samples.size());
    out.accepted = out.p_value > significance;
    return out;
}

std::vector<FitResult> ks_all_families(std::span<const double> samples, double significance) {
    std::vector<FitResult> out;
    for (Family f : kAllFamilies) {
        try {
            out.push_back(ks_test(samples, f, significance));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UnfittableFamily) throw;
        }
    }
    return out;
}

double compute_mips(double instruction_count, double exec_time_seconds) {
    if (!(exec_time_seconds > 0.0)) {
        throw Error(ErrorCode::DivisionDomain, "execution time must be positive");
    }
    if (!(instruction_count > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "instruction count must be positive");
    }
    return instruction_count / (exec_time_seconds * 1e6);
}

double harmonic_mean(std::span<const double> samples) {
    if (samples.empty()) throw Error(ErrorCode::InsufficientData, "harmonic mean of no samples");
    double inv = 0.0;
    for (double x : samples) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw Error(ErrorCode::InvalidSample, "harmonic mean needs positive finite samples");
        }
        inv += 1.0 / x;
    }
    return static_cast<double>(samples.size()) / inv;
}

std::vector<double> pseudo_harmonic_values(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::InsufficientData, "pseudo-harmonic values need at least 2 samples");
    }
    double total = 0.0;
    for (double x : samples) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw Error(ErrorCode::InvalidSample, "pseudo-harmonic values need positive samples");
        }
        total += 1.0 / x;
    }
    const double p = static_cast<double>(samples.size());
    std::vector<double> y;
    y.reserve(samples.size());
    for (double x : samples) y.push_back((p - 1.0) / (total - 1.0 / x));
    return y;
}

ResampledCI jackknife_ci(std::span<const double> samples, double level) {
    if (samples.size() < 3) throw Error(ErrorCode::InsufficientData, "jackknife needs at least 3 samples");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidParameter, "level must lie in (0,1)");
    const std::vector<double> y = pseudo_harmonic_values(samples);
    const double p = static_cast<double>(y.size());
    const double y_bar = mean_of(y);
    double ss = 0.0;
    for (double v : y) ss += (v - y_bar) * (v - y_bar);
    const double se = std::sqrt((p - 1.0) / p * ss);
    const double t = boost::math::quantile(boost::math::students_t_distribution<double>(p - 1.0),
                                           0.5 * (1.0 + level));
    return ResampledCI{ResampleMethod::Jackknife, y_bar - t * se, y_bar + t * se, level, y_bar};
}

std::pair<std::size_t, std::size_t> bootstrap_ranks(std::size_t k, double alpha) {
    if (k < 10) throw Error(ErrorCode::InvalidParameter, "bootstrap needs k >= 10 resamples");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0,1)");
    const double kd = static_cast<double>(k);
    const std::size_t lower = std::clamp<std::size_t>(ceil_rank(alpha / 2.0 * kd), 1, k);
    const std::size_t upper = std::clamp<std::size_t>(ceil_rank((1.0 - alpha / 2.0) * kd), 1, k);
    return {lower, upper};
}

ResampledCI bootstrap_ci(std::span<const double> samples, std::size_t k, double alpha,
                         std::uint64_t seed) {
    const auto [lo_rank, hi_rank] = bootstrap_ranks(k, alpha);
    if (samples.size() < 2) throw Error(ErrorCode::InsufficientData, "bootstrap needs at least 2 samples");
    const double estimate = harmonic_mean(samples);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    std::vector<double> resample(samples.size());
    std::vector<double> stats;
    stats.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
        for (double& v : resample) v = samples[pick(rng)];
        stats.push_back(harmonic_mean(resample));
    }
    std::ranges::sort(stats);
    return ResampledCI{ResampleMethod::Bootstrap, stats[lo_rank - 1], stats[hi_rank - 1], 1.0 - alpha,
                       estimate};
}

}  // namespace fogsim::stats
