#include "fogsim/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include <boost/math/distributions/normal.hpp>

#include "fogsim/error.hpp"

namespace fogsim {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw Error(ErrorCode::InvalidSample, std::string(what) + " must be finite");
    }
}

// Normal spread over +-8 sigma when discretised against an Empirical operand.
constexpr double kNormalSpan = 8.0;

std::vector<double> cumulative_before(std::span<const double> weights) {
    std::vector<double> out(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out[i] = acc;
        acc += weights[i];
    }
    return out;
}

// Spread weighted point masses onto a uniform grid over [lo, hi], splitting
// each mass linearly between its two neighbouring nodes (preserves the mean).
class GridAccumulator {
public:
    GridAccumulator(double lo, double hi, std::size_t nodes)
        : lo_(lo), hi_(hi), mass_(nodes, 0.0) {
        pitch_ = nodes > 1 ? (hi - lo) / static_cast<double>(nodes - 1) : 0.0;
    }

    void add(double x, double w) {
        if (pitch_ <= 0.0) {
            mass_[0] += w;
            return;
        }
        const double pos = (x - lo_) / pitch_;
        auto i = static_cast<std::ptrdiff_t>(std::floor(pos));
        const auto last = static_cast<std::ptrdiff_t>(mass_.size()) - 2;
        i = std::clamp<std::ptrdiff_t>(i, 0, last);
        const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
        mass_[static_cast<std::size_t>(i)] += w * (1.0 - frac);
        mass_[static_cast<std::size_t>(i) + 1] += w * frac;
    }

    Empirical finish() const {
        std::vector<double> points;
        std::vector<double> weights;
        for (std::size_t k = 0; k < mass_.size(); ++k) {
            if (mass_[k] <= 0.0) continue;
            points.push_back(pitch_ > 0.0 ? lo_ + pitch_ * static_cast<double>(k) : lo_);
            weights.push_back(mass_[k]);
        }
        return Empirical::from_weighted(std::move(points), std::move(weights));
    }

private:
    double lo_;
    double hi_;
    double pitch_;
    std::vector<double> mass_;
};

Empirical rebin(const Empirical& e, std::size_t nodes) {
    if (e.size() <= nodes) return e;
    GridAccumulator grid(e.points().front(), e.points().back(), nodes);
    for (std::size_t i = 0; i < e.size(); ++i) grid.add(e.points()[i], e.weights()[i]);
    return grid.finish();
}

Empirical shift(const Empirical& e, double by) {
    std::vector<double> points(e.points().begin(), e.points().end());
    for (double& p : points) p += by;
    return Empirical::from_weighted(std::move(points),
                                    std::vector<double>(e.weights().begin(), e.weights().end()));
}

bool canonical_less(const Empirical& a, const Empirical& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    if (!std::ranges::equal(a.points(), b.points())) {
        return std::ranges::lexicographical_compare(a.points(), b.points());
    }
    return std::ranges::lexicographical_compare(a.weights(), b.weights());
}

Empirical convolve_empirical(const Empirical& x, const Empirical& y) {
    // Canonical operand order makes the result independent of argument order.
    const Empirical& a = canonical_less(y, x) ? y : x;
    const Empirical& b = canonical_less(y, x) ? x : y;

    if (a.size() * b.size() <= kConvolutionGridPoints) {
        std::vector<std::pair<double, double>> sums;
        sums.reserve(a.size() * b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                sums.emplace_back(a.points()[i] + b.points()[j], a.weights()[i] * b.weights()[j]);
            }
        }
        std::ranges::sort(sums);
        std::vector<double> points;
        std::vector<double> weights;
        for (const auto& [v, w] : sums) {
            points.push_back(v);
            weights.push_back(w);
        }
        return Empirical::from_weighted(std::move(points), std::move(weights));
    }

    const Empirical ra = rebin(a, kConvolutionGridPoints);
    const Empirical rb = rebin(b, kConvolutionGridPoints);
    GridAccumulator grid(ra.points().front() + rb.points().front(),
                         ra.points().back() + rb.points().back(), kConvolutionGridPoints);
    for (std::size_t i = 0; i < ra.size(); ++i) {
        for (std::size_t j = 0; j < rb.size(); ++j) {
            grid.add(ra.points()[i] + rb.points()[j], ra.weights()[i] * rb.weights()[j]);
        }
    }
    return grid.finish();
}

// Normal + Empirical is a Normal mixture; its exact CDF is evaluated at the
// edges of a uniform grid and the bin masses are placed on the grid nodes.
Empirical convolve_normal_empirical(const Normal& n, const Empirical& e) {
    if (n.stddev == 0.0) return shift(e, n.mean);
    const Empirical base = rebin(e, kConvolutionGridPoints);
    const double lo = base.points().front() + n.mean - kNormalSpan * n.stddev;
    const double hi = base.points().back() + n.mean + kNormalSpan * n.stddev;
    const std::size_t nodes = kConvolutionGridPoints;
    const double pitch = (hi - lo) / static_cast<double>(nodes - 1);

    auto mixture_cdf = [&](double x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < base.size(); ++i) {
            acc += base.weights()[i] *
                   standard_normal_cdf((x - base.points()[i] - n.mean) / n.stddev);
        }
        return acc;
    };

    std::vector<double> points;
    std::vector<double> weights;
    double prev = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
        const double node = lo + pitch * static_cast<double>(k);
        const double edge_cdf = k + 1 == nodes ? 1.0 : mixture_cdf(node + 0.5 * pitch);
        const double w = edge_cdf - prev;
        prev = edge_cdf;
        if (w <= 0.0) continue;
        points.push_back(node);
        weights.push_back(w);
    }
    return Empirical::from_weighted(std::move(points), std::move(weights));
}

}  // namespace

double standard_normal_cdf(double z) noexcept {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double standard_normal_quantile(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "probability must lie in [0,1]");
    }
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

Empirical::Empirical(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {}

Empirical Empirical::from_samples(std::span<const double> samples) {
    if (samples.empty()) {
        throw Error(ErrorCode::InsufficientData, "empirical distribution needs at least one sample");
    }
    std::vector<double> points(samples.begin(), samples.end());
    for (double x : points) require_finite(x, "empirical sample");
    std::ranges::sort(points);
    const double w = 1.0 / static_cast<double>(points.size());
    return Empirical(std::move(points), std::vector<double>(samples.size(), w));
}

Empirical Empirical::from_weighted(std::vector<double> points, std::vector<double> weights) {
    if (points.empty() || points.size() != weights.size()) {
        throw Error(ErrorCode::InvalidParameter, "weighted support must be non-empty and aligned");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        require_finite(points[i], "support point");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw Error(ErrorCode::InvalidParameter, "weights must be finite and non-negative");
        }
        if (i > 0 && points[i] < points[i - 1]) {
            throw Error(ErrorCode::InvalidParameter, "support points must be sorted");
        }
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw Error(ErrorCode::InvalidParameter, "total weight must be positive");
    for (double& w : weights) w /= total;
    return Empirical(std::move(points), std::move(weights));
}

LatencyDistribution LatencyDistribution::normal(double mean, double stddev) {
    require_finite(mean, "normal mean");
    require_finite(stddev, "normal stddev");
    if (stddev < 0.0) throw Error(ErrorCode::InvalidParameter, "normal stddev must be >= 0");
    return LatencyDistribution(Normal{mean, stddev});
}

LatencyDistribution LatencyDistribution::empirical(std::span<const double> samples) {
    return LatencyDistribution(Empirical::from_samples(samples));
}

LatencyDistribution LatencyDistribution::point_mass(double value) {
    require_finite(value, "point mass");
    if (value < 0.0) throw Error(ErrorCode::InvalidParameter, "point mass latency must be >= 0");
    return LatencyDistribution(PointMass{value});
}

double LatencyDistribution::mean() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return d.mean;
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return d.value;
            } else {
                double m = 0.0;
                for (std::size_t i = 0; i < d.size(); ++i) m += d.points()[i] * d.weights()[i];
                return m;
            }
        },
        kind_);
}

double LatencyDistribution::variance() const {
    return std::visit(
        [this](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return d.stddev * d.stddev;
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return 0.0;
            } else {
                const double m = mean();
                double v = 0.0;
                for (std::size_t i = 0; i < d.size(); ++i) {
                    const double dev = d.points()[i] - m;
                    v += dev * dev * d.weights()[i];
                }
                return v;
            }
        },
        kind_);
}

double LatencyDistribution::stddev() const { return std::sqrt(variance()); }

double LatencyDistribution::cdf(double x) const {
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                if (d.stddev == 0.0) return x >= d.mean ? 1.0 : 0.0;
                return standard_normal_cdf((x - d.mean) / d.stddev);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return x >= d.value ? 1.0 : 0.0;
            } else {
                const auto pts = d.points();
                const auto end = std::upper_bound(pts.begin(), pts.end(), x);
                const auto k = static_cast<std::size_t>(end - pts.begin());
                double acc = 0.0;
                for (std::size_t i = 0; i < k; ++i) acc += d.weights()[i];
                return std::min(acc, 1.0);
            }
        },
        kind_);
}

double LatencyDistribution::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "quantile probability must lie in [0,1]");
    }
    return std::visit(
        [p](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                if (d.stddev == 0.0) return d.mean;
                return d.mean + d.stddev * standard_normal_quantile(p);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return d.value;
            } else {
                const auto pts = d.points();
                const std::size_t n = pts.size();
                if (n == 1) return pts[0];
                const auto before = cumulative_before(d.weights());
                const double scale = before[n - 1];  // 1 - weight of last point
                if (!(scale > 0.0)) return pts[n - 1];
                // Plotting position of point k is before[k] / scale, from 0 to 1.
                auto position = [&](std::size_t k) { return before[k] / scale; };
                std::size_t hi = 1;
                while (hi < n - 1 && position(hi) < p) ++hi;
                const std::size_t lo = hi - 1;
                const double span = position(hi) - position(lo);
                if (!(span > 0.0)) return pts[hi];
                const double t = std::clamp((p - position(lo)) / span, 0.0, 1.0);
                return pts[lo] + t * (pts[hi] - pts[lo]);
            }
        },
        kind_);
}

LatencyDistribution fit_normal(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::InsufficientData, "fit_normal needs at least 2 samples");
    }
    for (double x : samples) require_finite(x, "sample");
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return LatencyDistribution::normal(mean, std::sqrt(ss / (n - 1.0)));
}

LatencyDistribution convolve(const LatencyDistribution& a, const LatencyDistribution& b) {
    if (const auto* pa = std::get_if<PointMass>(&a.kind())) {
        if (const auto* pb = std::get_if<PointMass>(&b.kind())) {
            return LatencyDistribution::point_mass(pa->value + pb->value);
        }
        if (const auto* nb = std::get_if<Normal>(&b.kind())) {
            return LatencyDistribution::normal(nb->mean + pa->value, nb->stddev);
        }
        return LatencyDistribution::from(shift(std::get<Empirical>(b.kind()), pa->value));
    }
    if (b.is_point_mass()) return convolve(b, a);

    const auto* na = std::get_if<Normal>(&a.kind());
    const auto* nb = std::get_if<Normal>(&b.kind());
    if (na && nb) {
        return LatencyDistribution::normal(
            na->mean + nb->mean, std::sqrt(na->stddev * na->stddev + nb->stddev * nb->stddev));
    }
    if (na) return LatencyDistribution::from(convolve_normal_empirical(*na, std::get<Empirical>(b.kind())));
    if (nb) return LatencyDistribution::from(convolve_normal_empirical(*nb, std::get<Empirical>(a.kind())));
    return LatencyDistribution::from(
        convolve_empirical(std::get<Empirical>(a.kind()), std::get<Empirical>(b.kind())));
}

double success_probability(const LatencyDistribution& dist, double deadline) {
    if (!std::isfinite(deadline)) {
        throw Error(ErrorCode::InvalidParameter, "deadline must be finite");
    }
    return std::clamp(dist.cdf(deadline), 0.0, 1.0);
}

CentralInterval central_interval(const LatencyDistribution& dist, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "interval level must lie in (0,1)");
    }
    const double tail = 0.5 * (1.0 - level);
    return CentralInterval{dist.quantile(tail), dist.quantile(1.0 - tail), level};
}

bool intervals_overlap(const CentralInterval& a, const CentralInterval& b) noexcept {
    return a.lower <= b.upper && b.lower <= a.upper;
}

}  // namespace fogsim
