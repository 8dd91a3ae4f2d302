#include <cmath>
#include <random>
#include <vector>

#include "fogsim/trace_stats.hpp"
#include "support.hpp"

using namespace fogsim;
using namespace fogsim::stats;
using doctest::Approx;

namespace {

const std::vector<double> kTen{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.0, 3.7, 2.5};
const std::vector<double> kSkewed{0.5, 0.7, 0.8, 1.1, 1.3, 1.4, 1.9, 2.2, 2.6, 3.0,
                                  3.7, 4.4, 5.2, 6.5, 7.9, 9.6, 12.0, 15.8, 21.0, 30.5};

}  // namespace

// Reference values below come from scipy.stats / scipy.special.
TEST_CASE("Shapiro-Wilk matches the reference implementation") {
    const auto r10 = shapiro_wilk(kTen);
    CHECK(r10.w == Approx(0.9641265102273089).epsilon(1e-5));
    CHECK(r10.p_value == Approx(0.831699464855048).epsilon(1e-3));
    CHECK(r10.looks_normal());

    const auto r20 = shapiro_wilk(kSkewed);
    CHECK(r20.w == Approx(0.7564166420464364).epsilon(1e-5));
    CHECK(r20.p_value == Approx(0.00020722198903712756).epsilon(1e-2));
    CHECK_FALSE(r20.looks_normal());

    const std::vector<double> three{1, 2, 4};
    const auto r3 = shapiro_wilk(three);
    CHECK(r3.w == Approx(0.9642857142857142).epsilon(1e-9));
    CHECK(r3.p_value == Approx(0.6368868450289689).epsilon(1e-6));
}

TEST_CASE("Shapiro-Wilk rejects unusable samples") {
    const std::vector<double> two{1, 2};
    const std::vector<double> flat{3, 3, 3, 3};
    CHECK_ERROR_CODE(shapiro_wilk(two), ErrorCode::InsufficientData);
    CHECK_ERROR_CODE(shapiro_wilk(flat), ErrorCode::DegenerateSample);
    std::vector<double> big(5001);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<double>(i);
    CHECK_ERROR_CODE(shapiro_wilk(big), ErrorCode::InvalidParameter);
}

TEST_CASE("Kolmogorov survival function") {
    CHECK(kolmogorov_survival(1.0) == Approx(0.26999967167735456).epsilon(1e-10));
    CHECK(kolmogorov_survival(0.5) == Approx(0.9639452436648751).epsilon(1e-10));
    CHECK(kolmogorov_survival(2.0) == Approx(0.0006709252557796953).epsilon(1e-8));
    CHECK(kolmogorov_survival(0.3) == Approx(0.9999906941986655).epsilon(1e-10));
    CHECK(kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("K-S statistic of a single point against U(0,1)") {
    const std::vector<double> one{0.5};
    CHECK(ks_statistic(one, [](double x) { return std::clamp(x, 0.0, 1.0); }) == 0.5);
}

TEST_CASE("K-S tests against fitted families") {
    const auto normal = ks_test(kTen, Family::Normal);
    CHECK(normal.statistic == Approx(0.09576403812410045).epsilon(1e-9));
    CHECK(normal.p_value == Approx(0.9999881008483781).epsilon(1e-8));
    CHECK(normal.accepted);

    const auto expo = ks_test(kSkewed, Family::Exponential);
    CHECK(expo.statistic == Approx(0.13495486420740388).epsilon(1e-9));
    CHECK(expo.p_value == Approx(0.8595656382376345).epsilon(1e-8));

    const auto logn = ks_test(kSkewed, Family::LogNormal);
    CHECK(logn.statistic == Approx(0.08406611907821637).epsilon(1e-9));
}

TEST_CASE("family CDFs") {
    FittedFamily t{Family::StudentT, 3.5, 0.8, 5};
    CHECK(t.cdf(4.0) == Approx(0.7203083025027468).epsilon(1e-10));
    FittedFamily ln{Family::LogNormal, 0.3, 0.5, 0};
    CHECK(ln.cdf(2.0) == Approx(0.7841524723713562).epsilon(1e-10));
    CHECK(ln.cdf(-1.0) == 0.0);
    FittedFamily ex{Family::Exponential, 0.0, 2.0, 0};
    CHECK(ex.cdf(2.0) == Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("Student-t fit scales the sample deviation to the chosen df") {
    const auto fit = fit_family(kTen, Family::StudentT);
    REQUIRE(fit.df >= 3);
    REQUIRE(fit.df <= 100);
    double mean = 0.0;
    for (double x : kTen) mean += x;
    mean /= 10.0;
    double ss = 0.0;
    for (double x : kTen) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / 9.0);
    CHECK(fit.location == Approx(mean));
    CHECK(fit.scale == Approx(sd * std::sqrt((fit.df - 2.0) / fit.df)));
}

TEST_CASE("unfittable families are skipped") {
    const std::vector<double> mixed{-1.0, 0.5, 2.0, 3.0};
    CHECK_ERROR_CODE(fit_family(mixed, Family::LogNormal), ErrorCode::UnfittableFamily);
    CHECK_ERROR_CODE(fit_family(mixed, Family::Exponential), ErrorCode::UnfittableFamily);
    const auto all = ks_all_families(mixed);
    CHECK(all.size() == 2);
    const std::vector<double> one{1.0};
    CHECK_ERROR_CODE(fit_family(one, Family::Normal), ErrorCode::InsufficientData);
}

TEST_CASE("MIPS from instruction count and time") {
    CHECK(compute_mips(21904040.4, 0.06598) == Approx(331.98).epsilon(1e-4));
    CHECK_ERROR_CODE(compute_mips(1e6, 0.0), ErrorCode::DivisionDomain);
    CHECK_ERROR_CODE(compute_mips(0.0, 1.0), ErrorCode::InvalidParameter);
}

TEST_CASE("harmonic mean and its leave-one-out values") {
    const std::vector<double> s{1, 2, 4};
    CHECK(harmonic_mean(s) == Approx(3.0 / 1.75));
    const auto y = pseudo_harmonic_values(s);
    REQUIRE(y.size() == 3);
    CHECK(y[0] == Approx(2.0 / 0.75));
    CHECK(y[1] == Approx(2.0 / 1.25));
    CHECK(y[2] == Approx(2.0 / 1.5));
    const std::vector<double> none;
    const std::vector<double> zero{1.0, 0.0};
    CHECK_ERROR_CODE(harmonic_mean(none), ErrorCode::InsufficientData);
    CHECK_ERROR_CODE(harmonic_mean(zero), ErrorCode::InvalidSample);
}

TEST_CASE("jackknife interval") {
    const auto ci = jackknife_ci(kTen, 0.95);
    CHECK(ci.lower == Approx(2.2962770156637693).epsilon(1e-10));
    CHECK(ci.upper == Approx(3.803792098843911).epsilon(1e-10));
    CHECK(ci.estimate == Approx(3.05003455725384).epsilon(1e-10));
    CHECK(harmonic_mean(kTen) == Approx(3.0460766313724505).epsilon(1e-12));
    const std::vector<double> two{1, 2};
    CHECK_ERROR_CODE(jackknife_ci(two), ErrorCode::InsufficientData);
}

TEST_CASE("bootstrap ranks and interval") {
    CHECK(bootstrap_ranks(100, 0.05) == std::pair<std::size_t, std::size_t>{3, 98});
    CHECK(bootstrap_ranks(1000, 0.05) == std::pair<std::size_t, std::size_t>{25, 975});
    CHECK(bootstrap_ranks(10, 0.5) == std::pair<std::size_t, std::size_t>{3, 8});
    CHECK_ERROR_CODE(bootstrap_ranks(5, 0.05), ErrorCode::InvalidParameter);

    const auto a = bootstrap_ci(kTen, 100, 0.05, 7);
    const auto b = bootstrap_ci(kTen, 100, 0.05, 7);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.lower <= a.estimate);
    CHECK(a.estimate <= a.upper);
    CHECK(a.level == Approx(0.95));
    CHECK(a.estimate == Approx(harmonic_mean(kTen)));
}

TEST_CASE("property: harmonic mean never exceeds the arithmetic mean") {
    std::mt19937_64 rng(3);
    std::lognormal_distribution<double> ln(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> s(15);
        double sum = 0.0;
        for (double& v : s) {
            v = ln(rng);
            sum += v;
        }
        CHECK(harmonic_mean(s) <= sum / 15.0 + 1e-12);
        const auto jk = jackknife_ci(s);
        CHECK(jk.lower <= jk.upper);
    }
}
