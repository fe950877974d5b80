#include <doctest.h>

#include "collapse/analytic.hpp"
#include "collapse/error.hpp"
#include "collapse/rng.hpp"
#include "collapse/walk.hpp"
#include "oracles/sphere_oracles.hpp"

#include <cmath>
#include <vector>

using namespace collapse;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::UsageError;
}

// Green's function straight from the formula in long double.
long double greens_reference(long double x, long double x0, long double s, long double D)
{
    const long double k = std::sqrt(s / D);
    const long double lo = std::min(x, x0);
    const long double hi = std::max(x, x0);
    return std::sinh(k * lo) * std::sinh(k * (1 - hi)) / (std::sqrt(s * D) * std::sinh(k));
}

QuantumState two_state(double x0)
{
    return normalize(std::vector<Complex>{std::sqrt(x0), std::sqrt(1.0 - x0)});
}

}  // namespace

TEST_CASE("greens_tilde vanishes at the walls")
{
    for (double x0 : {0.1, 0.5, 0.9}) {
        for (double s : {1e-8, 1.0, 1e3, 1e8}) {
            const DiffusionParams p{2.0, x0};
            CHECK(greens_tilde(0.0, s, p) == 0.0);
            CHECK(greens_tilde(1.0, s, p) == 0.0);
        }
    }
}

TEST_CASE("greens_tilde small-s limit")
{
    const DiffusionParams p{1.0, 0.5};
    const double s = 1e-8;
    const double k = std::sqrt(s);
    const double series = oracle::sinh_series(k * 0.5) * oracle::sinh_series(k * 0.5) /
                          (std::sqrt(s) * oracle::sinh_series(k));
    CHECK(std::abs(greens_tilde(0.5, s, p) - series) < 1e-12 * series);
    CHECK(std::abs(greens_tilde(0.5, s, p) - 0.25) < 1e-8);

    const DiffusionParams p2{4.0, 0.5};
    CHECK(std::abs(greens_tilde(0.5, s, p2) - 0.25 / 4.0) < 1e-8);
}

TEST_CASE("greens_tilde matches the direct formula, including the exponential branch")
{
    Xoshiro256 rng(21, 0);
    for (int t = 0; t < 200; ++t) {
        const double x = 0.01 + 0.98 * uniform01(rng);
        const double x0 = 0.01 + 0.98 * uniform01(rng);
        const double D = 0.5 + uniform01(rng);
        const double s = std::pow(10.0, -4.0 + 8.0 * uniform01(rng));  // k up to ~1.4e4
        const long double want = greens_reference(x, x0, s, D);
        const double got = greens_tilde(x, s, DiffusionParams{D, x0});
        if (std::isfinite(static_cast<double>(want)) && want > 1e-300L) {
            CHECK(std::abs(got - static_cast<double>(want)) <= 1e-12 * static_cast<double>(want));
        }
    }
}

TEST_CASE("greens_tilde stays finite where sinh overflows")
{
    const DiffusionParams p{1.0, 0.5};
    const double s = 1e8;  // k = 1e4
    const double k = 1e4;
    const double at_source = greens_tilde(0.5, s, p);
    CHECK(std::isfinite(at_source));
    CHECK(std::abs(at_source - 0.5 / std::sqrt(s)) < 1e-14 * at_source);
    const double near = greens_tilde(0.5 + 1e-3, s, p);
    CHECK(std::abs(near - 0.5 * std::exp(-k * 1e-3) / std::sqrt(s)) < 1e-12 * near);
}

TEST_CASE("greens_tilde source-observer symmetry")
{
    Xoshiro256 rng(22, 0);
    for (int t = 0; t < 100; ++t) {
        const double x = 0.001 + 0.998 * uniform01(rng);
        const double x0 = 0.001 + 0.998 * uniform01(rng);
        const double s = std::pow(10.0, -6.0 + 10.0 * uniform01(rng));
        const double D = 0.1 + 3.0 * uniform01(rng);
        const double a = greens_tilde(x, s, DiffusionParams{D, x0});
        const double b = greens_tilde(x0, s, DiffusionParams{D, x});
        CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1e-300));
    }
}

TEST_CASE("greens_tilde solves the Laplace-domain diffusion equation")
{
    Xoshiro256 rng(23, 0);
    const double h = 1e-3;
    int checked = 0;
    while (checked < 100) {
        const double x0 = 0.05 + 0.9 * uniform01(rng);
        const double x = 0.01 + 0.98 * uniform01(rng);
        if (std::abs(x - x0) < 5 * h || x < 3 * h || x > 1 - 3 * h) {
            continue;
        }
        const double D = 0.5 + uniform01(rng);
        const double s = 0.5 + 50.0 * uniform01(rng);
        const DiffusionParams p{D, x0};
        auto g = [&](double y) { return greens_tilde(y, s, p); };
        const double second =
            (-g(x - 2 * h) + 16 * g(x - h) - 30 * g(x) + 16 * g(x + h) - g(x + 2 * h)) / (12 * h * h);
        const double rhs = s / D * g(x);
        CHECK(std::abs(second - rhs) < 1e-6 * std::abs(rhs));
        ++checked;
    }
}

TEST_CASE("greens_tilde rejects bad input")
{
    CHECK(code_of([] { greens_tilde(-0.1, 1.0, {}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { greens_tilde(0.5, 0.0, {}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { greens_tilde(0.5, 1.0, DiffusionParams{0.0, 0.5}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { greens_tilde(0.5, 1.0, DiffusionParams{1.0, 1.5}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("absorption_probs examples")
{
    const auto a = absorption_probs(0.3);
    CHECK(a.at_0 == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(a.at_1 == doctest::Approx(0.3).epsilon(1e-15));
    const auto b = absorption_probs(0.5);
    CHECK(b.at_0 == 0.5);
    CHECK(b.at_1 == 0.5);
    const auto c = absorption_probs(1.0);
    CHECK(c.at_0 == 0.0);
    CHECK(c.at_1 == 1.0);
    const auto d = absorption_probs(0.0);
    CHECK(d.at_0 == 1.0);
    CHECK(d.at_1 == 0.0);
    CHECK(code_of([] { absorption_probs(1.2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("absorption flux self-test on a 9-point grid")
{
    for (int i = 1; i <= 9; ++i) {
        const double x0 = i / 10.0;
        const auto exact = absorption_probs(x0);
        const auto flux = absorption_flux(x0);
        CHECK(std::abs(flux.at_0 - exact.at_0) < 1e-4);
        CHECK(std::abs(flux.at_1 - exact.at_1) < 1e-4);
        CHECK(exact.at_0 + exact.at_1 == 1.0);
    }
}

TEST_CASE("mean_exit_time examples")
{
    CHECK(mean_exit_time({1.0, 0.5}) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(mean_exit_time({1.0, 0.3}) == doctest::Approx(0.105).epsilon(1e-15));
    CHECK(mean_exit_time({2.0, 0.5}) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(mean_exit_time({1.0, 1e-9}) < 1e-9);
}

TEST_CASE("walk matches the diffusion oracle")
{
    WalkConfig cfg;
    cfg.seed = 31;

    SUBCASE("absorption probabilities")
    {
        cfg.grid_resolution = 100;
        const std::int64_t trials = 10000;
        for (double x0 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto stats = born_statistics(two_state(x0), trials, cfg);
            const auto exact = absorption_probs(x0);
            const double se = std::sqrt(x0 * (1 - x0) / trials);
            CHECK(std::abs(stats.frequencies[0] - exact.at_1) < 4 * se);
            CHECK(std::abs(stats.frequencies[1] - exact.at_0) < 4 * se);
        }
    }

    SUBCASE("mean exit time at M = 200")
    {
        cfg.grid_resolution = 200;
        for (double x0 : {0.5, 0.3}) {
            const auto stats = born_statistics(two_state(x0), 10000, cfg);
            const double scaled = stats.mean_steps / (200.0 * 200.0) / 2.0;
            const double want = mean_exit_time({1.0, x0});
            CHECK(std::abs(scaled - want) < 0.02 * want);
        }
    }
}
