#include <doctest.h>

#include "collapse/sphere.hpp"
#include "oracles/sphere_oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace collapse;

namespace {

constexpr double kPi = std::numbers::pi;

void check_orthonormal(const SphereFrame& f)
{
    CHECK(std::abs(norm(f.e1) - 1.0) < 1e-14);
    CHECK(std::abs(norm(f.e2) - 1.0) < 1e-14);
    CHECK(std::abs(norm(f.pole) - 1.0) < 1e-14);
    CHECK(std::abs(dot(f.e1, f.e2)) < 1e-14);
    CHECK(std::abs(dot(f.e1, f.pole)) < 1e-14);
    CHECK(std::abs(dot(f.e2, f.pole)) < 1e-14);
    // Right-handed.
    const Vec3 c = cross(f.e1, f.e2);
    CHECK(norm(c - f.pole) < 1e-14);
}

}  // namespace

TEST_CASE("vector helpers")
{
    const Vec3 x{1, 0, 0};
    const Vec3 y{0, 1, 0};
    CHECK(cross(x, y) == Vec3{0, 0, 1});
    CHECK(dot(x, y) == 0.0);
    CHECK(angle_between(x, y) == doctest::Approx(kPi / 2));
    CHECK(angle_between(x, x) == 0.0);
    CHECK(angle_between(x, -1.0 * x) == doctest::Approx(kPi));
    // atan2 form stays accurate for tiny angles.
    const double tiny = 1e-9;
    CHECK(angle_between(x, Vec3{std::cos(tiny), std::sin(tiny), 0}) == doctest::Approx(tiny).epsilon(1e-6));
}

TEST_CASE("Gauss-Legendre rules are exact to degree 2n - 1")
{
    for (int n : {1, 2, 5, 12, 32}) {
        const auto rule = gauss_legendre(n);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
        for (int degree = 0; degree <= 2 * n - 1; ++degree) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                sum += rule.weights[i] * std::pow(rule.nodes[i], degree);
            }
            const double exact = degree % 2 == 1 ? 0.0 : 2.0 / (degree + 1);
            CHECK(std::abs(sum - exact) < 1e-14);
        }
    }
}

TEST_CASE("azimuth rules")
{
    const auto plain = azimuth_rule(16, {});
    double total = 0.0;
    double cos2 = 0.0;
    for (std::size_t i = 0; i < plain.nodes.size(); ++i) {
        total += plain.weights[i];
        cos2 += plain.weights[i] * std::cos(plain.nodes[i]) * std::cos(plain.nodes[i]);
    }
    CHECK(std::abs(total - 2 * kPi) < 1e-14);
    CHECK(std::abs(cos2 - kPi) < 1e-14);

    // |cos| has kinks at pi/2 and 3 pi/2; breakpoints make it exact.
    const std::vector<double> kinks{3 * kPi / 2, kPi / 2};
    const auto split = azimuth_rule(12, kinks);
    double abs_cos = 0.0;
    total = 0.0;
    for (std::size_t i = 0; i < split.nodes.size(); ++i) {
        total += split.weights[i];
        abs_cos += split.weights[i] * std::abs(std::cos(split.nodes[i]));
    }
    CHECK(std::abs(total - 2 * kPi) < 1e-14);
    CHECK(std::abs(abs_cos - 4.0) < 1e-13);
}

TEST_CASE("for_pair puts both settings on the equator")
{
    const Vec3 a{0, 0, 1};
    for (double theta : {0.0, 0.3, kPi / 2, 2.5, kPi}) {
        const Vec3 b{std::sin(theta), 0, std::cos(theta)};
        const auto f = SphereFrame::for_pair(a, b);
        check_orthonormal(f);
        CHECK(norm(f.e1 - a) < 1e-14);
        CHECK(std::abs(dot(b, f.pole)) < 1e-14);
        CHECK(std::abs(dot(b, f.e1) - std::cos(theta)) < 1e-14);
        CHECK(std::abs(dot(b, f.e2) - std::sin(theta)) < 1e-14);
    }
}

TEST_CASE("integrate_sphere known integrals")
{
    const SphereFrame frame;
    const auto one = integrate_sphere([](Vec3) { return 1.0; }, frame);
    CHECK(one.converged);
    CHECK(std::abs(one.value - 4 * kPi) < 1e-12);

    const auto z2 = integrate_sphere([](Vec3 v) { return v.z * v.z; }, frame);
    CHECK(std::abs(z2.value - 4 * kPi / 3) < 1e-12);

    const auto x2y2 = integrate_sphere([](Vec3 v) { return v.x * v.x * v.y * v.y; }, frame);
    CHECK(std::abs(x2y2.value - 4 * kPi / 15) < 1e-12);

    const auto odd = integrate_sphere([](Vec3 v) { return v.x * v.y * v.z; }, frame);
    CHECK(std::abs(odd.value) < 1e-13);
}

TEST_CASE("kinked integrand with breakpoints matches the closed form")
{
    const Vec3 a{0, 0, 1};
    for (int deg = 0; deg <= 180; deg += 5) {
        const double theta = deg * kPi / 180.0;
        const Vec3 b{std::sin(theta), 0, std::cos(theta)};
        const std::vector<double> kinks{kPi / 2, 3 * kPi / 2, theta + kPi / 2, theta + 3 * kPi / 2};
        const auto q = integrate_sphere([&](Vec3 l) { return std::abs(dot(a, l)) * std::abs(dot(b, l)); },
                                        SphereFrame::for_pair(a, b), 1e-10, 16, kinks);
        CHECK(q.converged);
        CHECK(std::abs(q.value - oracle::overlap_closed_form(theta)) < 1e-10);
    }
}

TEST_CASE("closed-form overlap oracle agrees with the frozen Monte Carlo value")
{
    const double closed = oracle::overlap_closed_form(kPi / 2);
    CHECK(std::abs(closed - 8.0 / 3.0) < 1e-15);
    CHECK(std::abs(closed - oracle::kOverlapHalfPiMc) < 4 * oracle::kOverlapHalfPiMcStderr);
    // Brute-force midpoint integration of the same quantity.
    const double mid =
        4 * kPi * oracle::sphere_average_midpoint([](double x, double, double z) { return std::abs(x * z); }, 800);
    CHECK(std::abs(mid - closed) < 1e-4);
}
