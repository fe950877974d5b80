#include <doctest.h>

#include "collapse/bell.hpp"
#include "collapse/error.hpp"
#include "oracles/sphere_oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace collapse;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

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

DetectorSetting deg(double d) { return DetectorSetting::from_degrees(d); }

double combined(const CorrelationEstimate& x, const CorrelationEstimate& y)
{
    return std::sqrt(x.stderr_ * x.stderr_ + y.stderr_ * y.stderr_);
}

// c2 from the closed-form overlap and the textbook quadratic formula.
double c2_oracle(double theta)
{
    const double c1 = std::sqrt(3.0 / (4.0 * kPi));
    const double a = 16.0 * kPi;
    const double b = 8.0 * kPi * c1;
    const double c = c1 * c1 * oracle::overlap_closed_form(theta) - 1.0;
    return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

// Rotation from a random unit quaternion.
struct Rotation {
    double m[3][3];
    Vec3 operator()(Vec3 v) const
    {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z, m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
};

Rotation random_rotation(Xoshiro256& rng)
{
    double q[4];
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (double& c : q) {
            c = 2.0 * uniform01(rng) - 1.0;
            n2 += c * c;
        }
    } while (n2 > 1.0 || n2 < 1e-6);
    const double s = 1.0 / std::sqrt(n2);
    const double w = q[0] * s, x = q[1] * s, y = q[2] * s, z = q[3] * s;
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
             {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
             {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

Vec3 unit(Vec3 v) { return (1.0 / norm(v)) * v; }

DetectorSetting setting(Vec3 v)
{
    // Renormalise so rounding in the rotation never trips the unit check.
    return DetectorSetting(unit(v));
}

}  // namespace

TEST_CASE("detector settings")
{
    const auto s = deg(90);
    CHECK(std::abs(s.direction().x - 1.0) < 1e-15);
    CHECK(std::abs(s.direction().z) < 1e-15);
    CHECK(code_of([] { DetectorSetting(Vec3{1, 1, 0}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { DetectorSetting(Vec3{0, 0, 0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("model and convention names")
{
    for (Model m : {Model::quantum, Model::bell_sign, Model::image_analytic, Model::image_event}) {
        CHECK(parse_model(to_string(m)) == m);
    }
    CHECK(parse_model("image-event") == Model::image_event);
    CHECK(parse_convention("quantum") == Convention::quantum);
    CHECK(code_of([] { parse_model("nope"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sample_lambda is uniform on the sphere")
{
    Xoshiro256 rng(41, 0);
    const int n = 1000000;
    Vec3 sum{0, 0, 0};
    double sq = 0.0;
    const Vec3 a = unit(Vec3{1, 2, 3});
    for (int i = 0; i < n; ++i) {
        const Vec3 l = sample_lambda(rng).lambda;
        REQUIRE(std::abs(norm(l) - 1.0) < 1e-12);
        sum = sum + l;
        const double p = dot(a, l);
        sq += p * p;
    }
    const double bound = 4.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sum.x / n) < bound);
    CHECK(std::abs(sum.y / n) < bound);
    CHECK(std::abs(sum.z / n) < bound);
    // Var of (a.l)^2 is 1/5 - 1/9.
    CHECK(std::abs(sq / n - 1.0 / 3.0) < 4.0 * std::sqrt((1.0 / 5 - 1.0 / 9) / n));
}

TEST_CASE("quantum correlation examples")
{
    CHECK(quantum_correlation(deg(0), deg(0)) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(quantum_correlation(deg(0), deg(90))) < 1e-15);
    CHECK(quantum_correlation(deg(0), deg(60)) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("bell sign model")
{
    const std::int64_t n = 1000000;
    CHECK(bell_sign_correlation(deg(0), deg(0), n).value == -1.0);
    CHECK(bell_sign_correlation(deg(0), deg(180), n).value == 1.0);
    const auto orth = bell_sign_correlation(deg(0), deg(90), n);
    CHECK(std::abs(orth.value) < 4 * orth.stderr_);
    CHECK(orth.n == n);

    // Closed form against brute-force quadrature of the sign product.
    for (double d : {30.0, 60.0, 120.0, 150.0}) {
        const double t = d * kPi / 180.0;
        const double brute = oracle::sphere_average_midpoint(
            [&](double x, double, double z) {
                const double pa = z;
                const double pb = std::sin(t) * x + std::cos(t) * z;
                return -(pa > 0 ? 1.0 : -1.0) * (pb > 0 ? 1.0 : -1.0);
            },
            1200);
        CHECK(std::abs(brute - oracle::bell_sign_closed_form(t)) < 2e-3);
        const auto est = bell_sign_correlation(deg(0), deg(d), n);
        CHECK(std::abs(est.value - oracle::bell_sign_closed_form(t)) < 4 * est.stderr_);
    }
}

TEST_CASE("sampling is independent of execution mode")
{
    SamplingPlan serial{5, 2, 1000, Exec::serial};
    SamplingPlan parallel{5, 2, 1000, Exec::parallel};
    const auto a = bell_sign_correlation(deg(0), deg(70), 12345, serial);
    const auto b = bell_sign_correlation(deg(0), deg(70), 12345, parallel);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
    const auto c = image_correlation_event(deg(10), deg(70), 12345, serial);
    const auto d = image_correlation_event(deg(10), deg(70), 12345, parallel);
    CHECK(c.value == d.value);
    CHECK(c.acceptance_rate == d.acceptance_rate);
}

TEST_CASE("overlap integral")
{
    CHECK(std::abs(overlap_integral(0.0) - 4 * kPi / 3) < 1e-12);
    CHECK(std::abs(overlap_integral(kPi) - 4 * kPi / 3) < 1e-12);
    const double half = overlap_integral(kPi / 2);
    CHECK(std::abs(half - oracle::kOverlapHalfPiMc) < 4 * oracle::kOverlapHalfPiMcStderr);
    CHECK(std::abs(half - oracle::overlap_closed_form(kPi / 2)) < 1e-10);
    for (int d = 0; d <= 180; d += 7) {
        const double t = d * kPi / 180;
        CHECK(std::abs(overlap_integral(t) - oracle::overlap_closed_form(t)) < 1e-10);
    }
    CHECK(code_of([] { overlap_integral(4.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("solve_c2 examples")
{
    CHECK(std::abs(solve_c2(0.0).c2) < 1e-8);
    CHECK(std::abs(solve_c2(kPi).c2) < 1e-8);
    const auto mid = solve_c2(kPi / 2);
    CHECK(std::abs(mid.c2 - c2_oracle(kPi / 2)) < 1e-12);
    CHECK(std::abs(mid.c2 - 0.02667811873020679) < 1e-12);
    CHECK(std::abs(mid.residual) < 1e-8);
    CHECK(std::abs(solve_c2(kPi / 3).c2 - 0.021136063479894565) < 1e-12);
}

TEST_CASE("solve_c2 on a 181-point grid")
{
    std::vector<double> thetas;
    for (int d = 0; d <= 180; ++d) {
        thetas.push_back(d * kPi / 180);
    }
    const auto serial = solve_c2_grid(thetas, Exec::serial);
    const auto parallel = solve_c2_grid(thetas, Exec::parallel);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const auto& k = serial[i];
        CHECK(k.c1 * k.c1 * k.overlap <= 1.0 + 1e-12);
        CHECK(k.c2 >= 0.0);
        CHECK(std::abs(k.residual) < 1e-8);
        CHECK(std::abs(k.c2 - c2_oracle(thetas[i])) < 1e-10);
        CHECK(parallel[i].c2 == k.c2);
        CHECK(parallel[i].residual == k.residual);
    }
}

TEST_CASE("image model, analytic path")
{
    for (double d : {0.0, 60.0, 90.0, 133.0, 180.0}) {
        const double want = std::cos(d * kPi / 180);
        const auto q = image_correlation_analytic(deg(0), deg(d), IntegrationMethod::quadrature);
        CHECK(std::abs(q.value - want) < 1e-12);
        CHECK(q.stderr_ == 0.0);
        const auto flipped = image_correlation_analytic(deg(0), deg(d), IntegrationMethod::quadrature, 0, {},
                                                        Convention::quantum);
        CHECK(std::abs(flipped.value + want) < 1e-12);
        CHECK(std::abs(std::abs(flipped.value) - std::abs(quantum_correlation(deg(0), deg(d)))) < 1e-12);

        const auto mc = image_correlation_analytic(deg(0), deg(d), IntegrationMethod::monte_carlo, 1000000);
        CHECK(std::abs(mc.value - want) < 4 * mc.stderr_ + 1e-12);
    }
}

TEST_CASE("image model, event path")
{
    const std::int64_t n = 1000000;
    const auto par = image_correlation_event(deg(0), deg(0), n);
    CHECK(par.value == 1.0);
    CHECK(par.spectator_mean == 0.0);
    const auto anti = image_correlation_event(deg(0), deg(180), n);
    CHECK(anti.value == -1.0);

    const auto sixty = image_correlation_event(deg(0), deg(60), n);
    CHECK(std::abs(sixty.value - 0.5) < 4 * sixty.stderr_);
    CHECK(sixty.acceptance_rate > 1e-3);
    CHECK(sixty.acceptance_rate <= 1.0);
    // mu = +-1 events cancel in the mean.
    CHECK(std::abs(sixty.spectator_mean) < 4 * sixty.spectator_stderr);
    CHECK(sixty.spectator_stderr > 0.0);

    for (int d = 0; d <= 180; d += 30) {
        const auto ev = image_correlation_event(deg(0), deg(d), n, SamplingPlan{7, static_cast<std::uint64_t>(d)});
        const auto an = image_correlation_analytic(deg(0), deg(d), IntegrationMethod::quadrature);
        CHECK(std::abs(ev.value - an.value) < 4 * ev.stderr_ + 1e-12);
    }
}

TEST_CASE("rotation invariance and symmetry")
{
    Xoshiro256 rng(77, 0);
    const std::int64_t n = 100000;
    for (int r = 0; r < 50; ++r) {
        const Rotation rot = random_rotation(rng);
        const Vec3 a = unit(Vec3{uniform01(rng) - 0.5, uniform01(rng) - 0.5, uniform01(rng) - 0.5});
        const Vec3 b = unit(Vec3{uniform01(rng) - 0.5, uniform01(rng) - 0.5, uniform01(rng) - 0.5});
        const auto sa = setting(a), sb = setting(b), ra = setting(rot(a)), rb = setting(rot(b));

        CHECK(std::abs(quantum_correlation(sa, sb) - quantum_correlation(ra, rb)) < 1e-10);
        CHECK(std::abs(quantum_correlation(sa, sb) - quantum_correlation(sb, sa)) < 1e-15);

        const auto q1 = image_correlation_analytic(sa, sb, IntegrationMethod::quadrature);
        const auto q2 = image_correlation_analytic(ra, rb, IntegrationMethod::quadrature);
        const auto q3 = image_correlation_analytic(sb, sa, IntegrationMethod::quadrature);
        CHECK(std::abs(q1.value - q2.value) < 1e-10);
        CHECK(std::abs(q1.value - q3.value) < 1e-10);

        const SamplingPlan p1{1, static_cast<std::uint64_t>(2 * r)};
        const SamplingPlan p2{1, static_cast<std::uint64_t>(2 * r + 1)};
        const auto s1 = bell_sign_correlation(sa, sb, n, p1);
        const auto s2 = bell_sign_correlation(ra, rb, n, p2);
        const auto s3 = bell_sign_correlation(sb, sa, n, p2);
        CHECK(std::abs(s1.value - s2.value) < 4 * combined(s1, s2));
        CHECK(std::abs(s1.value - s3.value) < 4 * combined(s1, s3));

        const auto e1 = image_correlation_event(sa, sb, n, p1);
        const auto e2 = image_correlation_event(ra, rb, n, p2);
        const auto e3 = image_correlation_event(sb, sa, n, p2);
        CHECK(std::abs(e1.value - e2.value) < 4 * combined(e1, e2));
        CHECK(std::abs(e1.value - e3.value) < 4 * combined(e1, e3));
    }
}

TEST_CASE("CHSH examples")
{
    const auto a = deg(0), a2 = deg(90), b = deg(45), b2 = deg(135);

    const auto quantum = chsh({Model::quantum}, a, a2, b, b2);
    CHECK(std::abs(std::abs(quantum.S) - 2 * kSqrt2) < 1e-12);
    CHECK(quantum.violated);
    CHECK(quantum.combined_stderr == 0.0);

    const auto sign = chsh({Model::bell_sign, 1000000}, a, a2, b, b2);
    CHECK(std::abs(std::abs(sign.S) - 2.0) < 4 * sign.combined_stderr);
    CHECK_FALSE(sign.violated);

    for (Convention c : {Convention::paper, Convention::quantum}) {
        CorrelationModel m{Model::image_analytic};
        m.convention = c;
        const auto image = chsh(m, a, a2, b, b2);
        CHECK(std::abs(std::abs(image.S) - 2 * kSqrt2) < 1e-5);
        CHECK(image.violated);
    }

    const auto event = chsh({Model::image_event, 1000000}, a, a2, b, b2);
    CHECK(std::abs(std::abs(event.S) - 2 * kSqrt2) < 4 * event.combined_stderr);
    CHECK(event.violated);
}

TEST_CASE("bell64 examples")
{
    const auto q = bell64({Model::quantum}, deg(0), deg(45), deg(90));
    CHECK(std::abs(q.lhs - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(q.rhs - (1 - std::sqrt(0.5))) < 1e-12);
    CHECK(q.violated);

    const auto s = bell64({Model::bell_sign, 1000000}, deg(0), deg(45), deg(90));
    CHECK(std::abs(s.lhs - 0.5) < 4 * s.combined_stderr);
    CHECK(std::abs(s.rhs - 0.5) < 4 * s.combined_stderr);
    CHECK_FALSE(s.violated);

    const auto same = bell64({Model::quantum}, deg(0), deg(45), deg(45));
    CHECK(same.lhs == 0.0);
    CHECK(std::abs(same.rhs) < 1e-15);
    CHECK_FALSE(same.violated);

    const auto image = bell64({Model::image_analytic}, deg(0), deg(45), deg(90));
    CHECK(std::abs(image.lhs - std::sqrt(0.5)) < 1e-10);
    CHECK(image.violated);
}

TEST_CASE("bell sign model never violates Bell's inequality")
{
    const CorrelationModel m{Model::bell_sign, 100000, 3};
    int violations = 0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const auto r = bell64(m, deg(0), deg(20.0 * i), deg(20.0 * j));
            CHECK(r.lhs <= r.rhs + 4 * r.combined_stderr);
            violations += r.violated;
        }
    }
    CHECK(violations == 0);
}
