#include "collapse/bell.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <string>

namespace collapse {

namespace {

constexpr double kPi = std::numbers::pi;

double sign(double x) noexcept { return x > 0.0 ? 1.0 : -1.0; }

double convention_sign(Convention c) noexcept { return c == Convention::paper ? 1.0 : -1.0; }

// Running sums for one chunk of samples.
struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t count = 0;
    std::int64_t proposals = 0;
    double spectator_sum = 0.0;
    std::int64_t spectator_count = 0;

    void add(double x) noexcept
    {
        sum += x;
        sum_sq += x * x;
        ++count;
    }
};

// Splits n samples into fixed chunks, one stream each, reduced in chunk order.
template <class Chunk>
Moments sample_chunks(std::int64_t n, const SamplingPlan& plan, Chunk&& chunk)
{
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
    }
    if (plan.chunk_size < 1) {
        throw Error(ErrorCode::InvalidArgument, "chunk size must be >= 1");
    }
    const std::int64_t chunks = (n + plan.chunk_size - 1) / plan.chunk_size;
    std::vector<Moments> parts(static_cast<std::size_t>(chunks));
    for_each_index(plan.exec, parts.size(), [&](std::size_t c) {
        const auto first = static_cast<std::int64_t>(c) * plan.chunk_size;
        const std::int64_t count = std::min(plan.chunk_size, n - first);
        Xoshiro256 rng(plan.seed, stream_id(plan.task, c));
        parts[c] = chunk(rng, count);
    });
    Moments total;
    for (const auto& p : parts) {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.count += p.count;
        total.proposals += p.proposals;
        total.spectator_sum += p.spectator_sum;
        total.spectator_count += p.spectator_count;
    }
    return total;
}

// Mean and standard error of the mean (sample standard deviation / sqrt(n)).
std::pair<double, double> mean_and_stderr(double sum, double sum_sq, std::int64_t count)
{
    const auto n = static_cast<double>(count);
    const double mean = sum / n;
    if (count < 2) {
        return {mean, 0.0};
    }
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

CorrelationEstimate finish(const Moments& m, Model model, double scale)
{
    CorrelationEstimate est;
    const auto [mean, err] = mean_and_stderr(m.sum, m.sum_sq, m.count);
    est.value = scale * mean;
    est.stderr_ = err;
    est.n = m.count;
    est.model = model;
    return est;
}

SphereQuadrature checked(const SphereQuadrature& q, const char* what)
{
    if (!q.converged) {
        throw Error(ErrorCode::NoConvergence, std::string(what) + ": sphere quadrature change " +
                                                  std::to_string(q.last_change) + " after level " +
                                                  std::to_string(q.level));
    }
    return q;
}

// Unit pair in the x-y plane, theta apart.
std::pair<Vec3, Vec3> pair_at(double theta)
{
    return {Vec3{1.0, 0.0, 0.0}, Vec3{std::cos(theta), std::sin(theta), 0.0}};
}

// In SphereFrame::for_pair(a, b), a sits at phi = 0 and b at phi = theta;
// |a.l| and |b.l| kink a quarter turn either side of them.
std::array<double, 4> kinks_at(double theta)
{
    return {0.5 * kPi, 1.5 * kPi, theta + 0.5 * kPi, theta + 1.5 * kPi};
}

void check_theta(double theta)
{
    if (!(theta >= 0.0 && theta <= kPi)) {
        throw Error(ErrorCode::InvalidArgument, "theta must lie in [0, pi], got " + std::to_string(theta));
    }
}

}  // namespace

DetectorSetting::DetectorSetting(Vec3 direction) : direction_(direction)
{
    if (std::abs(norm(direction) - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "detector setting must be a unit vector");
    }
}

DetectorSetting DetectorSetting::from_degrees(double degrees)
{
    const double rad = degrees * kPi / 180.0;
    return DetectorSetting(Vec3{std::sin(rad), 0.0, std::cos(rad)});
}

std::string_view to_string(Model model) noexcept
{
    switch (model) {
    case Model::quantum: return "quantum";
    case Model::bell_sign: return "bell-sign";
    case Model::image_analytic: return "image-analytic";
    case Model::image_event: return "image-event";
    }
    return "unknown";
}

Model parse_model(std::string_view name)
{
    for (const Model m : {Model::quantum, Model::bell_sign, Model::image_analytic, Model::image_event}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + std::string(name) + "'");
}

std::string_view to_string(Convention convention) noexcept
{
    return convention == Convention::paper ? "paper" : "quantum";
}

Convention parse_convention(std::string_view name)
{
    if (name == "paper") {
        return Convention::paper;
    }
    if (name == "quantum") {
        return Convention::quantum;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown convention '" + std::string(name) + "'");
}

HiddenVector sample_lambda(Xoshiro256& rng)
{
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * kPi * uniform01(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - u * u));
    Vec3 v{r * std::cos(phi), r * std::sin(phi), u};
    // One Newton step on the norm keeps |lambda| = 1 to the last ulp.
    v = ((3.0 - dot(v, v)) / 2.0) * v;
    return {v};
}

double quantum_correlation(const DetectorSetting& a, const DetectorSetting& b)
{
    return -dot(a.direction(), b.direction());
}

CorrelationEstimate bell_sign_correlation(const DetectorSetting& a, const DetectorSetting& b, std::int64_t n,
                                          const SamplingPlan& plan)
{
    const Vec3 da = a.direction();
    const Vec3 db = b.direction();
    const Moments m = sample_chunks(n, plan, [&](Xoshiro256& rng, std::int64_t count) {
        Moments part;
        while (part.count < count) {
            const Vec3 l = sample_lambda(rng).lambda;
            const double pa = dot(da, l);
            const double pb = dot(db, l);
            if (pa == 0.0 || pb == 0.0) {
                continue;
            }
            part.add(sign(pa) * -sign(pb));
        }
        return part;
    });
    return finish(m, Model::bell_sign, 1.0);
}

double overlap_integral(double theta)
{
    check_theta(theta);
    const auto [a, b] = pair_at(theta);
    const auto q = integrate_sphere([&](Vec3 l) { return std::abs(dot(a, l)) * std::abs(dot(b, l)); },
                                    SphereFrame::for_pair(a, b), 1e-10, 16, kinks_at(theta));
    return checked(q, "overlap integral").value;
}

ModelConstants solve_c2(double theta)
{
    check_theta(theta);
    ModelConstants k;
    k.theta = theta;
    k.overlap = overlap_integral(theta);
    const double c1 = k.c1;
    // 16 pi c2^2 + 8 pi c1 c2 - q = 0 with q = 1 - c1^2 I.
    const double q = 1.0 - c1 * c1 * k.overlap;
    const double linear = 8.0 * kPi * c1;
    const double disc = linear * linear + 64.0 * kPi * q;
    if (disc < -1e-10) {
        throw Error(ErrorCode::NoRealRoot, "c2 quadratic has no real root at theta=" + std::to_string(theta));
    }
    double c2 = 2.0 * q / (linear + std::sqrt(std::max(disc, 0.0)));
    if (std::abs(c2) <= 1e-10) {
        c2 = 0.0;
    }
    if (c2 < 0.0) {
        throw Error(ErrorCode::NoRealRoot,
                    "c2 root is negative (" + std::to_string(c2) + ") at theta=" + std::to_string(theta));
    }
    k.c2 = c2;

    const auto [a, b] = pair_at(theta);
    const auto norm_q = integrate_sphere(
        [&](Vec3 l) {
            const double pa = std::abs(dot(a, l));
            const double pb = std::abs(dot(b, l));
            return 4.0 * c2 * c2 + 4.0 * c1 * c2 * pa + c1 * c1 * pa * pb;
        },
        SphereFrame::for_pair(a, b), 1e-10, 16, kinks_at(theta));
    k.residual = checked(norm_q, "normalization integral").value - 1.0;
    return k;
}

std::vector<ModelConstants> solve_c2_grid(const std::vector<double>& thetas, Exec exec)
{
    std::vector<ModelConstants> out(thetas.size());
    for_each_index(exec, thetas.size(), [&](std::size_t i) { out[i] = solve_c2(thetas[i]); });
    return out;
}

CorrelationEstimate image_correlation_analytic(const DetectorSetting& a, const DetectorSetting& b,
                                               IntegrationMethod method, std::int64_t n, const SamplingPlan& plan,
                                               Convention convention)
{
    const Vec3 da = a.direction();
    const Vec3 db = b.direction();
    const double c1sq = kC1 * kC1;
    const double sgn = convention_sign(convention);
    if (method == IntegrationMethod::quadrature) {
        const auto q = integrate_sphere([&](Vec3 l) { return dot(da, l) * dot(db, l); },
                                        SphereFrame::for_pair(da, db), 1e-12);
        CorrelationEstimate est;
        est.value = sgn * c1sq * checked(q, "image correlation").value;
        est.model = Model::image_analytic;
        return est;
    }
    const Moments m = sample_chunks(n, plan, [&](Xoshiro256& rng, std::int64_t count) {
        Moments part;
        for (std::int64_t i = 0; i < count; ++i) {
            const Vec3 l = sample_lambda(rng).lambda;
            part.add(4.0 * kPi * c1sq * dot(da, l) * dot(db, l));
        }
        return part;
    });
    return finish(m, Model::image_analytic, sgn);
}

CorrelationEstimate image_correlation_event(const DetectorSetting& a, const DetectorSetting& b, std::int64_t n,
                                            const SamplingPlan& plan, Convention convention)
{
    const Vec3 da = a.direction();
    const Vec3 db = b.direction();
    const ModelConstants k = solve_c2(angle_between(da, db));
    const double c1 = k.c1;
    const double c2x2 = 2.0 * k.c2;
    const double envelope = (c2x2 + c1) * (c2x2 + c1);

    const Moments m = sample_chunks(n, plan, [&](Xoshiro256& rng, std::int64_t count) {
        Moments part;
        // Side outcome for projection p: mu = 0 reports sign(p), else a fair +-1.
        const auto outcome = [&](double p, bool& spectator) {
            const double w0 = c1 * std::abs(p);
            if (uniform01(rng) * (c2x2 + w0) < w0) {
                return sign(p);
            }
            spectator = true;
            return (rng() >> 63) != 0 ? 1.0 : -1.0;
        };
        while (part.count < count) {
            ++part.proposals;
            if (part.proposals > 1000 && part.count * 1000 < part.proposals) {
                throw Error(ErrorCode::RejectionStall, "lambda acceptance below 1e-3");
            }
            const Vec3 l = sample_lambda(rng).lambda;
            const double pa = dot(da, l);
            const double pb = dot(db, l);
            if (pa == 0.0 || pb == 0.0) {
                continue;
            }
            const double w = (c2x2 + c1 * std::abs(pa)) * (c2x2 + c1 * std::abs(pb));
            if (uniform01(rng) * envelope >= w) {
                continue;
            }
            bool spectator = false;
            const double ea = outcome(pa, spectator);
            const double eb = outcome(pb, spectator);
            const double product = ea * eb;
            part.add(product);
            if (spectator) {
                part.spectator_sum += product;
                ++part.spectator_count;
            }
        }
        return part;
    });

    const double sgn = convention_sign(convention);
    CorrelationEstimate est = finish(m, Model::image_event, sgn);
    est.acceptance_rate = static_cast<double>(m.count) / static_cast<double>(m.proposals);
    // Spectator contribution per event: X = E^A E^B on spectator events, 0 otherwise; X^2 is the indicator.
    const auto [smean, serr] =
        mean_and_stderr(m.spectator_sum, static_cast<double>(m.spectator_count), m.count);
    est.spectator_mean = sgn * smean;
    est.spectator_stderr = serr;
    return est;
}

CorrelationEstimate correlation(const CorrelationModel& model, const DetectorSetting& a, const DetectorSetting& b,
                                std::uint64_t task)
{
    const SamplingPlan plan{model.seed, task, SamplingPlan{}.chunk_size, model.exec};
    switch (model.model) {
    case Model::quantum: {
        CorrelationEstimate est;
        est.value = quantum_correlation(a, b);
        est.model = Model::quantum;
        return est;
    }
    case Model::bell_sign: return bell_sign_correlation(a, b, model.samples, plan);
    case Model::image_analytic:
        return image_correlation_analytic(a, b, IntegrationMethod::quadrature, 0, plan, model.convention);
    case Model::image_event: return image_correlation_event(a, b, model.samples, plan, model.convention);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown model");
}

ChshReport chsh(const CorrelationModel& model, const DetectorSetting& a, const DetectorSetting& a2,
                const DetectorSetting& b, const DetectorSetting& b2)
{
    ChshReport r;
    r.settings = {a.direction(), a2.direction(), b.direction(), b2.direction()};
    r.terms = {correlation(model, a, b, 0), correlation(model, a, b2, 1), correlation(model, a2, b, 2),
               correlation(model, a2, b2, 3)};
    r.S = r.terms[0].value - r.terms[1].value + r.terms[2].value + r.terms[3].value;
    double var = 0.0;
    for (const auto& t : r.terms) {
        var += t.stderr_ * t.stderr_;
    }
    r.combined_stderr = std::sqrt(var);
    r.violated = std::abs(r.S) > r.bound + 3.0 * r.combined_stderr;
    return r;
}

Bell64Report bell64(const CorrelationModel& model, const DetectorSetting& a, const DetectorSetting& b,
                    const DetectorSetting& b2)
{
    Bell64Report r;
    r.settings = {a.direction(), b.direction(), b2.direction()};
    r.terms = {correlation(model, a, b, 0), correlation(model, a, b2, 1), correlation(model, b, b2, 2)};
    const bool correlated = (model.model == Model::image_analytic || model.model == Model::image_event) &&
                            model.convention == Convention::paper;
    const double sigma = correlated ? -1.0 : 1.0;
    r.lhs = std::abs(r.terms[0].value - r.terms[1].value);
    r.rhs = 1.0 + sigma * r.terms[2].value;
    double var = 0.0;
    for (const auto& t : r.terms) {
        var += t.stderr_ * t.stderr_;
    }
    r.combined_stderr = std::sqrt(var);
    r.violated = r.lhs > r.rhs + 3.0 * r.combined_stderr;
    return r;
}

}  // namespace collapse
