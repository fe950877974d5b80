#pragma once

#include "collapse/parallel.hpp"
#include "collapse/rng.hpp"
#include "collapse/sphere.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace collapse {

/// Unit measurement direction of a detector.
class DetectorSetting {
  public:
    /// Throws InvalidArgument unless |direction| = 1 within 1e-12.
    explicit DetectorSetting(Vec3 direction);

    /// Coplanar setting in the x-z plane, `degrees` from the z axis.
    static DetectorSetting from_degrees(double degrees);

    const Vec3& direction() const noexcept { return direction_; }

  private:
    Vec3 direction_;
};

/// Source hidden variable: a unit vector shared by both particles.
struct HiddenVector {
    Vec3 lambda;
};

/// Local detector variable. Zero defers to sign(setting . lambda).
enum class MuBranch : int { minus = -1, zero = 0, plus = 1 };

/// c1 = sqrt(3 / (4 pi)).
inline const double kC1 = std::sqrt(3.0 / (4.0 * std::numbers::pi));

struct ModelConstants {
    double c1 = kC1;
    double c2 = 0.0;
    double theta = 0.0;
    double overlap = 0.0;   // integral of |a.l||b.l| dOmega
    double residual = 0.0;  // normalization integral minus 1, by direct quadrature
};

enum class Model { quantum, bell_sign, image_analytic, image_event };

/// Sign convention for the image model: `paper` keeps +cos(theta) as derived,
/// `quantum` flips it to match -cos(theta).
enum class Convention { paper, quantum };

enum class IntegrationMethod { quadrature, monte_carlo };

std::string_view to_string(Model model) noexcept;
Model parse_model(std::string_view name);
std::string_view to_string(Convention convention) noexcept;
Convention parse_convention(std::string_view name);

struct CorrelationEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t n = 0;
    Model model = Model::quantum;
    // Event model only: accepted / proposed lambda draws, and the mean of
    // E^A E^B restricted to events with a nonzero mu (should vanish).
    double acceptance_rate = std::nan("");
    double spectator_mean = std::nan("");
    double spectator_stderr = std::nan("");
};

/// Where the random numbers for an estimate come from. Sample i of an
/// estimate lives in chunk i / chunk_size, which draws from stream
/// (task, chunk) of `seed`; the answer depends on nothing else.
struct SamplingPlan {
    std::uint64_t seed = 0;
    std::uint64_t task = 0;
    std::int64_t chunk_size = 1 << 16;
    Exec exec = Exec::parallel;
};

/// Uniform on the sphere: cos(theta) uniform on [-1, 1], phi uniform on [0, 2 pi).
HiddenVector sample_lambda(Xoshiro256& rng);

/// -a.b
double quantum_correlation(const DetectorSetting& a, const DetectorSetting& b);

/// Deterministic sign model: E^A = sign(a.l), E^B = -sign(b.l).
CorrelationEstimate bell_sign_correlation(const DetectorSetting& a, const DetectorSetting& b, std::int64_t n,
                                          const SamplingPlan& plan = {});

/// Integral over the sphere of |a.l||b.l| for settings `theta` apart.
double overlap_integral(double theta);

/// c2 for settings `theta` apart: the largest root of
/// 16 pi c2^2 + 8 pi c1 c2 + c1^2 I(theta) - 1 = 0.
ModelConstants solve_c2(double theta);

/// solve_c2 over many angles.
std::vector<ModelConstants> solve_c2_grid(const std::vector<double>& thetas, Exec exec = Exec::parallel);

/// c1^2 times the integral of (a.l)(b.l): deterministic quadrature (stderr 0) or
/// Monte Carlo over n uniform lambda.
CorrelationEstimate image_correlation_analytic(const DetectorSetting& a, const DetectorSetting& b,
                                               IntegrationMethod method, std::int64_t n = 0,
                                               const SamplingPlan& plan = {},
                                               Convention convention = Convention::paper);

/*!
 * Event-level simulation of the detector-image model.
 *
 * lambda is rejection-sampled with weight (2 c2 + c1|a.l|)(2 c2 + c1|b.l|)
 * under the envelope (2 c2 + c1)^2; then each side independently takes
 * mu = 0 with probability c1|s.l| / (2 c2 + c1|s.l|), otherwise +1 or -1
 * with equal odds. mu = 0 reports sign(s.l), mu = +-1 reports mu.
 */
CorrelationEstimate image_correlation_event(const DetectorSetting& a, const DetectorSetting& b, std::int64_t n,
                                            const SamplingPlan& plan = {},
                                            Convention convention = Convention::paper);

/// A correlation model plus its sampling budget.
struct CorrelationModel {
    Model model = Model::quantum;
    std::int64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    Convention convention = Convention::paper;
    Exec exec = Exec::parallel;
};

/// C(a, b) under `model`; `task` picks the random stream family.
CorrelationEstimate correlation(const CorrelationModel& model, const DetectorSetting& a,
                                const DetectorSetting& b, std::uint64_t task = 0);

struct ChshReport {
    double S = 0.0;
    double bound = 2.0;
    double combined_stderr = 0.0;
    bool violated = false;
    std::array<CorrelationEstimate, 4> terms;  // (a,b), (a,b'), (a',b), (a',b')
    std::array<Vec3, 4> settings;              // a, a', b, b'
};

/// S = C(a,b) - C(a,b') + C(a',b) + C(a',b'); violated when |S| > 2 + 3 sigma.
ChshReport chsh(const CorrelationModel& model, const DetectorSetting& a, const DetectorSetting& a2,
                const DetectorSetting& b, const DetectorSetting& b2);

struct Bell64Report {
    double lhs = 0.0;  // |C(a,b) - C(a,b')|
    double rhs = 0.0;  // 1 + sigma C(b,b')
    double combined_stderr = 0.0;
    bool violated = false;
    std::array<CorrelationEstimate, 3> terms;  // (a,b), (a,b'), (b,b')
    std::array<Vec3, 3> settings;              // a, b, b'
};

/// 1 + sigma C(b,b') >= |C(a,b) - C(a,b')|, sigma = +1 for anticorrelated
/// models; the image model under the paper convention uses sigma = -1.
Bell64Report bell64(const CorrelationModel& model, const DetectorSetting& a, const DetectorSetting& b,
                    const DetectorSetting& b2);

}  // namespace collapse
