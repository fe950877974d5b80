#include "collapse/analytic.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace collapse {

void DiffusionParams::validate() const
{
    if (!(D > 0.0) || !std::isfinite(D)) {
        throw Error(ErrorCode::InvalidArgument, "diffusion constant must be positive");
    }
    if (!(x0 > 0.0 && x0 < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "x0 must lie in (0, 1), got " + std::to_string(x0));
    }
}

namespace {

constexpr double kAsymptoticSwitch = 30.0;

// sinh(k*lo) sinh(k*(1-hi)) / (sqrt(sD) sinh(k)) for lo <= hi; lo and hi may
// stray slightly outside [0, 1] (finite-difference stencils at the walls).
double green_branch(double lo, double hi, double s, double D)
{
    const double k = std::sqrt(s / D);
    const double scale = std::sqrt(s * D);
    const double p = k * lo;
    const double q = k * (1.0 - hi);
    if (std::min(p, q) <= kAsymptoticSwitch) {
        return std::sinh(p) * std::sinh(q) / (scale * std::sinh(k));
    }
    // sinh(p) sinh(q) / sinh(k) = e^{p+q-k} (1-e^{-2p})(1-e^{-2q}) / (2 (1-e^{-2k})), p + q - k = k (lo - hi).
    const double ratio = -std::expm1(-2.0 * p) * -std::expm1(-2.0 * q) / (-std::expm1(-2.0 * k));
    return 0.5 * std::exp(k * (lo - hi)) * ratio / scale;
}

}  // namespace

double greens_tilde(double x, double s, const DiffusionParams& params)
{
    params.validate();
    if (!(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "x must lie in [0, 1], got " + std::to_string(x));
    }
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw Error(ErrorCode::InvalidArgument, "Laplace variable s must be positive");
    }
    if (x == 0.0 || x == 1.0) {
        return 0.0;
    }
    return green_branch(std::min(x, params.x0), std::max(x, params.x0), s, params.D);
}

AbsorptionProbs absorption_flux(double x0, double s, double h)
{
    constexpr double D = 1.0;  // cancels in D * dc/dx
    // Near x = 0 the observer sits below the source (x< = x); near x = 1 above it (x> = x).
    const double left = (green_branch(h, x0, s, D) - green_branch(-h, x0, s, D)) / (2.0 * h);
    const double right = (green_branch(x0, 1.0 + h, s, D) - green_branch(x0, 1.0 - h, s, D)) / (2.0 * h);
    return {D * left, -D * right};
}

AbsorptionProbs absorption_probs(double x0)
{
    if (!(x0 >= 0.0 && x0 <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "x0 must lie in [0, 1], got " + std::to_string(x0));
    }
    const AbsorptionProbs closed{1.0 - x0, x0};
    const AbsorptionProbs numeric = absorption_flux(x0);
    if (std::abs(numeric.at_0 - closed.at_0) > 1e-4 || std::abs(numeric.at_1 - closed.at_1) > 1e-4) {
        throw Error(ErrorCode::OracleMismatch, "wall flux (" + std::to_string(numeric.at_0) + ", " +
                                                   std::to_string(numeric.at_1) + ") disagrees with closed form at x0=" +
                                                   std::to_string(x0));
    }
    return closed;
}

double mean_exit_time(const DiffusionParams& params)
{
    params.validate();
    return params.x0 * (1.0 - params.x0) / (2.0 * params.D);
}

}  // namespace collapse
