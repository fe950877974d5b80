#pragma once

namespace collapse {

/// Two-state diffusion on [0, 1] with absorbing walls, started at x0.
struct DiffusionParams {
    double D = 1.0;
    double x0 = 0.5;

    void validate() const;  // D > 0, 0 < x0 < 1
};

/// Laplace-domain Green's function
///   sinh(k x<) sinh(k (1 - x>)) / (sqrt(s D) sinh(k)),  k = sqrt(s / D),
/// with x< = min(x, x0), x> = max(x, x0). Zero at both walls.
double greens_tilde(double x, double s, const DiffusionParams& params);

struct AbsorptionProbs {
    double at_0;  // reaches x = 0
    double at_1;  // reaches x = 1
};

/*!
 * Splitting probabilities of the two-state walk started at x0.
 *
 * Before returning the closed form (1 - x0, x0), the wall fluxes
 * D dc/dx|_{x=0} and -D dc/dx|_{x=1} are evaluated numerically at s = 1e-8
 * with central differences (h = 1e-6) and must agree within 1e-4; otherwise
 * OracleMismatch is thrown.
 */
AbsorptionProbs absorption_probs(double x0);

/// Numeric wall fluxes (the self-test path of absorption_probs).
AbsorptionProbs absorption_flux(double x0, double s = 1e-8, double h = 1e-6);

/// Mean time to absorption, x0 (1 - x0) / (2 D).
double mean_exit_time(const DiffusionParams& params);

}  // namespace collapse
