#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace collapse {

using Complex = std::complex<double>;

/// Normalized amplitude vector a_i of an N-state system (N >= 2).
class QuantumState {
  public:
    const std::vector<Complex>& amplitudes() const noexcept { return amplitudes_; }
    std::size_t size() const noexcept { return amplitudes_.size(); }

    friend QuantumState normalize(std::span<const Complex> raw);

  private:
    explicit QuantumState(std::vector<Complex> amplitudes) : amplitudes_(std::move(amplitudes)) {}

    std::vector<Complex> amplitudes_;
};

/// Divides by the Euclidean norm. Throws TooFewStates for N < 2 and AllZero
/// when the norm vanishes.
QuantumState normalize(std::span<const Complex> raw);

/*!
 * Coupled system-detector state.
 *
 * The diagonal coefficients |a_i|^2 form a point on the probability simplex;
 * that point is what the walk moves. The off-diagonal spectators
 * kappa_ij = a_i conj(a_j) ride along with it and are zeroed for good once
 * either of their states is eliminated.
 */
struct JointState {
    std::vector<double> weights;
    std::vector<Complex> cross;  // row-major N x N, diagonal unused
    std::vector<bool> alive;

    std::size_t size() const noexcept { return weights.size(); }
    Complex& kappa(std::size_t i, std::size_t j) { return cross[i * size() + j]; }
    const Complex& kappa(std::size_t i, std::size_t j) const { return cross[i * size() + j]; }
};

JointState form_joint(const QuantumState& state);

/// Parses semicolon-separated "re,im" pairs, e.g. "0.6,0;0,0.8". An entry
/// without a comma is read as a real amplitude.
std::vector<Complex> parse_amplitudes(std::string_view text);

}  // namespace collapse
