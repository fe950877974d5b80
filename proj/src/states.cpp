#include "collapse/states.hpp"

#include "collapse/error.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace collapse {

QuantumState normalize(std::span<const Complex> raw)
{
    if (raw.size() < 2) {
        throw Error(ErrorCode::TooFewStates,
                    "need at least 2 amplitudes, got " + std::to_string(raw.size()));
    }
    // Scale first so tiny or huge amplitudes do not under/overflow the norm.
    double scale = 0.0;
    for (const auto& a : raw) {
        scale = std::max({scale, std::abs(a.real()), std::abs(a.imag())});
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw Error(ErrorCode::AllZero, "amplitude vector has zero norm");
    }
    double sum = 0.0;
    for (const auto& a : raw) {
        sum += std::norm(a / scale);
    }
    const double norm = scale * std::sqrt(sum);
    if (norm < 1e-300) {
        throw Error(ErrorCode::AllZero, "amplitude vector has zero norm");
    }
    std::vector<Complex> out(raw.begin(), raw.end());
    for (auto& a : out) {
        a /= norm;
    }
    return QuantumState(std::move(out));
}

JointState form_joint(const QuantumState& state)
{
    const auto& amps = state.amplitudes();
    const std::size_t n = amps.size();
    JointState joint;
    joint.weights.resize(n);
    joint.cross.assign(n * n, Complex{});
    joint.alive.assign(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        joint.weights[i] = std::norm(amps[i]);
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                joint.kappa(i, j) = amps[i] * std::conj(amps[j]);
            }
        }
    }
    return joint;
}

namespace {

double parse_number(std::string_view token, std::string_view whole)
{
    while (!token.empty() && token.front() == ' ') {
        token.remove_prefix(1);
    }
    while (!token.empty() && token.back() == ' ') {
        token.remove_suffix(1);
    }
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double value = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw Error(ErrorCode::InvalidArgument,
                    "bad number '" + std::string(token) + "' in amplitudes '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

std::vector<Complex> parse_amplitudes(std::string_view text)
{
    std::vector<Complex> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t stop = std::min(text.find(';', start), text.size());
        const auto entry = text.substr(start, stop - start);
        if (const auto comma = entry.find(','); comma == std::string_view::npos) {
            out.emplace_back(parse_number(entry, text), 0.0);
        } else {
            out.emplace_back(parse_number(entry.substr(0, comma), text),
                             parse_number(entry.substr(comma + 1), text));
        }
        start = stop + 1;
    }
    return out;
}

}  // namespace collapse
