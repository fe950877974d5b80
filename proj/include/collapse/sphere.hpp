#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace collapse {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) noexcept { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) noexcept
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) noexcept { return std::sqrt(dot(a, a)); }

/// Angle between two unit vectors, robust near 0 and pi.
inline double angle_between(Vec3 a, Vec3 b) noexcept { return std::atan2(norm(cross(a, b)), dot(a, b)); }

/// Orthonormal frame: lambda = sin(t) (cos(phi) e1 + sin(phi) e2) + cos(t) pole.
struct SphereFrame {
    Vec3 e1{1, 0, 0};
    Vec3 e2{0, 1, 0};
    Vec3 pole{0, 0, 1};

    /// Pole along a x b and phi = 0 along a, so both directions lie on the
    /// equator; any perpendicular pole when a and b are (anti)parallel.
    static SphereFrame for_pair(Vec3 a, Vec3 b);
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

struct SphereQuadrature {
    double value = 0.0;
    double last_change = 0.0;
    int level = 0;
    int polar_nodes = 0;
    int phi_nodes = 0;
    bool converged = false;
};

/// Azimuthal rule on [0, 2 pi): periodic trapezoid with `level_nodes` points
/// when there are no breakpoints, else `level_nodes` Gauss-Legendre points on
/// every arc between consecutive breakpoints (taken mod 2 pi).
QuadratureRule azimuth_rule(int level_nodes, std::span<const double> breakpoints);

/// Product rule over the polar angle t in [0, pi] (Gauss-Legendre, weight
/// sin t) and the azimuth phi.
template <class F>
double sphere_product_rule(F&& f, const SphereFrame& frame, const QuadratureRule& polar_rule,
                           const QuadratureRule& phi_rule)
{
    const std::size_t m_count = phi_rule.nodes.size();
    std::vector<double> cos_phi(m_count);
    std::vector<double> sin_phi(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        cos_phi[m] = std::cos(phi_rule.nodes[m]);
        sin_phi[m] = std::sin(phi_rule.nodes[m]);
    }
    const double half_pi = 0.5 * std::numbers::pi;
    double total = 0.0;
    for (std::size_t k = 0; k < polar_rule.nodes.size(); ++k) {
        const double t = half_pi * (polar_rule.nodes[k] + 1.0);
        const double r = std::sin(t);
        const Vec3 axial = std::cos(t) * frame.pole;
        const Vec3 re1 = r * frame.e1;
        const Vec3 re2 = r * frame.e2;
        double ring = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            ring += phi_rule.weights[m] * f(cos_phi[m] * re1 + sin_phi[m] * re2 + axial);
        }
        total += polar_rule.weights[k] * r * ring;
    }
    return total * half_pi;
}

/*!
 * Integrates f over the unit sphere (measure dOmega, total 4 pi), refining
 * both directions each level until successive estimates differ by less than
 * `tol`; `converged` is false if max_level is reached first.
 *
 * f must be smooth in the polar angle of `frame`. Azimuths where f has a kink
 * go in `breakpoints`; without them the periodic trapezoid rule is used,
 * which is only reliable for smooth periodic integrands.
 */
template <class F>
SphereQuadrature integrate_sphere(F&& f, const SphereFrame& frame, double tol = 1e-8, int max_level = 16,
                                  std::span<const double> breakpoints = {})
{
    SphereQuadrature q;
    double previous = 0.0;
    for (int level = 0; level <= max_level; ++level) {
        const int polar_nodes = std::min(12 + 2 * level, 32);
        const int phi_nodes = breakpoints.empty() ? 16 << level : 8 * (level + 1);
        const double value =
            sphere_product_rule(f, frame, gauss_legendre(polar_nodes), azimuth_rule(phi_nodes, breakpoints));
        q = {value, std::abs(value - previous), level, polar_nodes, phi_nodes, false};
        if (level >= 2 && q.last_change < tol) {
            q.converged = true;
            return q;
        }
        previous = value;
    }
    return q;
}

}  // namespace collapse
