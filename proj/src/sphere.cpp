#include "collapse/sphere.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <string>

namespace collapse {

SphereFrame SphereFrame::for_pair(Vec3 a, Vec3 b)
{
    SphereFrame frame;
    frame.e1 = (1.0 / norm(a)) * a;
    Vec3 pole = cross(frame.e1, b);
    if (norm(pole) < 1e-12) {
        // Any axis perpendicular to a: cross with the coordinate axis least aligned with it.
        const Vec3 axis = std::abs(frame.e1.x) < 0.6 ? Vec3{1, 0, 0}
                          : std::abs(frame.e1.y) < 0.6 ? Vec3{0, 1, 0}
                                                       : Vec3{0, 0, 1};
        pole = cross(frame.e1, axis);
    }
    frame.pole = (1.0 / norm(pole)) * pole;
    frame.e2 = cross(frame.pole, frame.e1);
    return frame;
}

QuadratureRule gauss_legendre(int n)
{
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre needs n >= 1, got " + std::to_string(n));
    }
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = n == 1 ? x : p1;
            const double pn_1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pn_1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

QuadratureRule azimuth_rule(int level_nodes, std::span<const double> breakpoints)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    QuadratureRule rule;
    if (breakpoints.empty()) {
        const double h = two_pi / level_nodes;
        for (int m = 0; m < level_nodes; ++m) {
            rule.nodes.push_back(h * m);
            rule.weights.push_back(h);
        }
        return rule;
    }
    std::vector<double> cuts;
    for (double b : breakpoints) {
        cuts.push_back(b - two_pi * std::floor(b / two_pi));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(cuts.front() + two_pi);
    const QuadratureRule base = gauss_legendre(level_nodes);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k];
        const double half = 0.5 * (cuts[k + 1] - lo);
        if (half <= 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < base.nodes.size(); ++i) {
            rule.nodes.push_back(lo + half * (base.nodes[i] + 1.0));
            rule.weights.push_back(half * base.weights[i]);
        }
    }
    return rule;
}

}  // namespace collapse
