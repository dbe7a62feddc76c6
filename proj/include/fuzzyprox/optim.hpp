#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "fuzzyprox/linalg.hpp"

namespace fuzzyprox {

/// Nelder-Mead maximization of f over R^2. Small and deterministic; intended
/// as a local polish step starting from a good coarse-grid point.
inline double nelder_mead_max_2d(const std::function<double(double, double)>& f,
                                 double x0, double y0, double step,
                                 int max_iter = 200, double ftol_rel = 1e-12) {
    struct Pt { double x, y, v; };
    auto eval = [&](double x, double y) { return Pt{x, y, f(x, y)}; };
    std::array<Pt, 3> s = {eval(x0, y0), eval(x0 + step, y0), eval(x0, y0 + step)};
    auto order = [&] { std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.v > b.v; }); };
    order();
    for (int it = 0; it < max_iter; ++it) {
        const double spread = std::abs(s[0].v - s[2].v);
        if (spread <= ftol_rel * (std::abs(s[0].v) + 1e-300)) break;
        const double cx = 0.5 * (s[0].x + s[1].x);
        const double cy = 0.5 * (s[0].y + s[1].y);
        Pt refl = eval(cx + (cx - s[2].x), cy + (cy - s[2].y));
        if (refl.v > s[0].v) {
            Pt exp_ = eval(cx + 2.0 * (cx - s[2].x), cy + 2.0 * (cy - s[2].y));
            s[2] = (exp_.v > refl.v) ? exp_ : refl;
        } else if (refl.v > s[1].v) {
            s[2] = refl;
        } else {
            Pt con = eval(cx + 0.5 * (s[2].x - cx), cy + 0.5 * (s[2].y - cy));
            if (con.v > s[2].v) {
                s[2] = con;
            } else {
                for (int i = 1; i < 3; ++i)
                    s[i] = eval(s[0].x + 0.5 * (s[i].x - s[0].x), s[0].y + 0.5 * (s[i].y - s[0].y));
            }
        }
        order();
    }
    return s[0].v;
}

/// Deterministic quasi-uniform unit directions (Fibonacci spiral plus axes).
/// Used as the coarse stage when maximizing over directions in su(2).
inline std::vector<Eigen::Vector3d> unit_direction_set(int count) {
    std::vector<Eigen::Vector3d> dirs;
    dirs.reserve(count + 6);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden * i;
        dirs.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
    dirs.emplace_back(1, 0, 0);
    dirs.emplace_back(0, 1, 0);
    dirs.emplace_back(0, 0, 1);
    dirs.emplace_back(-1, 0, 0);
    dirs.emplace_back(0, -1, 0);
    dirs.emplace_back(0, 0, -1);
    return dirs;
}

/// Seeded hill climb maximizing `value` over real coordinates, with proposal
/// steps drawn from `rng` and geometric step decay on stalls. Returns the best
/// coordinates found; deterministic for a fixed rng state.
inline RealVector hill_climb_max(const std::function<double(const RealVector&)>& value,
                                 RealVector x, Rng& rng,
                                 int iterations = 200, double step0 = 0.3,
                                 double step_min = 1e-6) {
    double best = value(x);
    double step = step0;
    int stall = 0;
    RealVector probe(x.size());
    for (int it = 0; it < iterations && step > step_min; ++it) {
        for (int k = 0; k < x.size(); ++k) probe(k) = x(k) + step * rng.gaussian();
        const double v = value(probe);
        if (v > best) {
            best = v;
            x = probe;
            stall = 0;
        } else if (++stall >= 12) {
            step *= 0.5;
            stall = 0;
        }
    }
    return x;
}

} // namespace fuzzyprox
