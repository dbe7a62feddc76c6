#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "fuzzyprox/errors.hpp"
#include "fuzzyprox/linalg.hpp"
#include "fuzzyprox/optim.hpp"

namespace fuzzyprox {

/// Point of the coset space G/H (the 2-sphere) in polar coordinates.
/// theta is clamped to [0, pi], phi wrapped to [0, 2*pi); at the poles phi is
/// canonicalized to 0 so that equal points compare equal.
struct CosetPoint {
    double theta = 0.0;
    double phi = 0.0;

    CosetPoint() = default;
    CosetPoint(double theta_, double phi_) {
        if (!std::isfinite(theta_) || !std::isfinite(phi_))
            throw invalid_parameter("CosetPoint: coordinates must be finite");
        theta = std::clamp(theta_, 0.0, M_PI);
        phi = std::fmod(phi_, 2.0 * M_PI);
        if (phi < 0.0) phi += 2.0 * M_PI;
        if (theta == 0.0 || theta == M_PI) phi = 0.0;
    }
};

/// Product quadrature on the sphere: Gauss-Legendre in cos(theta) times a
/// uniform phi circle. Weights sum to 1 (normalized invariant measure) and the
/// rule integrates every spherical harmonic of degree <= exact_degree exactly.
struct QuadratureGrid {
    std::vector<CosetPoint> nodes;
    RealVector weights;
    int exact_degree = 0;
    int n_theta = 0;
    int n_phi = 0;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_q.
inline void gauss_legendre(int q, RealVector& x, RealVector& w) {
    x.resize(q);
    w.resize(q);
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int l = 0; l < q; ++l) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * l + 1.0) * z * p1 - l * p2) / (l + 1.0);
            }
            pp = q * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x(i) = -z;
        x(q - 1 - i) = z;
        w(i) = 2.0 / ((1.0 - z * z) * pp * pp);
        w(q - 1 - i) = w(i);
    }
}

} // namespace detail

inline constexpr int max_grid_degree = 256;

inline QuadratureGrid sphere_grid(int exact_degree) {
    if (exact_degree < 0)
        throw invalid_parameter("sphere_grid: exact_degree must be nonnegative");
    if (exact_degree > max_grid_degree)
        throw unsupported_degree("sphere_grid: exact_degree beyond supported cap");
    QuadratureGrid g;
    g.exact_degree = exact_degree;
    g.n_theta = std::max(1, (exact_degree + 2) / 2);
    g.n_phi = std::max(1, exact_degree + 1);
    RealVector x, w;
    detail::gauss_legendre(g.n_theta, x, w);
    g.nodes.reserve(std::size_t(g.n_theta) * g.n_phi);
    g.weights.resize(g.n_theta * g.n_phi);
    int k = 0;
    for (int i = 0; i < g.n_theta; ++i) {
        const double theta = std::acos(std::clamp(x(i), -1.0, 1.0));
        const double wt = 0.5 * w(i) / g.n_phi;
        for (int j = 0; j < g.n_phi; ++j) {
            g.nodes.emplace_back(theta, 2.0 * M_PI * j / g.n_phi);
            g.weights(k++) = wt;
        }
    }
    return g;
}

inline GridPtr shared_sphere_grid(int exact_degree) {
    return std::make_shared<const QuadratureGrid>(sphere_grid(exact_degree));
}

/// Denser evaluation-only point set (no weights) used when taking sup norms:
/// `factor` times more nodes along each axis than the quadrature rule.
inline std::vector<CosetPoint> dense_eval_points(const QuadratureGrid& grid, int factor = 4) {
    const int nt = std::max(2, grid.n_theta * factor);
    const int np = std::max(4, grid.n_phi * factor);
    RealVector x, w;
    detail::gauss_legendre(nt, x, w);
    std::vector<CosetPoint> pts;
    pts.reserve(std::size_t(nt) * np);
    for (int i = 0; i < nt; ++i) {
        const double theta = std::acos(std::clamp(x(i), -1.0, 1.0));
        for (int j = 0; j < np; ++j)
            pts.emplace_back(theta, 2.0 * M_PI * j / np);
    }
    return pts;
}

// --- spherical harmonics ----------------------------------------------------
//
// N_lm are orthonormal for the *normalized* measure (total mass 1), so
// N_00 = 1, N_10 = sqrt(3) cos(theta), and N_{l,-m} = (-1)^m conj(N_lm)
// (Condon-Shortley phase).

namespace detail {

/// Fully normalized associated Legendre values f_lm(x) for 0 <= m <= l <= lmax,
/// where N_lm(theta, phi) = f_lm(cos theta) e^{i m phi}. Packed as f[l][m].
inline std::vector<std::vector<double>> normalized_legendre_table(int lmax, double x) {
    std::vector<std::vector<double>> f(lmax + 1);
    for (int l = 0; l <= lmax; ++l) f[l].assign(l + 1, 0.0);
    const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
    f[0][0] = 1.0;
    for (int m = 1; m <= lmax; ++m)
        f[m][m] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx * f[m - 1][m - 1];
    for (int m = 0; m < lmax; ++m)
        f[m + 1][m] = std::sqrt(2.0 * m + 3.0) * x * f[m][m];
    for (int m = 0; m <= lmax; ++m)
        for (int l = m + 2; l <= lmax; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
            const double b = std::sqrt(((2.0 * l + 1.0) / (2.0 * l - 3.0)) *
                                       ((double(l - 1) * (l - 1) - double(m) * m) /
                                        (double(l) * l - double(m) * m)));
            f[l][m] = a * x * f[l - 1][m] - b * f[l - 2][m];
        }
    return f;
}

} // namespace detail

/// Index of coefficient (l, m) in a packed harmonic coefficient vector.
inline int harmonic_index(int l, int m) { return l * l + l + m; }
inline int harmonic_count(int lmax) { return (lmax + 1) * (lmax + 1); }

/// Values of all N_lm, l <= lmax, at one point, packed by harmonic_index.
inline Vector harmonics_at(const CosetPoint& p, int lmax) {
    const auto f = detail::normalized_legendre_table(lmax, std::cos(p.theta));
    Vector out(harmonic_count(lmax));
    for (int m = 0; m <= lmax; ++m) {
        const Complex e = std::polar(1.0, m * p.phi);
        for (int l = m; l <= lmax; ++l) {
            const Complex v = f[l][m] * e;
            out(harmonic_index(l, m)) = v;
            if (m > 0) out(harmonic_index(l, -m)) = (m % 2 ? -1.0 : 1.0) * std::conj(v);
        }
    }
    return out;
}

/// Complex function known through its values at the nodes of a quadrature
/// grid, together with the harmonic degree it is claimed to be limited to.
struct FunctionSamples {
    GridPtr grid;
    Vector values;
    int degree = 0;

    FunctionSamples() = default;
    FunctionSamples(GridPtr g, Vector v, int deg)
        : grid(std::move(g)), values(std::move(v)), degree(deg) {
        if (!grid) throw invalid_parameter("FunctionSamples: null grid");
        if (values.size() != Eigen::Index(grid->nodes.size()))
            throw dimension_mismatch("FunctionSamples: sample count != node count");
        if (degree < 0) throw invalid_parameter("FunctionSamples: negative degree");
    }

    double real_max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

/// Sample a closed-form function on a grid.
template <class F>
FunctionSamples sample_function(const GridPtr& grid, F&& fn, int degree) {
    Vector v(grid->nodes.size());
    for (std::size_t k = 0; k < grid->nodes.size(); ++k) v(k) = fn(grid->nodes[k]);
    return FunctionSamples(grid, std::move(v), degree);
}

/// Quadrature of samples against the normalized invariant measure.
inline Complex integrate(const FunctionSamples& f) {
    Complex acc = 0.0;
    for (Eigen::Index k = 0; k < f.values.size(); ++k) acc += f.grid->weights(k) * f.values(k);
    return acc;
}

/// Harmonic coefficients c_lm = ∫ f conj(N_lm). Exact when the grid's
/// exact_degree is at least f.degree + lmax; the pipeline arranges its grids
/// so that this holds wherever coefficients are consumed.
inline Vector harmonic_analysis(const FunctionSamples& f, int lmax) {
    if (lmax > f.grid->exact_degree)
        throw unsupported_degree("harmonic_analysis: degree exceeds grid exactness");
    Vector c = Vector::Zero(harmonic_count(lmax));
    for (std::size_t k = 0; k < f.grid->nodes.size(); ++k) {
        const Vector h = harmonics_at(f.grid->nodes[k], lmax);
        c += (f.grid->weights(k) * f.values(k)) * h.conjugate();
    }
    return c;
}

/// Evaluate a coefficient vector at an arbitrary point.
inline Complex harmonic_synthesis(const Vector& coeff, int lmax, const CosetPoint& p) {
    return (coeff.array() * harmonics_at(p, lmax).array()).sum();
}

/// Riemannian gradient norm |grad f| at p for the band-limited function with
/// the given coefficients. Uses the ladder identity for d/dtheta of N_lm and
/// the exact i*m factor for d/dphi.
inline double harmonic_gradient_norm(const Vector& coeff, int lmax, const CosetPoint& p) {
    const double eps = 1e-9;
    const double theta = std::clamp(p.theta, eps, M_PI - eps);
    const CosetPoint q(theta, p.phi);
    const Vector h = harmonics_at(q, lmax);
    Complex f_theta = 0.0, f_phi = 0.0;
    for (int l = 0; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m) {
            const Complex c = coeff(harmonic_index(l, m));
            if (c == 0.0) continue;
            Complex dth = 0.0;
            if (m + 1 <= l)
                dth += 0.5 * std::sqrt(double(l - m) * (l + m + 1)) *
                       h(harmonic_index(l, m + 1)) * std::polar(1.0, -q.phi);
            if (m - 1 >= -l)
                dth -= 0.5 * std::sqrt(double(l + m) * (l - m + 1)) *
                       h(harmonic_index(l, m - 1)) * std::polar(1.0, q.phi);
            f_theta += c * dth;
            f_phi += c * Complex(0.0, double(m)) * h(harmonic_index(l, m));
        }
    const double g_phi = std::abs(f_phi) / std::sin(theta);
    return std::hypot(std::abs(f_theta), g_phi);
}

/// Max of |synthesized f| over a dense point set, polished locally.
inline double synthesized_sup_norm(const Vector& coeff, int lmax,
                                   const std::vector<CosetPoint>& pts) {
    double best = 0.0;
    CosetPoint arg;
    for (const auto& p : pts) {
        const double v = std::abs(harmonic_synthesis(coeff, lmax, p));
        if (v > best) {
            best = v;
            arg = p;
        }
    }
    const double polished = nelder_mead_max_2d(
        [&](double th, double ph) {
            return std::abs(harmonic_synthesis(coeff, lmax, CosetPoint(th, ph)));
        },
        arg.theta, arg.phi, 0.02);
    return std::max(best, polished);
}

} // namespace fuzzyprox
