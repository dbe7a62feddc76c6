#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "fuzzyprox/errors.hpp"
#include "fuzzyprox/linalg.hpp"
#include "fuzzyprox/optim.hpp"
#include "fuzzyprox/sphere.hpp"
#include "fuzzyprox/su2.hpp"

namespace fuzzyprox {

// --- Lipschitz seminorms ----------------------------------------------------

namespace detail {

inline double commutator_norm(const Matrix& j_u, const Matrix& t, bool t_hermitian) {
    const Matrix c = j_u * t - t * j_u;
    if (t_hermitian) return hermitian_norm(Complex(0, 1) * c);
    return operator_norm(c);
}

inline Eigen::Vector3d sphere_dir(double th, double ph) {
    return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

} // namespace detail

/// Matrix Lipschitz seminorm: sup over unit directions u in su(2) of the
/// operator norm of [dU(X_u), T], with generators normalized so that the
/// n = 1 representation has dU(X_k) = i sigma_k / 2. The sup over the
/// direction sphere is taken by a coarse quasi-uniform scan (66 directions)
/// followed by local simplex polish; commutator norms are convex in u, so the
/// maximum sits at an extreme direction and the polish converges fast.
inline double matrix_lipschitz(const Irrep& rep, const Matrix& t, double rel_tol = 1e-6) {
    require_square(t, "matrix_lipschitz");
    if (t.rows() != rep.dim)
        throw dimension_mismatch("matrix_lipschitz: operator does not match representation");
    const bool herm = is_hermitian(t, 1e-12);
    const Matrix jx = j_x(rep), jy = j_y(rep), jz = rep.j_z;
    auto value = [&](const Eigen::Vector3d& u) {
        return detail::commutator_norm(u.x() * jx + u.y() * jy + u.z() * jz, t, herm);
    };
    static const std::vector<Eigen::Vector3d> dirs = unit_direction_set(66);
    double best = 0.0;
    Eigen::Vector3d arg = dirs.front();
    for (const auto& u : dirs) {
        const double v = value(u);
        if (v > best) {
            best = v;
            arg = u;
        }
    }
    if (best <= 0.0) return 0.0;
    const double th0 = std::acos(std::clamp(arg.z(), -1.0, 1.0));
    const double ph0 = std::atan2(arg.y(), arg.x());
    const double polished = nelder_mead_max_2d(
        [&](double th, double ph) { return value(detail::sphere_dir(th, ph)); },
        th0, ph0, 0.15, 300, 0.01 * rel_tol);
    return std::max(best, polished);
}

/// Function Lipschitz seminorm: sup of |grad f| for the degree-limited
/// harmonic expansion of f, taken over a dense grid with local polish.
inline double function_lipschitz(const FunctionSamples& f, const QuadratureGrid& grid,
                                 double rel_tol = 1e-4) {
    if (f.values.size() != Eigen::Index(grid.nodes.size()))
        throw dimension_mismatch("function_lipschitz: samples do not match grid");
    if (f.degree > grid.exact_degree)
        throw unsupported_degree("function_lipschitz: degree exceeds grid exactness");
    const int lmax = f.degree;
    const Vector coeff = harmonic_analysis(f, lmax);
    const int nt = std::max(32, 6 * (lmax + 1));
    const int np = std::max(32, 6 * (lmax + 1));
    double best = 0.0;
    CosetPoint arg(M_PI / 2, 0.0);
    for (int i = 0; i < nt; ++i) {
        const double th = M_PI * (i + 0.5) / nt;
        for (int j = 0; j < np; ++j) {
            const CosetPoint p(th, 2.0 * M_PI * j / np);
            const double v = harmonic_gradient_norm(coeff, lmax, p);
            if (v > best) {
                best = v;
                arg = p;
            }
        }
    }
    if (best <= 0.0) return 0.0;
    const double polished = nelder_mead_max_2d(
        [&](double th, double ph) {
            return harmonic_gradient_norm(coeff, lmax, CosetPoint(std::clamp(th, 0.0, M_PI), ph));
        },
        arg.theta, arg.phi, 0.02, 300, 0.01 * rel_tol);
    return std::max(best, polished);
}

// --- states -----------------------------------------------------------------

/// State of one summand: either a density matrix on B^n or a probability
/// weight vector over grid nodes (a discrete measure on the sphere).
struct State {
    enum class Kind { density, node_weights };
    Kind kind = Kind::density;
    Matrix density;
    RealVector weights;

    int dim() const { return kind == Kind::density ? int(density.rows()) : 0; }
};

inline State density_state(Matrix rho, double tol = 1e-12) {
    require_square(rho, "density_state");
    require_hermitian(rho, "density_state", 1e-10);
    rho = 0.5 * (rho + rho.adjoint().eval());
    if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
        throw non_state("density_state: trace must be 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -std::max(tol, 1e-12))
        throw non_state("density_state: negative eigenvalue");
    State s;
    s.kind = State::Kind::density;
    s.density = std::move(rho);
    return s;
}

inline State trace_state(int dim) {
    return density_state(Matrix::Identity(dim, dim) / double(dim));
}

inline State pure_state(const Vector& v) {
    const double n = v.norm();
    if (n <= 0.0) throw non_state("pure_state: zero vector");
    return density_state(v * v.adjoint() / (n * n));
}

inline State node_state(RealVector w) {
    if (w.size() == 0 || w.minCoeff() < -1e-12)
        throw non_state("node_state: weights must be nonnegative");
    const double total = w.sum();
    if (std::abs(total - 1.0) > 1e-10) throw non_state("node_state: weights must sum to 1");
    State s;
    s.kind = State::Kind::node_weights;
    s.weights = std::move(w);
    return s;
}

/// Seeded random density matrix rho = G G^* / tr(G G^*) with G a complex
/// Gaussian matrix; deterministic for a fixed seed.
inline State random_state(int dim, std::uint64_t seed) {
    if (dim < 1) throw invalid_parameter("random_state: dim must be positive");
    Rng rng(derive_seed(seed, 0x7374617465ULL));
    const Matrix g = random_complex_matrix(dim, dim, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return density_state(std::move(rho));
}

inline Complex expectation(const State& s, const Matrix& a) {
    if (s.kind != State::Kind::density)
        throw invalid_parameter("expectation: node-weight state applied to an operator");
    if (a.rows() != s.density.rows())
        throw dimension_mismatch("expectation: dimension mismatch");
    return (s.density * a).trace();
}

inline Complex expectation(const State& s, const FunctionSamples& f) {
    if (s.kind != State::Kind::node_weights)
        throw invalid_parameter("expectation: density state applied to samples");
    if (f.values.size() != s.weights.size())
        throw dimension_mismatch("expectation: sample count mismatch");
    Complex acc = 0.0;
    for (Eigen::Index k = 0; k < f.values.size(); ++k) acc += s.weights(k) * f.values(k);
    return acc;
}

// --- direct-sum seminorm ----------------------------------------------------

/// Seminorm L(a, b) = max{ L_left(a), L_right(b), gamma^{-1} max(N(a,b),
/// N(a*,b*)) } on a direct sum whose left summand holds elements of type
/// LeftElem (operators for matrix-matrix bridges, sampled functions for the
/// commutative side). With gamma = infinity the bridge term is dropped.
template <class LeftElem>
struct DirectSumSeminorm {
    double gamma = std::numeric_limits<double>::infinity();
    int dim_left = 0;   ///< matrix dimension of the left summand (0 if commutative)
    int dim_right = 0;

    std::function<double(const LeftElem&)> lip_left;
    std::function<double(const Matrix&)> lip_right;
    std::function<double(const LeftElem&, const Matrix&)> bridge;
    std::function<double(const LeftElem&, const Matrix&)> bridge_star;

    // Optional cheaper Lipschitz evaluators for inner optimization loops;
    // the exact ones above are always used for final normalization.
    std::function<double(const LeftElem&)> lip_left_fast;
    std::function<double(const Matrix&)> lip_right_fast;

    // Node-resolved machinery consumed by the cutting-plane state metric:
    // the bridge defect at a single sphere point and a working universe of
    // candidate points (dense refinement of the quadrature grid).
    std::function<double(const LeftElem&, const Matrix&, const CosetPoint&)> node_defect;
    std::vector<CosetPoint> node_universe;

    double operator()(const LeftElem& a, const Matrix& b) const {
        double v = std::max(lip_left(a), lip_right(b));
        if (std::isfinite(gamma) && gamma > 0)
            v = std::max(v, std::max(bridge(a, b), bridge_star(a, b)) / gamma);
        return v;
    }
};

using OperatorPairSeminorm = DirectSumSeminorm<Matrix>;
using FunctionPairSeminorm = DirectSumSeminorm<FunctionSamples>;

/// Assemble a DirectSumSeminorm from its four constituent functionals.
template <class LeftElem>
DirectSumSeminorm<LeftElem> combined_seminorm(
    double gamma,
    std::function<double(const LeftElem&)> lip_left,
    std::function<double(const Matrix&)> lip_right,
    std::function<double(const LeftElem&, const Matrix&)> bridge,
    std::function<double(const LeftElem&, const Matrix&)> bridge_star) {
    if (!(gamma > 0))
        throw invalid_parameter("combined_seminorm: gamma must be positive (may be inf)");
    DirectSumSeminorm<LeftElem> l;
    l.gamma = gamma;
    l.lip_left = std::move(lip_left);
    l.lip_right = std::move(lip_right);
    l.bridge = std::move(bridge);
    l.bridge_star = std::move(bridge_star);
    return l;
}

// --- state metric -----------------------------------------------------------

enum class Summand { left, right };

struct StateMetricOptions {
    Summand mu_side = Summand::left;
    Summand nu_side = Summand::right;
    std::uint64_t seed = 1u;
    double radius_cap = 10.0 * M_PI;   ///< operator-norm cap, ~10x the diameter scale
    int max_rounds = 12;
    int ascent_iterations = 260;
    double improve_tol = 1e-4;
};

struct StateMetricResult {
    double value = 0.0;
    Matrix left;    ///< certificate element of the left summand
    Matrix right;   ///< certificate element of the right summand
    bool converged = true;
    bool radius_capped = false;
};

namespace detail {

struct PairCoords {
    int dl, dr;
    int dof() const { return hermitian_dof(dl) + hermitian_dof(dr); }
    Matrix left(const RealVector& z) const {
        return real_to_hermitian(z.head(hermitian_dof(dl)), dl);
    }
    Matrix right(const RealVector& z) const {
        return real_to_hermitian(z.tail(hermitian_dof(dr)), dr);
    }
    RealVector pack(const Matrix& a, const Matrix& b) const {
        RealVector z(dof());
        z.head(hermitian_dof(dl)) = hermitian_to_real(a);
        z.tail(hermitian_dof(dr)) = hermitian_to_real(b);
        return z;
    }
};

} // namespace detail

/// Lower estimate of sup{ |mu(a) - nu(b)| : L(a, b) <= 1 } over Hermitian
/// pairs, by normalized subgradient ascent on the working constraint set with
/// the most-violated bridge node added between rounds (cutting planes). The
/// returned pair is rescaled by its full-precision seminorm, so the value is
/// always a certified lower bound of the true supremum.
inline StateMetricResult state_metric(const OperatorPairSeminorm& L, const State& mu,
                                      const State& nu, const QuadratureGrid& grid,
                                      const StateMetricOptions& opt = {}) {
    if (mu.kind != State::Kind::density || nu.kind != State::Kind::density)
        throw invalid_parameter("state_metric: operator-pair seminorm needs density states");
    const detail::PairCoords co{L.dim_left, L.dim_right};
    if (co.dl < 1 || co.dr < 1)
        throw invalid_parameter("state_metric: seminorm is missing summand dimensions");
    auto side_dim = [&](Summand s) { return s == Summand::left ? co.dl : co.dr; };
    if (mu.dim() != side_dim(opt.mu_side) || nu.dim() != side_dim(opt.nu_side))
        throw dimension_mismatch("state_metric: state dimensions do not match seminorm");

    // Objective functional mu(a or b) - nu(a or b) in real coordinates.
    RealVector c = RealVector::Zero(co.dof());
    auto add_state = [&](const State& s, Summand side, double sign) {
        const RealVector e = hermitian_to_real(s.density);
        if (side == Summand::left)
            c.head(e.size()) += sign * e;
        else
            c.tail(e.size()) += sign * e;
    };
    add_state(mu, opt.mu_side, +1.0);
    add_state(nu, opt.nu_side, -1.0);

    StateMetricResult out;
    out.left = Matrix::Zero(co.dl, co.dl);
    out.right = Matrix::Zero(co.dr, co.dr);
    if (c.norm() <= 1e-14) return out;  // identical functionals: distance 0

    const std::vector<CosetPoint>* universe = &L.node_universe;
    std::vector<CosetPoint> fallback;
    if (universe->empty()) {
        fallback = dense_eval_points(grid, 2);
        universe = &fallback;
    }

    const bool has_bridge = std::isfinite(L.gamma) && L.node_defect != nullptr;
    if (!L.lip_left || !L.lip_right)
        throw invalid_parameter("state_metric: seminorm is missing Lipschitz evaluators");
    const auto& lip_l = L.lip_left_fast ? L.lip_left_fast : L.lip_left;
    const auto& lip_r = L.lip_right_fast ? L.lip_right_fast : L.lip_right;

    std::vector<CosetPoint> working_init;
    for (std::size_t k = 0; k < universe->size(); k += std::max<std::size_t>(1, universe->size() / 8))
        working_init.push_back((*universe)[k]);
    std::vector<CosetPoint> working;

    // Working constraint value (cheap): sampled bridge nodes, fast Lipschitz
    // terms, and the radius cap.
    auto g_work = [&](const RealVector& z) {
        const Matrix a = co.left(z), b = co.right(z);
        double v = std::max(lip_l(a), lip_r(b));
        if (has_bridge)
            for (const auto& x : working)
                v = std::max(v, L.node_defect(a, b, x) / L.gamma);
        v = std::max(v, std::max(hermitian_norm(a), hermitian_norm(b)) / opt.radius_cap);
        return v;
    };

    // True seminorm (plus cap) used for the final certificate normalization.
    auto g_true = [&](const RealVector& z, bool with_cap) {
        double v = L(co.left(z), co.right(z));
        if (with_cap)
            v = std::max(v, std::max(hermitian_norm(co.left(z)), hermitian_norm(co.right(z))) /
                                opt.radius_cap);
        return v;
    };

    double best_value = 0.0;
    RealVector best_z;
    bool best_capped = false;
    out.converged = false;

    // Structured step directions: the objective gradient and the identity
    // lines of both summands (the kernel directions of the Lipschitz terms).
    std::vector<RealVector> moves;
    {
        RealVector eil = RealVector::Zero(co.dof());
        eil.head(hermitian_dof(co.dl)) = hermitian_to_real(Matrix::Identity(co.dl, co.dl));
        RealVector eir = RealVector::Zero(co.dof());
        eir.tail(hermitian_dof(co.dr)) = hermitian_to_real(Matrix::Identity(co.dr, co.dr));
        moves = {eil / eil.norm(), -eil / eil.norm(), eir / eir.norm(), -eir / eir.norm()};
    }

    for (int sign = 0; sign < 2; ++sign) {
        const RealVector cs = (sign == 0) ? c : RealVector(-c);
        const RealVector ascent_dir = cs / cs.norm();
        RealVector z = ascent_dir;
        working = working_init;
        double prev_round = -1.0;
        for (int round = 0; round < opt.max_rounds; ++round) {
            // The seed stream depends on the round only, so that swapping
            // (mu, nu) swaps the two sign branches bit for bit.
            Rng rng(derive_seed(opt.seed, 0x736d1000 + round));
            double gz = g_work(z);
            if (gz <= 1e-13) {
                // Degenerate direction: ride it to the cap.
                z *= opt.radius_cap / std::max(hermitian_norm(co.left(z)),
                                               hermitian_norm(co.right(z)));
                gz = g_work(z);
                if (gz <= 1e-13) break;
            }
            z /= gz;
            double obj = cs.dot(z);
            double step = 0.5;
            int stall = 0;
            for (int it = 0; it < opt.ascent_iterations && step > 1e-7; ++it) {
                RealVector dir;
                const int mode = it % 3;
                if (mode == 0) {
                    dir = ascent_dir;
                } else if (mode == 1) {
                    dir = moves[(it / 3) % moves.size()];
                } else {  // random kick to escape corners
                    dir = ascent_dir;
                    for (int k = 0; k < dir.size(); ++k) dir(k) += 0.6 * rng.gaussian();
                    dir /= dir.norm();
                }
                RealVector probe = z + step * z.norm() * dir;
                const double gp = g_work(probe);
                if (gp <= 1e-13) {
                    probe *= opt.radius_cap /
                             std::max(hermitian_norm(co.left(probe)), hermitian_norm(co.right(probe)));
                } else {
                    probe /= gp;
                }
                const double op = cs.dot(probe);
                if (op > obj + 1e-15) {
                    z = probe;
                    obj = op;
                    stall = 0;
                } else if (++stall >= 10) {
                    step *= 0.5;
                    stall = 0;
                }
            }
            // Most-violated node: extend the working set where the true
            // defect exceeds the sampled one.
            bool added = false;
            if (has_bridge) {
                const Matrix a = co.left(z), b = co.right(z);
                double worst = 0.0;
                std::size_t arg = 0;
                for (std::size_t k = 0; k < universe->size(); ++k) {
                    const double v = L.node_defect(a, b, (*universe)[k]);
                    if (v > worst) {
                        worst = v;
                        arg = k;
                    }
                }
                double sampled = 0.0;
                for (const auto& x : working) sampled = std::max(sampled, L.node_defect(a, b, x));
                if (worst > sampled * (1.0 + 1e-9) + 1e-13) {
                    working.push_back((*universe)[arg]);
                    added = true;
                }
            }
            const double denom = g_true(z, false);
            const bool capped = denom < 1e-10;
            const double value = cs.dot(z) / (capped ? g_true(z, true) : denom);
            if (value > best_value) {
                best_value = value;
                best_z = z;
                best_capped = capped;
            }
            if (!added && prev_round >= 0.0 && value - prev_round < opt.improve_tol) {
                out.converged = true;
                break;
            }
            prev_round = value;
        }
    }

    if (best_z.size()) {
        const double denom = best_capped ? g_true(best_z, true) : g_true(best_z, false);
        out.left = co.left(best_z) / denom;
        out.right = co.right(best_z) / denom;
        out.value = best_value;
        out.radius_capped =
            best_capped || std::max(hermitian_norm(out.left), hermitian_norm(out.right)) >=
                               0.5 * opt.radius_cap;
    }
    return out;
}

} // namespace fuzzyprox
