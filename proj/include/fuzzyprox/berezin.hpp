#pragma once

#include <vector>

#include "fuzzyprox/errors.hpp"
#include "fuzzyprox/linalg.hpp"
#include "fuzzyprox/metric.hpp"
#include "fuzzyprox/sphere.hpp"
#include "fuzzyprox/su2.hpp"

namespace fuzzyprox {

/// Upper (covariant) Berezin symbol at a single point: tr(alpha_x(P) T).
inline Complex upper_symbol_at(const Irrep& rep, const Matrix& t, const CosetPoint& x) {
    const Vector v = coherent_state(rep, x);
    return v.dot(t * v);
}

/// Upper symbol sampled on a grid; band-limited of degree rep.n.
inline FunctionSamples upper_symbol(const Irrep& rep, const Matrix& t, const GridPtr& grid) {
    require_square(t, "upper_symbol");
    if (t.rows() != rep.dim)
        throw dimension_mismatch("upper_symbol: operator does not match representation");
    Vector vals(grid->nodes.size());
    for (std::size_t k = 0; k < grid->nodes.size(); ++k)
        vals(k) = upper_symbol_at(rep, t, grid->nodes[k]);
    return FunctionSamples(grid, std::move(vals), rep.n);
}

/// Lower (contravariant) Berezin operator d_n * integral of f(x) alpha_x(P).
/// Exact when the grid integrates degree f.degree + n, which is required.
inline Matrix lower_operator(const Irrep& rep, const FunctionSamples& f,
                             const QuadratureGrid& grid) {
    if (f.values.size() != Eigen::Index(grid.nodes.size()))
        throw dimension_mismatch("lower_operator: samples do not match grid");
    if (f.degree + rep.n > grid.exact_degree)
        throw unsupported_degree("lower_operator: need exact_degree >= degree(f) + n");
    Matrix out = Matrix::Zero(rep.dim, rep.dim);
    for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
        const Vector v = coherent_state(rep, grid.nodes[k]);
        out.noalias() += (double(rep.dim) * grid.weights(k) * f.values(k)) * (v * v.adjoint());
    }
    return out;
}

/// Berezin transform: lower operator of the upper symbol.
inline Matrix berezin_transform(const Irrep& rep, const Matrix& t, const GridPtr& grid) {
    return lower_operator(rep, upper_symbol(rep, t, grid), *grid);
}

/// Sup norm of sampled values. When the harmonic expansion is recoverable on
/// this grid (exact_degree >= 2 * degree) the function is synthesized on a
/// 4x denser point set and polished; otherwise the node maximum is returned.
inline double symbol_sup_norm(const FunctionSamples& f, int refine = 4) {
    if (2 * f.degree <= f.grid->exact_degree && f.degree >= 1) {
        const Vector coeff = harmonic_analysis(f, f.degree);
        return synthesized_sup_norm(coeff, f.degree, dense_eval_points(*f.grid, refine));
    }
    return f.real_max_abs();
}

/// Sup norm of the upper symbol of t, evaluated directly from the operator on
/// a refined point set with local polish (no band-limit restrictions).
inline double symbol_sup_norm(const Irrep& rep, const Matrix& t, const QuadratureGrid& grid,
                              int refine = 4) {
    double best = 0.0;
    CosetPoint arg(M_PI / 2, 0.0);
    for (const auto& x : dense_eval_points(grid, refine)) {
        const double v = std::abs(upper_symbol_at(rep, t, x));
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    const double polished = nelder_mead_max_2d(
        [&](double th, double ph) {
            return std::abs(upper_symbol_at(rep, t, CosetPoint(std::clamp(th, 0.0, M_PI), ph)));
        },
        arg.theta, arg.phi, 0.02);
    return std::max(best, polished);
}

/// Unital completely positive map B^n -> B^m given by composing the upper
/// symbol at level n with the lower operator at level m. Both directions are
/// applied as rank-one node sums against stored coherent vectors; the trace
/// dual pushes density matrices forward.
struct BerezinChannel {
    int m = 0;
    int n = 0;
    GridPtr grid;
    Matrix left_states;          ///< (m+1) x K coherent vectors
    Matrix right_states;         ///< (n+1) x K coherent vectors
    RealVector scaled_weights;   ///< (m+1) * w_k

    Matrix apply(const Matrix& t) const {
        if (t.rows() != n + 1 || t.cols() != n + 1)
            throw dimension_mismatch("BerezinChannel::apply: wrong operand size");
        return accumulate(right_states, t, left_states);
    }

    /// Trace dual: density matrices on B^m push forward to B^n.
    Matrix dual_apply(const Matrix& s) const {
        if (s.rows() != m + 1 || s.cols() != m + 1)
            throw dimension_mismatch("BerezinChannel::dual_apply: wrong operand size");
        return accumulate(left_states, s, right_states);
    }

  private:
    Matrix accumulate(const Matrix& probe, const Matrix& op, const Matrix& out_states) const {
        Vector c(probe.cols());
        for (Eigen::Index k = 0; k < probe.cols(); ++k)
            c(k) = scaled_weights(k) * probe.col(k).dot(op * probe.col(k));
        return out_states * c.asDiagonal() * out_states.adjoint();
    }
};

inline BerezinChannel berezin_channel(int m, int n, const GridPtr& grid) {
    const Irrep rm = make_irrep(m), rn = make_irrep(n);
    if (grid->exact_degree < m + n)
        throw unsupported_degree("berezin_channel: grid cannot integrate the kernel");
    BerezinChannel ch;
    ch.m = m;
    ch.n = n;
    ch.grid = grid;
    const Eigen::Index k_count = Eigen::Index(grid->nodes.size());
    ch.left_states.resize(rm.dim, k_count);
    ch.right_states.resize(rn.dim, k_count);
    ch.scaled_weights.resize(k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
        ch.left_states.col(k) = coherent_state(rm, grid->nodes[std::size_t(k)]);
        ch.right_states.col(k) = coherent_state(rn, grid->nodes[std::size_t(k)]);
        ch.scaled_weights(k) = double(rm.dim) * grid->weights(k);
    }
    return ch;
}

// --- isotypic structure -----------------------------------------------------

/// Orthonormal spherical tensor operators T^l_q, q = l..-l (in that order),
/// generated from (j_plus)^l by normalized ad-lowering. Each spans the weight
/// spaces of the spin-l summand of the conjugation action on B^n.
inline std::vector<Matrix> tensor_operators(const Irrep& rep, int l) {
    if (l < 0 || l > rep.n)
        throw invalid_parameter("tensor_operators: need 0 <= l <= n");
    std::vector<Matrix> ops;
    ops.reserve(2 * l + 1);
    Matrix t = Matrix::Identity(rep.dim, rep.dim);
    for (int i = 0; i < l; ++i) t = t * rep.j_plus;
    t /= std::sqrt(std::abs((t.adjoint() * t).trace()));
    ops.push_back(t);
    for (int q = l; q > -l; --q) {
        const double c = std::sqrt(double(l) * (l + 1) - double(q) * (q - 1));
        t = (rep.j_minus * t - t * rep.j_minus) / c;
        ops.push_back(t);
    }
    return ops;
}

/// Hermitian zonal element of the spin-l summand (the q = 0 tensor operator).
inline Matrix zonal_operator(const Irrep& rep, int l) {
    const auto ops = tensor_operators(rep, l);
    Matrix z = ops[std::size_t(l)];
    z = 0.5 * (z + z.adjoint().eval());
    const double norm = std::sqrt(std::abs((z.adjoint() * z).trace()));
    if (norm < 1e-12)
        throw invalid_parameter("zonal_operator: zonal tensor operator is not Hermitian");
    return z / norm;
}

/// Project onto the spin-l isotypic summand of the conjugation action.
inline Matrix isotypic_project(const Irrep& rep, int l, const Matrix& t) {
    const auto ops = tensor_operators(rep, l);
    Matrix out = Matrix::Zero(rep.dim, rep.dim);
    for (const auto& e : ops) out += (e.adjoint() * t).trace() * e;
    return out;
}

// --- delta estimate ----------------------------------------------------------

struct DeltaEstimate {
    double value = 0.0;
    Matrix witness;
    bool random_start_won = false;
};

/// Empirical sup of ||T - B(T)|| / L(T) over traceless Hermitian T, searched
/// from the zonal isotypic directions and seeded random starts, each polished
/// by a ratio hill climb. Witnesses the constant from below.
inline DeltaEstimate delta_estimate_detail(int n, int trials, std::uint64_t seed,
                                           int quadrature_margin = 2) {
    const Irrep rep = make_irrep(n);
    const GridPtr grid = shared_sphere_grid(2 * n + quadrature_margin);
    const BerezinChannel ch = berezin_channel(n, n, grid);
    const int d = rep.dim;

    auto ratio = [&](const Matrix& t_in) {
        Matrix t = t_in - (t_in.trace() / double(d)) * Matrix::Identity(d, d);
        const double lip = matrix_lipschitz(rep, t);
        if (lip < 1e-12) return 0.0;
        return hermitian_norm(t - ch.apply(t)) / lip;
    };
    auto coord_ratio = [&](const RealVector& z) { return ratio(real_to_hermitian(z, d)); };

    DeltaEstimate best;
    auto consider = [&](const Matrix& start, bool random_start, Rng& rng) {
        const RealVector polished =
            hill_climb_max(coord_ratio, hermitian_to_real(start), rng, 220, 0.25);
        const double v = coord_ratio(polished);
        if (v > best.value) {
            best.value = v;
            best.witness = real_to_hermitian(polished, d);
            best.random_start_won = random_start;
        }
    };

    for (int l = 1; l <= n; ++l) {
        Rng rng(derive_seed(seed, 0xde17a000 + l));
        consider(zonal_operator(rep, l), false, rng);
    }
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, 0xde17a800 + t));
        consider(random_traceless_hermitian(d, rng), true, rng);
    }
    return best;
}

inline double delta_estimate(int n, int trials, std::uint64_t seed) {
    return delta_estimate_detail(n, trials, seed).value;
}

} // namespace fuzzyprox
