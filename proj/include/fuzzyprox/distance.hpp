#pragma once

#include <cstdint>
#include <vector>

#include "fuzzyprox/berezin.hpp"
#include "fuzzyprox/bridge.hpp"
#include "fuzzyprox/errors.hpp"
#include "fuzzyprox/linalg.hpp"
#include "fuzzyprox/metric.hpp"
#include "fuzzyprox/sphere.hpp"
#include "fuzzyprox/su2.hpp"

namespace fuzzyprox {

/// Compress S (x) I - I (x) T to the top Clebsch-Gordan component:
/// R = V* (S (x) I - I (x) T) V with V the highest-weight embedding. The
/// tensor operator is only ever applied column by column through reshapes.
inline Matrix compress(int m, int n, const Matrix& s, const Matrix& t) {
    const Irrep rm = make_irrep(m), rn = make_irrep(n);
    if (s.rows() != rm.dim || s.cols() != rm.dim)
        throw dimension_mismatch("compress: left operand does not match m");
    if (t.rows() != rn.dim || t.cols() != rn.dim)
        throw dimension_mismatch("compress: right operand does not match n");
    const Matrix v = highest_weight_embedding(m, n);
    Matrix x(v.rows(), v.cols());
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const Vector w = v.col(k);
        x.col(k) = kron_left_apply(s, w, rn.dim) - kron_right_apply(t, w, rm.dim);
    }
    return v.adjoint() * x;
}

/// Push a state of B^m forward to B^n through the trace dual of the Berezin
/// channel; this is the explicit pairing used by the distance chain.
inline State pushforward_state(const State& mu, const BerezinChannel& ch) {
    if (mu.kind != State::Kind::density)
        throw invalid_parameter("pushforward_state: need a density state");
    if (mu.dim() != ch.m + 1)
        throw dimension_mismatch("pushforward_state: state does not match channel");
    Matrix nu = ch.dual_apply(mu.density);
    nu = 0.5 * (nu + nu.adjoint().eval());
    return density_state(std::move(nu));
}

/// delta_m * L(S) + sup |sigma_S - sigma_T|, the certified control on
/// ||S - lower(upper(T))||. The sup runs over the exact degree-(m+n) symbol
/// of the compressed difference. The direct-evaluation inequality is checked
/// on the spot and a violation throws, since every downstream certificate
/// depends on it.
inline double gambit_bound(int m, int n, const Matrix& s, const Matrix& t, double delta_m,
                           int quadrature_margin = 2) {
    const Irrep rm = make_irrep(m), rn = make_irrep(n);
    const Irrep rmn = make_irrep(m + n);
    const GridPtr grid = shared_sphere_grid(m + n + quadrature_margin);
    const Matrix r = compress(m, n, s, t);
    const double bound =
        delta_m * matrix_lipschitz(rm, s) + symbol_sup_norm(rmn, r, *grid);
    const Matrix reconstructed = lower_operator(rm, upper_symbol(rn, t, grid), *grid);
    if (hermitian_norm(Matrix(s - reconstructed)) > bound + 1e-8)
        throw std::logic_error("gambit_bound: certified inequality violated");
    return bound;
}

/// Empirical constants of one matrix level.
struct LevelConstants {
    int n = 0;
    double delta = 0.0;
    double gamma_A = 0.0;
    double gamma_B = 0.0;
    double gamma() const { return std::max(gamma_A, gamma_B); }
};

inline LevelConstants level_constants(int n, int family_size, int delta_trials,
                                      std::uint64_t seed, int quadrature_margin = 2) {
    LevelConstants c;
    c.n = n;
    c.delta = delta_estimate_detail(n, delta_trials,
                                    derive_seed(seed, 0xd0000u + std::uint64_t(n)),
                                    quadrature_margin)
                  .value;
    const GridPtr grid = shared_sphere_grid(2 * n + quadrature_margin);
    const GammaEstimates g =
        gamma_estimates(n, grid, family_size, derive_seed(seed, 0x9a000 + n));
    c.gamma_A = g.gamma_A;
    c.gamma_B = g.gamma_B;
    return c;
}

/// Everything reported for one (m, n) pair.
struct ProxReport {
    int m = 0;
    int n = 0;
    double delta_m = 0.0, delta_n = 0.0;
    double gammaA_m = 0.0, gammaB_m = 0.0;
    double gammaA_n = 0.0, gammaB_n = 0.0;
    double gamma_used = 0.0;       ///< max(gammaA_m, gammaB_m) + max(gammaA_n, gammaB_n)
    double certified_bound = 0.0;  ///< max(delta) + gamma_used
    double empirical_hausdorff = 0.0;
    std::uint64_t seed = 0;
    int grid_degree = 0;
};

/// Assemble the certified upper bound from per-level constants.
inline ProxReport prox_upper_bound(int m, int n, const LevelConstants& cm,
                                   const LevelConstants& cn) {
    if (cm.n != m || cn.n != n)
        throw invalid_parameter("prox_upper_bound: constants do not match the pair");
    ProxReport r;
    r.m = m;
    r.n = n;
    r.delta_m = cm.delta;
    r.delta_n = cn.delta;
    r.gammaA_m = cm.gamma_A;
    r.gammaB_m = cm.gamma_B;
    r.gammaA_n = cn.gamma_A;
    r.gammaB_n = cn.gamma_B;
    r.gamma_used = cm.gamma() + cn.gamma();
    r.certified_bound = std::max(cm.delta, cn.delta) + r.gamma_used;
    return r;
}

struct HausdorffOptions {
    int samples = 32;           ///< states per side
    std::uint64_t seed = 1u;
    bool nearest_refinement = false;  ///< minimize over a pushforward neighborhood
    StateMetricOptions metric;
};

/// Empirical Hausdorff estimate between the two state spaces under the
/// combined seminorm: every sampled state is paired with its Berezin
/// pushforward and the state metric is taken; the result is the max over
/// samples from both sides. A lower estimate of the Hausdorff distance
/// realized by this pairing, hence certified to stay under the prox bound.
inline double hausdorff_estimate(int m, int n, const OperatorPairSeminorm& L,
                                 const GridPtr& grid, const HausdorffOptions& opt = {}) {
    if (L.dim_left != m + 1 || L.dim_right != n + 1)
        throw dimension_mismatch("hausdorff_estimate: seminorm does not match (m, n)");
    const Irrep rm = make_irrep(m), rn = make_irrep(n);
    const BerezinChannel fwd = berezin_channel(m, n, grid);
    const BerezinChannel bwd = berezin_channel(n, m, grid);

    auto side_states = [&](const Irrep& rep, std::uint64_t tag) {
        std::vector<State> states;
        states.push_back(trace_state(rep.dim));
        states.push_back(pure_state(coherent_state(rep, CosetPoint(0.0, 0.0))));
        states.push_back(pure_state(coherent_state(rep, CosetPoint(M_PI / 2, 1.0))));
        while (int(states.size()) < opt.samples)
            states.push_back(random_state(
                rep.dim, derive_seed(opt.seed, tag + std::uint64_t(states.size()))));
        states.resize(std::size_t(std::max(1, opt.samples)));
        return states;
    };

    double worst = 0.0;
    int sample_index = 0;
    auto measure = [&](const State& left, const State& right) {
        StateMetricOptions mo = opt.metric;
        mo.mu_side = Summand::left;
        mo.nu_side = Summand::right;
        mo.seed = derive_seed(opt.seed, 0x4a750000u + std::uint64_t(sample_index++));
        double value = state_metric(L, left, right, *grid, mo).value;
        if (opt.nearest_refinement) {
            // Look for a closer partner in a small mixture neighborhood.
            for (int k = 0; k < 2; ++k) {
                const State blur = random_state(
                    right.dim(), derive_seed(opt.seed, 0xb1420000u + std::uint64_t(k)));
                Matrix mixed = 0.8 * right.density + 0.2 * blur.density;
                StateMetricOptions mk = mo;
                mk.seed = derive_seed(mo.seed, std::uint64_t(k) + 1);
                value = std::min(
                    value,
                    state_metric(L, left, density_state(std::move(mixed)), *grid, mk).value);
            }
        }
        worst = std::max(worst, value);
    };

    for (const State& mu : side_states(rm, 0x5a3e0000u))
        measure(mu, pushforward_state(mu, fwd));
    for (const State& nu : side_states(rn, 0x5a3f0000u))
        measure(pushforward_state(nu, bwd), nu);
    return worst;
}

} // namespace fuzzyprox
