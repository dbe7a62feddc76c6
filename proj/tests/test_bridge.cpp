#include <catch2/catch_amalgamated.hpp>

#include "fuzzyprox/bridge.hpp"

using namespace fuzzyprox;
using Catch::Approx;

namespace {

double dense_defect(const Matrix& a, const Matrix& b, const Vector& v) {
    const Matrix p = v * v.adjoint();
    return operator_norm(a * p - p * b);
}

Vector random_unit(int dim, Rng& rng) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    return v / v.norm();
}

FunctionSamples constant_samples(const GridPtr& grid, double c) {
    return FunctionSamples(grid, c * Vector::Ones(Eigen::Index(grid->nodes.size())), 0);
}

} // namespace

TEST_CASE("rank one defect matches the dense oracle", "[bridge]") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 2 + int(rng.uniform() * 10.999);
        const Matrix a = random_complex_matrix(dim, dim, rng);
        const Matrix b = random_complex_matrix(dim, dim, rng);
        const Vector v = random_unit(dim, rng);
        REQUIRE(rank_one_defect(a, b, v) == Approx(dense_defect(a, b, v)).margin(1e-10));
    }
}

TEST_CASE("rank one defect closed forms", "[bridge]") {
    Rng rng(7);
    const int dim = 5;
    const Vector v = random_unit(dim, rng);
    const Matrix id = Matrix::Identity(dim, dim);
    REQUIRE(rank_one_defect(id, id, v) == Approx(0.0).margin(1e-14));

    // B with v an eigenvector: the defect collapses to |c - b|.
    const Matrix proj = id - v * v.adjoint();
    const Matrix b = 1.7 * v * v.adjoint() + proj * random_hermitian(dim, rng) * proj;
    REQUIRE(rank_one_defect(Matrix(0.4 * id), b, v) == Approx(1.3).margin(1e-12));

    // Coherent closed form: A = cos(theta) I against 2 j_z gives |sin(theta)|.
    const Irrep r1 = make_irrep(1);
    for (double theta : {0.0, 0.3, 1.2, 2.2, M_PI}) {
        const Vector w = coherent_state(r1, CosetPoint(theta, 0.8));
        const double d =
            rank_one_defect(Matrix(std::cos(theta) * Matrix::Identity(2, 2)),
                            Matrix(2.0 * r1.j_z), w);
        REQUIRE(d == Approx(std::abs(std::sin(theta))).margin(1e-12));
    }

    REQUIRE_THROWS_AS(rank_one_defect(id, id, Vector(2.0 * v)), invalid_parameter);
}

TEST_CASE("function-operator bridge norm closed forms", "[bridge]") {
    const Irrep r1 = make_irrep(1);
    const GridPtr grid = shared_sphere_grid(4);
    const Matrix zero = Matrix::Zero(2, 2);
    const Matrix id = Matrix::Identity(2, 2);

    REQUIRE(bridge_norm_AB(r1, constant_samples(grid, 0.0), zero, *grid) == 0.0);
    REQUIRE(bridge_norm_AB(r1, constant_samples(grid, 1.0), id, *grid) ==
            Approx(0.0).margin(1e-14));
    REQUIRE(bridge_norm_AB(r1, constant_samples(grid, 1.0), zero, *grid) ==
            Approx(1.0).margin(1e-12));

    Vector vals(grid->nodes.size());
    for (std::size_t k = 0; k < grid->nodes.size(); ++k)
        vals(k) = std::cos(grid->nodes[k].theta);
    const FunctionSamples f(grid, vals, 1);
    REQUIRE(bridge_norm_AB(r1, f, Matrix(2.0 * r1.j_z), *grid) == Approx(1.0).margin(1e-8));

    REQUIRE_THROWS_AS(bridge_norm_AB(r1, f, Matrix::Identity(3, 3), *grid),
                      dimension_mismatch);
}

TEST_CASE("operator-operator bridge norm against a dense oracle", "[bridge]") {
    const int m = 2, n = 2;
    const GridPtr grid = shared_sphere_grid(m + n + 2);
    const Irrep rm = make_irrep(m), rn = make_irrep(n);

    REQUIRE(bridge_norm_BB(m, n, Matrix::Identity(3, 3), Matrix::Identity(3, 3), *grid) ==
            Approx(0.0).margin(1e-14));
    REQUIRE(bridge_norm_BB(m, n, Matrix::Identity(3, 3), Matrix::Zero(3, 3), *grid) ==
            Approx(1.0).margin(1e-12));

    Rng rng(19);
    const Matrix s = random_hermitian(3, rng);
    const Matrix t = random_hermitian(3, rng);
    double dense = 0.0;
    for (const auto& x : grid->nodes) {
        const Vector w = kron(coherent_state(rm, x), coherent_state(rn, x));
        dense = std::max(
            dense, dense_defect(kron(s, Matrix::Identity(3, 3)),
                                kron(Matrix::Identity(3, 3), t), w));
    }
    REQUIRE(bridge_norm_BB(m, n, s, t, *grid, 1) == Approx(dense).margin(1e-12));
    REQUIRE(bridge_norm_BB(m, n, s, t, *grid, 4) >= dense - 1e-12);

    REQUIRE_THROWS_AS(bridge_norm_BB(m, n, s, Matrix::Identity(4, 4), *grid),
                      dimension_mismatch);
}

TEST_CASE("bridge norms are subadditive and homogeneous", "[bridge]") {
    const int n = 2;
    const Irrep r = make_irrep(n);
    const GridPtr grid = shared_sphere_grid(2 * n + 2);
    Rng rng(23);
    const auto f = detail::real_coords_to_samples(
        RealVector::Random(harmonic_count(n)), n, grid);
    const auto g = detail::real_coords_to_samples(
        RealVector::Random(harmonic_count(n)), n, grid);
    const Matrix s = random_hermitian(r.dim, rng);
    const Matrix t = random_hermitian(r.dim, rng);

    const double nf = bridge_norm_AB(r, f, s, *grid, 1);
    const double ng = bridge_norm_AB(r, g, t, *grid, 1);
    const FunctionSamples fg(grid, f.values + g.values, n);
    REQUIRE(bridge_norm_AB(r, fg, Matrix(s + t), *grid, 1) <= nf + ng + 1e-12);

    const FunctionSamples f3(grid, 3.0 * f.values, n);
    REQUIRE(bridge_norm_AB(r, f3, Matrix(3.0 * s), *grid, 1) ==
            Approx(3.0 * nf).epsilon(1e-12));

    const double ns = bridge_norm_BB(n, n, s, t, *grid, 1);
    const double nt = bridge_norm_BB(n, n, t, s, *grid, 1);
    REQUIRE(bridge_norm_BB(n, n, Matrix(s + t), Matrix(t + s), *grid, 1) <=
            ns + nt + 1e-12);
    REQUIRE(bridge_norm_BB(n, n, Matrix(-2.0 * s), Matrix(-2.0 * t), *grid, 1) ==
            Approx(2.0 * ns).epsilon(1e-12));
}

TEST_CASE("strong Leibniz property at the nodes", "[bridge]") {
    const int n = 3;
    const Irrep r = make_irrep(n);
    const GridPtr grid = shared_sphere_grid(4 * n);
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = detail::real_coords_to_samples(
            RealVector(0.7 * RealVector::Random(harmonic_count(n))), n, grid);
        const auto g = detail::real_coords_to_samples(
            RealVector(0.7 * RealVector::Random(harmonic_count(n))), n, grid);
        const Matrix s = random_hermitian(r.dim, rng);
        const Matrix t = random_hermitian(r.dim, rng);
        const FunctionSamples fg(grid, f.values.cwiseProduct(g.values), 2 * n);
        const double lhs = bridge_norm_AB(r, fg, Matrix(s * t), *grid, 1);
        const double rhs = f.real_max_abs() * bridge_norm_AB(r, g, t, *grid, 1) +
                           bridge_norm_AB(r, f, s, *grid, 1) * operator_norm(t);
        REQUIRE(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("standard families are normalized and nested", "[bridge]") {
    const int n = 2;
    const GridPtr grid = shared_sphere_grid(2 * n + 2);
    const auto small = standard_function_family(n, 4, grid, 77);
    const auto large = standard_function_family(n, 12, grid, 77);
    REQUIRE(small.size() == 4);
    REQUIRE(large.size() == 12);
    for (std::size_t i = 0; i < small.size(); ++i)
        REQUIRE((small[i].values - large[i].values).cwiseAbs().maxCoeff() == 0.0);
    for (const auto& f : large) {
        REQUIRE(function_lipschitz(f, *grid) == Approx(1.0).epsilon(1e-9));
        REQUIRE(f.values.imag().cwiseAbs().maxCoeff() < 1e-12);
    }

    const auto ops_small = standard_operator_family(n, 4, grid, 77);
    const auto ops_large = standard_operator_family(n, 10, grid, 77);
    REQUIRE(ops_large.size() == 10);
    for (std::size_t i = 0; i < ops_small.size(); ++i)
        REQUIRE((ops_small[i] - ops_large[i]).cwiseAbs().maxCoeff() < 1e-15);
    const Irrep r = make_irrep(n);
    for (const auto& t : ops_large) {
        REQUIRE(is_hermitian(t, 1e-12));
        REQUIRE(matrix_lipschitz(r, t) == Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("band-limited real coordinates round trip", "[bridge]") {
    const int lmax = 3;
    RealVector z = RealVector::Random(harmonic_count(lmax));
    const Vector c = detail::real_coords_to_harmonic(z, lmax);
    REQUIRE((detail::harmonic_to_real_coords(c, lmax) - z).cwiseAbs().maxCoeff() == 0.0);
    // Reality constraint makes the synthesis real.
    for (const auto& p : {CosetPoint(0.9, 2.1), CosetPoint(2.4, 5.0)})
        REQUIRE(std::abs(std::imag(harmonic_synthesis(c, lmax, p))) < 1e-12);
    // The first nonconstant coordinate is sqrt(3) cos(theta).
    RealVector e = RealVector::Zero(harmonic_count(lmax));
    e(1) = 1.0;
    const GridPtr grid = shared_sphere_grid(2 * lmax + 2);
    const auto f = detail::real_coords_to_samples(e, lmax, grid);
    REQUIRE(function_lipschitz(f, *grid) == Approx(std::sqrt(3.0)).epsilon(1e-4));
}

TEST_CASE("gamma estimates at spin one half hit the closed forms", "[bridge]") {
    // Degree-one functions: every unit-Lipschitz f is a rotation of
    // a + cos(theta), whose Berezin partner defect peaks at 2/3; every
    // unit-Lipschitz Hermitian is a rotation of a + 2 j_z, giving 1.
    const GridPtr grid = shared_sphere_grid(4);
    const GammaEstimates est = gamma_estimates(1, grid, 8, 3);
    REQUIRE(est.gamma_A == Approx(2.0 / 3.0).margin(2e-3));
    REQUIRE(est.gamma_B == Approx(1.0).margin(2e-3));

    const GammaEstimates again = gamma_estimates(1, grid, 8, 3);
    REQUIRE(again.gamma_A == est.gamma_A);
    REQUIRE(again.gamma_B == est.gamma_B);
}

TEST_CASE("coherent bridge verification passes at the estimated scale", "[bridge]") {
    const GridPtr grid = shared_sphere_grid(4);
    const auto report = verify_coherent_bridge(1, 1.0, 0.05, 4, 13, grid);
    REQUIRE(report.passed);
    REQUIRE(report.worst_gap <= 0.05);
    REQUIRE(report.nondegenerate);
    REQUIRE(report.family_size == 8);
    REQUIRE(report.forward_witnesses.size() == 4);
    REQUIRE(report.backward_witnesses.size() == 4);
    REQUIRE(report.passed == (report.worst_gap <= report.epsilon));
}

TEST_CASE("coherent bridge verification fails when gamma is too small", "[bridge]") {
    const GridPtr grid = shared_sphere_grid(4);
    const auto report = verify_coherent_bridge(1, 1e-3, 0.05, 3, 13, grid);
    REQUIRE_FALSE(report.passed);
    REQUIRE(report.worst_gap > 0.05);
    REQUIRE(report.passed == (report.worst_gap <= report.epsilon));
}

TEST_CASE("amalgamation reproduces the tensor bridge and its constant", "[bridge]") {
    const int m = 2, n = 3;
    const GridPtr grid = shared_sphere_grid(m + n + 2);
    const Amalgam am = amalgamate(coherent_amalgam_spec(m, n, 0.4, 0.7, grid));
    REQUIRE(am.gamma_F == Approx(1.1).margin(1e-15));

    Rng rng(47);
    const Matrix s = random_hermitian(m + 1, rng);
    const Matrix t = random_hermitian(n + 1, rng);
    REQUIRE(am.bridge(s, t) == bridge_norm_BB(m, n, s, t, *grid));
    const CosetPoint x(1.1, 0.6);
    REQUIRE(am.node_defect(s, t, x) ==
            bb_defect_at(make_irrep(m), make_irrep(n), s, t, x));

    REQUIRE_THROWS_AS(amalgamate(coherent_amalgam_spec(m, n, 0.0, 0.7, grid)),
                      invalid_parameter);
}

TEST_CASE("amalgamated bridge satisfies the triangle inequality", "[bridge]") {
    const int m = 2, n = 3;
    const Irrep rm = make_irrep(m), rn = make_irrep(n);
    const GridPtr grid = shared_sphere_grid(2 * (m + n));
    Rng rng(53);
    for (int trial = 0; trial < 25; ++trial) {
        const Matrix s = random_hermitian(m + 1, rng);
        const Matrix t = random_hermitian(n + 1, rng);
        const auto f = detail::real_coords_to_samples(
            RealVector(RealVector::Random(harmonic_count(2))), 2, grid);
        const double n_f = bridge_norm_BB(m, n, s, t, *grid, 1);
        const double n_d = bridge_norm_AB(rm, f, s, *grid, 1);
        const double n_e = bridge_norm_AB(rn, f, t, *grid, 1);
        REQUIRE(n_f <= n_d + n_e + 1e-12);
    }
}

TEST_CASE("generic amalgam fields agree with the coherent fast path", "[bridge]") {
    const int m = 1, n = 2;
    const Irrep rm = make_irrep(m), rn = make_irrep(n);
    const GridPtr grid = shared_sphere_grid(4);
    AmalgamSpec spec = coherent_amalgam_spec(m, n, 0.5, 0.5, grid);
    spec.d0 = [&](const CosetPoint& x) { return coherent_projection(rm, x); };
    spec.e0 = [&](const CosetPoint& x) { return coherent_projection(rn, x); };
    const Amalgam generic = amalgamate(spec);
    const Amalgam fast = amalgamate(coherent_amalgam_spec(m, n, 0.5, 0.5, grid));

    Rng rng(61);
    const Matrix s = random_hermitian(m + 1, rng);
    const Matrix t = random_hermitian(n + 1, rng);
    for (const auto& x : grid->nodes)
        REQUIRE(generic.node_defect(s, t, x) ==
                Approx(fast.node_defect(s, t, x)).margin(1e-12));

    // Unit norms are enforced, and disjointly supported fields degenerate.
    AmalgamSpec bad = spec;
    bad.d0 = [&](const CosetPoint& x) { return Matrix(0.5 * coherent_projection(rm, x)); };
    REQUIRE_THROWS_AS(amalgamate(bad), invalid_parameter);
    AmalgamSpec split = spec;
    split.d0 = [&](const CosetPoint& x) {
        return x.theta < 1.0 ? coherent_projection(rm, x) : Matrix(Matrix::Zero(2, 2));
    };
    split.e0 = [&](const CosetPoint& x) {
        return x.theta > 2.0 ? coherent_projection(rn, x) : Matrix(Matrix::Zero(3, 3));
    };
    REQUIRE_THROWS_AS(amalgamate(split), degenerate_amalgam);
}

TEST_CASE("pair seminorm factories wire the bridge machinery", "[bridge]") {
    const int m = 1, n = 2;
    const GridPtr grid = shared_sphere_grid(m + n + 2);
    const OperatorPairSeminorm L = bb_pair_seminorm(m, n, 1.5, grid);
    REQUIRE(L.dim_left == 2);
    REQUIRE(L.dim_right == 3);
    REQUIRE(L.gamma == 1.5);
    REQUIRE_FALSE(L.node_universe.empty());
    REQUIRE(L(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) == Approx(0.0).margin(1e-12));

    Rng rng(71);
    const Matrix s = random_hermitian(2, rng);
    const Matrix t = random_hermitian(3, rng);
    REQUIRE(L.bridge(s, t) == Approx(L.bridge_star(s, t)).margin(1e-12));
    REQUIRE(L(s, t) >= std::max(L.lip_left(s), L.lip_right(t)) - 1e-12);

    const FunctionPairSeminorm ab = ab_pair_seminorm(n, 1.0, grid);
    const FunctionSamples one(grid, Vector::Ones(Eigen::Index(grid->nodes.size())), 0);
    REQUIRE(ab(one, Matrix::Identity(3, 3)) == Approx(0.0).margin(1e-12));
    REQUIRE(ab.dim_right == 3);
}
