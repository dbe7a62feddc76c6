#pragma once

#include <cmath>

#include "fuzzyprox/errors.hpp"
#include "fuzzyprox/linalg.hpp"
#include "fuzzyprox/sphere.hpp"

namespace fuzzyprox {

inline constexpr int max_irrep_label = 64;

/// Spin-(n/2) irreducible representation data in the standard weight basis
/// e_0, ..., e_n ordered by descending j_z eigenvalue; e_0 is the highest
/// weight vector.
struct Irrep {
    int n = 0;    ///< label; the dimension is n + 1
    int dim = 0;
    Matrix j_z;
    Matrix j_plus;
    Matrix j_minus;

    double spin() const { return 0.5 * n; }
};

inline Irrep make_irrep(int n) {
    if (n < 1 || n > max_irrep_label)
        throw invalid_parameter("make_irrep: label must satisfy 1 <= n <= 64");
    Irrep rep;
    rep.n = n;
    rep.dim = n + 1;
    const double j = 0.5 * n;
    rep.j_z = Matrix::Zero(rep.dim, rep.dim);
    rep.j_plus = Matrix::Zero(rep.dim, rep.dim);
    for (int k = 0; k <= n; ++k) rep.j_z(k, k) = j - k;
    // j_plus e_k = sqrt(k (n - k + 1)) e_{k-1}
    for (int k = 1; k <= n; ++k) rep.j_plus(k - 1, k) = std::sqrt(double(k) * (n - k + 1));
    rep.j_minus = rep.j_plus.adjoint();
    return rep;
}

inline Matrix j_x(const Irrep& rep) { return 0.5 * (rep.j_plus + rep.j_minus); }
inline Matrix j_y(const Irrep& rep) { return Complex(0.0, -0.5) * (rep.j_plus - rep.j_minus); }

/// Angular momentum component along a unit direction u.
inline Matrix j_dot(const Irrep& rep, const Eigen::Vector3d& u) {
    return u.x() * j_x(rep) + u.y() * j_y(rep) + u.z() * rep.j_z;
}

/// Coset section g(theta, phi) = exp(-i phi J_z) exp(-i theta J_y) in the
/// given representation.
inline Matrix group_unitary(const Irrep& rep, const CosetPoint& x) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(j_y(rep));
    Matrix rot_y = es.eigenvectors() *
                   (Complex(0, -x.theta) * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                   es.eigenvectors().adjoint();
    Vector phase(rep.dim);
    for (int k = 0; k < rep.dim; ++k)
        phase(k) = std::polar(1.0, -x.phi * rep.j_z(k, k).real());
    return phase.asDiagonal() * rot_y;
}

/// Coherent vector U(g_x) xi through the closed form
/// v_k = e^{-i phi (j - k)} sqrt(C(n,k)) cos^{n-k}(theta/2) sin^k(theta/2),
/// which agrees with group_unitary applied to the highest weight vector.
inline Vector coherent_state(const Irrep& rep, const CosetPoint& x) {
    const double c = std::cos(0.5 * x.theta);
    const double s = std::sin(0.5 * x.theta);
    const double j = rep.spin();
    Vector v(rep.dim);
    double binom = 1.0;
    for (int k = 0; k <= rep.n; ++k) {
        if (k > 0) binom *= double(rep.n - k + 1) / double(k);
        v(k) = std::sqrt(binom) * std::pow(c, rep.n - k) * std::pow(s, k) *
               std::polar(1.0, -x.phi * (j - k));
    }
    return v;
}

/// Rank-one projection onto the coherent line at x.
inline Matrix coherent_projection(const Irrep& rep, const CosetPoint& x) {
    const Vector v = coherent_state(rep, x);
    return v * v.adjoint();
}

/// Conjugation action alpha_x(T) = U(g_x) T U(g_x)^*.
inline Matrix rotate_operator(const Irrep& rep, const CosetPoint& x, const Matrix& t) {
    const Matrix u = group_unitary(rep, x);
    return u * t * u.adjoint();
}

/// Isometry V : H^{m+n} -> H^m (x) H^n intertwining the group actions, built
/// by repeatedly applying the total lowering operator to xi^m (x) xi^n and
/// normalizing. The range projection V V^* is the highest weight summand.
inline Matrix highest_weight_embedding(int m, int n) {
    if (m < 1 || n < 1 || m + n > max_irrep_label)
        throw invalid_parameter("highest_weight_embedding: labels out of range");
    const Irrep rm = make_irrep(m);
    const Irrep rn = make_irrep(n);
    const int dm = rm.dim, dn = rn.dim;
    const int big = m + n + 1;
    Matrix v(dm * dn, big);
    Vector col = Vector::Zero(dm * dn);
    col(0) = 1.0;  // e_0 (x) e_0 in row-major pair index i*dn + k
    v.col(0) = col;
    for (int k = 1; k < big; ++k) {
        col = kron_left_apply(rm.j_minus, v.col(k - 1), dn) +
              kron_right_apply(rn.j_minus, v.col(k - 1), dm);
        v.col(k) = col / col.norm();
    }
    return v;
}

} // namespace fuzzyprox
