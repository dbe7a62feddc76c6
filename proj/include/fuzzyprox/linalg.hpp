#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "fuzzyprox/errors.hpp"

namespace fuzzyprox {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Dense complex matrix expected to be Hermitian; validity is checked at the
/// entry points that require it rather than encoded in the type.
using HermitianOperator = Matrix;

inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

inline void require_hermitian(const Matrix& m, const char* where, double tol = 1e-12) {
    if (!is_hermitian(m, tol))
        throw invalid_parameter(std::string(where) + ": operator is not Hermitian");
}

inline void require_square(const Matrix& m, const char* where) {
    if (m.rows() != m.cols())
        throw dimension_mismatch(std::string(where) + ": matrix is not square");
}

/// Largest singular value. Uses the symmetric eigensolver when the input is
/// (anti-)Hermitian up to roundoff, full SVD otherwise.
inline double operator_norm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    if (m.rows() == m.cols()) {
        const double scale = m.cwiseAbs().maxCoeff();
        if (scale == 0.0) return 0.0;
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
            return es.eigenvalues().cwiseAbs().maxCoeff();
        }
        if ((m + m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(Complex(0, 1) * m, Eigen::EigenvaluesOnly);
            return es.eigenvalues().cwiseAbs().maxCoeff();
        }
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

/// Largest |eigenvalue| of a Hermitian matrix (no hermiticity fallback).
inline double hermitian_norm(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// --- deterministic random numbers -----------------------------------------
//
// mt19937_64 gives a portable stream; the Gaussian transform is done by hand
// (Box-Muller) because std::normal_distribution is implementation defined.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream for a tagged subtask of a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // in [0, 1)
        return (gen_() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Complex complex_gaussian() {
        return Complex(gaussian(), gaussian());
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return gen_() % n;
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline Matrix random_complex_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = rng.complex_gaussian();
    return m;
}

inline Matrix random_hermitian(int dim, Rng& rng) {
    Matrix g = random_complex_matrix(dim, dim, rng);
    return 0.5 * (g + g.adjoint());
}

inline Matrix random_traceless_hermitian(int dim, Rng& rng) {
    Matrix h = random_hermitian(dim, rng);
    h -= (h.trace() / double(dim)) * Matrix::Identity(dim, dim);
    return h;
}

// --- Kronecker products -----------------------------------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// y = (A ⊗ I_n) x without materializing the product.
inline Vector kron_left_apply(const Matrix& a, const Vector& x, int n) {
    const int m = int(a.rows());
    if (x.size() != Eigen::Index(m) * n)
        throw dimension_mismatch("kron_left_apply: vector length mismatch");
    Eigen::Map<const Matrix> xm(x.data(), n, m);
    Vector y(x.size());
    Eigen::Map<Matrix>(y.data(), n, m).noalias() = xm * a.transpose();
    return y;
}

/// y = (I_m ⊗ B) x without materializing the product.
inline Vector kron_right_apply(const Matrix& b, const Vector& x, int m) {
    const int n = int(b.rows());
    if (x.size() != Eigen::Index(m) * n)
        throw dimension_mismatch("kron_right_apply: vector length mismatch");
    Eigen::Map<const Matrix> xm(x.data(), n, m);
    Vector y(x.size());
    Eigen::Map<Matrix>(y.data(), n, m).noalias() = b * xm;
    return y;
}

// --- real coordinates on the space of Hermitian matrices -------------------
//
// Orthonormal basis under <A,B> = tr(A*B): the d diagonal units E_kk and the
// pairs (E_ij + E_ji)/sqrt(2), i(E_ij - E_ji)/sqrt(2) for i < j.

inline int hermitian_dof(int dim) { return dim * dim; }

inline RealVector hermitian_to_real(const Matrix& h) {
    const int d = int(h.rows());
    RealVector v(hermitian_dof(d));
    int k = 0;
    for (int i = 0; i < d; ++i) v(k++) = h(i, i).real();
    const double s = std::sqrt(2.0);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            v(k++) = s * h(i, j).real();
            v(k++) = -s * h(i, j).imag();
        }
    return v;
}

inline Matrix real_to_hermitian(const RealVector& v, int dim) {
    if (v.size() != hermitian_dof(dim))
        throw dimension_mismatch("real_to_hermitian: coordinate length mismatch");
    Matrix h = Matrix::Zero(dim, dim);
    int k = 0;
    for (int i = 0; i < dim; ++i) h(i, i) = v(k++);
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const double re = v(k++) * s;
            const double im = -v(k++) * s;
            h(i, j) = Complex(re, im);
            h(j, i) = Complex(re, -im);
        }
    return h;
}

} // namespace fuzzyprox
