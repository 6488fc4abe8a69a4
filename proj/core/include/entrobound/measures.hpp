#pragma once

// Matrix norms, logarithmic norms (matrix measures), the Metzler spectral
// abscissa and the matrix exponential.

#include "entrobound/norm.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace entrobound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Partition;

[[nodiscard]] double vector_norm(const Vector& v, Norm p);

/// Induced operator norm. The 2-norm is the largest singular value.
[[nodiscard]] double induced_norm(const Matrix& a, Norm p);

/// max |A v|_out over |v|_in = 1. Exact for every pair of selectors when
/// the number of columns is at most 20; beyond that the infinity->{1,2}
/// cases return a valid upper bound.
[[nodiscard]] double mixed_norm(const Matrix& a, Norm out, Norm in);

/// mu(A) = lim_{h->0+} (|I + hA| - 1)/h.
[[nodiscard]] double matrix_measure(const Matrix& a, Norm p);

/// Checks -mu(-A) <= re(lambda) <= mu(A) <= |A| for every eigenvalue.
[[nodiscard]] bool measure_sandwich_check(const Matrix& a, Norm p, double slack = 1e-9);

/// Off-diagonal entries all >= 0, compared exactly.
[[nodiscard]] bool is_metzler(const Matrix& a);

/// Largest real part of the spectrum of a Metzler matrix (which is itself an
/// eigenvalue). Throws PreconditionError when `m` is not Metzler.
[[nodiscard]] double spectral_abscissa_metzler(const Matrix& m);

/// Degree-13 Pade approximant with scaling and squaring.
[[nodiscard]] Matrix matrix_exponential(const Matrix& a);

/// Eigenvalues of a symmetric matrix, ascending (cyclic Jacobi).
[[nodiscard]] Vector symmetric_eigenvalues(const Matrix& s);

/// Eigenvalues of a general square matrix.
[[nodiscard]] std::vector<std::complex<double>> eigenvalues(const Matrix& a);

/// Interconnection matrix of a Jacobian: mu_i of diagonal blocks on the
/// diagonal, mixed norms |J_ij|_{ij} off the diagonal. Always Metzler.
[[nodiscard]] Matrix interconnection_matrix(const Matrix& jacobian, const Partition& partition);

/// |v|_G = |(|v_1|_1, ..., |v_m|_m)|_N.
[[nodiscard]] double global_norm(const Vector& v, const Partition& partition);

/// Measure induced by |.|_G. Only local = network = inf has a closed form
/// (it is then the plain mu_inf); other choices throw PreconditionError.
[[nodiscard]] double global_measure(const Matrix& a, const Partition& partition);

}  // namespace entrobound
