#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace ltn {

using Vector = std::vector<double>;

/// Default absolute tolerance for zero, rank and strict-inequality tests.
inline constexpr double kDefaultTolerance = 1e-9;

/// Three-valued outcome of a strict inequality evaluated in floating point.
enum class Verdict { False, True, Marginal };

const char* to_string(Verdict v);

/// Classify `value < threshold` with a +/- tolerance band around the threshold.
Verdict strictly_less(double value, double threshold, double tol);

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;
  Vector column(std::size_t j) const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// Sorted, duplicate-free set of indices into [0, n).
class IndexSet {
 public:
  IndexSet() = default;
  /// Throws InvalidArgument if not strictly increasing or out of [0, n).
  IndexSet(std::vector<std::size_t> indices, std::size_t n);

  static IndexSet from_mask(std::uint64_t mask, std::size_t n);
  static IndexSet all(std::size_t n);

  IndexSet complement() const;
  std::size_t dimension() const { return n_; }
  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  bool contains(std::size_t i) const;
  std::size_t operator[](std::size_t k) const { return idx_[k]; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }
  const std::vector<std::size_t>& indices() const { return idx_; }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> idx_;
  std::size_t n_ = 0;
};

Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols);
Matrix principal_submatrix(const Matrix& a, const IndexSet& s);
Vector subvector(std::span<const double> v, const IndexSet& s);

/// Elementwise |A|.
Matrix abs(const Matrix& a);
/// Elementwise max(A, 0), i.e. the excitatory part [A]_0^inf.
Matrix positive_part(const Matrix& a);

double norm_inf(std::span<const double> v);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// LU factorization with partial pivoting of a square matrix.
class LU {
 public:
  explicit LU(const Matrix& a);

  std::size_t size() const { return lu_.rows(); }
  double determinant() const;
  /// Smallest |pivot|; a cheap singularity indicator.
  double min_pivot() const;
  bool singular(double tol = kDefaultTolerance) const { return min_pivot() <= tol; }

  /// Throws SingularMatrix when a zero pivot is met.
  Vector solve(std::span<const double> b) const;
  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
};

double determinant(const Matrix& a);
/// Throws SingularMatrix.
Matrix inverse(const Matrix& a);
Vector solve(const Matrix& a, std::span<const double> b);

/// All n eigenvalues (with multiplicity) via Hessenberg reduction and
/// Francis double-shift QR. Throws InvalidArgument when A is not square.
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

/// max |lambda|. Throws InvalidArgument when A is not square.
double spectral_radius(const Matrix& a);

/// max Re(lambda).
double spectral_abscissa(const Matrix& a);

/// Largest singular value.
double operator_norm(const Matrix& a);

struct SymmetricEigen {
  Vector values;   ///< ascending
  Matrix vectors;  ///< column k belongs to values[k]
};

/// Cyclic Jacobi eigensolver. The input is symmetrized as (A + A^T)/2.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Block pivot on `pivot`: returns pi(A) with the pivot rows/columns playing
/// the role of A22. Throws SingularMatrix if A22 is singular.
Matrix principal_pivot_transform(const Matrix& a, const IndexSet& pivot);

struct LeastSquares {
  Matrix x;
  double residual = 0.0;  ///< ||A X - Y||_F
  std::size_t rank = 0;
};

/// Minimum-norm least-squares solution of A X = Y through a complete
/// orthogonal decomposition (column-pivoted QR followed by an RZ step).
LeastSquares least_squares(const Matrix& a, const Matrix& y,
                           double rank_tol = kDefaultTolerance);

/// Numerical rank from column-pivoted QR.
std::size_t rank(const Matrix& a, double tol = kDefaultTolerance);

}  // namespace ltn
