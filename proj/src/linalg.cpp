#include "ltn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ltn/errors.hpp"

namespace ltn {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Marginal: return "marginal";
  }
  return "?";
}

Verdict strictly_less(double value, double threshold, double tol) {
  if (value < threshold - tol) return Verdict::True;
  if (value > threshold + tol) return Verdict::False;
  return Verdict::Marginal;
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols)
    throw InvalidArgument("Matrix: " + std::to_string(data_.size()) + " entries for " +
                          std::to_string(rows) + "x" + std::to_string(cols));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidArgument("Matrix +: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidArgument("Matrix -: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("Matrix *: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw InvalidArgument("Matrix * vector: shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

// ---------------------------------------------------------------- IndexSet

IndexSet::IndexSet(std::vector<std::size_t> indices, std::size_t n)
    : idx_(std::move(indices)), n_(n) {
  for (std::size_t k = 0; k < idx_.size(); ++k) {
    if (idx_[k] >= n_) throw InvalidArgument("IndexSet: index out of range");
    if (k > 0 && idx_[k] <= idx_[k - 1])
      throw InvalidArgument("IndexSet: indices must be strictly increasing");
  }
}

IndexSet IndexSet::from_mask(std::uint64_t mask, std::size_t n) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (std::uint64_t{1} << i)) idx.push_back(i);
  return IndexSet(std::move(idx), n);
}

IndexSet IndexSet::all(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return IndexSet(std::move(idx), n);
}

IndexSet IndexSet::complement() const {
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    if (k < idx_.size() && idx_[k] == i) {
      ++k;
      continue;
    }
    out.push_back(i);
  }
  return IndexSet(std::move(out), n_);
}

bool IndexSet::contains(std::size_t i) const {
  return std::binary_search(idx_.begin(), idx_.end(), i);
}

Matrix submatrix(const Matrix& a, const IndexSet& rows, const IndexSet& cols) {
  Matrix s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = a(rows[i], cols[j]);
  return s;
}

Matrix principal_submatrix(const Matrix& a, const IndexSet& s) { return submatrix(a, s, s); }

Vector subvector(std::span<const double> v, const IndexSet& s) {
  Vector out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out[k] = v[s[k]];
  return out;
}

Matrix abs(const Matrix& a) {
  Matrix r = a;
  for (double& v : r.data()) v = std::fabs(v);
  return r;
}

Matrix positive_part(const Matrix& a) {
  Matrix r = a;
  for (double& v : r.data()) v = std::max(v, 0.0);
  return r;
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------- LU

LU::LU(const Matrix& a) : lu_(a) {
  if (!a.square()) throw InvalidArgument("LU: matrix not square");
  const std::size_t n = a.rows();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::fabs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(lu_(i, k)) > best) {
        best = std::fabs(lu_(i, k));
        p = i;
      }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
      sign_ = -sign_;
    }
    const double piv = lu_(k, k);
    if (piv == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / piv;
      lu_(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

double LU::determinant() const {
  double d = sign_;
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

double LU::min_pivot() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lu_.rows(); ++i) m = std::min(m, std::fabs(lu_(i, i)));
  return lu_.rows() ? m : 1.0;
}

Vector LU::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw InvalidArgument("LU::solve: size mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
    if (lu_(i, i) == 0.0) throw SingularMatrix("LU::solve: singular matrix");
    x[i] /= lu_(i, i);
  }
  return x;
}

Matrix LU::solve(const Matrix& b) const {
  if (b.rows() != lu_.rows()) throw InvalidArgument("LU::solve: shape mismatch");
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vector col = solve(b.column(j));
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
  }
  return x;
}

Matrix LU::inverse() const { return solve(Matrix::identity(lu_.rows())); }

double determinant(const Matrix& a) {
  if (a.rows() == 0 && a.square()) return 1.0;
  return LU(a).determinant();
}

Matrix inverse(const Matrix& a) { return LU(a).inverse(); }

Vector solve(const Matrix& a, std::span<const double> b) { return LU(a).solve(b); }

// ---------------------------------------------------------------- eigenvalues

namespace {

// Householder reduction to upper Hessenberg form, in place.
void reduce_to_hessenberg(Matrix& h) {
  const std::size_t n = h.rows();
  if (n < 3) return;
  Vector v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += h(i, k) * h(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (h(k + 1, k) > 0) alpha = -alpha;
    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = h(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = h(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    // H <- (I - 2 v v^T / |v|^2) H
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h(i, j);
      s *= 2.0 / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    // H <- H (I - 2 v v^T / |v|^2)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      s *= 2.0 / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
    }
    h(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

// Diagonal similarity scaling by powers of two to equalize row and column norms.
void balance(Matrix& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  const std::size_t n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) {
          c += std::fabs(a(j, i));
          r += std::fabs(a(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

double sign_of(double a, double b) { return b >= 0.0 ? std::fabs(a) : -std::fabs(a); }

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr layout,
// 1-based indexing internally).
std::vector<std::complex<double>> hessenberg_qr(const Matrix& hm) {
  const int n = static_cast<int>(hm.rows());
  std::vector<double> buf((n + 1) * (n + 1), 0.0);
  auto a = [&](int i, int j) -> double& { return buf[i * (n + 1) + j]; };
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) a(i, j) = hm(i - 1, j - 1);

  std::vector<double> wr(n + 1, 0.0), wi(n + 1, 0.0);
  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::fabs(a(i, j));

  int nn = n;
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::fabs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0.0;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::fabs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -(wi[nn] = z);
          }
          nn -= 2;
        } else {
          if (its == 60) throw Error("eigenvalues: QR iteration did not converge");
          if (its == 10 || its == 20 || its == 40) {
            t += x;
            for (int i = 1; i <= nn; ++i) a(i, i) -= x;
            s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
            const double v =
                std::fabs(p) * (std::fabs(a(m - 1, m - 1)) + std::fabs(z) + std::fabs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              if ((x = std::fabs(p) + std::fabs(q) + std::fabs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  std::vector<std::complex<double>> out;
  out.reserve(n);
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
  if (!a.square()) throw InvalidArgument("eigenvalues: matrix not square");
  const std::size_t n = a.rows();
  if (n == 0) return {};
  if (n == 1) return {std::complex<double>(a(0, 0), 0.0)};
  for (double v : a.data())
    if (!std::isfinite(v)) throw InvalidArgument("eigenvalues: non-finite entry");
  Matrix h = a;
  balance(h);
  reduce_to_hessenberg(h);
  return hessenberg_qr(h);
}

double spectral_radius(const Matrix& a) {
  double r = 0.0;
  for (const auto& l : eigenvalues(a)) r = std::max(r, std::abs(l));
  return r;
}

double spectral_abscissa(const Matrix& a) {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& l : eigenvalues(a)) r = std::max(r, l.real());
  return r;
}

SymmetricEigen symmetric_eigen(const Matrix& in) {
  if (!in.square()) throw InvalidArgument("symmetric_eigen: matrix not square");
  const std::size_t n = in.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (in(i, j) + in(j, i));
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a(i, i) * a(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off == 0.0 || off < 1e-32 * diag) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = sign_of(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double operator_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  // Work with the smaller Gram matrix.
  const Matrix g = a.rows() < a.cols() ? a * a.transpose() : a.transpose() * a;
  const auto eig = symmetric_eigen(g);
  return std::sqrt(std::max(0.0, eig.values.back()));
}

// ---------------------------------------------------------------- pivot transform

Matrix principal_pivot_transform(const Matrix& a, const IndexSet& pivot) {
  if (!a.square()) throw InvalidArgument("principal_pivot_transform: matrix not square");
  if (pivot.dimension() != a.rows())
    throw InvalidArgument("principal_pivot_transform: index set dimension mismatch");
  const IndexSet rest = pivot.complement();
  const Matrix a11 = submatrix(a, rest, rest);
  const Matrix a12 = submatrix(a, rest, pivot);
  const Matrix a21 = submatrix(a, pivot, rest);
  const Matrix a22 = submatrix(a, pivot, pivot);

  const LU lu(a22);
  if (pivot.size() > 0 && lu.singular(0.0))
    throw SingularMatrix("principal_pivot_transform: pivot block is singular");
  const Matrix a22inv = lu.inverse();
  const Matrix a12_inv = a12 * a22inv;
  const Matrix b11 = a11 - a12_inv * a21;
  const Matrix b21 = (a22inv * a21) * -1.0;

  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    for (std::size_t j = 0; j < rest.size(); ++j) out(rest[i], rest[j]) = b11(i, j);
    for (std::size_t j = 0; j < pivot.size(); ++j) out(rest[i], pivot[j]) = a12_inv(i, j);
  }
  for (std::size_t i = 0; i < pivot.size(); ++i) {
    for (std::size_t j = 0; j < rest.size(); ++j) out(pivot[i], rest[j]) = b21(i, j);
    for (std::size_t j = 0; j < pivot.size(); ++j) out(pivot[i], pivot[j]) = a22inv(i, j);
  }
  return out;
}

// ---------------------------------------------------------------- least squares

namespace {

// Householder vector for x: returns (v, beta) with (I - beta v v^T) x = alpha e1.
// v[0] == 1 convention is not used; v is stored unnormalized.
struct Reflector {
  Vector v;
  double beta = 0.0;
};

Reflector make_reflector(std::span<const double> x) {
  Reflector h{Vector(x.begin(), x.end()), 0.0};
  const double nrm = norm2(x);
  if (nrm == 0.0) return h;
  const double alpha = x[0] > 0 ? -nrm : nrm;
  h.v[0] -= alpha;
  const double vv = [&] {
    double s = 0.0;
    for (double e : h.v) s += e * e;
    return s;
  }();
  h.beta = vv > 0 ? 2.0 / vv : 0.0;
  return h;
}

// Apply (I - beta v v^T) to rows [offset, offset+len) of every column of m.
void apply_left(const Reflector& h, Matrix& m, std::size_t offset) {
  if (h.beta == 0.0) return;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < h.v.size(); ++k) s += h.v[k] * m(offset + k, j);
    s *= h.beta;
    for (std::size_t k = 0; k < h.v.size(); ++k) m(offset + k, j) -= s * h.v[k];
  }
}

struct PivotedQR {
  Matrix r;                      // overwritten with R in the upper triangle
  std::vector<Reflector> refl;   // reflector k acts on rows [k, m)
  std::vector<std::size_t> perm; // column j of R is column perm[j] of A
  std::size_t rank = 0;
};

PivotedQR pivoted_qr(const Matrix& a, double tol) {
  PivotedQR f{a, {}, {}, 0};
  const std::size_t m = a.rows(), n = a.cols();
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  const std::size_t steps = std::min(m, n);
  double r00 = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += f.r(i, j) * f.r(i, j);
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    if (best != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(f.r(i, k), f.r(i, best));
      std::swap(f.perm[k], f.perm[best]);
    }
    Vector x(m - k);
    for (std::size_t i = k; i < m; ++i) x[i - k] = f.r(i, k);
    Reflector h = make_reflector(x);
    apply_left(h, f.r, k);
    for (std::size_t i = k + 1; i < m; ++i) f.r(i, k) = 0.0;
    f.refl.push_back(std::move(h));
    const double rkk = std::fabs(f.r(k, k));
    if (k == 0) r00 = rkk;
    if (rkk > tol * std::max(1.0, r00)) f.rank = k + 1;
    else break;
  }
  return f;
}

}  // namespace

std::size_t rank(const Matrix& a, double tol) {
  if (a.empty()) return 0;
  return pivoted_qr(a, tol).rank;
}

LeastSquares least_squares(const Matrix& a, const Matrix& y, double rank_tol) {
  if (a.cols() == 0) throw InvalidArgument("least_squares: A has no columns");
  if (a.rows() != y.rows()) throw InvalidArgument("least_squares: row count mismatch");
  const std::size_t m = a.rows(), n = a.cols(), k = y.cols();

  PivotedQR qr = pivoted_qr(a, rank_tol);
  const std::size_t r = qr.rank;

  // c = Q^T Y
  Matrix c = y;
  for (std::size_t j = 0; j < qr.refl.size(); ++j) apply_left(qr.refl[j], c, j);

  Matrix z_full(n, k, 0.0);
  if (r > 0) {
    // S = [R11 R12]^T (n x r); QR of S gives [R11 R12] = [U1^T 0] V^T.
    Matrix s(n, r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < n; ++j) s(j, i) = (j >= i) ? qr.r(i, j) : 0.0;
    std::vector<Reflector> vrefl;
    for (std::size_t col = 0; col < r; ++col) {
      Vector x(n - col);
      for (std::size_t i = col; i < n; ++i) x[i - col] = s(i, col);
      Reflector h = make_reflector(x);
      apply_left(h, s, col);
      vrefl.push_back(std::move(h));
    }
    // U1 is the upper r x r block of s. Solve U1^T w1 = c[0:r].
    Matrix w(n, k, 0.0);
    for (std::size_t col = 0; col < k; ++col)
      for (std::size_t i = 0; i < r; ++i) {
        double acc = c(i, col);
        for (std::size_t j = 0; j < i; ++j) acc -= s(j, i) * w(j, col);
        w(i, col) = acc / s(i, i);
      }
    // z = V w, V = H_0 H_1 ... H_{r-1}
    for (std::size_t col = r; col-- > 0;) apply_left(vrefl[col], w, col);
    z_full = std::move(w);
  }

  LeastSquares out;
  out.rank = r;
  out.x = Matrix(n, k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t col = 0; col < k; ++col) out.x(qr.perm[i], col) = z_full(i, col);
  Matrix res = a * out.x - y;
  out.residual = frobenius_norm(res);
  (void)m;
  return out;
}

}  // namespace ltn
