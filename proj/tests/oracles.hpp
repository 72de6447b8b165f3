#pragma once
// Brute-force reference computations used by the tests. None of these call
// into the library's solvers; they work from the raw layer parameters.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Gauss-Jordan inverse with partial pivoting, written out by hand.
inline Mat inverse(const Mat& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("inverse: not square");
  Mat m(n, 2 * n);
  m << a, Mat::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) throw std::runtime_error("inverse: singular");
    m.row(c).swap(m.row(piv));
    m.row(c) /= m(c, c);
    for (Eigen::Index r = 0; r < n; ++r)
      if (r != c) m.row(r) -= m(r, c) * m.row(c);
  }
  return m.rightCols(n);
}

inline Vec relu_layer(const Mat& a, const Vec& b, const Vec& x) {
  Vec y = a * x + b;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = y(i) > 0.0 ? y(i) : 0.0;
  return y;
}

struct Net {
  std::vector<Mat> weights;
  std::vector<Vec> offsets;
  Vec out_weights;
  double out_bias = 0.0;
};

/// L(T_N(...T_k(x)...)), k 1-based.
inline double net_from(const Net& net, int k, const Vec& x) {
  Vec y = x;
  for (std::size_t i = static_cast<std::size_t>(k - 1); i < net.weights.size(); ++i)
    y = relu_layer(net.weights[i], net.offsets[i], y);
  return net.out_weights.dot(y) + net.out_bias;
}

inline double net(const Net& n, const Vec& x) { return net_from(n, 1, x); }

/// Sign pattern of a vector as (plus, minus) bitmasks, bit i for entry i.
struct Signs {
  std::uint64_t plus = 0;
  std::uint64_t minus = 0;
  bool operator==(const Signs&) const = default;
};

inline Signs sign_pattern(const Vec& v, double tol) {
  Signs s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > tol) s.plus |= std::uint64_t{1} << i;
    else if (v(i) < -tol) s.minus |= std::uint64_t{1} << i;
  }
  return s;
}

/// Sector of x for layer (A, b): its dual coordinates are A x + b, since
/// a_j . (x - x_0) = lambda_j.
inline Signs sector_of(const Mat& a, const Vec& b, const Vec& x, double tol) {
  return sign_pattern(a * x + b, tol);
}

inline std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

/// Number of sign vectors in {-,0,+}^d with exactly k non-zeros, counted by
/// walking every vector.
inline std::vector<std::uint64_t> sign_vector_census(int d) {
  std::vector<std::uint64_t> by_dim(static_cast<std::size_t>(d) + 1, 0);
  std::uint64_t total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    int nonzero = 0;
    for (int i = 0; i < d; ++i, c /= 3) nonzero += (c % 3) != 0;
    ++by_dim[static_cast<std::size_t>(nonzero)];
  }
  return by_dim;
}

/// Pieces of the shallow boundary counted in the codomain: the face of the
/// closed orthant with support exactly J meets {w.y + c = 0} iff some
/// j in J has w_j of the opposite sign to c (then y_J > 0 can be scaled onto
/// the hyperplane). Requires c != 0 and every w_j != 0.
inline std::uint64_t piece_count_codomain(const Vec& w, double c) {
  const int d = static_cast<int>(w.size());
  std::uint64_t count = 0;
  for (std::uint64_t j = 1; j < (std::uint64_t{1} << d); ++j) {
    bool hit = false;
    for (int i = 0; i < d; ++i)
      if (((j >> i) & 1U) && w(i) * c < 0.0) hit = true;
    count += hit;
  }
  return count;
}

}  // namespace oracle
