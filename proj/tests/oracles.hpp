#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's solver or eigen helpers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

// Cyclic Jacobi eigenvalues of a real symmetric matrix, ascending.
inline std::vector<double> JacobiEigenvalues(Eigen::MatrixXd a, int sweeps = 100) {
  const int n = static_cast<int>(a.rows());
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Eigenvalues of a Hermitian matrix through its real embedding; each value
// appears twice there, so every other one is kept.
inline std::vector<double> HermitianEigenvalues(const Eigen::MatrixXcd& h) {
  const Eigen::Index n = h.rows();
  Eigen::MatrixXd s(2 * n, 2 * n);
  s << h.real(), -h.imag(), h.imag(), h.real();
  const auto all = JacobiEigenvalues(s);
  std::vector<double> out;
  for (std::size_t i = 0; i < all.size(); i += 2) out.push_back(0.5 * (all[i] + all[i + 1]));
  return out;
}

// Scalar SINR of user u written out term by term:
// |h_{b,u}^H w_g|^2 / (sigma2 + sum over all other groups k of |h_{bs(k),u}^H w_k|^2).
inline double Sinr(const std::vector<std::vector<Eigen::VectorXcd>>& h,  // h[b][u]
                   const std::vector<Eigen::VectorXcd>& w, const std::vector<int>& group_of_user,
                   const std::vector<int>& bs_of_group, int u, double sigma2) {
  const int g = group_of_user[static_cast<std::size_t>(u)];
  double signal = 0.0;
  double interference = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto& hv = h[static_cast<std::size_t>(bs_of_group[k])][static_cast<std::size_t>(u)];
    std::complex<double> ip(0.0, 0.0);
    for (Eigen::Index a = 0; a < hv.size(); ++a) ip += std::conj(hv(a)) * w[k](a);
    const double p = std::norm(ip);
    if (static_cast<int>(k) == g) {
      signal = p;
    } else {
      interference += p;
    }
  }
  return signal / (sigma2 + interference);
}

}  // namespace oracle
