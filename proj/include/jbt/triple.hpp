#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "jbt/asymptotics.hpp"

namespace jbt {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Index k-1 holds the k-th function of each family.
struct BasisFamily {
  std::vector<MaximalDomainElement> phi_plus, phi_minus;
  std::vector<MaximalDomainElement> v_plus, v_minus;
  std::vector<MaximalDomainElement> u_plus, u_minus;

  const std::vector<MaximalDomainElement>& phi(int endpoint) const { return endpoint == 1 ? phi_plus : phi_minus; }
  const std::vector<MaximalDomainElement>& v(int endpoint) const { return endpoint == 1 ? v_plus : v_minus; }
  const std::vector<MaximalDomainElement>& u(int endpoint) const { return endpoint == 1 ? u_plus : u_minus; }
  bool has_u() const { return !u_plus.empty() && !u_minus.empty(); }

  // phi^-, u^-, phi^+, u^+ (each in index order 1..n).
  std::vector<MaximalDomainElement> all() const {
    std::vector<MaximalDomainElement> out;
    for (const auto* fam : {&phi_minus, &u_minus, &phi_plus, &u_plus}) out.insert(out.end(), fam->begin(), fam->end());
    return out;
  }
};

// Supported near one endpoint only, with a single unit term there.
inline MaximalDomainElement single_term(const Parameters& pr, int endpoint, Exponent p, Exponent q) {
  EndpointExpansion plus(1, pr), minus(-1, pr);
  (endpoint == 1 ? plus : minus).terms.push_back({1.0, p, q});
  return MaximalDomainElement(plus, minus);
}

inline MaximalDomainElement combine(const MaximalDomainElement& a, cplx ca, const MaximalDomainElement& b, cplx cb) {
  return MaximalDomainElement(add(scale(a.at_plus, ca), scale(b.at_plus, cb)),
                              add(scale(a.at_minus, ca), scale(b.at_minus, cb)));
}

inline MaximalDomainElement scale(const MaximalDomainElement& a, cplx c) {
  return MaximalDomainElement(scale(a.at_plus, c), scale(a.at_minus, c));
}

inline BasisFamily build_basis(const Parameters& pr) {
  pr.validate();
  BasisFamily b;
  const int n = pr.n;
  for (int j = 1; j <= n; ++j) {
    b.phi_plus.push_back(single_term(pr, 1, {j - 1, 0, 0}, {}));
    b.phi_minus.push_back(single_term(pr, -1, {}, {j - 1, 0, 0}));
  }
  for (int k = 1; k <= n; ++k) {
    b.v_plus.push_back(single_term(pr, 1, {n - k, -1, 0}, {}));
    b.v_minus.push_back(single_term(pr, -1, {}, {n - k, 0, -1}));
  }
  return b;
}

inline constexpr double kDenominatorTol = 1e-12;

inline BasisFamily modified_gram_schmidt(BasisFamily b, const Parameters& pr) {
  const int n = pr.n;
  for (int ep : {1, -1}) {
    const auto& phi = b.phi(ep);
    const auto& v = b.v(ep);
    std::vector<MaximalDomainElement> u;
    for (int k = 1; k <= n; ++k) {
      MaximalDomainElement acc = v[k - 1];
      for (int j = 1; j < k; ++j) {
        cplx num = sesquilinear_form(phi[j - 1], v[k - 1], pr, ep);
        cplx den = sesquilinear_form(phi[j - 1], u[j - 1], pr, ep);
        if (std::abs(den) < kDenominatorTol)
          throw DegenerateDenominator("Gram-Schmidt: [phi_j,u_j] vanishes for j=" + std::to_string(j), j, ep);
        acc = combine(acc, 1.0, u[j - 1], -num / den);
      }
      cplx d = sesquilinear_form(phi[k - 1], v[k - 1], pr, ep);
      if (std::abs(d) < kDenominatorTol)
        throw DegenerateDenominator("Gram-Schmidt: [phi_k,v_k] vanishes for k=" + std::to_string(k) +
                                        " at x=" + std::to_string(ep),
                                    k, ep);
      u.push_back(scale(acc, 1.0 / d));
    }
    (ep == 1 ? b.u_plus : b.u_minus) = std::move(u);
  }
  return b;
}

struct InteractionMatrix {
  CMatrix values;    // 4n x 4n
  CMatrix expected;  // the ideal block pattern
  CMatrix deviation() const { return values - expected; }
  double max_deviation() const { return deviation().cwiseAbs().maxCoeff(); }
};

// Ordered per endpoint as phi_1..phi_n, u_n..u_1; endpoint -1 block first.
inline InteractionMatrix interaction_matrix(const BasisFamily& b, const Parameters& pr) {
  if (!b.has_u()) throw std::invalid_argument("interaction_matrix needs the Gram-Schmidt functions");
  const int n = pr.n;
  std::vector<std::pair<const MaximalDomainElement*, int>> order;
  for (int ep : {-1, 1}) {
    for (int j = 0; j < n; ++j) order.push_back({&b.phi(ep)[j], ep});
    for (int j = n - 1; j >= 0; --j) order.push_back({&b.u(ep)[j], ep});
  }
  InteractionMatrix im;
  im.values = CMatrix::Zero(4 * n, 4 * n);
  im.expected = CMatrix::Zero(4 * n, 4 * n);
  for (int r = 0; r < 4 * n; ++r)
    for (int c = 0; c < 4 * n; ++c)
      im.values(r, c) = sesquilinear_form(*order[r].first, *order[c].first, pr, order[r].second);
  // [phi_i, u_{n+1-c}] = delta and, by antisymmetry, [u, phi] = -delta.
  for (int blk = 0; blk < 2; ++blk) {
    int o = 2 * n * blk;
    for (int i = 0; i < n; ++i) {
      im.expected(o + i, o + 2 * n - 1 - i) = 1.0;
      im.expected(o + 2 * n - 1 - i, o + i) = -1.0;
    }
  }
  return im;
}

using BoundaryVector = CVector;

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

// (-f^[n](-1), ..., -f^[2n-1](-1), f^[n](1), ..., f^[2n-1](1))
inline BoundaryVector gamma0(const MaximalDomainElement& f, const BasisFamily& b, const Parameters& pr) {
  const int n = pr.n;
  BoundaryVector out(2 * n);
  for (int i = 0; i < n; ++i) {
    int s = n - i;  // entry i carries f^[n+i] = f^[2n-s]
    double fs = factorial(s - 1);
    out(i) = sesquilinear_form(f, b.phi_minus[s - 1], pr, -1) / fs;
    out(n + i) = ((s % 2) ? -1.0 : 1.0) * sesquilinear_form(f, b.phi_plus[s - 1], pr, 1) / fs;
  }
  return out;
}

// (f^{n-1}(-1), ..., f^{0}(-1), f^{n-1}(1), ..., f^{0}(1)) from the regularized operations.
inline BoundaryVector gamma1(const MaximalDomainElement& f, const BasisFamily& b, const Parameters& pr) {
  if (!b.has_u()) throw std::invalid_argument("gamma1 needs the Gram-Schmidt functions");
  const int n = pr.n;
  BoundaryVector out(2 * n);
  for (int i = 0; i < n; ++i) {
    int j = n - i;  // entry i carries f^{j-1}
    double fj = factorial(j - 1);
    out(i) = fj * sesquilinear_form(f, b.u_minus[j - 1], pr, -1);
    out(n + i) = (((j - 1) % 2) ? -1.0 : 1.0) * fj * sesquilinear_form(f, b.u_plus[j - 1], pr, 1);
  }
  return out;
}

// <x, y> conjugates y.
inline cplx boundary_inner(const BoundaryVector& x, const BoundaryVector& y) { return y.dot(x); }

inline double green_identity_residual(const MaximalDomainElement& f, const MaximalDomainElement& g,
                                      const BasisFamily& b, const Parameters& pr) {
  cplx lhs = sesquilinear_form(f, g, pr, 1) - sesquilinear_form(f, g, pr, -1);
  cplx rhs = boundary_inner(gamma1(f, b, pr), gamma0(g, b, pr)) - boundary_inner(gamma0(f, b, pr), gamma1(g, b, pr));
  return std::abs(lhs - rhs);
}

struct SurjectivityCertificate {
  CMatrix matrix;  // rows: Gamma0 then Gamma1; columns: phi^-, u^-, phi^+, u^+
  cplx determinant;
};

inline SurjectivityCertificate surjectivity_certificate(const BasisFamily& b, const Parameters& pr) {
  const int n = pr.n;
  auto fs = b.all();
  SurjectivityCertificate c;
  c.matrix = CMatrix::Zero(4 * n, 4 * n);
  for (int k = 0; k < 4 * n; ++k) {
    c.matrix.block(0, k, 2 * n, 1) = gamma0(fs[k], b, pr);
    c.matrix.block(2 * n, k, 2 * n, 1) = gamma1(fs[k], b, pr);
  }
  c.determinant = c.matrix.determinant();
  return c;
}

}  // namespace jbt
