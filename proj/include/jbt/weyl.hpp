#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jbt/asymptotics.hpp"
#include "jbt/specfun.hpp"
#include "jbt/triple.hpp"

namespace jbt {

using detail::kPi;

struct SpectralPoint {
  cplx lambda;
  std::vector<cplx> roots;  // lambda_j, j = 1..n (index j-1); j = 1 is the principal root
  std::vector<cplx> mus;    // mu_j (mu_j + a + b + 1) = lambda_j
};

inline cplx mu_from_root(cplx root, const Parameters& pr) {
  double s1 = pr.alpha + pr.beta + 1.0;
  return 0.5 * (-s1 + std::sqrt(cplx(s1 * s1) + 4.0 * root));
}

// No degeneracy checks; lambda = 0 is fine here (all roots collapse to 0).
inline SpectralPoint spectral_roots(cplx lambda, const Parameters& pr) {
  SpectralPoint sp;
  sp.lambda = lambda;
  const int n = pr.n;
  double arg = std::arg(lambda);
  if (arg <= -kPi) arg = kPi;
  double r = std::pow(std::abs(lambda), 1.0 / n);
  for (int j = 0; j < n; ++j) {
    cplx root = std::polar(r, (arg + 2.0 * kPi * j) / n);
    // Snap representation noise so real roots stay on the real axis.
    if (std::abs(root.imag()) <= 1e-15 * r) root.imag(0.0);
    if (std::abs(root.real()) <= 1e-15 * r) root.real(0.0);
    sp.roots.push_back(root);
    sp.mus.push_back(mu_from_root(root, pr));
  }
  return sp;
}

inline SpectralPoint spectral_decompose(cplx lambda, const Parameters& pr) {
  if (lambda == 0.0) throw DegenerateSpectralPoint("lambda = 0: all roots coincide");
  SpectralPoint sp = spectral_roots(lambda, pr);
  for (size_t i = 0; i < sp.mus.size(); ++i)
    for (size_t j = i + 1; j < sp.mus.size(); ++j)
      if (std::abs(sp.mus[i] - sp.mus[j]) <= 1e-10)
        throw DegenerateSpectralPoint("two mu_j coincide at lambda=" + detail::fmt(lambda));
  return sp;
}

struct ConnectionConstants {
  std::vector<cplx> gamma, eps, delta, eta;  // index j-1
  std::vector<cplx> e;
  std::optional<std::array<cplx, 4>> c;  // c1..c4, n = 1 only
};

struct RootConstants {
  cplx gamma, eps, delta, eta;
};

inline double e_constant(const Parameters& pr) {
  return std::sin(kPi * pr.beta) / (std::pow(2.0, pr.beta) * std::sin(kPi * pr.alpha));
}

// The four constants for one mu; entire in mu, so no guard is needed here.
inline RootConstants root_constants(cplx mu, const Parameters& pr) {
  const double a = pr.alpha, b = pr.beta, s = a + b;
  const double S = std::sin(-b * kPi);
  const double e = e_constant(pr);
  const double tb = std::pow(2.0, b);
  auto rg = reciprocal_gamma;
  RootConstants k;
  k.gamma = -kPi * e * tb / S * rg(-mu) * rg(mu + s + 1.0);
  k.eps = -kPi * tb / S * rg(-mu - a) * rg(mu + b + 1.0);
  k.delta = kPi * e / S * rg(mu + a + 1.0) * rg(-mu - b);
  k.eta = kPi / S * rg(1.0 + mu) * rg(-mu - s);
  return k;
}

inline std::array<cplx, 4> uncomposed_constants(cplx mu, const Parameters& pr) {
  const double a = pr.alpha, b = pr.beta, s = a + b;
  auto rg = reciprocal_gamma;
  const double Sb = std::sin(-b * kPi), Sa = std::sin(a * kPi);
  cplx c1 = -kPi / Sb * rg(mu + a + 1.0) * rg(-mu - b);
  cplx c2 = -kPi * b * std::pow(2.0, s + 1.0) / Sb * rg(-mu) * rg(mu + s + 1.0);
  cplx c3 = -kPi / (a * std::pow(2.0, s + 1.0) * Sa) * rg(1.0 + mu) * rg(-mu - s);
  cplx c4 = -b * kPi / (a * Sa) * rg(-mu - a) * rg(mu + b + 1.0);
  return {c1, c2, c3, c4};
}

inline double distance_to_integer(cplx z) {
  return std::abs(z - cplx(std::round(z.real()), 0.0));
}

inline ConnectionConstants connection_constants_unchecked(const SpectralPoint& sp, const Parameters& pr) {
  ConnectionConstants cc;
  for (cplx mu : sp.mus) {
    auto k = root_constants(mu, pr);
    cc.gamma.push_back(k.gamma);
    cc.eps.push_back(k.eps);
    cc.delta.push_back(k.delta);
    cc.eta.push_back(k.eta);
    cc.e.push_back(e_constant(pr));
  }
  if (pr.n == 1) cc.c = uncomposed_constants(sp.mus[0], pr);
  return cc;
}

inline constexpr double kExceptionalRadius = 1e-8;

inline ConnectionConstants connection_constants(const SpectralPoint& sp, const Parameters& pr) {
  const double a = pr.alpha, b = pr.beta;
  std::ostringstream bad;
  for (size_t j = 0; j < sp.mus.size(); ++j) {
    cplx mu = sp.mus[j];
    for (cplx z : {mu + a + 1.0, mu + b + 1.0, 1.0 + mu, mu + a + b + 1.0})
      if (distance_to_integer(z) <= kExceptionalRadius) {
        bad << " mu_" << j + 1 << "=" << detail::fmt(mu);
        break;
      }
  }
  if (!bad.str().empty()) throw ExceptionalParameter("exceptional spectral parameter:" + bad.str());
  return connection_constants_unchecked(sp, pr);
}

enum class ExtensionKind { KernelGamma0, KernelGamma1, Separated, Periodic, GeneralRelation };

struct ExtensionSpec {
  ExtensionKind kind = ExtensionKind::KernelGamma0;
  std::vector<double> theta;  // Separated: c_1..c_2n
  CMatrix A, B;               // GeneralRelation

  static ExtensionSpec kernel_gamma0() { return {ExtensionKind::KernelGamma0, {}, {}, {}}; }
  static ExtensionSpec kernel_gamma1() { return {ExtensionKind::KernelGamma1, {}, {}, {}}; }
  static ExtensionSpec separated(std::vector<double> c) { return {ExtensionKind::Separated, std::move(c), {}, {}}; }
  static ExtensionSpec periodic() { return {ExtensionKind::Periodic, {}, {}, {}}; }
  static ExtensionSpec general_relation(CMatrix a, CMatrix b) {
    return {ExtensionKind::GeneralRelation, {}, std::move(a), std::move(b)};
  }
};

inline std::string kind_name(ExtensionKind k) {
  switch (k) {
    case ExtensionKind::KernelGamma0: return "friedrichs";
    case ExtensionKind::KernelGamma1: return "gamma1";
    case ExtensionKind::Separated: return "separated";
    case ExtensionKind::Periodic: return "periodic";
    case ExtensionKind::GeneralRelation: return "general";
  }
  return "?";
}

struct WeylMatrix {
  cplx lambda;
  ExtensionSpec ext;
  CMatrix m;
};

// --- transform matrices ------------------------------------------------------

// J = [[0, -iI], [iI, 0]] on C^{2n} x C^{2n}.
inline CMatrix j_matrix(int n) {
  const cplx I(0.0, 1.0);
  CMatrix J = CMatrix::Zero(4 * n, 4 * n);
  J.block(0, 2 * n, 2 * n, 2 * n) = -I * CMatrix::Identity(2 * n, 2 * n);
  J.block(2 * n, 0, 2 * n, 2 * n) = I * CMatrix::Identity(2 * n, 2 * n);
  return J;
}

// Periodic-type transform [[B*, -A*], [A*, B*]].
inline CMatrix periodic_w(int n) {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix W = CMatrix::Zero(4 * n, 4 * n);
  auto I = CMatrix::Identity(n, n);
  // n-row blocks: [I,I,0,0], [0,0,I,-I], [0,0,I,I], [-I,I,0,0]
  W.block(0, 0, n, n) = r * I;
  W.block(0, n, n, n) = r * I;
  W.block(n, 2 * n, n, n) = r * I;
  W.block(n, 3 * n, n, n) = -r * I;
  W.block(2 * n, 2 * n, n, n) = r * I;
  W.block(2 * n, 3 * n, n, n) = r * I;
  W.block(3 * n, 0, n, n) = -r * I;
  W.block(3 * n, n, n, n) = r * I;
  return W;
}

struct RelationPair {
  CMatrix A, B;
};

inline RelationPair relation_from_w(const CMatrix& W) {
  const int m = int(W.rows()) / 2;
  return {W.block(m, 0, m, m).adjoint(), W.block(0, 0, m, m).adjoint()};
}

// Max violation of A*B = B*A, AB* = BA*, AA* + BB* = I = A*A + B*B.
inline double relation_defect(const CMatrix& A, const CMatrix& B) {
  const auto I = CMatrix::Identity(A.rows(), A.cols());
  double d = 0.0;
  d = std::max(d, (A.adjoint() * B - B.adjoint() * A).cwiseAbs().maxCoeff());
  d = std::max(d, (A * B.adjoint() - B * A.adjoint()).cwiseAbs().maxCoeff());
  d = std::max(d, (A * A.adjoint() + B * B.adjoint() - I).cwiseAbs().maxCoeff());
  d = std::max(d, (A.adjoint() * A + B.adjoint() * B - I).cwiseAbs().maxCoeff());
  return d;
}

// --- m-functions -------------------------------------------------------------

inline constexpr double kOnSpectrumTol = 1e-12;

namespace detail {

inline void need(cplx den, const char* what, cplx lambda) {
  if (std::abs(den) < kOnSpectrumTol)
    throw OnSpectrum(std::string("denominator ") + what + " vanishes at lambda=" + fmt(lambda));
}

// Position i of each n-block uses root n-i (1-based), i.e. index n-1-i.
inline int root_at(int i, int n) { return n - 1 - i; }

inline CMatrix kernel_m(const ConnectionConstants& cc, int n, bool gamma0_kernel, cplx lambda) {
  CMatrix M = CMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    int r = root_at(i, n);
    cplx den = gamma0_kernel ? cc.gamma[r] : cc.eta[r];
    need(den, gamma0_kernel ? "gamma_j" : "eta_j", lambda);
    M(i, i) = (gamma0_kernel ? -cc.eps[r] : -cc.delta[r]) / den;
    M(i, n + i) = 1.0 / den;
    M(n + i, i) = 1.0 / den;
    M(n + i, n + i) = (gamma0_kernel ? cc.delta[r] : cc.eps[r]) / den;
  }
  return M;
}

inline CMatrix separated_m(const ConnectionConstants& cc, const std::vector<double>& c, int n, cplx lambda) {
  if (int(c.size()) != 2 * n) throw std::invalid_argument("separated extension needs 2n theta entries");
  CMatrix M = CMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    int r = root_at(i, n);
    cplx g = cc.gamma[r], e = cc.eps[r], d = cc.delta[r];
    double c1 = c[i], c2 = c[n + i];
    cplx den = (c1 * g + e) * (c2 * g - d) - 1.0;
    need(den, "(c g + eps)(c' g - delta) - 1", lambda);
    M(i, i) = g * (c2 * g - d) / den;
    M(i, n + i) = -g / den;
    M(n + i, i) = -g / den;
    M(n + i, n + i) = g * (c1 * g + e) / den;
  }
  return M;
}

inline CMatrix transformed_m(const CMatrix& M0, const CMatrix& A, const CMatrix& B, cplx lambda) {
  CMatrix den = B.adjoint() - A.adjoint() * M0;
  Eigen::FullPivLU<CMatrix> lu(den);
  if (!lu.isInvertible() || lu.rcond() < kOnSpectrumTol)
    throw OnSpectrum("transformed m-function denominator singular at lambda=" + fmt(lambda));
  return (A.adjoint() + B.adjoint() * M0) * lu.inverse();
}

}  // namespace detail

inline CMatrix m_from_constants(cplx lambda, const ConnectionConstants& cc, const ExtensionSpec& ext,
                                const Parameters& pr) {
  const int n = pr.n;
  switch (ext.kind) {
    case ExtensionKind::KernelGamma0: return detail::kernel_m(cc, n, true, lambda);
    case ExtensionKind::KernelGamma1: return detail::kernel_m(cc, n, false, lambda);
    case ExtensionKind::Separated: return detail::separated_m(cc, ext.theta, n, lambda);
    case ExtensionKind::Periodic: {
      for (int j = 0; j < n; ++j) detail::need(cc.eps[j] - cc.delta[j] + 2.0, "eps - delta + 2", lambda);
      auto ab = relation_from_w(periodic_w(n));
      return detail::transformed_m(detail::kernel_m(cc, n, true, lambda), ab.A, ab.B, lambda);
    }
    case ExtensionKind::GeneralRelation:
      return detail::transformed_m(detail::kernel_m(cc, n, true, lambda), ext.A, ext.B, lambda);
  }
  throw std::logic_error("unknown extension kind");
}

inline WeylMatrix weyl_m(cplx lambda, const ExtensionSpec& ext, const Parameters& pr) {
  if (ext.kind == ExtensionKind::GeneralRelation) {
    if (ext.A.rows() != 2 * pr.n || ext.B.rows() != 2 * pr.n)
      throw std::invalid_argument("general relation matrices must be 2n x 2n");
    double d = relation_defect(ext.A, ext.B);
    if (d > 1e-10) throw InvalidParameters("general relation (A,B) violates its validity conditions");
  }
  auto sp = spectral_decompose(lambda, pr);
  auto cc = connection_constants(sp, pr);
  return {lambda, ext, m_from_constants(lambda, cc, ext, pr)};
}

// Closed form of the periodic m-function, blockwise.
inline CMatrix periodic_closed_form(const ConnectionConstants& cc, int n) {
  CMatrix M = CMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    int r = detail::root_at(i, n);
    cplx den = cc.eps[r] - cc.delta[r] + 2.0;
    M(i, i) = 2.0 * cc.eta[r] / den;
    M(i, n + i) = M(n + i, i) = (cc.eps[r] + cc.delta[r]) / den;
    M(n + i, n + i) = 2.0 * cc.gamma[r] / den;
  }
  return M;
}

inline CMatrix theta_inverse_probe(cplx lambda, const CMatrix& theta, const Parameters& pr) {
  auto M0 = weyl_m(lambda, ExtensionSpec::kernel_gamma0(), pr).m;
  CMatrix T = theta - M0;
  Eigen::FullPivLU<CMatrix> lu(T);
  if (!lu.isInvertible() || lu.rcond() < 1e-13)
    throw SingularMatrix("theta - M0(lambda) is singular at lambda=" + detail::fmt(lambda));
  return lu.inverse();
}

// n = 1 m-functions in the c1..c4 form: the kernel of f^[0] (lower) or of f^[1] (upper).
enum class UncomposedKernel { Lower, Upper };

inline CMatrix uncomposed_m_function(cplx lambda, UncomposedKernel which, const Parameters& pr) {
  if (pr.n != 1) throw std::invalid_argument("uncomposed m-function is defined for n = 1 only");
  auto sp = spectral_decompose(lambda, pr);
  connection_constants(sp, pr);
  auto [c1, c2, c3, c4] = uncomposed_constants(sp.mus[0], pr);
  CMatrix M(2, 2);
  if (which == UncomposedKernel::Lower) {
    detail::need(c3, "c3", lambda);
    M << -c1 / c3, 1.0 / c3, 1.0 / c3, -c4 / c3;
  } else {
    detail::need(c2, "c2", lambda);
    M << -c4 / c2, 1.0 / c2, 1.0 / c2, -c1 / c2;
  }
  return M;
}

// --- spectra -------------------------------------------------------------------

enum class ClosedFamily { Sigma0, Sigma1 };

struct Eigenvalue {
  double lambda;
  double residual;
  enum class Source { ClosedForm, Scan } source;
};

struct SpectrumResult {
  std::vector<Eigenvalue> eigenvalues;
  std::vector<std::string> failures;  // candidates that did not converge
};

// Entire, real-on-the-real-axis function whose zeros are the kernel-family spectrum:
// the product over all roots of gamma_j (resp. eta_j).
inline cplx kernel_condition(double lambda, bool gamma0_kernel, const Parameters& pr) {
  auto sp = spectral_roots(lambda, pr);
  cplx prod = 1.0;
  for (cplx mu : sp.mus) {
    auto k = root_constants(mu, pr);
    prod *= gamma0_kernel ? k.gamma : k.eta;
  }
  return prod;
}

inline SpectrumResult closed_form_spectrum(ClosedFamily fam, int m_max, const Parameters& pr) {
  SpectrumResult out;
  const double s = pr.alpha + pr.beta;
  for (int m = 0; m <= m_max; ++m) {
    double base = fam == ClosedFamily::Sigma0 ? m * (m + s + 1.0) : (m + 1.0) * (m - s);
    double lam = std::pow(base, pr.n);
    double res = std::abs(kernel_condition(lam, fam == ClosedFamily::Sigma0, pr));
    out.eigenvalues.push_back({lam, res, Eigenvalue::Source::ClosedForm});
  }
  return out;
}

// Scalar conditions whose real zeros are the eigenvalues of the extension.
inline std::vector<std::function<cplx(double)>> pole_conditions(const ExtensionSpec& ext, const Parameters& pr) {
  const int n = pr.n;
  std::vector<std::function<cplx(double)>> conds;
  auto per_root = [&pr](double lam, int r) { return root_constants(spectral_roots(lam, pr).mus[r], pr); };
  switch (ext.kind) {
    case ExtensionKind::KernelGamma0:
      conds.push_back([pr](double lam) { return kernel_condition(lam, true, pr); });
      break;
    case ExtensionKind::KernelGamma1:
      conds.push_back([pr](double lam) { return kernel_condition(lam, false, pr); });
      break;
    case ExtensionKind::Separated:
      if (int(ext.theta.size()) != 2 * n) throw std::invalid_argument("separated extension needs 2n theta entries");
      // (c g + eps)(c' g - delta) - 1 = g (c c' g + c' eps - c delta - eta) via g eta - delta eps = 1;
      // the bracket drops the removable zeros of g.
      for (int i = 0; i < n; ++i) {
        double c1 = ext.theta[i], c2 = ext.theta[n + i];
        int r = detail::root_at(i, n);
        conds.push_back([=](double lam) {
          auto k = per_root(lam, r);
          return c1 * c2 * k.gamma + c2 * k.eps - c1 * k.delta - k.eta;
        });
      }
      break;
    case ExtensionKind::Periodic:
      for (int i = 0; i < n; ++i) {
        int r = detail::root_at(i, n);
        conds.push_back([=](double lam) {
          auto k = per_root(lam, r);
          return k.eps - k.delta + 2.0;
        });
      }
      break;
    case ExtensionKind::GeneralRelation:
      throw std::invalid_argument("pole scan is not defined for a general relation");
  }
  return conds;
}

struct ScanOptions {
  int grid = 2000;
  double accept = 1e-8;
  double exclusion = 1e-8;
};

namespace detail {

inline bool is_real_value(cplx v) { return std::abs(v.imag()) <= 1e-9 * std::max(1.0, std::abs(v.real())); }

inline double bisect(const std::function<cplx(double)>& f, double a, double b, double fa) {
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    double fm = f(m).real();
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  double fa2 = std::abs(f(a)), fb2 = std::abs(f(b));
  return fa2 <= fb2 ? a : b;
}

// Minimize |f| on [a,b] (golden section), then Gauss-Newton in the real variable.
inline double polish_complex(const std::function<cplx(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = std::abs(f(x1)), f2 = std::abs(f(x2));
  for (int it = 0; it < 100 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = std::abs(f(x1));
    } else {
      a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = std::abs(f(x2));
    }
  }
  double x = f1 < f2 ? x1 : x2;
  for (int it = 0; it < 20; ++it) {
    double h = 1e-7 * std::max(1.0, std::abs(x));
    cplx fx = f(x), d = (f(x + h) - f(x - h)) / (2.0 * h);
    if (std::norm(d) == 0.0) break;
    double step = -(std::conj(d) * fx).real() / std::norm(d);
    x += step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace detail

inline SpectrumResult pole_scan(const ExtensionSpec& ext, double lo, double hi, const Parameters& pr,
                                const ScanOptions& opt = {}) {
  if (!(hi > lo)) throw std::invalid_argument("pole_scan: empty interval");
  SpectrumResult out;
  std::vector<double> found;
  auto conds = pole_conditions(ext, pr);
  std::vector<double> xs(opt.grid);
  for (int i = 0; i < opt.grid; ++i) {
    double x = lo + (hi - lo) * i / (opt.grid - 1);
    if (std::abs(x) < opt.exclusion) x = x < 0 ? -opt.exclusion : opt.exclusion;
    xs[i] = x;
  }
  auto add = [&](double root, double res) {
    for (double f : found)
      if (std::abs(f - root) <= 1e-8 * std::max(1.0, std::abs(root))) return;
    found.push_back(root);
    out.eigenvalues.push_back({root, res, Eigenvalue::Source::Scan});
  };
  // The grid skips lambda = 0, where the per-root conditions need not be analytic;
  // the conditions themselves are defined there, so test it directly.
  if (lo <= 0.0 && hi >= 0.0)
    for (const auto& f : conds)
      if (double r0 = std::abs(f(0.0)); r0 < opt.accept) add(0.0, r0);
  for (const auto& f : conds) {
    std::vector<cplx> v(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) v[i] = f(xs[i]);
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      if (v[i] == 0.0) {
        add(xs[i], 0.0);
        continue;
      }
      bool real_bracket = detail::is_real_value(v[i]) && detail::is_real_value(v[i + 1]);
      double root;
      if (real_bracket) {
        if ((v[i].real() < 0) == (v[i + 1].real() < 0)) continue;
        root = detail::bisect(f, xs[i], xs[i + 1], v[i].real());
      } else {
        if (i == 0) continue;
        double here = std::abs(v[i]);
        if (!(here <= std::abs(v[i - 1]) && here <= std::abs(v[i + 1]))) continue;
        root = detail::polish_complex(f, xs[i - 1], xs[i + 1]);
      }
      double res = std::abs(f(root));
      if (res < opt.accept) {
        add(root, res);
      } else if (real_bracket) {
        std::ostringstream os;
        os.precision(12);
        os << "candidate near " << root << " rejected: |condition|=" << res;
        out.failures.push_back(os.str());
      }
    }
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const Eigenvalue& a, const Eigenvalue& b) { return a.lambda < b.lambda; });
  return out;
}

// --- Herglotz ------------------------------------------------------------------

struct HerglotzEntry {
  cplx lambda;
  double min_imag_eigenvalue;  // of Im M at the upper half-plane representative
  double symmetry_error;       // max |M(conj l) - M(l)^*|
  bool positive;
  bool symmetric;
  std::string error;  // non-empty when the m-function could not be evaluated
};

struct HerglotzReport {
  std::vector<HerglotzEntry> entries;
  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const HerglotzEntry& e) { return e.error.empty() && e.positive && e.symmetric; });
  }
};

inline double min_imag_eigenvalue(const CMatrix& M) {
  const cplx I(0.0, 1.0);
  CMatrix H = (M - M.adjoint()) / (2.0 * I);
  H = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline constexpr double kHerglotzPositivityTol = 1e-9;
inline constexpr double kHerglotzSymmetryTol = 1e-10;

inline HerglotzEntry herglotz_entry(cplx lambda, const CMatrix& m_at, const CMatrix& m_conj) {
  HerglotzEntry e;
  e.lambda = lambda;
  const CMatrix& upper = lambda.imag() > 0 ? m_at : m_conj;
  e.min_imag_eigenvalue = min_imag_eigenvalue(upper);
  e.symmetry_error = (m_conj - m_at.adjoint()).cwiseAbs().maxCoeff();
  e.positive = e.min_imag_eigenvalue >= -kHerglotzPositivityTol;
  e.symmetric = e.symmetry_error < kHerglotzSymmetryTol;
  return e;
}

inline HerglotzReport herglotz_check(const ExtensionSpec& ext, const std::vector<cplx>& samples, const Parameters& pr) {
  HerglotzReport rep;
  for (cplx lam : samples) {
    if (lam.imag() == 0.0) {
      HerglotzEntry e;
      e.lambda = lam;
      e.error = "sample on the real axis";
      rep.entries.push_back(e);
      continue;
    }
    try {
      auto a = weyl_m(lam, ext, pr).m;
      auto b = weyl_m(std::conj(lam), ext, pr).m;
      rep.entries.push_back(herglotz_entry(lam, a, b));
    } catch (const Error& err) {
      HerglotzEntry e;
      e.lambda = lam;
      e.error = err.what();
      rep.entries.push_back(e);
    }
  }
  return rep;
}

// --- n = 1 gamma-field -----------------------------------------------------------

struct GammaFieldValue {
  cplx first, second;
};

struct SolutionPair {
  std::array<cplx, 2> value;  // (w1, w2)
  std::array<cplx, 2> dx;     // d/dx
};

// Fundamental system built at x = -1 (z = (1+x)/2 = 1 - t): w1 -> -1 and w2 ~ z^{-b}/(b 2^{a+b+1}).
inline SolutionPair n1_solutions(cplx mu, double x, const Parameters& pr) {
  const double a = pr.alpha, b = pr.beta, s = a + b;
  const double z = 0.5 * (1.0 + x);
  const double k = 1.0 / (b * std::pow(2.0, s + 1.0));
  cplx a1 = -mu, b1 = mu + s + 1.0, a2 = -mu - b, b2 = mu + a + 1.0;
  cplx F1 = hyp2f1(a1, b1, b + 1.0, z), dF1 = hyp2f1_derivative(a1, b1, b + 1.0, z, 1);
  cplx F2 = hyp2f1(a2, b2, 1.0 - b, z), dF2 = hyp2f1_derivative(a2, b2, 1.0 - b, z, 1);
  double zb = std::pow(z, -b);
  SolutionPair sp;
  sp.value = {-F1, k * zb * F2};
  sp.dx = {-0.5 * dF1, 0.5 * k * zb * (dF2 - b / z * F2)};
  return sp;
}

inline GammaFieldValue gamma_field_n1(cplx lambda, double x, const Parameters& pr) {
  if (pr.n != 1) throw std::invalid_argument("gamma field is implemented for n = 1 only");
  if (!(x > -1.0 && x < 1.0)) throw std::invalid_argument("x must lie in (-1,1)");
  auto sp = spectral_decompose(lambda, pr);
  auto cc = connection_constants(sp, pr);
  auto [c1, c2, c3, c4] = *cc.c;
  detail::need(c3, "c3", lambda);
  auto w = n1_solutions(sp.mus[0], x, pr).value;
  return {w[0] - c1 / c3 * w[1], w[1] / c3};
}

}  // namespace jbt
