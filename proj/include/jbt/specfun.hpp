#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include "jbt/errors.hpp"

namespace jbt {

using cplx = std::complex<double>;

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPoleTol = 1e-12;

// Lanczos g=7, n=9.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline bool near_nonpositive_integer(cplx z, double tol = kPoleTol) {
  double r = std::round(z.real());
  return r <= 0.0 && std::abs(z - cplx(r, 0.0)) <= tol;
}

// sin(pi z) with the real part reduced first, so zeros at integers come out exact.
inline cplx sinpi(cplx z) {
  double r = std::round(z.real());
  cplx w = z - r;
  cplx s = std::sin(kPi * w);
  return (static_cast<long long>(r) % 2 == 0) ? s : -s;
}

// log Gamma for Re z >= 0.5 (no branch bookkeeping; only exp() of it is used).
inline cplx lanczos_log_gamma(cplx z) {
  z -= 1.0;
  cplx x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + double(i));
  cplx t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline std::string fmt(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

}  // namespace detail

inline cplx gamma_complex(cplx z) {
  if (detail::near_nonpositive_integer(z))
    throw PoleAt("gamma pole at z=" + detail::fmt(z));
  if (z.real() < 0.5)
    return detail::kPi / (detail::sinpi(z) * std::exp(detail::lanczos_log_gamma(1.0 - z)));
  return std::exp(detail::lanczos_log_gamma(z));
}

// 1/Gamma is entire; evaluated without ever forming Gamma at a pole.
inline cplx reciprocal_gamma(cplx z) {
  if (detail::near_nonpositive_integer(z)) return 0.0;
  if (z.real() < 0.5)
    return detail::sinpi(z) * std::exp(detail::lanczos_log_gamma(1.0 - z)) / detail::kPi;
  return std::exp(-detail::lanczos_log_gamma(z));
}

namespace detail {

inline cplx hyp2f1_series(cplx a, cplx b, cplx c, cplx z) {
  constexpr int kMaxTerms = 100000;
  cplx sum = 1.0, term = 1.0;
  for (int k = 0; k < kMaxTerms; ++k) {
    term *= (a + double(k)) * (b + double(k)) / ((c + double(k)) * double(k + 1)) * z;
    sum += term;
    if (term == 0.0 || std::abs(term) <= 1e-17 * std::abs(sum)) return sum;
  }
  throw NoConvergence("2F1 series did not converge at z=" + fmt(z));
}

}  // namespace detail

inline cplx hyp2f1(cplx a, cplx b, cplx c, cplx z) {
  if (detail::near_nonpositive_integer(c))
    throw ParameterPole("2F1 lower parameter c=" + detail::fmt(c) + " is a non-positive integer");
  if (z == 0.0) return 1.0;
  double az = std::abs(z), a1z = std::abs(1.0 - z);
  if (az <= 0.75 || (az < 1.0 && a1z >= az)) return detail::hyp2f1_series(a, b, c, z);
  if (a1z > 0.75 && az >= 1.0)
    throw NoConvergence("2F1 argument z=" + detail::fmt(z) + " outside the series and 1-z regions");

  // F(a,b;c;z) via the 1-z connection, all Gammas reciprocal.
  cplx d = c - a - b;
  cplx s = detail::sinpi(d);
  if (std::abs(s) < 1e-8)
    throw NoConvergence("2F1 connection degenerate: c-a-b=" + detail::fmt(d) + " is an integer");
  cplx w = 1.0 - z;
  cplx first = reciprocal_gamma(c - a) * reciprocal_gamma(c - b) * reciprocal_gamma(1.0 - d);
  if (first != 0.0) first *= detail::hyp2f1_series(a, b, 1.0 - d, w);
  cplx second = reciprocal_gamma(a) * reciprocal_gamma(b) * reciprocal_gamma(1.0 + d);
  if (second != 0.0) second *= std::pow(w, d) * detail::hyp2f1_series(c - a, c - b, 1.0 + d, w);
  return detail::kPi / s * gamma_complex(c) * (first - second);
}

inline cplx hyp2f1_derivative(cplx a, cplx b, cplx c, cplx z, int order) {
  if (order < 0) throw std::invalid_argument("hyp2f1_derivative: negative order");
  cplx pre = 1.0;
  for (int i = 0; i < order; ++i) {
    if (detail::near_nonpositive_integer(c + double(i)))
      throw ParameterPole("2F1 derivative hits c+i at a non-positive integer");
    pre *= (a + double(i)) * (b + double(i)) / (c + double(i));
  }
  if (pre == 0.0) return 0.0;
  return pre * hyp2f1(a + double(order), b + double(order), c + double(order), z);
}

}  // namespace jbt
