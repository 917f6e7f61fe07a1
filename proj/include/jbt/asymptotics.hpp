#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "jbt/errors.hpp"
#include "jbt/specfun.hpp"

namespace jbt {

struct Parameters {
  double alpha = 0.3;
  double beta = 0.7;
  int n = 1;
  // C(n,k) scaling of the weight a_k, k = 1..n; empty means all ones.
  std::vector<double> coefficient_overrides;

  Parameters() = default;
  Parameters(double a, double b, int power, std::vector<double> overrides = {})
      : alpha(a), beta(b), n(power), coefficient_overrides(std::move(overrides)) {
    validate();
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameters("alpha must lie in (0,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidParameters("beta must lie in (0,1)");
    if (n < 1) throw InvalidParameters("power n must be >= 1");
    if (!coefficient_overrides.empty() && int(coefficient_overrides.size()) != n)
      throw InvalidParameters("coefficient overrides need exactly n entries");
  }

  double weight_coeff(int k) const {
    return coefficient_overrides.empty() ? 1.0 : coefficient_overrides.at(k - 1);
  }
};

// i + s*alpha + t*beta, kept exact.
struct Exponent {
  int i = 0, s = 0, t = 0;

  double value(double alpha, double beta) const { return i + s * alpha + t * beta; }
  bool is_zero() const { return i == 0 && s == 0 && t == 0; }

  friend Exponent operator+(Exponent a, Exponent b) { return {a.i + b.i, a.s + b.s, a.t + b.t}; }
  friend Exponent operator-(Exponent a, int k) { return {a.i - k, a.s, a.t}; }
  friend auto operator<=>(const Exponent&, const Exponent&) = default;
};

inline constexpr double kExponentTol = 1e-12;
inline constexpr double kCancelTol = 1e-9;
inline constexpr double kMergeTol = 1e-13;

struct Term {
  cplx coeff;
  Exponent p;  // power of (1-x)
  Exponent q;  // power of (1+x)
};

// Endpoint tag is +1 or -1. alpha/beta ride along so exponents can be evaluated.
struct EndpointExpansion {
  int endpoint = 1;
  double alpha = 0.3, beta = 0.7;
  std::vector<Term> terms;

  EndpointExpansion() = default;
  EndpointExpansion(int ep, double a, double b, std::vector<Term> ts = {})
      : endpoint(ep), alpha(a), beta(b), terms(std::move(ts)) {}
  EndpointExpansion(int ep, const Parameters& pr, std::vector<Term> ts = {})
      : EndpointExpansion(ep, pr.alpha, pr.beta, std::move(ts)) {}

  bool empty() const { return terms.empty(); }
  double pval(const Term& t) const { return t.p.value(alpha, beta); }
  double qval(const Term& t) const { return t.q.value(alpha, beta); }
};

struct MaximalDomainElement {
  EndpointExpansion at_plus;
  EndpointExpansion at_minus;

  MaximalDomainElement() : at_plus(1, 0.3, 0.7), at_minus(-1, 0.3, 0.7) {}
  MaximalDomainElement(EndpointExpansion plus, EndpointExpansion minus)
      : at_plus(std::move(plus)), at_minus(std::move(minus)) {
    if (at_plus.endpoint != 1 || at_minus.endpoint != -1)
      throw EndpointMismatch("maximal-domain element needs (+1, -1) expansions");
  }

  const EndpointExpansion& at(int endpoint) const { return endpoint == 1 ? at_plus : at_minus; }
  EndpointExpansion& at(int endpoint) { return endpoint == 1 ? at_plus : at_minus; }
};

inline EndpointExpansion canonical(EndpointExpansion e) {
  auto& ts = e.terms;
  std::stable_sort(ts.begin(), ts.end(), [](const Term& a, const Term& b) {
    return std::tie(a.p, a.q) < std::tie(b.p, b.q);
  });
  // A merged coefficient at roundoff level of its summands is an exact cancellation.
  std::vector<Term> out;
  std::vector<double> scale_of;
  for (const auto& t : ts) {
    if (!out.empty() && out.back().p == t.p && out.back().q == t.q) {
      out.back().coeff += t.coeff;
      scale_of.back() = std::max(scale_of.back(), std::abs(t.coeff));
    } else {
      out.push_back(t);
      scale_of.push_back(std::abs(t.coeff));
    }
  }
  for (size_t i = 0; i < out.size(); ++i)
    if (std::abs(out[i].coeff) <= kMergeTol * scale_of[i]) out[i].coeff = 0.0;
  std::erase_if(out, [](const Term& t) { return t.coeff == 0.0; });
  ts = std::move(out);
  return e;
}

inline EndpointExpansion scale(EndpointExpansion e, cplx c) {
  for (auto& t : e.terms) t.coeff *= c;
  return canonical(std::move(e));
}

inline EndpointExpansion conj(EndpointExpansion e) {
  for (auto& t : e.terms) t.coeff = std::conj(t.coeff);
  return e;
}

inline void require_same(const EndpointExpansion& a, const EndpointExpansion& b) {
  if (a.endpoint != b.endpoint) throw EndpointMismatch("expansions attached to different endpoints");
  if (a.alpha != b.alpha || a.beta != b.beta)
    throw EndpointMismatch("expansions built for different (alpha, beta)");
}

inline EndpointExpansion add(EndpointExpansion a, const EndpointExpansion& b) {
  require_same(a, b);
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  return canonical(std::move(a));
}

inline EndpointExpansion subtract(EndpointExpansion a, const EndpointExpansion& b) {
  return add(std::move(a), scale(b, -1.0));
}

// Exponents numerically indistinguishable from 0 contribute no derivative term, so
// rational (alpha, beta) collisions never leave roundoff-sized orphans behind.
inline EndpointExpansion differentiate(const EndpointExpansion& e) {
  EndpointExpansion out(e.endpoint, e.alpha, e.beta);
  out.terms.reserve(2 * e.terms.size());
  for (const auto& t : e.terms) {
    double p = e.pval(t), q = e.qval(t);
    if (std::abs(p) > kExponentTol) out.terms.push_back({-t.coeff * p, t.p - 1, t.q});
    if (std::abs(q) > kExponentTol) out.terms.push_back({t.coeff * q, t.p, t.q - 1});
  }
  return canonical(std::move(out));
}

inline EndpointExpansion differentiate(const EndpointExpansion& e, int times) {
  EndpointExpansion out = e;
  for (int i = 0; i < times; ++i) out = differentiate(out);
  return out;
}

inline EndpointExpansion multiply(const EndpointExpansion& a, const EndpointExpansion& b) {
  require_same(a, b);
  EndpointExpansion out(a.endpoint, a.alpha, a.beta);
  out.terms.reserve(a.terms.size() * b.terms.size());
  for (const auto& x : a.terms)
    for (const auto& y : b.terms) out.terms.push_back({x.coeff * y.coeff, x.p + y.p, x.q + y.q});
  return canonical(std::move(out));
}

namespace detail {

// binom(q, i) with factors snapped to zero when q sits on an integer.
inline double binom_real(double q, int i) {
  double r = 1.0;
  for (int k = 0; k < i; ++k) {
    double f = q - k;
    if (std::abs(f) <= kExponentTol) return 0.0;
    r *= f / (k + 1);
  }
  return r;
}

}  // namespace detail

// Each term c(1-x)^p(1+x)^q at x=1 is re-expanded as c 2^q sum_i binom(q,i)(-1/2)^i (1-x)^(p+i),
// so cancellations between different (1+x) powers are seen. Symmetric at x=-1.
inline cplx endpoint_limit(const EndpointExpansion& e) {
  struct Piece {
    double expo;
    cplx c;
  };
  std::vector<Piece> pieces;
  for (const auto& t : e.terms) {
    double vanish = e.endpoint == 1 ? e.pval(t) : e.qval(t);
    double other = e.endpoint == 1 ? e.qval(t) : e.pval(t);
    if (vanish > kExponentTol) continue;
    int imax = int(std::floor(-vanish + kExponentTol));
    cplx base = t.coeff * std::pow(2.0, other);
    double half = 1.0;
    for (int i = 0; i <= imax; ++i) {
      double b = detail::binom_real(other, i) * half;
      if (b != 0.0) pieces.push_back({vanish + i, base * b});
      half *= -0.5;
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.expo < b.expo; });

  cplx limit = 0.0;
  for (size_t g = 0; g < pieces.size();) {
    size_t h = g;
    cplx sum = 0.0;
    double biggest = 0.0;
    while (h < pieces.size() && pieces[h].expo - pieces[g].expo <= kExponentTol) {
      sum += pieces[h].c;
      biggest = std::max(biggest, std::abs(pieces[h].c));
      ++h;
    }
    double expo = pieces[g].expo;
    if (expo < -kExponentTol) {
      if (std::abs(sum) > kCancelTol * biggest) {
        std::ostringstream os;
        os.precision(6);
        os << "divergent limit at x=" << e.endpoint << ": exponent " << expo << " keeps coefficient "
           << std::abs(sum);
        throw DivergentLimit(os.str());
      }
    } else if (expo <= kExponentTol) {
      limit += sum;
    }
    g = h;
  }
  return limit;
}

// a_k = C(n,k) (1-x)^{alpha+k} (1+x)^{beta+k}
inline EndpointExpansion weight(int k, const Parameters& pr, int endpoint) {
  return EndpointExpansion(endpoint, pr, {{pr.weight_coeff(k), {k, 1, 0}, {k, 0, 1}}});
}

namespace detail {

struct DerivCache {
  explicit DerivCache(EndpointExpansion e) { d.push_back(std::move(e)); }
  const EndpointExpansion& operator[](int k) {
    while (int(d.size()) <= k) d.push_back(differentiate(d.back()));
    return d[k];
  }
  std::vector<EndpointExpansion> d;
};

}  // namespace detail

// Un-limited sesquilinear expression at one endpoint, as a symbolic expansion.
inline EndpointExpansion sesquilinear_expression(const EndpointExpansion& f, const EndpointExpansion& g,
                                                 const Parameters& pr) {
  require_same(f, g);
  EndpointExpansion total(f.endpoint, pr);
  if (f.empty() || g.empty()) return total;
  detail::DerivCache df(f), dg(conj(g));
  for (int k = 1; k <= pr.n; ++k) {
    auto ak = weight(k, pr, f.endpoint);
    auto ag = multiply(ak, dg[k]);
    auto af = multiply(ak, df[k]);
    for (int j = 1; j <= k; ++j) {
      double sign = ((k + j) % 2 == 0) ? 1.0 : -1.0;
      for (auto t : multiply(differentiate(ag, k - j), df[j - 1]).terms) {
        t.coeff *= sign;
        total.terms.push_back(t);
      }
      for (auto t : multiply(differentiate(af, k - j), dg[j - 1]).terms) {
        t.coeff *= -sign;
        total.terms.push_back(t);
      }
    }
  }
  return canonical(std::move(total));
}

inline cplx sesquilinear_form(const MaximalDomainElement& f, const MaximalDomainElement& g,
                              const Parameters& pr, int endpoint) {
  return endpoint_limit(sesquilinear_expression(f.at(endpoint), g.at(endpoint), pr));
}

// f^{[k]} by the Naimark recursion, then the endpoint limit.
inline EndpointExpansion quasi_derivative_expression(const EndpointExpansion& f, int k, const Parameters& pr) {
  const int n = pr.n;
  if (k < 0 || k > 2 * n - 1) throw std::invalid_argument("quasi-derivative order outside 0..2n-1");
  if (k < n) return differentiate(f, k);
  detail::DerivCache df(f);
  EndpointExpansion cur = multiply(weight(n, pr, f.endpoint), df[n]);
  for (int m = 1; n + m <= k; ++m)
    cur = subtract(multiply(weight(n - m, pr, f.endpoint), df[n - m]), differentiate(cur));
  return cur;
}

inline cplx quasi_derivative_symbolic(const MaximalDomainElement& f, int k, const Parameters& pr, int endpoint) {
  return endpoint_limit(quasi_derivative_expression(f.at(endpoint), k, pr));
}

}  // namespace jbt
