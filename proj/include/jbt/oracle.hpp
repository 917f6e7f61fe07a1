#pragma once

// Independent numeric path for the sesquilinear limits: evaluate the raw expression in
// quad precision close to the endpoint and Richardson-extrapolate away the known
// power-law corrections. Shares no code with the symbolic limit machinery.

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "jbt/asymptotics.hpp"

namespace jbt {

namespace oracle_detail {

using quad = __float128;

struct QTerm {
  quad c, p, q;
};

inline std::vector<QTerm> real_part(const EndpointExpansion& e, bool imag) {
  std::vector<QTerm> out;
  for (const auto& t : e.terms) {
    double c = imag ? t.coeff.imag() : t.coeff.real();
    if (c == 0.0) continue;
    quad p = quad(t.p.i) + quad(t.p.s) * quad(e.alpha) + quad(t.p.t) * quad(e.beta);
    quad q = quad(t.q.i) + quad(t.q.s) * quad(e.alpha) + quad(t.q.t) * quad(e.beta);
    out.push_back({quad(c), p, q});
  }
  return out;
}

inline quad falling(quad p, int i) {
  quad r = 1;
  for (int k = 0; k < i; ++k) r *= (p - k);
  return r;
}

inline quad binom(int n, int k) {
  quad r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// d-th x-derivative of sum c (1-x)^p (1+x)^q given u = 1-x and w = 1+x.
inline quad eval_derivative(const std::vector<QTerm>& f, int d, quad u, quad w) {
  quad total = 0;
  for (const auto& t : f) {
    quad acc = 0;
    for (int i = 0; i <= d; ++i) {
      quad left = ((i % 2) ? -1 : 1) * falling(t.p, i) * powq(u, t.p - i);
      quad right = falling(t.q, d - i) * powq(w, t.q - (d - i));
      acc += binom(d, i) * left * right;
    }
    total += t.c * acc;
  }
  return total;
}

// Raw [f,g]_n expression for real f, g at the point with 1-x = u, 1+x = w.
inline quad raw_form(const std::vector<QTerm>& f, const std::vector<QTerm>& g, const Parameters& pr,
                     quad u, quad w) {
  const int n = pr.n;
  std::vector<quad> df(2 * n), dg(2 * n);
  for (int d = 0; d < 2 * n; ++d) {
    df[d] = eval_derivative(f, d, u, w);
    dg[d] = eval_derivative(g, d, u, w);
  }
  quad total = 0;
  for (int k = 1; k <= n; ++k) {
    std::vector<QTerm> ak = {{quad(pr.weight_coeff(k)), k + quad(pr.alpha), k + quad(pr.beta)}};
    std::vector<quad> da(k);
    for (int i = 0; i < k; ++i) da[i] = eval_derivative(ak, i, u, w);
    for (int j = 1; j <= k; ++j) {
      int r = k - j;
      quad ag = 0, af = 0;
      for (int i = 0; i <= r; ++i) {
        ag += binom(r, i) * da[i] * dg[k + r - i];
        af += binom(r, i) * da[i] * df[k + r - i];
      }
      quad sign = ((k + j) % 2 == 0) ? 1 : -1;
      total += sign * (ag * df[j - 1] - af * dg[j - 1]);
    }
  }
  return total;
}

inline constexpr int kFirstLevel = 8;
inline constexpr int kLastLevel = 24;

// Positive correction exponents at this endpoint: integers, a+Z>=0, -a+Z>0 with a the
// local parameter. Sorted and deduplicated.
inline std::vector<double> correction_exponents(double a, double cap) {
  std::vector<double> r;
  for (int k = 0; k <= int(cap) + 2; ++k) {
    if (k >= 1) r.push_back(k);
    r.push_back(a + k);
    if (k >= 1) r.push_back(-a + k);
  }
  std::erase_if(r, [&](double x) { return x <= 0.0 || x > cap; });
  std::sort(r.begin(), r.end());
  std::vector<double> out;
  for (double x : r)
    if (out.empty() || x - out.back() > 1e-9) out.push_back(x);
  return out;
}

inline double extrapolate_real(const std::vector<QTerm>& f, const std::vector<QTerm>& g, const Parameters& pr,
                               int endpoint) {
  if (f.empty() || g.empty()) return 0.0;
  const int levels = kLastLevel - kFirstLevel + 1;
  std::vector<quad> col(levels);
  for (int m = 0; m < levels; ++m) {
    quad h = ldexpq(quad(1), -(kFirstLevel + m));
    quad u = endpoint == 1 ? h : 2 - h;
    quad w = endpoint == 1 ? 2 - h : h;
    col[m] = raw_form(f, g, pr, u, w);
  }
  auto exps = correction_exponents(endpoint == 1 ? pr.alpha : pr.beta, 4.0);
  if (int(exps.size()) > levels - 3) exps.resize(levels - 3);

  // Column k removes h^{exps[k-1]}; entries shrink by one per column.
  std::vector<quad> prev = col;
  for (double r : exps) {
    quad f2 = powq(2, quad(r));
    std::vector<quad> next(prev.size() - 1);
    for (size_t m = 1; m < prev.size(); ++m) next[m - 1] = (f2 * prev[m] - prev[m - 1]) / (f2 - 1);
    prev = std::move(next);
  }
  quad best = prev.back();
  quad spread = fabsq(prev.back() - prev[prev.size() - 2]);
  if (spread > quad(1e-7) * (1 + fabsq(best)))
    throw ExtrapolationUnstable("Richardson estimates disagree by " + std::to_string(double(spread)));
  return double(best);
}

}  // namespace oracle_detail

inline cplx numeric_limit_oracle(const MaximalDomainElement& f, const MaximalDomainElement& g,
                                 const Parameters& pr, int endpoint) {
  using namespace oracle_detail;
  const auto& fe = f.at(endpoint);
  const auto& ge = g.at(endpoint);
  auto fr = real_part(fe, false), fi = real_part(fe, true);
  auto gr = real_part(ge, false), gi = real_part(ge, true);
  // [fr + i fi, gr + i gi] = [fr,gr] + [fi,gi] + i([fi,gr] - [fr,gi])
  double re = extrapolate_real(fr, gr, pr, endpoint) + extrapolate_real(fi, gi, pr, endpoint);
  double im = extrapolate_real(fi, gr, pr, endpoint) - extrapolate_real(fr, gi, pr, endpoint);
  return {re, im};
}

}  // namespace jbt
