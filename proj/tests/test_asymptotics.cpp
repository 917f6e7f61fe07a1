#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "jbt/asymptotics.hpp"
#include "jbt/oracle.hpp"
#include "jbt/triple.hpp"

using namespace jbt;
using testing::uniform;

namespace {

EndpointExpansion plus_exp(const Parameters& pr, std::vector<Term> ts) { return canonical(EndpointExpansion(1, pr, std::move(ts))); }

bool same(const EndpointExpansion& a, const EndpointExpansion& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (size_t i = 0; i < a.terms.size(); ++i)
    if (!(a.terms[i].p == b.terms[i].p && a.terms[i].q == b.terms[i].q && a.terms[i].coeff == b.terms[i].coeff))
      return false;
  return true;
}

// Small integer coefficients keep every product exact in double precision.
EndpointExpansion random_expansion(const Parameters& pr, int endpoint) {
  std::uniform_int_distribution<int> c(-4, 4), e(-2, 3), st(-1, 1);
  std::vector<Term> ts;
  for (int k = 0; k < 3; ++k) ts.push_back({double(c(testing::rng())), {e(testing::rng()), st(testing::rng()), 0}, {e(testing::rng()), 0, st(testing::rng())}});
  return canonical(EndpointExpansion(endpoint, pr, ts));
}

}  // namespace

TEST_CASE("Parameters validation", "[asymptotics]") {
  CHECK_THROWS_AS(Parameters(1.5, 0.5, 1), InvalidParameters);
  CHECK_THROWS_AS(Parameters(0.5, 0.0, 1), InvalidParameters);
  CHECK_THROWS_AS(Parameters(0.5, 0.5, 0), InvalidParameters);
  CHECK_THROWS_AS(Parameters(0.5, 0.5, 2, {1.0}), InvalidParameters);
  CHECK(Parameters(0.5, 0.5, 2, {1.0, 3.0}).weight_coeff(2) == 3.0);
}

TEST_CASE("differentiate", "[asymptotics]") {
  Parameters pr(0.3, 0.7, 1);
  CHECK(differentiate(plus_exp(pr, {{1.0, {}, {}}})).empty());
  auto d = differentiate(plus_exp(pr, {{1.0, {1, 0, 0}, {}}}));
  REQUIRE(d.terms.size() == 1);
  CHECK(d.terms[0].coeff == -1.0);
  CHECK(d.terms[0].p.is_zero());

  auto v = plus_exp(pr, {{1.0, {0, -1, 0}, {}}});
  auto dv = differentiate(v);
  REQUIRE(dv.terms.size() == 1);
  CHECK(std::abs(dv.terms[0].coeff - 0.3) < 1e-15);
  CHECK(dv.terms[0].p == Exponent{-1, -1, 0});
  // finite difference at x = 0.9
  const double h = 1e-6;
  auto f = [](double x) { return std::pow(1 - x, -0.3); };
  double fd = (f(0.9 + h) - f(0.9 - h)) / (2 * h);
  CHECK(std::abs(0.3 * std::pow(0.1, -1.3) - fd) < 1e-6 * std::abs(fd));
}

TEST_CASE("multiply", "[asymptotics]") {
  Parameters pr(0.3, 0.7, 1);
  auto e = plus_exp(pr, {{2.0, {1, 1, 0}, {0, 0, 1}}, {-1.0, {0, -1, 0}, {}}});
  CHECK(same(multiply(e, plus_exp(pr, {{1.0, {}, {}}})), e));

  auto prod = multiply(plus_exp(pr, {{1.0, {0, 1, 0}, {}}}), plus_exp(pr, {{1.0, {0, -1, 0}, {}}}));
  REQUIRE(prod.terms.size() == 1);
  CHECK(prod.terms[0].p.is_zero());
  CHECK(prod.terms[0].q.is_zero());

  auto a1v = multiply(weight(1, pr, 1), plus_exp(pr, {{1.0, {-1, -1, 0}, {}}}));
  REQUIRE(a1v.terms.size() == 1);
  CHECK(a1v.terms[0].p.is_zero());
  CHECK(a1v.terms[0].q == Exponent{1, 0, 1});

  CHECK_THROWS_AS(multiply(e, EndpointExpansion(-1, pr)), EndpointMismatch);
}

TEST_CASE("endpoint limit", "[asymptotics]") {
  Parameters pr(0.3, 0.7, 1);
  CHECK(endpoint_limit(plus_exp(pr, {{3.0, {1, 0, 0}, {}}})) == 0.0);
  cplx c(1.5, -0.5);
  CHECK(std::abs(endpoint_limit(plus_exp(pr, {{c, {}, {1, 0, 1}}})) - c * std::pow(2.0, 1.7)) < 1e-14);
  CHECK_THROWS_AS(endpoint_limit(plus_exp(pr, {{1.0, {0, -1, 0}, {}}})), DivergentLimit);
  // At -1 the roles swap.
  EndpointExpansion m(-1, pr, {{2.0, {0, 1, 0}, {}}});
  CHECK(std::abs(endpoint_limit(m) - 2.0 * std::pow(2.0, 0.3)) < 1e-14);
}

TEST_CASE("endpoint limit groups numerically equal exponents", "[asymptotics]") {
  // alpha = beta: (1-x)^{-a} and (1-x)^{-b} are the same power.
  Parameters pr(0.5, 0.5, 1);
  auto e = plus_exp(pr, {{1.0, {0, -1, 0}, {}}, {-1.0, {0, 0, -1}, {}}, {4.0, {}, {}}});
  CHECK(std::abs(endpoint_limit(e) - 4.0) < 1e-15);
}

TEST_CASE("endpoint limit re-expands the analytic factor", "[asymptotics]") {
  // (1-x)^{-1}[(1+x) - 2] = -1 exactly.
  Parameters pr(0.3, 0.7, 1);
  auto e = plus_exp(pr, {{1.0, {-1, 0, 0}, {1, 0, 0}}, {-2.0, {-1, 0, 0}, {}}});
  CHECK(std::abs(endpoint_limit(e) - (-1.0)) < 1e-14);
}

TEST_CASE("Leibniz rule holds exactly", "[asymptotics][property]") {
  Parameters pr(0.3, 0.7, 1);
  for (int trial = 0; trial < 50; ++trial)
    for (int ep : {1, -1}) {
      auto a = random_expansion(pr, ep), b = random_expansion(pr, ep);
      auto lhs = differentiate(multiply(a, b));
      auto rhs = add(multiply(differentiate(a), b), multiply(a, differentiate(b)));
      // Exponents match exactly; coefficients are sums of the same products.
      REQUIRE(lhs.terms.size() == rhs.terms.size());
      for (size_t i = 0; i < lhs.terms.size(); ++i) {
        CHECK(lhs.terms[i].p == rhs.terms[i].p);
        CHECK(lhs.terms[i].q == rhs.terms[i].q);
        CHECK(std::abs(lhs.terms[i].coeff - rhs.terms[i].coeff) <= 1e-12 * std::abs(lhs.terms[i].coeff));
      }
    }
}

TEST_CASE("sesquilinear form reference values", "[asymptotics]") {
  Parameters pr(0.5, 0.5, 1);
  auto b = build_basis(pr);
  CHECK(std::abs(sesquilinear_form(b.phi_plus[0], b.v_plus[0], pr, 1) - std::sqrt(2.0)) < 1e-14);
  for (int n = 1; n <= 3; ++n) {
    Parameters q(0.3, 0.7, n);
    auto bb = build_basis(q);
    for (int ep : {1, -1})
      for (const auto& f : bb.phi(ep))
        for (const auto& g : bb.phi(ep)) CHECK(sesquilinear_form(f, g, q, ep) == 0.0);
  }
  auto v = b.v_plus[0];
  CHECK(sesquilinear_form(v, v, pr, 1) == 0.0);
}

TEST_CASE("sesquilinear form is antisymmetric on real functions", "[asymptotics][property]") {
  for (int n = 1; n <= 3; ++n) {
    Parameters pr(0.3, 0.7, n);
    auto b = modified_gram_schmidt(build_basis(pr), pr);
    auto fs = b.all();
    for (const auto& f : fs)
      for (const auto& g : fs)
        for (int ep : {1, -1}) CHECK(sesquilinear_form(f, g, pr, ep) == -sesquilinear_form(g, f, pr, ep));
  }
}

TEST_CASE("weighted derivatives of basis functions have finite limits", "[asymptotics][property]") {
  for (int n = 1; n <= 3; ++n) {
    Parameters pr(0.3, 0.7, n);
    auto b = modified_gram_schmidt(build_basis(pr), pr);
    for (const auto& f : b.all())
      for (int ep : {1, -1})
        for (int j = 0; j <= n; ++j) {
          auto e = differentiate(f.at(ep), j);
          if (j > 0) e = multiply(weight(j, pr, ep), e);
          else e = multiply(EndpointExpansion(ep, pr, {{1.0, {0, 1, 0}, {0, 0, 1}}}), e);
          CHECK_NOTHROW(endpoint_limit(e));
        }
  }
}

TEST_CASE("quasi-derivatives", "[asymptotics]") {
  for (int n = 1; n <= 3; ++n) {
    Parameters pr(0.3, 0.7, n);
    auto b = modified_gram_schmidt(build_basis(pr), pr);
    CHECK(quasi_derivative_symbolic(b.phi_plus[0], 2 * n - 1, pr, 1) == 0.0);
    CHECK(quasi_derivative_symbolic(b.phi_plus[0], 2 * n - 1, pr, -1) == 0.0);
    CHECK_THROWS_AS(quasi_derivative_symbolic(b.phi_plus[0], 2 * n, pr, 1), std::invalid_argument);
  }
  Parameters pr(0.3, 0.7, 1);
  auto b = modified_gram_schmidt(build_basis(pr), pr);
  CHECK(std::abs(quasi_derivative_symbolic(b.u_plus[0], 1, pr, 1) - 1.0) < 1e-14);
  // The lower quasi-derivative blows up on the non-principal function.
  CHECK_THROWS_AS(quasi_derivative_symbolic(b.v_plus[0], 0, pr, 1), DivergentLimit);
}

TEST_CASE("numeric oracle reference values", "[asymptotics][oracle]") {
  Parameters pr(0.5, 0.5, 1);
  auto b = modified_gram_schmidt(build_basis(pr), pr);
  CHECK(std::abs(numeric_limit_oracle(b.phi_plus[0], b.v_plus[0], pr, 1) - std::sqrt(2.0)) < 1e-6);
  CHECK(std::abs(numeric_limit_oracle(b.phi_plus[0], b.phi_plus[0], pr, 1)) < 1e-8);
  CHECK(std::abs(numeric_limit_oracle(b.u_plus[0], b.u_plus[0], pr, 1)) < 1e-8);
}

TEST_CASE("numeric oracle antisymmetry and agreement", "[asymptotics][oracle][property]") {
  for (int n = 1; n <= 3; ++n) {
    Parameters pr(0.3, 0.7, n);
    auto b = modified_gram_schmidt(build_basis(pr), pr);
    auto fs = b.all();
    std::uniform_int_distribution<size_t> pick(0, fs.size() - 1);
    double worst_agree = 0, worst_anti = 0;
    for (int k = 0; k < 50; ++k) {
      const auto& f = fs[pick(testing::rng())];
      const auto& g = fs[pick(testing::rng())];
      int ep = k % 2 ? 1 : -1;
      cplx sym = sesquilinear_form(f, g, pr, ep);
      cplx fg = numeric_limit_oracle(f, g, pr, ep), gf = numeric_limit_oracle(g, f, pr, ep);
      worst_agree = std::max(worst_agree, std::abs(sym - fg) / (1 + std::abs(sym)));
      worst_anti = std::max(worst_anti, std::abs(fg + gf));
    }
    CHECK(worst_agree < 1e-6);
    CHECK(worst_anti < 1e-8);
  }
}

TEST_CASE("complex coefficients conjugate the second argument", "[asymptotics]") {
  Parameters pr(0.3, 0.7, 1);
  auto b = build_basis(pr);
  cplx c(0.25, 1.5);
  auto cv = MaximalDomainElement(scale(b.v_plus[0].at_plus, c), b.v_plus[0].at_minus);
  cplx base = sesquilinear_form(b.phi_plus[0], b.v_plus[0], pr, 1);
  CHECK(std::abs(sesquilinear_form(b.phi_plus[0], cv, pr, 1) - std::conj(c) * base) < 1e-14);
  CHECK(std::abs(sesquilinear_form(cv, b.phi_plus[0], pr, 1) + c * base) < 1e-14);
  CHECK(std::abs(numeric_limit_oracle(b.phi_plus[0], cv, pr, 1) - std::conj(c) * base) < 1e-6);
}
