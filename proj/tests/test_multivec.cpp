#include <catch2/catch_amalgamated.hpp>

#include "form_oracle.hpp"
#include "multisym/multivec.hpp"
#include "test_support.hpp"

using namespace multisym;
using namespace multisym::testing;

namespace {

/// m=2 Klein-Gordon Hamiltonian rig built directly from forms (no
/// geometry module involved): the oracle side of the field equations.
struct KgHam2 {
  std::shared_ptr<Tower> tw = build_tower(2, {FieldFamily{"phi", {}, {}, {}, {}}});
  const BundleChart* ch = &tw->chart_J1Star;
  Symbol phi = tw->field_sym(0, {});
  Symbol p0 = tw->mom_sym(0, {}, 0), p1 = tw->mom_sym(0, {}, 1);
  Symbol mass = make_symbol(SymKind::Param, "mass");
  Rational eta[2] = {rat(-1), rat(1)};

  KgHam2() { tw->ctx->declare(mass); }

  Expr hamiltonian() const {
    Expr s = Expr(eta[0]) * Expr(p0).pow(2) + Expr(eta[1]) * Expr(p1).pow(2);
    return Expr(rat(-1, 2)) * s + Expr(rat(1, 2)) * Expr(mass).pow(2) * Expr(phi).pow(2);
  }

  DiffForm theta() const {
    DiffForm t(ch, 2);
    for (int mu = 0; mu < 2; ++mu)
      t = t + wedge(wedge(DiffForm::scalar(ch, tw->mom(0, {}, mu)), DiffForm::basis(ch, phi)),
                    volume_contracted(ch, mu));
    t = t - wedge(DiffForm::scalar(ch, hamiltonian()), DiffForm::volume(ch));
    return t;
  }

  DiffForm omega() const { return -d(theta()); }
};

}  // namespace

TEST_CASE("normalized multivector contracts the volume to one") {
  KgHam2 kg;
  auto um = make_unknown_multivector(kg.ch);
  DiffForm one = contract_multi(um.X, DiffForm::volume(kg.ch));
  REQUIRE(one.degree() == 0);
  REQUIRE(one.coeff({}) == Expr::one());
  // degree(a) < m gives the zero form
  REQUIRE(contract_multi(um.X, DiffForm::basis(kg.ch, kg.phi)).is_zero());
}

TEST_CASE("kg hamiltonian field equations appear as residual coefficients") {
  KgHam2 kg;
  auto um = make_unknown_multivector(kg.ch);
  DiffForm residual = contract_multi(um.X, kg.omega());
  REQUIRE(residual.degree() == 1);

  Symbol D0 = um.slots.at({0, kg.phi}), D1 = um.slots.at({1, kg.phi});
  Symbol H00 = um.slots.at({0, kg.p0}), H11 = um.slots.at({1, kg.p1});

  // coefficient of dphi: H^mu_mu + m^2 phi (up to overall sign)
  Expr dphi_coeff = residual.coeff({kg.ch->ord(kg.phi)});
  Expr want_trace = Expr(H00) + Expr(H11) + Expr(kg.mass).pow(2) * Expr(kg.phi);
  REQUIRE((dphi_coeff == want_trace || dphi_coeff == -want_trace));

  // coefficients of dp^mu: D_mu + eta_{mu nu} p^nu (up to overall sign)
  Expr dp0 = residual.coeff({kg.ch->ord(kg.p0)});
  Expr want0 = Expr(D0) + Expr(kg.eta[0]) * Expr(kg.p0);
  REQUIRE((dp0 == want0 || dp0 == -want0));
  Expr dp1 = residual.coeff({kg.ch->ord(kg.p1)});
  Expr want1 = Expr(D1) + Expr(kg.eta[1]) * Expr(kg.p1);
  REQUIRE((dp1 == want1 || dp1 == -want1));
}

TEST_CASE("iterated contraction matches the dense oracle at m=2") {
  KgHam2 kg;
  auto um = make_unknown_multivector(kg.ch);
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (int t = 0; t < 15; ++t) {
    // random 3-form on the chart
    DiffForm a(kg.ch, 3);
    std::vector<Symbol> pool;
    for (const auto& c : kg.ch->coords) pool.push_back(c.sym);
    ExprGen gen(pool, rng());
    for (int i = 0; i < 3; ++i) {
      std::vector<int> all(kg.ch->dim());
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), rng);
      DiffForm::Key k(all.begin(), all.begin() + 3);
      std::sort(k.begin(), k.end());
      a.accumulate(k, gen.gen(2));
    }
    a.normalize_coeffs();

    PointD pt;
    for (const auto& c : kg.ch->coords) pt[c.sym] = dist(rng);
    pt[kg.mass] = dist(rng);
    for (const auto& [su, u] : um.of_unknown) pt[su] = dist(rng);

    DenseForm da = densify(a, pt);
    DenseForm expect = dense_contract(densify(um.X.factor(1), pt),
                                      dense_contract(densify(um.X.factor(0), pt), da));
    REQUIRE(dense_close(densify(contract_multi(um.X, a), pt), expect, 1e-7));
  }
}

TEST_CASE("graded lie derivative basics") {
  KgHam2 kg;
  auto um = make_unknown_multivector(kg.ch);
  REQUIRE(lie_multi(um.X, DiffForm(kg.ch, 2)).is_zero());

  // closed form: both routes agree structurally
  DiffForm closed = d(kg.theta());
  DiffForm l1 = lie_multi(um.X, closed);
  DiffForm l2 = d(contract_multi(um.X, closed));
  REQUIRE(l1 == l2);
}

TEST_CASE("m=1 graded lie derivative reduces to the vector lie derivative") {
  auto tw = build_tower(1, {FieldFamily{"u", {}, {}, {}, {}}});
  const BundleChart* ch = &tw->chart_J1Star;
  std::mt19937_64 rng(17);
  std::vector<Symbol> pool;
  for (const auto& c : ch->coords) pool.push_back(c.sym);
  for (int t = 0; t < 20; ++t) {
    ExprGen gen(pool, rng());
    VectorField f;
    f.chart = ch;
    f.set(tw->base[0], Expr::one());
    for (const auto& c : ch->coords)
      if (c.role != CoordRole::Base) f.set(c.sym, gen.gen(2));
    MultiVectorField X(ch, {f});
    DiffForm a(ch, 1);
    for (const auto& c : ch->coords) a.accumulate({ch->ord(c.sym)}, gen.gen(2));
    a.normalize_coeffs();
    REQUIRE(lie_multi(X, a) == lie(f, a));
  }
}
