#include <catch2/catch_amalgamated.hpp>

#include "form_oracle.hpp"
#include "multisym/form.hpp"
#include "test_support.hpp"

using namespace multisym;
using namespace multisym::testing;

namespace {

struct Rig {
  std::shared_ptr<Tower> tw;
  const BundleChart* ch;
  std::mt19937_64 rng;

  Rig(int m, int nfields, Space sp = Space::MPi, uint64_t seed = 5150) : rng(seed) {
    std::vector<FieldFamily> fams;
    if (nfields == 1) {
      fams.push_back({"phi", {}, {}, {}, {}});
    } else if (nfields > 1) {
      fams.push_back({"y", {{"A", nfields}}, {}, {}, {}});
    }
    tw = build_tower(m, fams);
    switch (sp) {
      case Space::MPi: ch = &tw->chart_MPi; break;
      case Space::J1Pi: ch = &tw->chart_J1; break;
      case Space::J1PiStar: ch = &tw->chart_J1Star; break;
      case Space::E: ch = &tw->chart_E; break;
      default: ch = &tw->chart_M; break;
    }
  }

  Expr rand_coeff(int depth = 2) {
    std::vector<Symbol> pool;
    for (const auto& c : ch->coords) pool.push_back(c.sym);
    ExprGen gen(pool, rng());
    return gen.gen(depth);
  }

  DiffForm rand_form(int degree, int nterms = 3) {
    DiffForm f(ch, degree);
    for (int t = 0; t < nterms; ++t) {
      std::vector<int> all(ch->dim());
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), rng);
      DiffForm::Key k(all.begin(), all.begin() + degree);
      std::sort(k.begin(), k.end());
      f.accumulate(k, rand_coeff());
    }
    f.normalize_coeffs();
    return f;
  }

  VectorField rand_vf(int depth = 1) {
    VectorField v;
    v.chart = ch;
    for (const auto& c : ch->coords)
      if (rng() % 2) v.set(c.sym, rand_coeff(depth));
    return v;
  }

  PointD rand_point() {
    PointD pt;
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (const auto& c : ch->coords) pt[c.sym] = d(rng);
    return pt;
  }
};

}  // namespace

TEST_CASE("wedge antisymmetry and nilpotency") {
  Rig rig(2, 1);
  DiffForm dx0 = DiffForm::basis(rig.ch, rig.tw->base[0]);
  DiffForm dx1 = DiffForm::basis(rig.ch, rig.tw->base[1]);
  REQUIRE(wedge(dx0, dx1) == -wedge(dx1, dx0));
  DiffForm odd = rig.rand_form(1);
  REQUIRE(wedge(odd, odd).is_zero());
  REQUIRE_THROWS_AS(wedge(dx0, DiffForm::basis(&rig.tw->chart_E, rig.tw->base[0])), Error);
}

TEST_CASE("dy wedge with contracted volume matches brute-force signs") {
  for (int m : {2, 3, 4}) {
    Rig rig(m, 1);
    Symbol phi = rig.tw->field_sym(0, {});
    for (int mu = 0; mu < m; ++mu) {
      DiffForm lhs = wedge(DiffForm::basis(rig.ch, phi), volume_contracted(rig.ch, mu));
      // oracle: dphi ^ dx^0 ^ ... (omit mu) ... ^ dx^{m-1} with the sign of
      // the permutation that sorts (mu, 0..mu-1, mu+1..m-1)
      std::vector<int> perm{rig.ch->ord(phi)};
      for (int k = 0; k < m; ++k)
        if (k != mu) perm.push_back(rig.ch->ord(rig.tw->base[k]));
      int sign = DenseForm::perm_sign(perm) *
                 DenseForm::perm_sign([&] {
                   std::vector<int> v{mu};
                   for (int k = 0; k < m; ++k)
                     if (k != mu) v.push_back(k);
                   return v;
                 }());
      DiffForm::Key key = perm;
      std::sort(key.begin(), key.end());
      DiffForm expect(rig.ch, m);
      expect.set(key, Expr(Rational(sign)));
      REQUIRE(lhs == expect);
    }
  }
}

TEST_CASE("wedge and contraction agree with the dense multilinear oracle") {
  Rig rig(2, 2);
  for (int t = 0; t < 30; ++t) {
    DiffForm a = rig.rand_form(1 + static_cast<int>(rig.rng() % 2));
    DiffForm b = rig.rand_form(1 + static_cast<int>(rig.rng() % 2));
    if (a.degree() + b.degree() > 4) continue;
    PointD pt = rig.rand_point();
    REQUIRE(dense_close(densify(wedge(a, b), pt), dense_wedge(densify(a, pt), densify(b, pt)), 1e-6));
    VectorField v = rig.rand_vf();
    REQUIRE(dense_close(densify(contract(v, a), pt), dense_contract(densify(v, pt), densify(a, pt)),
                        1e-6));
  }
}

TEST_CASE("d squared vanishes on random polynomial forms") {
  int cases = 0;
  for (int m : {2, 3, 4}) {
    Rig rig(m, 2, Space::MPi, 900 + m);
    for (int t = 0; t < 70; ++t) {
      int deg = static_cast<int>(rig.rng() % 3);
      DiffForm a = rig.rand_form(deg);
      REQUIRE(d(d(a)).is_zero());
      ++cases;
    }
  }
  REQUIRE(cases >= 200);
}

TEST_CASE("d of a coefficient times dx0 expands term by term") {
  Rig rig(3, 1);
  Expr f = rig.rand_coeff(3);
  DiffForm a = wedge(DiffForm::scalar(rig.ch, f), DiffForm::basis(rig.ch, rig.tw->base[0]));
  DiffForm expect(rig.ch, 2);
  for (const auto& c : rig.ch->coords) {
    Expr p = rig.tw->ctx->partial(f, c.sym);
    if (p.is_zero_expr()) continue;
    expect = expect + wedge(wedge(DiffForm::scalar(rig.ch, p), DiffForm::basis(rig.ch, c.sym)),
                            DiffForm::basis(rig.ch, rig.tw->base[0]));
  }
  REQUIRE(d(a) == expect);
}

TEST_CASE("basis contraction of the volume form") {
  for (int m : {2, 3, 4}) {
    Rig rig(m, 1);
    for (int mu = 0; mu < m; ++mu) {
      VectorField v;
      v.chart = rig.ch;
      v.set(rig.tw->base[mu], Expr::one());
      REQUIRE(contract(v, DiffForm::volume(rig.ch)) == volume_contracted(rig.ch, mu));
    }
    // i(v) i(v) = 0
    VectorField v = rig.rand_vf();
    DiffForm a = rig.rand_form(2);
    REQUIRE(contract(v, contract(v, a)).is_zero());
  }
}

TEST_CASE("lie derivative is a wedge derivation") {
  Rig rig(2, 1, Space::J1Pi);
  for (int t = 0; t < 10; ++t) {
    DiffForm a = rig.rand_form(1, 2), b = rig.rand_form(1, 2);
    VectorField v = rig.rand_vf();
    DiffForm lhs = lie(v, wedge(a, b));
    DiffForm rhs = wedge(lie(v, a), b) + wedge(a, lie(v, b));
    REQUIRE(lhs == rhs);
  }
}

TEST_CASE("cartan formula agrees with the leibniz oracle for linear fields") {
  Rig rig(2, 1, Space::E);
  const ExprContext& ctx = *rig.tw->ctx;
  for (int t = 0; t < 20; ++t) {
    // linear vector field: components linear in coordinates
    VectorField v;
    v.chart = rig.ch;
    for (const auto& c : rig.ch->coords) {
      Expr comp;
      for (const auto& c2 : rig.ch->coords)
        comp += Expr(rig.rng() % 3 ? Rational(0) : Rational(1 + static_cast<long long>(rig.rng() % 3))) *
                Expr(c2.sym);
      v.set(c.sym, comp);
    }
    DiffForm a = rig.rand_form(1 + static_cast<int>(rig.rng() % 2), 2);
    // oracle: L(v)(f dxI) = v(f) dxI + f sum_k dx...d(v^{ik})...
    DiffForm expect(rig.ch, a.degree());
    for (const auto& [k, f] : a.terms()) {
      Expr vf;
      for (const auto& c : rig.ch->coords) vf += v.comp(c.sym) * ctx.partial(f, c.sym);
      expect.accumulate(k, vf);
      for (size_t j = 0; j < k.size(); ++j) {
        DiffForm piece = DiffForm::scalar(rig.ch, f);
        for (size_t i = 0; i < k.size(); ++i) {
          if (i == j) {
            DiffForm dcomp(rig.ch, 1);
            Expr comp = v.comp(rig.ch->coord(k[i]).sym);
            for (const auto& c : rig.ch->coords) {
              Expr p = ctx.partial(comp, c.sym);
              if (!p.is_zero_expr()) dcomp.accumulate({rig.ch->ord(c.sym)}, p);
            }
            piece = wedge(piece, dcomp);
          } else {
            piece = wedge(piece, DiffForm::basis(rig.ch, rig.ch->coord(k[i]).sym));
          }
        }
        expect = expect + piece;
      }
    }
    expect.normalize_coeffs();
    REQUIRE(lie(v, a) == expect);
  }
}

TEST_CASE("pullback: identity, ring homomorphism, commutes with d") {
  Rig rig(2, 2, Space::MPi, 311);
  // identity map on MPi
  ChartMap id = forget_map(rig.tw->chart_MPi, rig.tw->chart_MPi);
  DiffForm a = rig.rand_form(2);
  REQUIRE(pullback(id, a) == a);

  // sigma: MPi -> J1Pi*
  int cases = 0;
  ChartMap sigma = forget_map(rig.tw->chart_MPi, rig.tw->chart_J1Star);
  for (int t = 0; t < 60; ++t) {
    std::mt19937_64& rng = rig.rng;
    auto rand_on = [&](int degree) {
      DiffForm f(&rig.tw->chart_J1Star, degree);
      const BundleChart* ch = &rig.tw->chart_J1Star;
      std::vector<Symbol> pool;
      for (const auto& c : ch->coords) pool.push_back(c.sym);
      ExprGen gen(pool, rng());
      for (int i = 0; i < 2; ++i) {
        std::vector<int> all(ch->dim());
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        DiffForm::Key k(all.begin(), all.begin() + degree);
        std::sort(k.begin(), k.end());
        f.accumulate(k, gen.gen(2));
      }
      f.normalize_coeffs();
      return f;
    };
    DiffForm u = rand_on(1);
    DiffForm w = rand_on(1 + static_cast<int>(rng() % 2));
    REQUIRE(pullback(sigma, wedge(u, w)) == wedge(pullback(sigma, u), pullback(sigma, w)));
    REQUIRE(pullback(sigma, d(u)) == d(pullback(sigma, u)));
    cases += 2;
  }
  REQUIRE(cases >= 100);
}

TEST_CASE("pullback through a hamiltonian section substitutes p") {
  // h: J1Pi* -> MPi with p -> -H; pulling back Theta gives Theta_H shape
  Rig rig(2, 1);
  auto& tw = *rig.tw;
  const BundleChart* mpi = &tw.chart_MPi;
  const BundleChart* star = &tw.chart_J1Star;
  Symbol phi = tw.field_sym(0, {});
  // Theta = p_A^mu dy^A ^ d^{m-1}x_mu + p d^m x
  DiffForm theta(mpi, 2);
  for (int mu = 0; mu < 2; ++mu)
    theta = theta + wedge(wedge(DiffForm::scalar(mpi, tw.mom(0, {}, mu)), DiffForm::basis(mpi, phi)),
                          volume_contracted(mpi, mu));
  theta = theta + wedge(DiffForm::scalar(mpi, Expr(tw.p_sym)), DiffForm::volume(mpi));

  Expr H = Expr(tw.mom_sym(0, {}, 0)).pow(2) + Expr(phi).pow(2);
  ChartMap h;
  h.src = star;
  h.tgt = mpi;
  for (const auto& c : star->coords) h.map[c.sym] = Expr(c.sym);
  h.map[tw.p_sym] = -H;

  DiffForm theta_h = pullback(h, theta);
  DiffForm expect(star, 2);
  for (int mu = 0; mu < 2; ++mu)
    expect = expect + wedge(wedge(DiffForm::scalar(star, tw.mom(0, {}, mu)), DiffForm::basis(star, phi)),
                            volume_contracted(star, mu));
  expect = expect - wedge(DiffForm::scalar(star, H), DiffForm::volume(star));
  REQUIRE(theta_h == expect);

  ChartMap broken = h;
  broken.map.erase(tw.p_sym);
  REQUIRE_THROWS_AS(pullback(broken, theta), Error);
}
