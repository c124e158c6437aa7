#pragma once

#include "multisym/geometry.hpp"

namespace multisym {

/// Infinitesimal transformation data in the convention
/// xi_E = -xi^mu(x) d/dx^mu - xi^A(x,y) d/dy^A,
/// generating x -> x + xi^mu, y -> y + xi^A. Fiber components are either
/// explicit or generated from the fields' tensor variance tags.
struct GeneratorSpec {
  std::string name;
  std::map<Symbol, Expr> base_xi;   // x^mu -> xi^mu(x)
  std::map<Symbol, Expr> field_xi;  // y^A -> xi^A(x,y), canonical components
  bool natural_lift = false;        // build field_xi from variance (tensor law)

  Expr xi_base(const Tower& tw, int mu) const {
    auto it = base_xi.find(tw.base[mu]);
    return it == base_xi.end() ? Expr() : it->second;
  }
};

namespace detail {

inline void check_base_dependence(const Tower& tw, const Expr& e, const char* what) {
  for (Symbol a : e.atoms())
    if (a->kind == SymKind::Field || a->kind == SymKind::Jet || a->kind == SymKind::Momentum ||
        a->kind == SymKind::PMom)
      fail(Errc::NotProjectable, std::string(what) + " depends on fiber coordinate " + a->name);
}

/// Global tensor variation Delta (first-order tensor transformation law):
/// upper slots pull a +dxi contraction, lower slots a -dxi contraction.
inline Expr tensor_delta(const Tower& tw, const GeneratorSpec& gen, int fam,
                         const std::vector<int>& idx) {
  const ExprContext& ctx = *tw.ctx;
  const FieldFamily& ff = tw.families[fam];
  Expr delta;
  for (size_t s = 0; s < ff.slots.size(); ++s) {
    if (ff.variance[s] == 0) continue;
    if (ff.slots[s].range != tw.m)
      fail(Errc::IndexArityMismatch,
           ff.name + " slot " + ff.slots[s].label + " tagged for lifting but has range " +
               std::to_string(ff.slots[s].range));
    for (int lam = 0; lam < tw.m; ++lam) {
      std::vector<int> jdx = idx;
      jdx[s] = lam;
      Expr t = tw.field(fam, jdx);
      if (t.is_zero_expr()) continue;
      if (ff.variance[s] > 0) {
        delta += ctx.partial(gen.xi_base(tw, idx[s]), tw.base[lam]) * t;
      } else {
        delta -= ctx.partial(gen.xi_base(tw, lam), tw.base[idx[s]]) * t;
      }
    }
  }
  return ctx.normalize(delta);
}

}  // namespace detail

/// Fiber components xi^A of the generator, resolving the tensor law when
/// the generator is a natural lift.
inline std::map<Symbol, Expr> generator_field_components(const Tower& tw, const GeneratorSpec& gen) {
  if (!gen.natural_lift) return gen.field_xi;
  std::map<Symbol, Expr> out;
  for (int f = 0; f < static_cast<int>(tw.families.size()); ++f)
    for (const auto& idx : tw.families[f].components()) {
      Expr delta = detail::tensor_delta(tw, gen, f, idx);
      if (!delta.is_zero_expr()) out[tw.field_sym(f, idx)] = delta;
    }
  return out;
}

/// xi_E on the configuration bundle.
inline VectorField lift_to_E(const Tower& tw, const GeneratorSpec& gen) {
  VectorField v;
  v.chart = &tw.chart_E;
  for (int mu = 0; mu < tw.m; ++mu) {
    Expr xi = gen.xi_base(tw, mu);
    detail::check_base_dependence(tw, xi, "base generator component");
    v.set(tw.base[mu], -xi);
  }
  for (const auto& [y, xiA] : generator_field_components(tw, gen)) v.set(y, -xiA);
  return v;
}

/// First jet prolongation X = j1(v) of a pi-projectable vector field on E.
inline VectorField jet_prolong(const Tower& tw, const VectorField& ve) {
  if (ve.chart != &tw.chart_E) fail(Errc::ChartMismatch, "jet_prolong expects a field on E");
  const ExprContext& ctx = *tw.ctx;
  for (int mu = 0; mu < tw.m; ++mu)
    detail::check_base_dependence(tw, ve.comp(tw.base[mu]), "base component");
  VectorField v;
  v.chart = &tw.chart_J1;
  for (const auto& [s, e] : ve.comps) v.set(s, e);
  for (const auto& co : tw.chart_J1.coords) {
    if (co.role != CoordRole::Jet) continue;
    Symbol yA = tw.field_sym(co.family, co.indices);
    int mu = co.dir;
    Expr comp = ctx.partial(ve.comp(yA), tw.base[mu]);
    for (const auto& co2 : tw.chart_E.coords) {
      if (co2.role != CoordRole::Field) continue;
      comp += tw.jet(co2.family, co2.indices, mu) * ctx.partial(ve.comp(yA), co2.sym);
    }
    for (int nu = 0; nu < tw.m; ++nu)
      comp -= tw.jet(co.family, co.indices, nu) * ctx.partial(ve.comp(tw.base[nu]), tw.base[mu]);
    v.set(co.sym, ctx.normalize(comp));
  }
  return v;
}

/// Canonical lift Z to the extended multimomentum bundle.
inline VectorField lift_to_MPi(const Tower& tw, const GeneratorSpec& gen) {
  const ExprContext& ctx = *tw.ctx;
  VectorField v;
  v.chart = &tw.chart_MPi;
  auto field_xi = generator_field_components(tw, gen);
  auto xiA = [&](Symbol y) {
    auto it = field_xi.find(y);
    return it == field_xi.end() ? Expr() : it->second;
  };
  for (int mu = 0; mu < tw.m; ++mu) {
    detail::check_base_dependence(tw, gen.xi_base(tw, mu), "base generator component");
    v.set(tw.base[mu], -gen.xi_base(tw, mu));
  }
  for (const auto& [y, e] : field_xi) v.set(y, -e);
  Expr div_xi;
  for (int nu = 0; nu < tw.m; ++nu) div_xi += ctx.partial(gen.xi_base(tw, nu), tw.base[nu]);
  Expr p_comp;
  for (const auto& co : tw.chart_MPi.coords) {
    if (co.role != CoordRole::Momentum) continue;
    Symbol yA = tw.field_sym(co.family, co.indices);
    int mu = co.dir;
    Expr comp;
    for (int nu = 0; nu < tw.m; ++nu)
      comp += ctx.partial(gen.xi_base(tw, mu), tw.base[nu]) * tw.mom(co.family, co.indices, nu);
    comp -= div_xi * Expr(co.sym);
    for (const auto& co2 : tw.chart_E.coords) {
      if (co2.role != CoordRole::Field) continue;
      Expr dxi = ctx.partial(xiA(co2.sym), yA);
      if (!dxi.is_zero_expr()) comp -= dxi * tw.mom(co2.family, co2.indices, mu);
    }
    v.set(co.sym, ctx.normalize(-comp));
    p_comp += ctx.partial(xiA(yA), tw.base[mu]) * Expr(co.sym);
  }
  p_comp += div_xi * Expr(tw.p_sym);
  v.set(tw.p_sym, ctx.normalize(p_comp));
  return v;
}

/// Canonical lift Y to the restricted multimomentum bundle: Z without the
/// extended-momentum component.
inline VectorField lift_to_J1PiStar(const Tower& tw, const GeneratorSpec& gen) {
  VectorField z = lift_to_MPi(tw, gen);
  VectorField v;
  v.chart = &tw.chart_J1Star;
  for (const auto& [s, e] : z.comps)
    if (s != tw.p_sym) v.set(s, e);
  return v;
}

/// Canonical lift to a graph-type submanifold P0 of J1Pi*: substitute the
/// eliminated momenta and drop their slots. Fails when the lift is not
/// tangent to P0 (the dropped components disagree with the chain rule
/// along the restriction).
inline VectorField lift_to_PSub(const Tower& tw, const GeneratorSpec& gen, const BundleChart& p0) {
  if (p0.space != Space::PSub) fail(Errc::WrongSpace, "lift_to_PSub expects a restricted chart");
  const ExprContext& ctx = *tw.ctx;
  VectorField y = lift_to_J1PiStar(tw, gen);
  VectorField v;
  v.chart = &p0;
  for (const auto& co : p0.coords) v.set(co.sym, ctx.substitute(y.comp(co.sym), p0.subs));
  for (const auto& [pi, f] : p0.subs) {
    Expr along = ctx.substitute(y.comp(pi), p0.subs);
    Expr chain;
    for (Symbol w : ctx.dependency_support(f)) {
      if (!p0.has(w)) continue;
      chain += v.comp(w) * ctx.partial(f, w);
    }
    Expr residual = ctx.normalize(along - chain);
    if (!residual.is_zero_expr())
      fail(Errc::LiftNotTangent, "lift does not restrict to the submanifold along " + pi->name +
                                     "; residual " + residual.str());
  }
  return v;
}

/// Gamma_xi, the (m-1)-form induced on the extended bundle:
/// Gamma = xi^nu p_A^mu dy^A ^ d^{m-2}x_{mu nu} - (xi^A p_A^mu + xi^mu p) d^{m-1}x_mu.
/// Structurally verified against Theta(Z_xi).
inline DiffForm gamma_form(const Tower& tw, const GeneratorSpec& gen) {
  const BundleChart* mpi = &tw.chart_MPi;
  const ExprContext& ctx = *tw.ctx;
  auto field_xi = generator_field_components(tw, gen);
  DiffForm g(mpi, tw.m - 1);
  for (const auto& co : mpi->coords) {
    if (co.role != CoordRole::Momentum) continue;
    Symbol yA = tw.field_sym(co.family, co.indices);
    int mu = co.dir;
    for (int nu = 0; nu < tw.m; ++nu) {
      Expr c = gen.xi_base(tw, nu) * Expr(co.sym);
      if (c.is_zero_expr()) continue;
      g = g + wedge(wedge(DiffForm::scalar(mpi, c), DiffForm::basis(mpi, yA)),
                    volume_contracted2(mpi, mu, nu));
    }
  }
  for (int mu = 0; mu < tw.m; ++mu) {
    Expr c = gen.xi_base(tw, mu) * Expr(tw.p_sym);
    for (const auto& [y, xiA] : field_xi) {
      const Coord& co = mpi->coord(mpi->ord(y));
      c += xiA * tw.mom(co.family, co.indices, mu);
    }
    if (c.is_zero_expr()) continue;
    g = g - wedge(DiffForm::scalar(mpi, c), volume_contracted(mpi, mu));
  }
  auto [theta, omega] = liouville_forms(*mpi);
  DiffForm check = contract(lift_to_MPi(tw, gen), theta);
  if (!(g - check).is_zero())
    fail(Errc::Internal, "gamma form disagrees with Theta(Z)");
  return g;
}

/// Report of Prop. FLproj-type checks: the Lagrangian-density Lie
/// derivative along X, and the per-coordinate difference between the
/// pushforward of X through the Legendre map and the canonical lift on
/// the Hamiltonian side (reduced modulo the final constraints when
/// nonzero on the nose).
struct LegendreProjectionReport {
  DiffForm lie_lagrangian;        // L(X) (L d^m x) on J1Pi
  bool lagrangian_invariant = false;
  std::map<Symbol, Expr> differences;          // target coord -> X(FL*w) - FL*(Y^w)
  std::map<Symbol, Expr> reduced_differences;  // nonzero entries mod constraints
  bool projects_to_lift = false;               // all reduced differences vanish
};

inline LegendreProjectionReport check_legendre_projection(
    const Tower& tw, const Expr& L, const GeneratorSpec& gen, const ChartMap& fl_phase,
    const VectorField& y_lift, const std::vector<Expr>& final_constraints = {}) {
  const ExprContext& ctx = *tw.ctx;
  LegendreProjectionReport rep;
  VectorField x = jet_prolong(tw, lift_to_E(tw, gen));
  rep.lie_lagrangian =
      lie(x, wedge(DiffForm::scalar(&tw.chart_J1, L), DiffForm::volume(&tw.chart_J1)));
  rep.lagrangian_invariant = rep.lie_lagrangian.is_zero();
  rep.projects_to_lift = true;
  for (const auto& co : fl_phase.tgt->coords) {
    const Expr& image = fl_phase.at(co.sym);
    Expr xw;
    for (Symbol s : ctx.dependency_support(image)) {
      Expr c = x.comp(s);
      if (!c.is_zero_expr()) xw += c * ctx.partial(image, s);
    }
    // FL*(Y^w): the lift component pulled back to J1Pi
    std::map<Symbol, Expr> pull;
    for (const auto& [w, e] : fl_phase.map) pull[w] = e;
    Expr yw = ctx.substitute(y_lift.comp(co.sym), pull);
    Expr diff = ctx.normalize(xw - yw);
    rep.differences[co.sym] = diff;
    if (!diff.is_zero_expr()) {
      Expr red = reduce_mod_ideal(diff, final_constraints, ctx);
      rep.reduced_differences[co.sym] = red;
      if (!red.is_zero_expr()) rep.projects_to_lift = false;
    }
  }
  return rep;
}

}  // namespace multisym
