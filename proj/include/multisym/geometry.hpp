#pragma once

#include <optional>

#include "multisym/linsolve.hpp"
#include "multisym/multivec.hpp"

namespace multisym {

/// Multimomentum Liouville m- and (m+1)-forms on the extended bundle:
/// Theta = p_A^mu dy^A ^ d^{m-1}x_mu + p d^m x, Omega = -d Theta.
inline std::pair<DiffForm, DiffForm> liouville_forms(const BundleChart& mpi) {
  if (mpi.space != Space::MPi) fail(Errc::WrongSpace, "liouville forms live on the extended bundle");
  const Tower& tw = *mpi.tower;
  DiffForm theta(&mpi, mpi.m);
  for (const auto& co : mpi.coords) {
    if (co.role != CoordRole::Momentum) continue;
    Symbol y = tw.field_sym(co.family, co.indices);
    theta = theta + wedge(wedge(DiffForm::scalar(&mpi, Expr(co.sym)), DiffForm::basis(&mpi, y)),
                          volume_contracted(&mpi, co.dir));
  }
  theta = theta + wedge(DiffForm::scalar(&mpi, Expr(tw.p_sym)), DiffForm::volume(&mpi));
  return {theta, -d(theta)};
}

/// The Poincare-Cartan data of a Lagrangian: energy, m- and (m+1)-forms,
/// and the multivelocity Hessian block.
struct PoincareCartanData {
  Expr energy;  // E_L
  DiffForm theta, omega;
  std::vector<Symbol> jets;  // chart order
  std::map<std::pair<Symbol, Symbol>, Expr> hessian;  // nonzero entries

  bool hessian_zero() const { return hessian.empty(); }
};

inline PoincareCartanData poincare_cartan(const Tower& tw, const Expr& L) {
  const BundleChart* j1 = &tw.chart_J1;
  const ExprContext& ctx = *tw.ctx;
  PoincareCartanData pc;
  pc.theta = DiffForm(j1, tw.m);
  Expr sum_jet_dL;
  for (const auto& co : j1->coords) {
    if (co.role != CoordRole::Jet) continue;
    pc.jets.push_back(co.sym);
    Expr dL = ctx.partial(L, co.sym);
    sum_jet_dL += Expr(co.sym) * dL;
    if (dL.is_zero_expr()) continue;
    Symbol y = tw.field_sym(co.family, co.indices);
    pc.theta = pc.theta + wedge(wedge(DiffForm::scalar(j1, dL), DiffForm::basis(j1, y)),
                                volume_contracted(j1, co.dir));
  }
  pc.energy = ctx.normalize(sum_jet_dL - L);
  pc.theta = pc.theta - wedge(DiffForm::scalar(j1, pc.energy), DiffForm::volume(j1));
  pc.omega = -d(pc.theta);
  for (Symbol a : pc.jets)
    for (Symbol b : pc.jets) {
      Expr h = ctx.partial(ctx.partial(L, a), b);
      if (!h.is_zero_expr()) pc.hessian[{a, b}] = std::move(h);
    }
  return pc;
}

enum class LegendreClass { Regular, Singular, NonlinearNoInverse };

/// The (extended) Legendre map with its symbolic inversion record.
struct LegendreData {
  ChartMap fl;                      // J1Pi -> J1Pi*
  ChartMap fl_ext;                  // J1Pi -> MPi
  std::map<Symbol, Expr> momenta;   // momentum coordinate -> dL/d(jet)
  LegendreClass cls = LegendreClass::Regular;
  std::map<Symbol, RatExpr> inverse_jets;          // solved multivelocities
  std::vector<Expr> primary_constraints;           // momenta relations on J1Pi*
  std::vector<std::map<Symbol, Expr>> hessian_kernel;  // singular directions
  Ledger ledger;
};

inline LegendreData legendre(const Tower& tw, const Expr& L, const PoincareCartanData& pc) {
  const ExprContext& ctx = *tw.ctx;
  LegendreData ld;
  ld.fl.src = &tw.chart_J1;
  ld.fl.tgt = &tw.chart_J1Star;
  ld.fl_ext.src = &tw.chart_J1;
  ld.fl_ext.tgt = &tw.chart_MPi;
  std::vector<Expr> eqs;
  for (const auto& co : tw.chart_J1Star.coords) {
    if (co.role != CoordRole::Momentum) {
      ld.fl.map[co.sym] = Expr(co.sym);
      ld.fl_ext.map[co.sym] = Expr(co.sym);
      continue;
    }
    Expr dL = ctx.partial(L, tw.jet_sym(co.family, co.indices, co.dir));
    ld.momenta[co.sym] = dL;
    ld.fl.map[co.sym] = dL;
    ld.fl_ext.map[co.sym] = dL;
    eqs.push_back(dL - Expr(co.sym));
  }
  ld.fl_ext.map[tw.p_sym] = ctx.normalize(-pc.energy);

  std::set<Symbol> jetset(pc.jets.begin(), pc.jets.end());
  LinSolveResult ls = solve_linear(eqs, [&](Symbol s) { return jetset.count(s) > 0; }, ctx);
  ld.inverse_jets = std::move(ls.solved);
  ld.ledger = std::move(ls.ledger);
  for (auto& c : ls.constraints) ld.primary_constraints.push_back(primitive_part(c));
  if (!ls.deferred.empty()) {
    ld.cls = LegendreClass::NonlinearNoInverse;
  } else if (ld.primary_constraints.empty() &&
             ld.inverse_jets.size() == pc.jets.size()) {
    ld.cls = LegendreClass::Regular;
  } else {
    ld.cls = LegendreClass::Singular;
  }

  // singular directions: kernel of the Hessian as a linear map
  if (!pc.hessian.empty() && ld.cls != LegendreClass::Regular) {
    std::vector<Symbol> unknowns;
    std::map<Symbol, Symbol> dir_of;
    for (Symbol j : pc.jets) {
      Symbol u = make_symbol(SymKind::Unknown, "hker_" + j->family, j->indices);
      unknowns.push_back(u);
      dir_of[u] = j;
    }
    std::vector<Expr> keqs;
    for (Symbol a : pc.jets) {
      Expr row;
      for (size_t k = 0; k < pc.jets.size(); ++k) {
        auto it = pc.hessian.find({a, pc.jets[k]});
        if (it != pc.hessian.end()) row += it->second * Expr(unknowns[k]);
      }
      if (!row.is_zero_expr()) keqs.push_back(row);
    }
    for (auto& vec : kernel_basis(keqs, unknowns, ctx, &ld.ledger)) {
      std::map<Symbol, Expr> dirs;
      for (auto& [u, e] : vec) dirs[dir_of.at(u)] = e;
      ld.hessian_kernel.push_back(std::move(dirs));
    }
  } else if (pc.hessian.empty()) {
    // identically zero Hessian: every multivelocity direction is singular
    for (Symbol j : pc.jets) ld.hessian_kernel.push_back({{j, Expr::one()}});
  }
  return ld;
}

/// A De Donder-Weyl Hamiltonian system on its phase chart (J1Pi* when
/// regular, the primary constraint submanifold when singular).
struct HamiltonianData {
  const BundleChart* phase = nullptr;
  Expr H;
  DiffForm theta, omega;
  ChartMap section;   // phase -> MPi (the Hamiltonian section h)
  ChartMap fl_phase;  // J1Pi -> phase (FL resp. FL_0)
  Ledger ledger;
};

namespace detail {

/// Clears negative atom powers out of an equation-difference, recording
/// the inverted atoms as nonzero assumptions.
inline Expr clear_negative_powers(Expr e, Ledger& ledger) {
  std::map<Symbol, int> worst;
  for (const auto& [m, c] : e.terms())
    for (const auto& f : m.f)
      if (f.exp < 0) worst[f.sym] = std::min(worst[f.sym], f.exp);
  Monomial mul;
  for (auto& [s, exp] : worst) {
    ledger.record(Expr(s));
    mul.f.push_back({s, -exp});
  }
  return e * Expr(Rational(1), mul);
}

}  // namespace detail

/// Builds the Hamiltonian theory associated with a Lagrangian one.
/// Regular case: H = E_L through the inverse Legendre map on J1Pi*.
/// Singular case: primary constraints define P0 as a graph over retained
/// coordinates; H0 is the declared candidate (verified against
/// FL0* H0 = E_L) or is found by substituting the solved multivelocities.
inline HamiltonianData hamiltonize(Tower& tw, const Expr& L, const PoincareCartanData& pc,
                                   const LegendreData& ld,
                                   std::optional<Expr> declared_H = std::nullopt,
                                   const Ledger& assumptions = {}) {
  const ExprContext& ctx = *tw.ctx;
  HamiltonianData hd;
  hd.ledger = assumptions;
  hd.ledger.merge(ld.ledger);

  auto finish = [&](const BundleChart* phase) {
    hd.phase = phase;
    hd.section.src = phase;
    hd.section.tgt = &tw.chart_MPi;
    for (const auto& co : tw.chart_MPi.coords) {
      if (co.sym == tw.p_sym) {
        hd.section.map[co.sym] = ctx.normalize(-hd.H);
      } else if (phase->has(co.sym)) {
        hd.section.map[co.sym] = Expr(co.sym);
      } else {
        auto it = phase->subs.find(co.sym);
        if (it == phase->subs.end()) fail(Errc::IncompleteMap, co.sym->name);
        hd.section.map[co.sym] = it->second;
      }
    }
    auto [theta, omega] = liouville_forms(tw.chart_MPi);
    hd.theta = pullback(hd.section, theta);
    hd.omega = -d(hd.theta);
  };

  if (ld.cls == LegendreClass::Regular) {
    RatExpr h = subst_rational(pc.energy, ld.inverse_jets, ctx, &hd.ledger);
    auto H = try_atomize(h, ctx);
    if (!H) fail(Errc::NoHamiltonianFound, "energy does not atomize through the inverse Legendre map");
    hd.H = ctx.normalize(*H);
    if (declared_H && ctx.normalize(hd.H - *declared_H) != Expr())
      fail(Errc::NoHamiltonianFound, "declared Hamiltonian disagrees with the Legendre construction");
    finish(&tw.chart_J1Star);
    hd.fl_phase = ld.fl;
    return hd;
  }

  if (ld.cls == LegendreClass::NonlinearNoInverse)
    fail(Errc::NonlinearInversion, "no symbolic inverse for the multivelocities");

  // singular: put the primary constraints in graph form p_i = f_i
  std::set<Symbol> momset;
  for (const auto& [p, e] : ld.momenta) momset.insert(p);
  LinSolveResult graph = solve_linear(ld.primary_constraints,
                                      [&](Symbol s) { return momset.count(s) > 0; }, ctx);
  if (!graph.deferred.empty() || !graph.constraints.empty())
    fail(Errc::NonlinearInversion, "primary constraints are not of graph type");
  std::vector<std::pair<Symbol, Expr>> cons;
  for (const auto& [p, f] : graph.solved) {
    auto fe = try_atomize(f, ctx);
    if (!fe) fail(Errc::NonlinearInversion, "constraint rhs does not atomize: " + p->name);
    cons.push_back({p, ctx.normalize(*fe)});
  }
  std::sort(cons.begin(), cons.end(),
            [&](const auto& a, const auto& b) { return sym_less(a.first, b.first); });
  const BundleChart* p0 = restrict_chart(tw, tw.chart_J1Star, cons);

  // FL_0: J1Pi -> P0
  hd.fl_phase.src = &tw.chart_J1;
  hd.fl_phase.tgt = p0;
  for (const auto& co : p0->coords) hd.fl_phase.map[co.sym] = ld.fl.at(co.sym);

  if (declared_H) {
    hd.H = ctx.normalize(*declared_H);
  } else {
    RatExpr h = subst_rational(pc.energy, ld.inverse_jets, ctx, &hd.ledger);
    auto H = try_atomize(h, ctx);
    if (!H) fail(Errc::NoHamiltonianFound, "energy does not atomize on the primary submanifold");
    hd.H = ctx.normalize(*H);
    for (Symbol a : hd.H.atoms())
      if (a->kind == SymKind::Jet)
        fail(Errc::NoHamiltonianFound, "energy keeps unsolved multivelocity " + a->name);
  }

  // defining property FL0* H0 = E_L
  {
    std::map<Symbol, Expr> pull;
    for (const auto& [w, e] : hd.fl_phase.map) pull[w] = e;
    Expr pulled = ctx.substitute(hd.H, pull);
    Expr diff = detail::clear_negative_powers(ctx.normalize(pulled - pc.energy), hd.ledger);
    if (!ctx.normalize(diff).is_zero_expr())
      fail(Errc::NoHamiltonianFound,
           "candidate Hamiltonian does not pull back to the energy; residual " + diff.str());
  }
  finish(p0);
  return hd;
}

/// Kernel of v -> i(v) Omega over the fraction field, as vector fields.
/// Empty for a multisymplectic form; the premultisymplectic kernel comes
/// with the pivot assumptions under which it was computed.
inline std::pair<std::vector<VectorField>, Ledger> kernel_vector_fields(const DiffForm& omega) {
  const BundleChart* ch = omega.chart();
  const ExprContext& ctx = *ch->tower->ctx;
  std::vector<Symbol> unknowns;
  std::map<Symbol, Symbol> coord_of;
  for (const auto& co : ch->coords) {
    std::vector<int> idx = co.indices;
    if (co.dir >= 0) idx.push_back(co.dir);
    Symbol u = make_symbol(SymKind::Unknown, "ker_" + co.sym->family, std::move(idx));
    unknowns.push_back(u);
    coord_of[u] = co.sym;
  }
  VectorField v;
  v.chart = ch;
  for (size_t i = 0; i < unknowns.size(); ++i) v.set(ch->coord(static_cast<int>(i)).sym, Expr(unknowns[i]));
  DiffForm iv = contract(v, omega);
  std::vector<Expr> eqs;
  for (const auto& [k, c] : iv.terms()) eqs.push_back(c);
  Ledger led;
  auto basis = kernel_basis(eqs, unknowns, ctx, &led);
  std::vector<VectorField> out;
  for (const auto& vec : basis) {
    VectorField kv;
    kv.chart = ch;
    for (const auto& [u, e] : vec) kv.set(coord_of.at(u), e);
    out.push_back(std::move(kv));
  }
  return {out, led};
}

}  // namespace multisym
