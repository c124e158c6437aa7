#pragma once

#include "multisym/multivec.hpp"
#include "multisym/linsolve.hpp"

namespace multisym {

enum class Side { Lagrangian, Hamiltonian };

inline const char* side_name(Side s) { return s == Side::Lagrangian ? "lagrangian" : "hamiltonian"; }

/// Residual system of i(X) Omega = 0 for the transverse multivector
/// ansatz: the raw residual coefficients, their partition into
/// coefficient-determining equations and coordinate constraints, the
/// solved coefficient bindings, and the pivot assumptions.
struct FieldEquations {
  UnknownMultivector um;
  DiffForm residual_form;
  std::vector<Expr> residuals;        // all nonzero coefficients, chart order
  std::vector<Expr> coefficient_eqs;  // residuals containing unknown slots
  std::vector<Expr> constraints;      // unknown-free residuals after elimination
  LinSolveResult solve;
  bool nonlinear_deferred = false;
};

inline FieldEquations derive_field_equations(const DiffForm& omega, const Ledger& units) {
  const BundleChart* ch = omega.chart();
  const ExprContext& ctx = *ch->tower->ctx;
  FieldEquations fe;
  fe.um = make_unknown_multivector(ch);
  fe.residual_form = contract_multi(fe.um.X, omega);
  auto is_unknown = [&](Symbol s) { return fe.um.is_unknown(s); };
  for (const auto& [k, c] : fe.residual_form.terms()) {
    fe.residuals.push_back(c);
    bool has_unknown = false;
    for (Symbol a : c.atoms()) has_unknown = has_unknown || is_unknown(a);
    (has_unknown ? fe.coefficient_eqs : fe.constraints).push_back(c);
  }
  fe.solve = solve_linear(fe.residuals, is_unknown, ctx);
  fe.nonlinear_deferred = !fe.solve.deferred.empty();
  std::vector<Expr> cons;
  for (const auto& c : fe.solve.constraints) {
    Expr s = strip_units(c, units, ctx);
    if (!s.is_zero_expr()) cons.push_back(s);
  }
  fe.constraints = std::move(cons);
  return fe;
}

/// Staged output of the premultisymplectic constraint algorithm.
struct ConstraintReport {
  Side side = Side::Lagrangian;
  const BundleChart* chart = nullptr;
  std::vector<Expr> compatibility;
  std::vector<Expr> sopde;
  std::vector<std::vector<Expr>> tangency;  // per tangency round
  std::vector<Expr> final_constraints;      // generators of the final submanifold ideal
  std::map<Symbol, Expr> sopde_bindings;
  FieldEquations eqs;  // with SOPDE imposed on the lagrangian side
  bool converged = false;
  int iterations = 0;
  Ledger ledger;
  // staging order is fixed: compatibility, then SOPDE, then tangency
  std::string order_note = "stages: compatibility, sopde, tangency";
};

namespace detail {

inline void append_new_constraints(std::vector<Expr>& into, std::vector<Expr>& all,
                                   const std::vector<Expr>& found, const Ledger& units,
                                   const ExprContext& ctx) {
  for (const auto& c : found) {
    Expr r = strip_units(reduce_mod_ideal(c, all, ctx), units, ctx);
    if (r.is_zero_expr()) continue;
    if (r.is_constant())
      fail(Errc::InconsistentSystem, "constraint reduces to the nonzero constant " + r.str());
    into.push_back(r);
    all.push_back(r);
  }
}

}  // namespace detail

/// Runs the staged algorithm on i(X) Omega = 0: compatibility constraints
/// from the raw field equations, the SOPDE holonomy bindings on the
/// Lagrangian side, then tangency rounds L(X_a) c until no new constraint
/// appears.
inline ConstraintReport run_constraint_algorithm(const DiffForm& omega, Side side,
                                                 const Ledger& assumptions, int max_iter = 10) {
  const BundleChart* ch = omega.chart();
  const Tower& tw = *ch->tower;
  const ExprContext& ctx = *tw.ctx;
  ConstraintReport rep;
  rep.side = side;
  rep.chart = ch;
  rep.ledger = assumptions;

  // stage 1: compatibility
  FieldEquations fe = derive_field_equations(omega, assumptions);
  detail::append_new_constraints(rep.compatibility, rep.final_constraints, fe.constraints,
                                 assumptions, ctx);
  rep.ledger.merge(fe.solve.ledger);

  // stage 2: SOPDE (lagrangian side): bind the field-slot coefficients to
  // the jet coordinates and re-extract
  if (side == Side::Lagrangian) {
    for (const auto& [slot, u] : fe.um.slots) {
      auto [factor, coord] = slot;
      const Coord& co = ch->coord(ch->ord(coord));
      if (co.role == CoordRole::Field)
        rep.sopde_bindings[u] = Expr(tw.jet_sym(co.family, co.indices, factor));
    }
    std::vector<Expr> bound;
    for (const auto& r : fe.residuals) bound.push_back(ctx.substitute(r, rep.sopde_bindings));
    LinSolveResult ls =
        solve_linear(bound, [&](Symbol s) { return fe.um.is_unknown(s); }, ctx);
    rep.ledger.merge(ls.ledger);
    std::vector<Expr> cons;
    for (const auto& c : ls.constraints) {
      Expr s = strip_units(c, assumptions, ctx);
      if (!s.is_zero_expr()) cons.push_back(s);
    }
    detail::append_new_constraints(rep.sopde, rep.final_constraints, cons, assumptions, ctx);
    fe.solve = std::move(ls);
    fe.nonlinear_deferred = !fe.solve.deferred.empty();
  }

  // stage 3: tangency to fixpoint
  std::map<Symbol, Expr> bindings = rep.sopde_bindings;
  for (const auto& [u, b] : fe.solve.solved)
    if (b.is_polynomial() && !bindings.count(u)) bindings[u] = b.num;
  std::vector<Expr> queue = rep.final_constraints;
  rep.converged = true;
  while (!queue.empty()) {
    if (++rep.iterations > max_iter) {
      rep.converged = false;
      fail(Errc::IterationCapExceeded,
           "tangency stage exceeded " + std::to_string(max_iter) + " rounds");
    }
    std::vector<Expr> found;
    for (const auto& c : queue) {
      for (int a = 0; a < tw.m; ++a) {
        // L(X_a) c: directional derivative of the scalar constraint
        Expr t;
        for (Symbol w : ctx.dependency_support(c)) {
          if (!ch->has(w)) continue;
          Expr comp = fe.um.X.factor(a).comp(w);
          if (comp.is_zero_expr()) continue;
          t += comp * ctx.partial(c, w);
        }
        t = ctx.substitute(t, bindings);
        bool has_unknown = false;
        for (Symbol s : t.atoms()) has_unknown = has_unknown || fe.um.is_unknown(s);
        if (has_unknown) continue;  // equation for the remaining coefficients
        found.push_back(t);
      }
    }
    std::vector<Expr> fresh;
    detail::append_new_constraints(fresh, rep.final_constraints, found, assumptions, ctx);
    rep.tangency.push_back(fresh);
    queue = std::move(fresh);
  }
  if (!rep.tangency.empty() && rep.tangency.back().empty()) rep.tangency.pop_back();
  rep.eqs = std::move(fe);
  return rep;
}

/// Section-derivative marker d_mu ... (field or momentum component).
inline Symbol section_marker(Symbol coord, std::vector<int> dirs, const Tower& tw) {
  std::vector<Symbol> derivs;
  for (int d : dirs) derivs.push_back(tw.base[d]);
  return make_symbol(SymKind::Marker, coord->family, coord->indices, std::move(derivs));
}

/// The printable PDE system on integral sections: solved coefficient
/// bindings become derivative equations, leftover residuals and
/// constraints are transcribed with formal partial markers.
inline std::vector<Expr> on_sections(const ConstraintReport& rep) {
  const Tower& tw = *rep.chart->tower;
  const ExprContext& ctx = *tw.ctx;
  std::map<Symbol, Expr> marker;
  for (const auto& [slot, u] : rep.eqs.um.slots) {
    auto [factor, coord] = slot;
    const Coord& co = rep.chart->coord(rep.chart->ord(coord));
    if (co.role == CoordRole::Jet) {
      Symbol y = tw.field_sym(co.family, co.indices);
      marker[u] = Expr(section_marker(y, {co.dir, factor}, tw));
    } else {
      marker[u] = Expr(section_marker(coord, {factor}, tw));
    }
  }
  if (rep.side == Side::Lagrangian) {
    for (const auto& co : rep.chart->coords)
      if (co.role == CoordRole::Jet)
        marker[co.sym] =
            Expr(section_marker(tw.field_sym(co.family, co.indices), {co.dir}, tw));
  }
  auto transcribe = [&](const Expr& e) { return ctx.substitute(e, marker); };

  std::vector<Expr> pdes;
  auto push = [&](Expr e) {
    e = primitive_part(strip_units(e, rep.ledger, ctx));
    if (e.is_zero_expr()) return;
    for (Symbol s : e.atoms())
      if (s->kind == SymKind::Unknown) fail(Errc::UnsolvedCoefficient, s->name);
    for (const auto& q : pdes)
      if (q == e || q == ctx.normalize(-e)) return;
    pdes.push_back(std::move(e));
  };
  for (const auto& [u, b] : rep.eqs.solve.solved) {
    if (rep.sopde_bindings.count(u)) continue;
    push(transcribe(Expr(u) * b.den - b.num));
  }
  for (const auto& r : rep.eqs.solve.deferred) push(transcribe(r));
  for (const auto& c : rep.final_constraints) push(transcribe(c));
  return pdes;
}

}  // namespace multisym
