#pragma once

#include "multisym/constraints.hpp"
#include "multisym/lifts.hpp"

namespace multisym {

/// Reduce every coefficient of a form modulo a constraint ideal.
inline DiffForm reduce_form_mod(const DiffForm& f, const std::vector<Expr>& constraints) {
  if (constraints.empty()) return f;
  const ExprContext& ctx = *f.chart()->tower->ctx;
  DiffForm r(f.chart(), f.degree());
  for (const auto& [k, c] : f.terms()) {
    Expr red = reduce_mod_ideal(c, constraints, ctx);
    if (!red.is_zero_expr()) r.accumulate(k, red);
  }
  return r;
}

/// Outcome of the Noether/Cartan symmetry predicates for one vector field
/// on one phase space. Failing flags keep their symbolic residuals; the
/// singular case also evaluates them modulo the final constraint ideal.
struct SymmetryVerdict {
  std::string generator;
  const BundleChart* chart = nullptr;
  bool exact = false;              // L(Y) Theta = 0
  bool cartan = false;             // L(Y) Omega = 0
  bool natural = false;            // built by a canonical lift
  bool lagrangian_invariant = false;  // L(X) (L d^m x) = 0, when supplied
  bool exact_on_final = false;     // residual vanishes mod final constraints
  bool cartan_on_final = false;
  DiffForm exact_residual, cartan_residual;
  DiffForm lie_lagrangian;
  bool has_lagrangian_check = false;
};

inline SymmetryVerdict verify_symmetry(const DiffForm& theta, const DiffForm& omega,
                                       const VectorField& y, const std::string& name,
                                       bool natural_tag,
                                       const std::vector<Expr>& final_constraints = {},
                                       const DiffForm* lie_lagrangian = nullptr) {
  if (y.chart != theta.chart() || y.chart != omega.chart())
    fail(Errc::ChartMismatch, "verify_symmetry");
  SymmetryVerdict v;
  v.generator = name;
  v.chart = y.chart;
  v.natural = natural_tag;
  v.exact_residual = lie(y, theta);
  v.cartan_residual = lie(y, omega);
  v.exact = v.exact_residual.is_zero();
  v.cartan = v.cartan_residual.is_zero();
  v.exact_on_final = v.exact || reduce_form_mod(v.exact_residual, final_constraints).is_zero();
  v.cartan_on_final = v.cartan || reduce_form_mod(v.cartan_residual, final_constraints).is_zero();
  if (v.exact && !v.cartan) fail(Errc::Internal, "exact symmetry failed the cartan check");
  if (lie_lagrangian) {
    v.lie_lagrangian = *lie_lagrangian;
    v.lagrangian_invariant = lie_lagrangian->is_zero();
    v.has_lagrangian_check = true;
  }
  return v;
}

/// Multimomentum map of an exact symmetry: J = -i(Y) Theta with
/// d J + i(Y) Omega = 0. Determined up to an exact form; this always
/// reports the -i(Y)Theta representative.
struct MultimomentumMap {
  std::string generator;
  DiffForm J;
  std::string construction = "-i(Y)Theta";
};

inline MultimomentumMap momentum_map(const DiffForm& theta, const DiffForm& omega,
                                     const VectorField& y, const SymmetryVerdict& verdict) {
  if (!verdict.exact)
    fail(Errc::NotExactSymmetry,
         verdict.generator + " is not exact; supply a candidate potential instead");
  MultimomentumMap mm;
  mm.generator = verdict.generator;
  mm.J = -contract(y, theta);
  DiffForm check = d(mm.J) + contract(y, omega);
  if (!check.is_zero()) fail(Errc::Internal, "dJ + i(Y)Omega != 0 for an exact symmetry");
  return mm;
}

/// Non-exact route: verifies a user-supplied potential alpha with
/// i(Y)Omega + d(alpha) = 0 and returns it as the map.
inline MultimomentumMap momentum_map_with_candidate(const DiffForm& omega, const VectorField& y,
                                                    const DiffForm& alpha,
                                                    const std::string& name) {
  DiffForm check = contract(y, omega) + d(alpha);
  if (!check.is_zero())
    fail(Errc::NotExactSymmetry, "candidate potential fails i(Y)Omega + d(alpha) = 0 for " + name);
  return {name, alpha, "user candidate"};
}

/// Geometric infinitesimal gauge fields of a singular system: the
/// vertical kernel of Omega_H restricted by tangency to the final
/// constraint submanifold.
struct GaugeFields {
  std::vector<VectorField> basis;
  Ledger ledger;
};

inline GaugeFields find_gauge_fields(const DiffForm& omega,
                                     const std::vector<Expr>& final_constraints) {
  const BundleChart* ch = omega.chart();
  const ExprContext& ctx = *ch->tower->ctx;
  GaugeFields out;
  std::vector<Symbol> unknowns;
  std::map<Symbol, Symbol> coord_of;
  VectorField v;
  v.chart = ch;
  for (const auto& co : ch->coords) {
    if (co.role == CoordRole::Base) continue;  // vertical over M
    std::vector<int> idx = co.indices;
    if (co.dir >= 0) idx.push_back(co.dir);
    Symbol u = make_symbol(SymKind::Unknown, "gauge_" + co.sym->family, std::move(idx));
    unknowns.push_back(u);
    coord_of[u] = co.sym;
    v.set(co.sym, Expr(u));
  }
  DiffForm iv = contract(v, omega);
  std::vector<Expr> eqs;
  for (const auto& [k, c] : iv.terms()) eqs.push_back(c);
  auto basis = kernel_basis(eqs, unknowns, ctx, &out.ledger);
  for (const auto& vec : basis) {
    VectorField kv;
    kv.chart = ch;
    for (const auto& [u, e] : vec) kv.set(coord_of.at(u), e);
    // tangency to the final constraint submanifold
    bool tangent = true;
    for (const auto& c : final_constraints) {
      Expr t;
      for (Symbol w : ctx.dependency_support(c)) {
        if (!ch->has(w)) continue;
        Expr comp = kv.comp(w);
        if (!comp.is_zero_expr()) t += comp * ctx.partial(c, w);
      }
      if (!reduce_mod_ideal(t, final_constraints, ctx).is_zero_expr()) {
        tangent = false;
        break;
      }
    }
    if (tangent) out.basis.push_back(std::move(kv));
  }
  return out;
}

/// Conservation along solutions: the graded Lie derivative of an
/// (m-1)-form along the solution multivector, reduced modulo the field
/// equation residuals. Zero means conserved on shell.
inline Expr conservation_residual(const MultiVectorField& X, const DiffForm& J,
                                  const std::vector<Expr>& field_equations) {
  DiffForm l = lie_multi(X, J);
  if (l.is_zero()) return Expr();
  const ExprContext& ctx = *J.chart()->tower->ctx;
  Expr resid = l.coeff({});
  if (l.degree() != 0) {
    // degree m-1 input gives a scalar; anything else reduces termwise
    Expr acc;
    for (const auto& [k, c] : l.terms()) acc += reduce_mod_ideal(c, field_equations, ctx);
    return ctx.normalize(acc);
  }
  return reduce_mod_ideal(resid, field_equations, ctx);
}

}  // namespace multisym
