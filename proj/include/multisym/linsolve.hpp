#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multisym/context.hpp"

namespace multisym {

/// Recorded nonzero hypotheses under which symbolic solves are valid
/// (pivots, stripped unit factors, inverted parameters).
struct Ledger {
  std::vector<Expr> nonzero;

  void record(const Expr& e) {
    if (e.is_constant()) return;
    Expr p = primitive_part(e);
    for (const auto& x : nonzero)
      if (x == p) return;
    nonzero.push_back(p);
  }

  void merge(const Ledger& o) {
    for (const auto& e : o.nonzero) record(e);
  }

  bool contains(const Expr& e) const {
    Expr p = primitive_part(e);
    for (const auto& x : nonzero)
      if (x == p) return true;
    return false;
  }
};

/// Quotient of polynomials. Equations are kept polynomial by clearing
/// denominators (sound because every denominator is ledger-recorded
/// nonzero); quotients appear only in solved bindings.
struct RatExpr {
  Expr num;
  Expr den = Expr::one();

  bool is_polynomial() const { return den == Expr::one(); }
  bool is_zero() const { return num.is_zero_expr(); }

  void simplify() {
    if (num.is_zero_expr()) {
      den = Expr::one();
      return;
    }
    if (auto q = div_exact(num, den)) {
      num = *q;
      den = Expr::one();
      return;
    }
    // common rational content
    Rational c = num.leading().second / den.leading().second;
    Expr nn = num * (Rational(1) / num.leading().second);
    Expr dd = den * (Rational(1) / den.leading().second);
    num = nn * c;
    den = dd;
  }

  std::string str() const {
    if (is_polynomial()) return num.str();
    return "(" + num.str() + ") / (" + den.str() + ")";
  }
};

/// Reduction of `e` modulo the ideal spanned by `basis` (multivariate
/// division by leading monomials). Decides membership for the linear
/// combinations that arise in the constraint analyses.
inline Expr reduce_mod(Expr e, const std::vector<Expr>& basis, const ExprContext& ctx) {
  e = ctx.normalize(e);
  struct Red {
    Monomial lead;
    Rational lc;
    const Expr* poly;
  };
  std::vector<Red> reds;
  for (const auto& b : basis)
    if (!b.is_zero_expr()) reds.push_back({b.leading().first, b.leading().second, &b});
  Expr rem, work = std::move(e);
  while (!work.is_zero_expr()) {
    const auto& [m, c] = work.leading();
    bool hit = false;
    for (const auto& r : reds) {
      if (mono_divides(r.lead, m)) {
        work -= Expr(c / r.lc, mono_div(m, r.lead)) * (*r.poly);
        hit = true;
        break;
      }
    }
    if (!hit) {
      rem += Expr(c, m);
      work -= Expr(c, m);
    }
  }
  return ctx.normalize(rem);
}

/// Ideal membership with a bounded completion fallback: plain division
/// first, then a few rounds of S-polynomial closure when the generator
/// set is not confluent under the term order.
inline Expr reduce_mod_ideal(const Expr& e, std::vector<Expr> basis, const ExprContext& ctx,
                             int rounds = 3, size_t max_basis = 64) {
  for (auto& b : basis) b = primitive_part(ctx.normalize(b));
  basis.erase(std::remove_if(basis.begin(), basis.end(),
                             [](const Expr& b) { return b.is_zero_expr(); }),
              basis.end());
  Expr r = reduce_mod(e, basis, ctx);
  for (int round = 0; round < rounds && !r.is_zero_expr(); ++round) {
    std::vector<Expr> fresh;
    for (size_t i = 0; i < basis.size() && basis.size() + fresh.size() < max_basis; ++i)
      for (size_t j = i + 1; j < basis.size() && basis.size() + fresh.size() < max_basis; ++j) {
        const auto& [mi, ci] = basis[i].leading();
        const auto& [mj, cj] = basis[j].leading();
        Monomial lcm;
        {
          size_t a = 0, b = 0;
          while (a < mi.f.size() || b < mj.f.size()) {
            if (a < mi.f.size() && (b >= mj.f.size() || sym_less(mi.f[a].sym, mj.f[b].sym))) {
              lcm.f.push_back(mi.f[a++]);
            } else if (b < mj.f.size() && (a >= mi.f.size() || sym_less(mj.f[b].sym, mi.f[a].sym))) {
              lcm.f.push_back(mj.f[b++]);
            } else {
              lcm.f.push_back({mi.f[a].sym, std::max(mi.f[a].exp, mj.f[b].exp)});
              ++a, ++b;
            }
          }
        }
        Expr s = Expr(Rational(1) / ci, mono_div(lcm, mi)) * basis[i] -
                 Expr(Rational(1) / cj, mono_div(lcm, mj)) * basis[j];
        Expr sr = reduce_mod(s, basis, ctx);
        if (!sr.is_zero_expr()) fresh.push_back(primitive_part(sr));
      }
    if (fresh.empty()) break;
    for (auto& f : fresh) basis.push_back(std::move(f));
    r = reduce_mod(e, basis, ctx);
  }
  return r;
}

/// Divides out unit factors: numeric content, atom factors common to all
/// terms that are ledger-nonzero, and exact polynomial unit divisors.
inline Expr strip_units(Expr e, const Ledger& units, const ExprContext& ctx) {
  if (e.is_zero_expr()) return e;
  e = primitive_part(e);
  // atom factors present (with positive or negative exponent) in every term
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<Symbol, int> common;  // min positive / max negative exponent
    bool first = true;
    for (const auto& [m, c] : e.terms()) {
      std::map<Symbol, int> cur;
      for (const auto& f : m.f) cur[f.sym] = f.exp;
      if (first) {
        common = cur;
        first = false;
      } else {
        for (auto it = common.begin(); it != common.end();) {
          auto jt = cur.find(it->first);
          if (jt == cur.end() || (it->second > 0) != (jt->second > 0)) {
            it = common.erase(it);
          } else {
            it->second = it->second > 0 ? std::min(it->second, jt->second)
                                        : std::max(it->second, jt->second);
            ++it;
          }
        }
      }
    }
    for (const auto& [s, exp] : common) {
      bool unit = s->kind == SymKind::Param || s->kind == SymKind::Derived;
      unit = unit && units.contains(Expr(s));
      if (!unit) continue;
      e = ctx.normalize(e * Expr(s, -exp));
      changed = true;
      break;
    }
  }
  // polynomial unit divisors
  for (const auto& u : units.nonzero) {
    if (u.is_monomial()) continue;
    while (true) {
      auto q = div_exact(e, u);
      if (!q) break;
      e = *q;
    }
  }
  return primitive_part(e);
}

struct LinSolveResult {
  std::vector<std::pair<Symbol, RatExpr>> order;  // triangular solve order
  std::map<Symbol, RatExpr> solved;               // fully back-substituted
  std::vector<Expr> constraints;                  // unknown-free residuals
  std::vector<Expr> deferred;                     // nonlinear-in-unknowns residuals
  Ledger ledger;
};

namespace detail {

/// Substitutes u := num/den into a polynomial, clearing the denominator
/// (valid for equations; den is ledger-nonzero).
inline Expr subst_cleared(const Expr& e, Symbol u, const Expr& num, const Expr& den,
                          const ExprContext& ctx) {
  int dmax = 0;
  for (const auto& [m, c] : e.terms()) dmax = std::max(dmax, m.exponent_of(u));
  if (dmax == 0) return e;
  Expr out;
  for (const auto& [m, c] : e.terms()) {
    int dd = m.exponent_of(u);
    if (dd < 0) fail(Errc::Internal, "negative unknown power in equation");
    Monomial rest;
    for (const auto& f : m.f)
      if (f.sym != u) rest.f.push_back(f);
    out += Expr(c, rest) * num.pow(dd) * den.pow(dmax - dd);
  }
  return ctx.normalize(out);
}

}  // namespace detail

/// Staged elimination for systems linear in the unknown symbols, over the
/// fraction field of the coordinate ring. Residuals that stay free of
/// unknowns become constraints; residuals nonlinear in unknowns are
/// deferred. Every non-constant pivot is recorded in the ledger.
inline LinSolveResult solve_linear(std::vector<Expr> eqs,
                                   const std::function<bool(Symbol)>& is_unknown,
                                   const ExprContext& ctx) {
  LinSolveResult res;
  for (auto& e : eqs) e = ctx.normalize(e);

  auto unknown_degree = [&](const Expr& e) {
    int d = 0;
    for (const auto& [m, c] : e.terms()) {
      int td = 0;
      for (const auto& f : m.f)
        if (is_unknown(f.sym)) td += f.exp > 0 ? f.exp : -f.exp;
      d = std::max(d, td);
    }
    return d;
  };

  while (true) {
    // rank: 0 = constant coeff, 1 = monomial, 2 = polynomial
    int best_rank = 3;
    size_t best_terms = SIZE_MAX;
    int best_eq = -1;
    Symbol best_u = nullptr;
    Expr best_coeff;
    for (size_t i = 0; i < eqs.size(); ++i) {
      const Expr& e = eqs[i];
      if (e.is_zero_expr() || unknown_degree(e) != 1) continue;
      std::map<Symbol, Expr> coeffs;
      for (const auto& [m, c] : e.terms())
        for (const auto& f : m.f)
          if (is_unknown(f.sym)) {
            Monomial rest;
            for (const auto& g : m.f)
              if (g.sym != f.sym) rest.f.push_back(g);
            coeffs[f.sym] += Expr(c, rest);
          }
      for (const auto& [u, a] : coeffs) {
        if (a.is_zero_expr()) continue;
        int rank = a.is_constant() ? 0 : (a.is_monomial() ? 1 : 2);
        size_t nterms = a.terms().size();
        if (std::tuple(rank, nterms, u->key, i) <
            std::tuple(best_rank, best_terms, best_u ? best_u->key : std::string(1, '\xff'),
                       static_cast<size_t>(best_eq < 0 ? SIZE_MAX : best_eq))) {
          best_rank = rank;
          best_terms = nterms;
          best_eq = static_cast<int>(i);
          best_u = u;
          best_coeff = a;
        }
      }
    }
    if (best_eq < 0) break;

    // solve best_eq for best_u: eq = coeff*u + rest
    Expr rest = eqs[best_eq];
    {
      std::vector<Expr::Term> keep;
      for (const auto& [m, c] : rest.terms())
        if (m.exponent_of(best_u) == 0) keep.push_back({m, c});
      rest = Expr::collect(std::move(keep));
    }
    RatExpr bind{-rest, best_coeff};
    bind.simplify();
    if (!best_coeff.is_constant()) res.ledger.record(best_coeff);
    res.order.push_back({best_u, bind});
    eqs[best_eq] = Expr();
    for (auto& e : eqs)
      if (!e.is_zero_expr()) e = detail::subst_cleared(e, best_u, bind.num, bind.den, ctx);
  }

  for (auto& e : eqs) {
    if (e.is_zero_expr()) continue;
    if (unknown_degree(e) == 0)
      res.constraints.push_back(e);
    else
      res.deferred.push_back(e);
  }

  // full back-substitution of the triangular bindings
  for (int i = static_cast<int>(res.order.size()) - 1; i >= 0; --i) {
    auto [u, b] = res.order[i];
    for (const auto& [v, vb] : res.solved) {
      Expr dnum = detail::subst_cleared(b.num, v, vb.num, vb.den, ctx);
      Expr dden = detail::subst_cleared(b.den, v, vb.num, vb.den, ctx);
      // subst_cleared scales both by vb.den^k; keep the quotient consistent
      int dn = 0, dd = 0;
      for (const auto& [m, c] : b.num.terms()) dn = std::max(dn, m.exponent_of(v));
      for (const auto& [m, c] : b.den.terms()) dd = std::max(dd, m.exponent_of(v));
      if (dn > dd)
        dden = dden * vb.den.pow(dn - dd);
      else if (dd > dn)
        dnum = dnum * vb.den.pow(dd - dn);
      b.num = ctx.normalize(dnum);
      b.den = ctx.normalize(dden);
    }
    b.simplify();
    res.solved[u] = b;
  }
  return res;
}

/// Basis of the solution space of a homogeneous linear system: one vector
/// per free unknown, denominators cleared.
inline std::vector<std::map<Symbol, Expr>> kernel_basis(const std::vector<Expr>& eqs,
                                                        const std::vector<Symbol>& unknowns,
                                                        const ExprContext& ctx, Ledger* ledger) {
  std::set<Symbol> uset(unknowns.begin(), unknowns.end());
  LinSolveResult ls = solve_linear(eqs, [&](Symbol s) { return uset.count(s) > 0; }, ctx);
  if (ledger) ledger->merge(ls.ledger);
  std::vector<Symbol> free;
  for (Symbol u : unknowns)
    if (!ls.solved.count(u)) free.push_back(u);
  std::vector<std::map<Symbol, Expr>> basis;
  for (Symbol f : free) {
    // pivot components as rational functions at (f = 1, other free = 0)
    std::map<Symbol, RatExpr> comps;
    Expr denprod = Expr::one();
    for (const auto& [u, b] : ls.solved) {
      std::map<Symbol, Expr> point;
      for (Symbol g : free) point[g] = g == f ? Expr::one() : Expr();
      RatExpr r{ctx.substitute(b.num, point), ctx.substitute(b.den, point)};
      r.simplify();
      if (!r.is_zero() && !r.is_polynomial()) denprod = ctx.normalize(denprod * r.den);
      comps[u] = std::move(r);
    }
    std::map<Symbol, Expr> vec;
    vec[f] = denprod;
    for (const auto& [u, r] : comps) {
      if (r.is_zero()) continue;
      auto q = div_exact(denprod, r.den);  // denprod contains r.den as a factor
      if (!q) fail(Errc::Internal, "kernel denominator bookkeeping");
      Expr scaled = ctx.normalize(r.num * *q);
      if (!scaled.is_zero_expr()) vec[u] = std::move(scaled);
    }
    basis.push_back(std::move(vec));
  }
  return basis;
}

/// Substitutes rational bindings into a polynomial, tracking the common
/// denominator. Negative powers of a bound symbol invert its binding.
inline RatExpr subst_rational(const Expr& e, const std::map<Symbol, RatExpr>& bind,
                              const ExprContext& ctx, Ledger* ledger = nullptr) {
  RatExpr acc{Expr(), Expr::one()};
  for (const auto& [m, c] : e.terms()) {
    RatExpr t{Expr(c), Expr::one()};
    for (const auto& f : m.f) {
      auto it = bind.find(f.sym);
      if (it == bind.end()) {
        t.num = t.num * Expr(f.sym, f.exp);
      } else if (f.exp > 0) {
        t.num = t.num * it->second.num.pow(f.exp);
        t.den = t.den * it->second.den.pow(f.exp);
      } else {
        if (ledger) ledger->record(it->second.num);
        t.num = t.num * it->second.den.pow(-f.exp);
        t.den = t.den * it->second.num.pow(-f.exp);
      }
    }
    // acc += t over a common denominator
    if (acc.num.is_zero_expr()) {
      acc = t;
    } else if (acc.den == t.den) {
      acc.num += t.num;
    } else {
      acc.num = acc.num * t.den + t.num * acc.den;
      acc.den = acc.den * t.den;
    }
    acc.num = ctx.normalize(acc.num);
    acc.den = ctx.normalize(acc.den);
    acc.simplify();
  }
  return acc;
}

/// Rewrites num/den as a plain Laurent expression: monomial denominators
/// invert directly; polynomial factors are replaced through the
/// registered reciprocal witnesses (e.g. 1/det g = -sqrt(-g)^2).
inline std::optional<Expr> try_atomize(RatExpr r, const ExprContext& ctx) {
  r.simplify();
  Expr num = r.num, den = r.den;
  int guard = 0;
  while (!den.is_monomial()) {
    bool hit = false;
    for (const auto& [poly, inv] : ctx.reciprocals()) {
      if (auto q = div_exact(den, poly)) {
        den = *q;
        num = ctx.normalize(num * inv);
        hit = true;
        break;
      }
    }
    if (!hit || ++guard > 64) return std::nullopt;
  }
  const auto& [m, c] = den.leading();
  Monomial inv = m;
  for (auto& f : inv.f) f.exp = -f.exp;
  return ctx.normalize(num * Expr(Rational(1) / c, inv));
}

}  // namespace multisym
