#pragma once

#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "multisym/expr.hpp"

namespace multisym {

using PointQ = std::map<Symbol, Rational>;
using PointD = std::map<Symbol, double>;

/// Exact evaluation. Every atom must be bound.
inline Rational eval(const Expr& e, const PointQ& point) {
  Rational acc(0);
  for (const auto& [m, c] : e.terms()) {
    Rational v = c;
    for (const auto& x : m.f) {
      auto it = point.find(x.sym);
      if (it == point.end()) fail(Errc::UnboundSymbol, x.sym->name);
      if (x.exp >= 0) {
        for (int k = 0; k < x.exp; ++k) v *= it->second;
      } else {
        if (is_zero(it->second)) fail(Errc::DivisionByZero, x.sym->name + "^" + std::to_string(x.exp));
        for (int k = 0; k < -x.exp; ++k) v /= it->second;
      }
    }
    acc += v;
  }
  return acc;
}

namespace detail {

inline Expr laplace_det(const std::vector<std::vector<Expr>>& m) {
  size_t n = m.size();
  if (n == 1) return m[0][0];
  Expr det;
  for (size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Expr>> sub;
    for (size_t i = 1; i < n; ++i) {
      std::vector<Expr> row;
      for (size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(m[i][k]);
      sub.push_back(std::move(row));
    }
    Expr term = m[0][j] * laplace_det(sub);
    det += (j % 2 == 0) ? term : -term;
  }
  return det;
}

}  // namespace detail

/// Rule/identity environment for one theory. Holds the declared coordinate
/// and parameter symbols, derivative rules for opaque and derived
/// quantities, the registered algebraic identities applied by normalize,
/// and numeric evaluators used by the floating-point test oracles.
class ExprContext {
 public:
  ExprContext() {
    if (const char* env = std::getenv("MULTISYM_MAX_REWRITE")) {
      int v = std::atoi(env);
      if (v > 0) max_rewrite_ = v;
    }
  }

  void set_max_rewrite(int n) { max_rewrite_ = n; }
  int max_rewrite() const { return max_rewrite_; }

  void declare(Symbol s) { declared_.insert(s); }
  bool is_declared(Symbol s) const { return declared_.count(s) > 0; }

  /// Opaque function symbol: formal partials are generated on demand with
  /// respect to any of `deps`.
  void register_opaque(Symbol root, std::set<Symbol> deps) { opaque_[root] = std::move(deps); }

  /// Explicit derivative rule: d(atom)/d(wrt) = rhs.
  void register_rule(Symbol atom, Symbol wrt, Expr rhs) { rules_[atom][wrt] = std::move(rhs); }

  bool has_rules(Symbol atom) const { return rules_.count(atom) > 0; }

  /// Identity `poly == 0`, used left-to-right with `lead` as the rewritten
  /// monomial. `lead` must occur in poly.
  void register_identity(Expr poly, std::optional<Monomial> lead = std::nullopt) {
    if (poly.is_zero_expr()) return;
    Reducer r;
    if (lead) {
      r.lead = *lead;
      bool found = false;
      for (const auto& [m, c] : poly.terms())
        if (m == r.lead) {
          r.lead_coeff = c;
          found = true;
        }
      if (!found) fail(Errc::Internal, "identity lead monomial not present");
    } else {
      r.lead = poly.leading().first;
      r.lead_coeff = poly.leading().second;
    }
    r.poly = std::move(poly);
    reducers_.push_back(std::move(r));
  }

  void register_numeric(Symbol root, std::function<double(Symbol, const PointD&)> fn) {
    numeric_[root] = std::move(fn);
  }

  /// A factor recorded as invertible: dividing an equation by `poly` is
  /// realized by multiplying with `inverse_times` (times 1/den_monomial).
  void register_reciprocal(Expr poly, Expr inverse) {
    reciprocals_.push_back({normalize(poly), normalize(inverse)});
  }
  const std::vector<std::pair<Expr, Expr>>& reciprocals() const { return reciprocals_; }

  /// Canonical form: polynomial canonicalization is maintained by Expr
  /// arithmetic; this applies the registered identities to fixpoint.
  Expr normalize(const Expr& e) const {
    if (reducers_.empty()) return e;
    Expr cur = e;
    for (int pass = 0; pass < max_rewrite_; ++pass) {
      bool changed = false;
      for (const auto& red : reducers_) {
        // batch: rewrite every occurrence of the lead monomial in one pass
        std::vector<Expr::Term> hits;
        for (const auto& [m, c] : cur.terms())
          if (mono_divides(red.lead, m)) hits.push_back({m, c});
        for (const auto& [m, c] : hits) {
          Expr cof(c / red.lead_coeff, mono_div(m, red.lead));
          cur -= cof * red.poly;
          changed = true;
        }
      }
      if (!changed) return cur;
    }
    fail(Errc::RewriteDepthExceeded,
         "identity rewriting did not reach a fixpoint in " + std::to_string(max_rewrite_) + " passes");
  }

  /// Exact partial derivative. `wrt` must be a declared coordinate or
  /// parameter; distinct chart coordinates are independent.
  Expr partial(const Expr& e, Symbol wrt) const {
    if (!is_declared(wrt)) fail(Errc::UnknownSymbol, "partial wrt undeclared symbol " + wrt->name);
    std::vector<Expr::Term> zero;
    Expr out;
    for (const auto& [m, c] : e.terms()) {
      for (size_t i = 0; i < m.f.size(); ++i) {
        Expr d = atom_partial(m.f[i].sym, wrt);
        if (d.is_zero_expr()) continue;
        Monomial rest;
        rest.f.reserve(m.f.size());
        for (size_t j = 0; j < m.f.size(); ++j) {
          if (j == i) {
            if (m.f[j].exp != 1) rest.f.push_back({m.f[j].sym, m.f[j].exp - 1});
          } else {
            rest.f.push_back(m.f[j]);
          }
        }
        out += Expr(c * Rational(m.f[i].exp), rest) * d;
      }
    }
    return normalize(out);
  }

  /// Simultaneous substitution followed by normalize.
  Expr substitute(const Expr& e, const std::map<Symbol, Expr>& bind) const {
    Expr out;
    for (const auto& [m, c] : e.terms()) {
      Expr acc(c);
      for (const auto& x : m.f) {
        auto it = bind.find(x.sym);
        if (it == bind.end()) {
          acc = acc * Expr(x.sym, x.exp);
        } else {
          acc = acc * it->second.pow(x.exp);
        }
      }
      out += acc;
    }
    return normalize(out);
  }

  /// Coordinates the expression can depend on, seen through derivative
  /// rules of derived/opaque atoms.
  std::set<Symbol> dependency_support(const Expr& e) const {
    std::set<Symbol> out;
    for (Symbol a : e.atoms()) {
      if (is_declared(a)) out.insert(a);
      if (auto it = rules_.find(a); it != rules_.end())
        for (const auto& [wrt, rhs] : it->second)
          if (!rhs.is_zero_expr()) out.insert(wrt);
      Symbol root = make_symbol(a->kind, a->family, a->indices);
      if (auto it = opaque_.find(root); it != opaque_.end())
        for (Symbol d : it->second) out.insert(d);
    }
    return out;
  }

  /// Numeric evaluation for test oracles: derived quantities are computed
  /// by their registered evaluators from the coordinate point.
  double eval_double(const Expr& e, const PointD& point) const {
    double acc = 0;
    for (const auto& [m, c] : e.terms()) {
      double v = to_double(c);
      for (const auto& x : m.f) {
        double base;
        auto it = point.find(x.sym);
        if (it != point.end()) {
          base = it->second;
        } else {
          // evaluators are registered per family
          Symbol famroot = make_symbol(x.sym->kind, x.sym->family);
          auto nit = numeric_.find(famroot);
          if (nit == numeric_.end()) fail(Errc::UnboundSymbol, x.sym->name);
          base = nit->second(x.sym, point);
        }
        v *= std::pow(base, x.exp);
      }
      acc += v;
    }
    return acc;
  }

 private:
  struct Reducer {
    Monomial lead;
    Rational lead_coeff;
    Expr poly;
  };

  Expr atom_partial(Symbol a, Symbol wrt) const {
    if (a == wrt) return Expr::one();
    if (auto it = rules_.find(a); it != rules_.end()) {
      auto jt = it->second.find(wrt);
      return jt == it->second.end() ? Expr() : jt->second;
    }
    Symbol root = make_symbol(a->kind, a->family, a->indices);
    if (auto it = opaque_.find(root); it != opaque_.end())
      if (it->second.count(wrt)) return Expr(formal_partial(a, wrt));
    return Expr();
  }

  int max_rewrite_ = 64;
  std::set<Symbol> declared_;
  std::map<Symbol, std::set<Symbol>> opaque_;
  std::map<Symbol, std::map<Symbol, Expr>> rules_;
  std::vector<Reducer> reducers_;
  std::map<Symbol, std::function<double(Symbol, const PointD&)>> numeric_;
  std::vector<std::pair<Expr, Expr>> reciprocals_;
};

/// Registers a symmetric coordinate family `up` together with its derived
/// inverse `dn` (entries dn[a][b], symmetric): derivative rules, the
/// contraction and adjugate identities, numeric evaluation, and the
/// determinant reciprocal used when clearing solver denominators.
/// `up_sym(a,b)` must resolve merged symmetric components itself.
inline void register_symmetric_inverse(ExprContext& ctx, int n,
                                       const std::function<Symbol(int, int)>& up_sym,
                                       const std::function<Symbol(int, int)>& dn_sym) {
  // d dn[a][b] / d up[c][d] = -(dn[a][c] dn[d][b] + [c!=d] dn[a][d] dn[c][b]):
  // rules are stated for the full matrix and symmetrized over the merged
  // independent component (c<=d).
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = c; d < n; ++d) {
          Expr rhs = -(Expr(dn_sym(a, c)) * Expr(dn_sym(d, b)));
          if (c != d) rhs -= Expr(dn_sym(a, d)) * Expr(dn_sym(c, b));
          ctx.register_rule(dn_sym(a, b), up_sym(c, d), rhs);
        }
  // contraction: sum_b up[a][b] dn[b][c] = delta[a][c]
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      Expr p;
      for (int b = 0; b < n; ++b) p += Expr(up_sym(a, b)) * Expr(dn_sym(b, c));
      if (a == c) p -= Expr(1);
      ctx.register_identity(p);
    }
  std::vector<std::vector<Expr>> up(n, std::vector<Expr>(n)), dn(n, std::vector<Expr>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) up[a][b] = Expr(up_sym(a, b)), dn[a][b] = Expr(dn_sym(a, b));
  Expr det_up = detail::laplace_det(up);
  Expr det_dn = detail::laplace_det(dn);
  // adjugate: det(up) * dn[a][b] = cofactor_ab(up)
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      std::vector<std::vector<Expr>> sub;
      for (int i = 0; i < n; ++i) {
        if (i == a) continue;
        std::vector<Expr> row;
        for (int j = 0; j < n; ++j)
          if (j != b) row.push_back(up[i][j]);
        sub.push_back(std::move(row));
      }
      Expr cof = detail::laplace_det(sub);
      if ((a + b) % 2) cof = -cof;
      ctx.register_identity(det_up * Expr(dn_sym(a, b)) - cof);
    }
  ctx.register_identity(det_up * det_dn - Expr(1));
  ctx.register_reciprocal(det_up, det_dn);

  // numeric inverse for the oracle evaluators
  auto eval_dn = [n, up_sym](Symbol atom, const PointD& point) -> double {
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m[a][b] = point.at(up_sym(a, b));
    // gauss-jordan
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
      std::swap(m[piv], m[col]);
      std::swap(inv[piv], inv[col]);
      double p = m[col][col];
      for (int j = 0; j < n; ++j) m[col][j] /= p, inv[col][j] /= p;
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        double f = m[r][col];
        for (int j = 0; j < n; ++j) m[r][j] -= f * m[col][j], inv[r][j] -= f * inv[col][j];
      }
    }
    return inv[atom->indices[0]][atom->indices[1]];
  };
  ctx.register_numeric(make_symbol(dn_sym(0, 0)->kind, dn_sym(0, 0)->family), eval_dn);
}

/// Registers sqrt_sym = sqrt(sign * det(dn)) where dn is the derived
/// inverse of the coordinate family `up` (so det(dn) = 1/det(up)).
inline void register_sqrt_det(ExprContext& ctx, int n, Symbol sqrt_sym, int sign,
                              const std::function<Symbol(int, int)>& up_sym,
                              const std::function<Symbol(int, int)>& dn_sym) {
  // d sqrt / d up[c][d] = -1/2 sqrt dn[c][d], symmetrized over merged slots
  for (int c = 0; c < n; ++c)
    for (int d = c; d < n; ++d) {
      Rational h = c == d ? rat(-1, 2) : rat(-1, 1);
      ctx.register_rule(sqrt_sym, up_sym(c, d), h * (Expr(sqrt_sym) * Expr(dn_sym(c, d))));
    }
  std::vector<std::vector<Expr>> dn(n, std::vector<Expr>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) dn[a][b] = Expr(dn_sym(a, b));
  Expr det_dn = detail::laplace_det(dn);
  // sqrt^2 = sign*det(dn), oriented to eliminate sqrt powers >= 2
  Expr p = Expr(sqrt_sym, 2) - Expr(Rational(sign)) * det_dn;
  ctx.register_identity(p, Monomial{{{sqrt_sym, 2}}});
  std::vector<std::vector<Expr>> up(n, std::vector<Expr>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) up[a][b] = Expr(up_sym(a, b));
  // 1/det(up) = sign * sqrt^2
  ctx.register_reciprocal(detail::laplace_det(up), Expr(Rational(sign)) * Expr(sqrt_sym, 2));

  auto eval_sqrt = [n, sign, up_sym](Symbol, const PointD& point) -> double {
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m[a][b] = point.at(up_sym(a, b));
    // determinant via LU (n <= 4)
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
      if (piv != col) {
        std::swap(m[piv], m[col]);
        det = -det;
      }
      det *= m[col][col];
      for (int r = col + 1; r < n; ++r) {
        double f = m[r][col] / m[col][col];
        for (int j = col; j < n; ++j) m[r][j] -= f * m[col][j];
      }
    }
    return std::sqrt(sign / det);
  };
  ctx.register_numeric(sqrt_sym, eval_sqrt);
}

}  // namespace multisym
