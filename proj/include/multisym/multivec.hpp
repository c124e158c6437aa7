#pragma once

#include "multisym/form.hpp"

namespace multisym {

/// Locally decomposable m-multivector field in normalized representative
/// form: factor a has component 1 along d/dx^a and 0 along the other base
/// directions, so i(X) d^m x = 1 holds by construction. Fiber components
/// are free expressions, typically carrying unknown coefficient symbols.
class MultiVectorField {
 public:
  MultiVectorField() = default;

  MultiVectorField(const BundleChart* chart, std::vector<VectorField> factors)
      : chart_(chart), factors_(std::move(factors)) {
    if (static_cast<int>(factors_.size()) != chart->m)
      fail(Errc::DegreeMismatch, "multivector degree must equal the base dimension");
    for (int a = 0; a < chart->m; ++a) {
      for (int b = 0; b < chart->m; ++b) {
        Expr c = factors_[a].comp(chart->tower->base[b]);
        Expr want = a == b ? Expr::one() : Expr();
        if (c != want) fail(Errc::Internal, "factor base components must follow the Kronecker pattern");
      }
      if (factors_[a].chart != chart) fail(Errc::ChartMismatch, "multivector factor chart");
    }
  }

  const BundleChart* chart() const { return chart_; }
  int degree() const { return static_cast<int>(factors_.size()); }
  const std::vector<VectorField>& factors() const { return factors_; }
  VectorField& factor(int a) { return factors_[a]; }
  const VectorField& factor(int a) const { return factors_[a]; }

  /// Substitute bindings into every fiber component.
  MultiVectorField substituted(const std::map<Symbol, Expr>& bind) const {
    MultiVectorField out = *this;
    const ExprContext& ctx = *chart_->tower->ctx;
    for (auto& f : out.factors_) {
      VectorField nf;
      nf.chart = f.chart;
      for (const auto& [s, e] : f.comps) nf.set(s, ctx.substitute(e, bind));
      f = std::move(nf);
    }
    return out;
  }

 private:
  const BundleChart* chart_ = nullptr;
  std::vector<VectorField> factors_;
};

/// Unknown coefficient slots of a transverse multivector on a chart: one
/// unknown symbol per (factor, fiber coordinate) pair.
struct UnknownMultivector {
  MultiVectorField X;
  // (factor, coordinate) -> unknown symbol, plus the reverse direction
  std::map<std::pair<int, Symbol>, Symbol> slots;
  std::map<Symbol, std::pair<int, Symbol>> of_unknown;

  bool is_unknown(Symbol s) const { return of_unknown.count(s) > 0; }
};

/// Builds the normalized multivector ansatz with fresh unknown fiber
/// components on every non-base coordinate.
inline UnknownMultivector make_unknown_multivector(const BundleChart* chart,
                                                   const std::string& prefix = "c") {
  UnknownMultivector um;
  std::vector<VectorField> factors(chart->m);
  for (int a = 0; a < chart->m; ++a) {
    factors[a].chart = chart;
    factors[a].set(chart->tower->base[a], Expr::one());
    for (const auto& co : chart->coords) {
      if (co.role == CoordRole::Base) continue;
      std::vector<int> idx = {a};
      for (int i : co.indices) idx.push_back(i);
      if (co.dir >= 0) idx.push_back(co.dir);
      Symbol u = make_symbol(SymKind::Unknown, prefix + "_" + co.sym->family, idx);
      factors[a].set(co.sym, Expr(u));
      um.slots[{a, co.sym}] = u;
      um.of_unknown[u] = {a, co.sym};
    }
  }
  um.X = MultiVectorField(chart, std::move(factors));
  return um;
}

/// Iterated contraction i(X_{m-1}) ... i(X_0) a; the first wedge factor is
/// applied innermost. The opposite convention is available through the
/// flag for cross-checks.
inline DiffForm contract_multi(const MultiVectorField& X, const DiffForm& a,
                               bool innermost_first = true) {
  if (X.chart() != a.chart()) fail(Errc::ChartMismatch, "contract_multi");
  if (a.degree() < X.degree()) return DiffForm(a.chart(), 0);
  DiffForm cur = a;
  if (innermost_first) {
    for (int i = 0; i < X.degree(); ++i) cur = contract(X.factor(i), cur);
  } else {
    for (int i = X.degree() - 1; i >= 0; --i) cur = contract(X.factor(i), cur);
  }
  return cur;
}

/// Graded Lie derivative L(X) a = (d i(X) - (-1)^m i(X) d) a.
inline DiffForm lie_multi(const MultiVectorField& X, const DiffForm& a) {
  DiffForm t1 = d(contract_multi(X, a));
  DiffForm t2 = contract_multi(X, d(a));
  return (X.degree() % 2 == 0) ? t1 - t2 : t1 + t2;
}

}  // namespace multisym
