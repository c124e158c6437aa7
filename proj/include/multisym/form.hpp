#pragma once

#include <map>
#include <vector>

#include "multisym/chart.hpp"

namespace multisym {

/// Vector field on a chart: sparse map coordinate -> component.
struct VectorField {
  const BundleChart* chart = nullptr;
  std::map<Symbol, Expr> comps;

  Expr comp(Symbol s) const {
    auto it = comps.find(s);
    return it == comps.end() ? Expr() : it->second;
  }

  void set(Symbol s, Expr e) {
    if (e.is_zero_expr())
      comps.erase(s);
    else
      comps[s] = std::move(e);
  }

  VectorField& operator+=(const VectorField& o) {
    if (chart != o.chart) fail(Errc::ChartMismatch, "vector field addition");
    for (const auto& [s, e] : o.comps) set(s, comp(s) + e);
    return *this;
  }

  friend VectorField operator*(const Expr& c, const VectorField& v) {
    VectorField r;
    r.chart = v.chart;
    for (const auto& [s, e] : v.comps) r.set(s, c * e);
    return r;
  }

  bool is_zero() const { return comps.empty(); }
};

/// Exterior form in normalized shape: strictly increasing basis-index
/// monomials mapped to scalar coefficients, no zero coefficients stored.
class DiffForm {
 public:
  using Key = std::vector<int>;

  DiffForm() = default;
  DiffForm(const BundleChart* chart, int degree) : chart_(chart), degree_(degree) {
    if (degree < 0) fail(Errc::DegreeMismatch, "negative form degree");
  }

  static DiffForm scalar(const BundleChart* chart, Expr e) {
    DiffForm f(chart, 0);
    f.set({}, std::move(e));
    return f;
  }

  static DiffForm basis(const BundleChart* chart, Symbol coord) {
    DiffForm f(chart, 1);
    f.set({chart->ord(coord)}, Expr::one());
    return f;
  }

  /// d^m x, the base volume form.
  static DiffForm volume(const BundleChart* chart) {
    DiffForm f(chart, chart->m);
    Key k;
    for (int mu = 0; mu < chart->m; ++mu) k.push_back(chart->ord(chart->tower->base[mu]));
    f.set(std::move(k), Expr::one());
    return f;
  }

  const BundleChart* chart() const { return chart_; }
  int degree() const { return degree_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Key, Expr>& terms() const { return terms_; }

  const ExprContext& ctx() const { return *chart_->tower->ctx; }

  void set(Key k, Expr e) {
    check_key(k);
    e = ctx().normalize(e);
    if (e.is_zero_expr())
      terms_.erase(k);
    else
      terms_[std::move(k)] = std::move(e);
  }

  void check_key(const Key& k) const {
    if (static_cast<int>(k.size()) != degree_) fail(Errc::DegreeMismatch, "key length != degree");
    for (size_t i = 0; i + 1 < k.size(); ++i)
      if (k[i] >= k[i + 1]) fail(Errc::Internal, "basis key must be strictly increasing");
    if (!k.empty() && (k.front() < 0 || k.back() >= chart_->dim()))
      fail(Errc::Internal, "basis key out of range");
  }

  void accumulate(const Key& k, const Expr& e) {
    check_key(k);
    auto it = terms_.find(k);
    if (it == terms_.end()) {
      if (!e.is_zero_expr()) terms_[k] = e;
    } else {
      it->second += e;
      if (it->second.is_zero_expr()) terms_.erase(it);
    }
  }

  Expr coeff(const Key& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? Expr() : it->second;
  }

  bool operator==(const DiffForm& o) const {
    if (chart_ != o.chart_) return false;
    if (!is_zero() && !o.is_zero() && degree_ != o.degree_) return false;
    return terms_ == o.terms_;
  }
  bool operator!=(const DiffForm& o) const { return !(*this == o); }

  DiffForm operator-() const {
    DiffForm r = *this;
    for (auto& [k, e] : r.terms_) e = -e;
    return r;
  }

  friend DiffForm operator+(const DiffForm& a, const DiffForm& b) {
    if (a.chart_ != b.chart_) fail(Errc::ChartMismatch, "form addition");
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.degree_ != b.degree_) fail(Errc::DegreeMismatch, "adding forms of unequal degree");
    DiffForm r = a;
    for (const auto& [k, e] : b.terms_) r.accumulate(k, e);
    r.normalize_coeffs();
    return r;
  }

  friend DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }

  friend DiffForm operator*(const Expr& c, const DiffForm& a) {
    DiffForm r(a.chart_, a.degree_);
    for (const auto& [k, e] : a.terms_) r.set(k, c * e);
    return r;
  }

  std::string str() const;

  void normalize_coeffs() {
    std::map<Key, Expr> out;
    for (auto& [k, e] : terms_) {
      Expr n = ctx().normalize(e);
      if (!n.is_zero_expr()) out[k] = std::move(n);
    }
    terms_ = std::move(out);
  }

 private:
  const BundleChart* chart_ = nullptr;
  int degree_ = 0;
  std::map<Key, Expr> terms_;
};

namespace detail {

/// Merge two strictly increasing index lists; returns sign of the merge
/// permutation, or 0 if they collide.
inline int merge_keys(const DiffForm::Key& a, const DiffForm::Key& b, DiffForm::Key& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  int sign = 1;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return 0;
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else {
      // b[j] hops over the remaining a-entries
      if ((a.size() - i) % 2 == 1) sign = -sign;
      out.push_back(b[j++]);
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return sign;
}

}  // namespace detail

inline DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  if (a.chart() != b.chart()) fail(Errc::ChartMismatch, "wedge");
  int deg = a.degree() + b.degree();
  if (deg > a.chart()->dim()) return DiffForm(a.chart(), deg);  // zero form past top degree
  DiffForm r(a.chart(), deg);
  DiffForm::Key merged;
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) {
      int sign = detail::merge_keys(ka, kb, merged);
      if (sign == 0) continue;
      r.accumulate(merged, Expr(Rational(sign)) * ca * cb);
    }
  r.normalize_coeffs();
  return r;
}

/// Exterior derivative.
inline DiffForm d(const DiffForm& a) {
  const BundleChart* ch = a.chart();
  const ExprContext& ctx = *ch->tower->ctx;
  DiffForm r(ch, a.degree() + 1);
  for (const auto& [k, c] : a.terms()) {
    for (Symbol v : ctx.dependency_support(c)) {
      if (!ch->has(v)) continue;
      Expr dc = ctx.partial(c, v);
      if (dc.is_zero_expr()) continue;
      int o = ch->ord(v);
      // dv ^ dx_k: v's differential hops right past the smaller entries
      int smaller = 0;
      bool dup = false;
      for (int idx : k) {
        if (idx == o) {
          dup = true;
          break;
        }
        if (idx < o) ++smaller;
      }
      if (dup) continue;
      DiffForm::Key key = k;
      key.insert(std::upper_bound(key.begin(), key.end(), o), o);
      int sign = (smaller % 2 == 0) ? 1 : -1;
      r.accumulate(key, Expr(Rational(sign)) * dc);
    }
  }
  r.normalize_coeffs();
  return r;
}

/// Interior product i(v) a.
inline DiffForm contract(const VectorField& v, const DiffForm& a) {
  if (v.chart != a.chart()) fail(Errc::ChartMismatch, "contract");
  if (a.degree() == 0) return DiffForm(a.chart(), 0);
  DiffForm r(a.chart(), a.degree() - 1);
  for (const auto& [k, c] : a.terms()) {
    for (size_t j = 0; j < k.size(); ++j) {
      Expr comp = v.comp(a.chart()->coord(k[j]).sym);
      if (comp.is_zero_expr()) continue;
      DiffForm::Key key;
      key.reserve(k.size() - 1);
      for (size_t i = 0; i < k.size(); ++i)
        if (i != j) key.push_back(k[i]);
      Expr val = comp * c;
      if (j % 2 == 1) val = -val;
      r.accumulate(key, val);
    }
  }
  r.normalize_coeffs();
  return r;
}

/// Cartan formula L(v) a = d i(v) a + i(v) d a.
inline DiffForm lie(const VectorField& v, const DiffForm& a) {
  return d(contract(v, a)) + contract(v, d(a));
}

/// i(d/dx^mu) d^m x.
inline DiffForm volume_contracted(const BundleChart* chart, int mu) {
  VectorField v;
  v.chart = chart;
  v.set(chart->tower->base[mu], Expr::one());
  return contract(v, DiffForm::volume(chart));
}

/// i(d/dx^nu) i(d/dx^mu) d^m x.
inline DiffForm volume_contracted2(const BundleChart* chart, int mu, int nu) {
  VectorField v;
  v.chart = chart;
  v.set(chart->tower->base[nu], Expr::one());
  return contract(v, volume_contracted(chart, mu));
}

/// Pullback through a chart map: coefficients are substituted and target
/// basis differentials pushed through d of the map.
inline DiffForm pullback(const ChartMap& cm, const DiffForm& a) {
  if (cm.tgt != a.chart()) fail(Errc::ChartMismatch, "pullback: form not on target chart");
  const ExprContext& ctx = *cm.src->tower->ctx;
  // substitution map for coefficients; target coords not present in the
  // map are an error only if actually used.
  DiffForm r(cm.src, a.degree());
  std::vector<DiffForm> dmap(cm.tgt->dim());
  std::vector<bool> have(cm.tgt->dim(), false);
  auto pulled_basis = [&](int o) -> const DiffForm& {
    if (!have[o]) {
      Symbol w = cm.tgt->coord(o).sym;
      const Expr& image = cm.at(w);
      DiffForm df(cm.src, 1);
      for (Symbol v : ctx.dependency_support(image)) {
        if (!cm.src->has(v)) continue;
        Expr p = ctx.partial(image, v);
        if (!p.is_zero_expr()) df.accumulate({cm.src->ord(v)}, p);
      }
      dmap[o] = std::move(df);
      have[o] = true;
    }
    return dmap[o];
  };
  for (const auto& [k, c] : a.terms()) {
    // substitute coefficient
    std::map<Symbol, Expr> bind;
    for (Symbol at : c.atoms())
      if (cm.tgt->has(at)) bind[at] = cm.at(at);
    DiffForm piece = DiffForm::scalar(cm.src, ctx.substitute(c, bind));
    for (int o : k) piece = wedge(piece, pulled_basis(o));
    if (piece.is_zero()) continue;
    if (r.is_zero() && piece.degree() != r.degree()) r = DiffForm(cm.src, piece.degree());
    r = r + piece;
  }
  return r;
}

/// Pushforward of a vector field along a chart map whose target
/// coordinates all appear in the map: (f_* v)^w = v(f^* w), rewritten on
/// the target chart. Fails NotProjectable when a source-only coordinate
/// survives in a component.
inline VectorField pushforward(const ChartMap& cm, const VectorField& v,
                               const std::map<Symbol, Expr>& rewrite = {}) {
  if (cm.src != v.chart) fail(Errc::ChartMismatch, "pushforward");
  const ExprContext& ctx = *cm.src->tower->ctx;
  VectorField out;
  out.chart = cm.tgt;
  for (const auto& co : cm.tgt->coords) {
    const Expr& image = cm.at(co.sym);
    Expr comp;
    for (Symbol s : ctx.dependency_support(image)) {
      Expr vc = v.comp(s);
      if (vc.is_zero_expr()) continue;
      comp += vc * ctx.partial(image, s);
    }
    comp = ctx.substitute(comp, rewrite);
    for (Symbol a : comp.atoms())
      if (cm.src->has(a) && !cm.tgt->has(a))
        fail(Errc::NotProjectable,
             "component along " + co.sym->name + " depends on fiber coordinate " + a->name);
    out.set(co.sym, std::move(comp));
  }
  return out;
}

inline std::string DiffForm::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [k, c] : terms_) {
    std::string basis;
    for (size_t i = 0; i < k.size(); ++i) {
      if (i) basis += "^";
      basis += "d" + chart_->coord(k[i]).sym->name;
    }
    std::string cs = c.str();
    if (!first) s += "  +  ";
    first = false;
    if (basis.empty()) {
      s += cs;
    } else if (cs == "1") {
      s += basis;
    } else {
      s += "(" + cs + ") " + basis;
    }
  }
  return s;
}

}  // namespace multisym
