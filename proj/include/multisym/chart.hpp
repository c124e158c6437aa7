#pragma once

#include <list>
#include <memory>
#include <string>
#include <vector>

#include "multisym/context.hpp"
#include "multisym/expr.hpp"

namespace multisym {

enum class Space { M, E, J1Pi, MPi, J1PiStar, PSub };

inline const char* space_name(Space s) {
  switch (s) {
    case Space::M: return "M";
    case Space::E: return "E";
    case Space::J1Pi: return "J1Pi";
    case Space::MPi: return "MPi";
    case Space::J1PiStar: return "J1PiStar";
    case Space::PSub: return "PSub";
  }
  return "?";
}

enum class CoordRole { Base, Field, Jet, Momentum, PMom };

struct IndexSlot {
  std::string label;
  int range;
};

/// An indexed family of field components with optional symmetry or
/// antisymmetry on index pairs and a diffeomorphism variance tag per slot
/// (+1 upper index, -1 lower index, 0 inert label).
struct FieldFamily {
  std::string name;
  std::vector<IndexSlot> slots;
  std::vector<std::pair<int, int>> sym_pairs;
  std::vector<std::pair<int, int>> antisym_pairs;
  std::vector<int> variance;  // one entry per slot

  bool scalar() const { return slots.empty(); }

  /// Maps an arbitrary index tuple to (sign, canonical tuple); sign 0 when
  /// an antisymmetric pair sits on its diagonal.
  std::pair<int, std::vector<int>> resolve(std::vector<int> idx) const {
    int sign = 1;
    for (auto [p, q] : sym_pairs)
      if (idx[p] > idx[q]) std::swap(idx[p], idx[q]);
    for (auto [p, q] : antisym_pairs) {
      if (idx[p] == idx[q]) return {0, idx};
      if (idx[p] > idx[q]) {
        std::swap(idx[p], idx[q]);
        sign = -sign;
      }
    }
    return {sign, idx};
  }

  bool canonical(const std::vector<int>& idx) const {
    for (auto [p, q] : sym_pairs)
      if (idx[p] > idx[q]) return false;
    for (auto [p, q] : antisym_pairs)
      if (idx[p] >= idx[q]) return false;
    return true;
  }

  /// Row-major enumeration of the independent component tuples.
  std::vector<std::vector<int>> components() const {
    if (slots.empty()) return {{}};
    std::vector<std::vector<int>> out;
    std::vector<int> idx(slots.size(), 0);
    while (true) {
      if (canonical(idx)) out.push_back(idx);
      int k = static_cast<int>(slots.size()) - 1;
      for (; k >= 0; --k) {
        if (++idx[k] < slots[k].range) break;
        idx[k] = 0;
      }
      if (k < 0) break;
    }
    return out;
  }
};

struct Coord {
  Symbol sym;
  CoordRole role;
  int family = -1;            // index into Tower::families for Field/Jet/Momentum
  std::vector<int> indices;   // field component tuple
  int dir = -1;               // jet/momentum direction
};

class Tower;

/// One concrete coordinate chart of the tower, with its canonical
/// coordinate order (base, fields, jets or momenta, then the extended
/// momentum). PSub charts additionally carry the graph substitutions that
/// define the constraint submanifold.
class BundleChart {
 public:
  Space space = Space::M;
  int m = 0;
  const Tower* tower = nullptr;
  std::vector<Coord> coords;
  std::map<Symbol, int> ordinal;
  std::map<Symbol, Expr> subs;             // PSub: eliminated momentum -> expr
  const BundleChart* restricted_from = nullptr;  // PSub: source chart

  int dim() const { return static_cast<int>(coords.size()); }

  bool has(Symbol s) const { return ordinal.count(s) > 0; }

  int ord(Symbol s) const {
    auto it = ordinal.find(s);
    if (it == ordinal.end()) fail(Errc::UnknownCoordinate, s->name);
    return it->second;
  }

  const Coord& coord(int i) const { return coords[i]; }
};

/// Map between charts of one tower: every target coordinate expressed in
/// source-chart coordinates. Pullback of forms and pushforward of vector
/// fields are computed through these.
struct ChartMap {
  const BundleChart* src = nullptr;
  const BundleChart* tgt = nullptr;
  std::map<Symbol, Expr> map;  // tgt coord -> source expr

  const Expr& at(Symbol tgt_coord) const {
    auto it = map.find(tgt_coord);
    if (it == map.end()) fail(Errc::IncompleteMap, tgt_coord->name);
    return it->second;
  }
};

/// The tower of phase spaces of one theory, all sharing a symbol set and
/// rule context.
class Tower {
 public:
  int m = 0;
  std::vector<FieldFamily> families;
  std::vector<Symbol> base;  // x^mu
  std::shared_ptr<ExprContext> ctx;

  BundleChart chart_M, chart_E, chart_J1, chart_MPi, chart_J1Star;
  Symbol p_sym = nullptr;  // extended momentum on MPi

  std::list<BundleChart> restricted;  // PSub charts built by restrict()

  // --- symbol accessors -------------------------------------------------
  Symbol field_sym(int fam, const std::vector<int>& idx) const {
    return make_symbol(SymKind::Field, families[fam].name, idx);
  }
  Symbol jet_sym(int fam, const std::vector<int>& idx, int dir) const {
    std::vector<int> full = idx;
    full.push_back(dir);
    return make_symbol(SymKind::Jet, "d" + families[fam].name, full);
  }
  Symbol mom_sym(int fam, const std::vector<int>& idx, int dir) const {
    std::vector<int> full = idx;
    full.push_back(dir);
    return make_symbol(SymKind::Momentum, "p" + families[fam].name, full);
  }

  /// Component access with symmetry resolution (sign absorbed, zero on
  /// antisymmetric diagonals).
  Expr field(int fam, std::vector<int> idx) const {
    auto [sign, can] = families[fam].resolve(std::move(idx));
    if (sign == 0) return Expr();
    return Expr(Rational(sign)) * Expr(field_sym(fam, can));
  }
  Expr jet(int fam, std::vector<int> idx, int dir) const {
    auto [sign, can] = families[fam].resolve(std::move(idx));
    if (sign == 0) return Expr();
    return Expr(Rational(sign)) * Expr(jet_sym(fam, can, dir));
  }
  Expr mom(int fam, std::vector<int> idx, int dir) const {
    auto [sign, can] = families[fam].resolve(std::move(idx));
    if (sign == 0) return Expr();
    return Expr(Rational(sign)) * Expr(mom_sym(fam, can, dir));
  }

  int family_index(const std::string& name) const {
    for (size_t i = 0; i < families.size(); ++i)
      if (families[i].name == name) return static_cast<int>(i);
    fail(Errc::UnknownCoordinate, "field family " + name);
  }

  /// Total field component count n.
  int n_components() const {
    int n = 0;
    for (const auto& f : families) n += static_cast<int>(f.components().size());
    return n;
  }
};

inline std::shared_ptr<Tower> build_tower(int m, std::vector<FieldFamily> families,
                                          const std::vector<Symbol>& params = {},
                                          std::shared_ptr<ExprContext> ctx = nullptr) {
  if (m < 1) fail(Errc::ZeroDimensionalBase, "base dimension must be positive");
  for (size_t i = 0; i < families.size(); ++i) {
    if (families[i].variance.empty()) families[i].variance.assign(families[i].slots.size(), 0);
    for (size_t j = 0; j < families.size(); ++j) {
      if (i == j) continue;
      const std::string&a = families[i].name, &b = families[j].name;
      if (a == b || a == "d" + b || a == "p" + b)
        fail(Errc::DuplicateFieldName, families[i].name);
    }
    if (families[i].name == "p") fail(Errc::DuplicateFieldName, "p is reserved");
  }
  auto tower = std::make_shared<Tower>();
  tower->m = m;
  tower->families = std::move(families);
  tower->ctx = ctx ? std::move(ctx) : std::make_shared<ExprContext>();
  for (int mu = 0; mu < m; ++mu) tower->base.push_back(make_symbol(SymKind::Base, "x", {mu}));
  for (Symbol s : params) tower->ctx->declare(s);
  tower->p_sym = make_symbol(SymKind::PMom, "p");

  auto add = [&](BundleChart& c, Symbol s, CoordRole role, int fam, std::vector<int> idx, int dir) {
    c.ordinal[s] = static_cast<int>(c.coords.size());
    c.coords.push_back({s, role, fam, std::move(idx), dir});
  };
  auto init = [&](BundleChart& c, Space sp) {
    c.space = sp;
    c.m = m;
    c.tower = tower.get();
    for (int mu = 0; mu < m; ++mu) add(c, tower->base[mu], CoordRole::Base, -1, {mu}, -1);
  };

  init(tower->chart_M, Space::M);
  init(tower->chart_E, Space::E);
  init(tower->chart_J1, Space::J1Pi);
  init(tower->chart_MPi, Space::MPi);
  init(tower->chart_J1Star, Space::J1PiStar);

  for (int f = 0; f < static_cast<int>(tower->families.size()); ++f) {
    for (const auto& idx : tower->families[f].components()) {
      Symbol y = tower->field_sym(f, idx);
      for (BundleChart* c : {&tower->chart_E, &tower->chart_J1, &tower->chart_MPi, &tower->chart_J1Star})
        add(*c, y, CoordRole::Field, f, idx, -1);
    }
  }
  for (int f = 0; f < static_cast<int>(tower->families.size()); ++f)
    for (const auto& idx : tower->families[f].components())
      for (int mu = 0; mu < m; ++mu)
        add(tower->chart_J1, tower->jet_sym(f, idx, mu), CoordRole::Jet, f, idx, mu);
  for (int f = 0; f < static_cast<int>(tower->families.size()); ++f)
    for (const auto& idx : tower->families[f].components())
      for (int mu = 0; mu < m; ++mu) {
        Symbol pm = tower->mom_sym(f, idx, mu);
        add(tower->chart_MPi, pm, CoordRole::Momentum, f, idx, mu);
        add(tower->chart_J1Star, pm, CoordRole::Momentum, f, idx, mu);
      }
  add(tower->chart_MPi, tower->p_sym, CoordRole::PMom, -1, {}, -1);

  for (const BundleChart* c :
       {&tower->chart_M, &tower->chart_E, &tower->chart_J1, &tower->chart_MPi, &tower->chart_J1Star})
    for (const auto& co : c->coords) tower->ctx->declare(co.sym);

  return tower;
}

/// Restriction to a graph-type submanifold p_i = f_i (tau-transverse in
/// chart form). The eliminated momenta are recorded as substitutions; the
/// pullback through the embedding is substitution by them.
inline const BundleChart* restrict_chart(Tower& tower, const BundleChart& chart,
                                         const std::vector<std::pair<Symbol, Expr>>& constraints) {
  if (chart.space != Space::J1PiStar && chart.space != Space::MPi)
    fail(Errc::WrongSpace, "restrict expects a multimomentum chart");
  std::map<Symbol, Expr> subs;
  for (const auto& [p, f] : constraints) {
    if (!chart.has(p) || chart.coords[chart.ord(p)].role != CoordRole::Momentum)
      fail(Errc::UnknownCoordinate, p->name + " is not a momentum of this chart");
    if (subs.count(p)) fail(Errc::CircularConstraint, p->name + " constrained twice");
    subs[p] = f;
  }
  for (const auto& [p, f] : subs)
    for (Symbol a : f.atoms()) {
      if (subs.count(a)) fail(Errc::CircularConstraint, p->name + " references eliminated " + a->name);
      if (a->kind != SymKind::Param && a->kind != SymKind::Derived && !chart.has(a))
        fail(Errc::UnknownCoordinate, "constraint rhs uses " + a->name + " outside the chart");
    }
  BundleChart sub;
  sub.space = Space::PSub;
  sub.m = chart.m;
  sub.tower = &tower;
  sub.subs = subs;
  sub.restricted_from = &chart;
  for (const auto& co : chart.coords) {
    if (subs.count(co.sym)) continue;
    sub.ordinal[co.sym] = static_cast<int>(sub.coords.size());
    sub.coords.push_back(co);
  }
  tower.restricted.push_back(std::move(sub));
  return &tower.restricted.back();
}

/// Identity-on-retained-coordinates embedding PSub -> parent chart.
inline ChartMap embedding_map(const BundleChart& sub) {
  if (sub.space != Space::PSub) fail(Errc::WrongSpace, "embedding_map expects a PSub chart");
  ChartMap cm;
  cm.src = &sub;
  cm.tgt = sub.restricted_from;
  for (const auto& co : sub.restricted_from->coords) {
    auto it = sub.subs.find(co.sym);
    cm.map[co.sym] = it != sub.subs.end() ? it->second : Expr(co.sym);
  }
  return cm;
}

/// Coordinate-forgetting projection expressed as a chart map for
/// pullbacks: every coordinate of the smaller chart is a coordinate of the
/// bigger one.
inline ChartMap forget_map(const BundleChart& src, const BundleChart& tgt) {
  ChartMap cm;
  cm.src = &src;
  cm.tgt = &tgt;
  for (const auto& co : tgt.coords) {
    if (!src.has(co.sym)) fail(Errc::IncompleteMap, co.sym->name + " missing in source chart");
    cm.map[co.sym] = Expr(co.sym);
  }
  return cm;
}

inline ChartMap compose(const ChartMap& inner, const ChartMap& outer) {
  // inner: A -> B, outer: B -> C; result A -> C
  if (inner.tgt != outer.src) fail(Errc::ChartMismatch, "compose chart maps");
  ChartMap cm;
  cm.src = inner.src;
  cm.tgt = outer.tgt;
  const ExprContext& ctx = *inner.src->tower->ctx;
  for (const auto& [w, e] : outer.map) cm.map[w] = ctx.substitute(e, inner.map);
  return cm;
}

}  // namespace multisym
