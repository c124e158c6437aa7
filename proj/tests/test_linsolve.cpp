#include <catch2/catch_amalgamated.hpp>

#include "multisym/linsolve.hpp"
#include "test_support.hpp"

using namespace multisym;

namespace {

Symbol unk(const std::string& n, std::vector<int> idx = {}) {
  return make_symbol(SymKind::Unknown, n, std::move(idx));
}
Symbol var(const std::string& n, std::vector<int> idx = {}) {
  return make_symbol(SymKind::Field, n, std::move(idx));
}

bool is_unknown_sym(Symbol s) { return s->kind == SymKind::Unknown; }

}  // namespace

TEST_CASE("constant-coefficient elimination with leftover constraint") {
  ExprContext ctx;
  Symbol a = unk("a"), b = unk("b");
  Symbol x = var("x"), y = var("y");
  // a + b = x ; a - b = y ; x + y = 0 (constraint, no unknowns)
  std::vector<Expr> eqs = {Expr(a) + Expr(b) - Expr(x), Expr(a) - Expr(b) - Expr(y),
                           Expr(x) + Expr(y)};
  auto r = solve_linear(eqs, is_unknown_sym, ctx);
  REQUIRE(r.solved.size() == 2);
  REQUIRE(r.constraints.size() == 1);
  REQUIRE(r.deferred.empty());
  Expr av = r.solved.at(a).num, ad = r.solved.at(a).den;
  // a = (x+y)/2
  REQUIRE(ctx.normalize(av * Expr(2) - (Expr(x) + Expr(y)) * ad).is_zero_expr());
  Expr bv = r.solved.at(b).num, bd = r.solved.at(b).den;
  REQUIRE(ctx.normalize(bv * Expr(2) - (Expr(x) - Expr(y)) * bd).is_zero_expr());
}

TEST_CASE("polynomial pivots require and record ledger assumptions") {
  ExprContext ctx;
  // metric-like system: g^{ab} u_b = p^a over the fraction field
  Symbol g00 = var("g", {0, 0}), g01 = var("g", {0, 1}), g11 = var("g", {1, 1});
  Symbol u0 = unk("u", {0}), u1 = unk("u", {1});
  Symbol p0 = var("p", {0}), p1 = var("p", {1});
  std::vector<Expr> eqs = {
      Expr(g00) * Expr(u0) + Expr(g01) * Expr(u1) - Expr(p0),
      Expr(g01) * Expr(u0) + Expr(g11) * Expr(u1) - Expr(p1),
  };
  auto r = solve_linear(eqs, is_unknown_sym, ctx);
  REQUIRE(r.solved.size() == 2);
  REQUIRE(r.constraints.empty());
  REQUIRE(!r.ledger.nonzero.empty());

  // check against cramer's rule by clearing denominators
  Expr det = Expr(g00) * Expr(g11) - Expr(g01).pow(2);
  Expr u0_num = Expr(g11) * Expr(p0) - Expr(g01) * Expr(p1);
  const RatExpr& s0 = r.solved.at(u0);
  REQUIRE(ctx.normalize(s0.num * det - u0_num * s0.den).is_zero_expr());

  // numeric spot check
  PointQ pt{{g00, rat(3)}, {g01, rat(1)}, {g11, rat(2)}, {p0, rat(7)}, {p1, rat(-4)}};
  Rational detv = eval(det, pt);
  Rational u0v = eval(u0_num, pt) / detv;
  REQUIRE(eval(s0.num, pt) / eval(s0.den, pt) == u0v);
}

TEST_CASE("nonlinear residuals are deferred, solvable ones solved") {
  ExprContext ctx;
  Symbol a = unk("a"), b = unk("b");
  Symbol x = var("x");
  std::vector<Expr> eqs = {Expr(a) - Expr(x), Expr(a) * Expr(b) - Expr(2)};
  auto r = solve_linear(eqs, is_unknown_sym, ctx);
  // after a := x the product equation becomes linear in b and solves too
  REQUIRE(r.solved.size() == 2);
  REQUIRE(r.deferred.empty());

  std::vector<Expr> eqs2 = {Expr(a) * Expr(b) - Expr(x), Expr(a) * Expr(a) - Expr(b)};
  auto r2 = solve_linear(eqs2, is_unknown_sym, ctx);
  REQUIRE(r2.solved.empty());
  REQUIRE(r2.deferred.size() == 2);
}

TEST_CASE("inconsistent system shows a constant constraint") {
  ExprContext ctx;
  Symbol a = unk("a");
  Symbol x = var("x");
  std::vector<Expr> eqs = {Expr(a) - Expr(x), Expr(a) - Expr(x) - Expr(1)};
  auto r = solve_linear(eqs, is_unknown_sym, ctx);
  REQUIRE(r.constraints.size() == 1);
  REQUIRE(r.constraints[0].is_constant());
}

TEST_CASE("reduce_mod decides membership for linear combinations") {
  ExprContext ctx;
  Symbol x = var("x"), y = var("y"), z = var("z");
  Expr c1 = Expr(x) * Expr(y) - Expr(1);
  Expr c2 = Expr(z) - Expr(x);
  Expr member = Expr(z) * (Expr(x) * Expr(y) - Expr(1)) + (Expr(y) + Expr(2)) * (Expr(z) - Expr(x));
  REQUIRE(!reduce_mod(member, {c1, c2}, ctx).is_zero_expr());  // not confluent bare
  REQUIRE(reduce_mod_ideal(member, {c1, c2}, ctx).is_zero_expr());
  Expr nonmember = Expr(x) * Expr(y) + Expr(z);
  REQUIRE(!reduce_mod_ideal(nonmember, {c1, c2}, ctx).is_zero_expr());
}

TEST_CASE("strip_units removes ledgered factors only") {
  ExprContext ctx;
  Symbol T = make_symbol(SymKind::Param, "T");
  Symbol sq = make_symbol(SymKind::Derived, "sq");
  Symbol x = var("x"), y = var("y");
  Ledger units;
  units.record(Expr(T));
  units.record(Expr(sq));
  Expr e = Expr(rat(-2)) * Expr(T) * Expr(sq, 2) * (Expr(x) + Expr(y));
  Expr s = strip_units(e, units, ctx);
  REQUIRE(s == Expr(x) + Expr(y));
  // non-unit common factors stay
  Expr e2 = Expr(x) * Expr(y) + Expr(x) * Expr(x);
  REQUIRE(strip_units(e2, units, ctx) == e2);
  // polynomial unit divisor
  Ledger units2;
  Expr det = Expr(x) * Expr(y) - Expr(1);
  units2.record(det);
  Expr e3 = det * (Expr(x) + Expr(2));
  REQUIRE(strip_units(e3, units2, ctx) == Expr(x) + Expr(2));
}

TEST_CASE("kernel basis of a homogeneous system") {
  ExprContext ctx;
  Symbol u0 = unk("v", {0}), u1 = unk("v", {1}), u2 = unk("v", {2});
  Symbol x = var("x");
  // u0 + x u1 = 0, one equation, three unknowns -> kernel dim 2
  std::vector<Expr> eqs = {Expr(u0) + Expr(x) * Expr(u1)};
  Ledger led;
  auto basis = kernel_basis(eqs, {u0, u1, u2}, ctx, &led);
  REQUIRE(basis.size() == 2);
  for (const auto& vec : basis) {
    Expr check;
    auto get = [&](Symbol s) {
      auto it = vec.find(s);
      return it == vec.end() ? Expr() : it->second;
    };
    check = get(u0) + Expr(x) * get(u1);
    REQUIRE(ctx.normalize(check).is_zero_expr());
  }
}

TEST_CASE("try_atomize uses reciprocal witnesses") {
  ExprContext ctx;
  Symbol x = var("x"), y = var("y");
  Symbol w = make_symbol(SymKind::Derived, "w");
  Expr det = Expr(x) * Expr(y) - Expr(1);
  ctx.register_reciprocal(det, Expr(w));  // 1/det = w by fiat
  RatExpr r{Expr(x), det * Expr(y)};
  auto a = try_atomize(r, ctx);
  REQUIRE(a.has_value());
  REQUIRE(*a == Expr(x) * Expr(w) * Expr(y, -1));
  RatExpr bad{Expr(x), Expr(x) + Expr(1)};
  REQUIRE(!try_atomize(bad, ctx).has_value());
}
