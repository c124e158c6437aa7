#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "multisym/error.hpp"
#include "multisym/rational.hpp"
#include "multisym/symbol.hpp"

namespace multisym {

/// Power product of symbols, factors sorted by symbol key, exponents
/// nonzero (negative exponents permitted: the coefficient ring is Laurent
/// in atoms such as 1/T or 1/sqrt(-g)).
struct Monomial {
  struct Factor {
    Symbol sym;
    int exp;
    bool operator==(const Factor& o) const { return sym == o.sym && exp == o.exp; }
  };
  std::vector<Factor> f;

  bool is_one() const { return f.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& x : f) d += x.exp;
    return d;
  }

  int exponent_of(Symbol s) const {
    for (const auto& x : f)
      if (x.sym == s) return x.exp;
    return 0;
  }

  bool operator==(const Monomial& o) const { return f == o.f; }
};

/// Graded-lex order (total degree first, then factor-wise by symbol key
/// and exponent). Gives every polynomial a unique leading monomial and a
/// rewrite order under which the registered identities terminate.
inline int mono_cmp(const Monomial& a, const Monomial& b) {
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db ? -1 : 1;
  size_t n = std::min(a.f.size(), b.f.size());
  for (size_t i = 0; i < n; ++i) {
    if (a.f[i].sym != b.f[i].sym) return a.f[i].sym->key < b.f[i].sym->key ? 1 : -1;
    if (a.f[i].exp != b.f[i].exp) return a.f[i].exp > b.f[i].exp ? 1 : -1;
  }
  if (a.f.size() != b.f.size()) return a.f.size() > b.f.size() ? 1 : -1;
  return 0;
}

inline bool mono_less(const Monomial& a, const Monomial& b) { return mono_cmp(a, b) < 0; }

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.f.reserve(a.f.size() + b.f.size());
  size_t i = 0, j = 0;
  while (i < a.f.size() && j < b.f.size()) {
    if (a.f[i].sym == b.f[j].sym) {
      int e = a.f[i].exp + b.f[j].exp;
      if (e != 0) r.f.push_back({a.f[i].sym, e});
      ++i, ++j;
    } else if (sym_less(a.f[i].sym, b.f[j].sym)) {
      r.f.push_back(a.f[i++]);
    } else {
      r.f.push_back(b.f[j++]);
    }
  }
  for (; i < a.f.size(); ++i) r.f.push_back(a.f[i]);
  for (; j < b.f.size(); ++j) r.f.push_back(b.f[j]);
  return r;
}

/// Whether b divides a in the positive-exponent sense (every factor of b
/// has exponent >= its own, b's exponents assumed positive).
inline bool mono_divides(const Monomial& b, const Monomial& a) {
  size_t i = 0;
  for (const auto& x : b.f) {
    while (i < a.f.size() && sym_less(a.f[i].sym, x.sym)) ++i;
    if (i >= a.f.size() || a.f[i].sym != x.sym || a.f[i].exp < x.exp) return false;
  }
  return true;
}

inline Monomial mono_div(const Monomial& a, const Monomial& b) {
  Monomial inv;
  inv.f = b.f;
  for (auto& x : inv.f) x.exp = -x.exp;
  return mono_mul(a, inv);
}

/// Canonical multivariate Laurent polynomial: terms sorted descending by
/// monomial order, coefficients nonzero. This normal form is what makes
/// symbolic equality decidable by structural comparison.
class Expr {
 public:
  using Term = std::pair<Monomial, Rational>;

  Expr() = default;
  explicit Expr(Rational c) {
    if (!is_zero(c)) terms_.push_back({Monomial{}, std::move(c)});
  }
  explicit Expr(long long c) : Expr(Rational(c)) {}
  explicit Expr(Symbol s, int exp = 1) {
    if (exp != 0)
      terms_.push_back({Monomial{{{s, exp}}}, Rational(1)});
    else
      terms_.push_back({Monomial{}, Rational(1)});
  }
  Expr(Rational c, Monomial m) {
    if (!is_zero(c)) terms_.push_back({std::move(m), std::move(c)});
  }

  static Expr zero() { return Expr(); }
  static Expr one() { return Expr(Rational(1)); }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero_expr() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_one()); }
  bool is_monomial() const { return terms_.size() == 1; }

  Rational constant_value() const {
    if (terms_.empty()) return Rational(0);
    if (!is_constant()) fail(Errc::Internal, "constant_value on non-constant");
    return terms_[0].second;
  }

  const Term& leading() const {
    if (terms_.empty()) fail(Errc::Internal, "leading of zero");
    return terms_[0];
  }

  bool operator==(const Expr& o) const { return terms_ == o.terms_; }
  bool operator!=(const Expr& o) const { return !(*this == o); }

  /// Build from an unsorted term list (merges equal monomials).
  static Expr collect(std::vector<Term> ts) {
    std::sort(ts.begin(), ts.end(),
              [](const Term& a, const Term& b) { return mono_cmp(a.first, b.first) > 0; });
    Expr r;
    for (auto& t : ts) {
      if (!r.terms_.empty() && r.terms_.back().first == t.first)
        r.terms_.back().second += t.second;
      else
        r.terms_.push_back(std::move(t));
      if (!r.terms_.empty() && is_zero(r.terms_.back().second)) r.terms_.pop_back();
    }
    // re-drop zeros produced mid-stream
    std::vector<Term> keep;
    keep.reserve(r.terms_.size());
    for (auto& t : r.terms_)
      if (!is_zero(t.second)) keep.push_back(std::move(t));
    r.terms_ = std::move(keep);
    return r;
  }

  Expr operator-() const {
    Expr r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }

  Expr& operator+=(const Expr& o) {
    *this = *this + o;
    return *this;
  }
  Expr& operator-=(const Expr& o) {
    *this = *this + (-o);
    return *this;
  }
  Expr& operator*=(const Expr& o) {
    *this = *this * o;
    return *this;
  }

  friend Expr operator+(const Expr& a, const Expr& b) {
    std::vector<Term> r;
    r.reserve(a.terms_.size() + b.terms_.size());
    size_t i = 0, j = 0;
    while (i < a.terms_.size() && j < b.terms_.size()) {
      int c = mono_cmp(a.terms_[i].first, b.terms_[j].first);
      if (c > 0) {
        r.push_back(a.terms_[i++]);
      } else if (c < 0) {
        r.push_back(b.terms_[j++]);
      } else {
        Rational s = a.terms_[i].second + b.terms_[j].second;
        if (!is_zero(s)) r.push_back({a.terms_[i].first, std::move(s)});
        ++i, ++j;
      }
    }
    for (; i < a.terms_.size(); ++i) r.push_back(a.terms_[i]);
    for (; j < b.terms_.size(); ++j) r.push_back(b.terms_[j]);
    Expr e;
    e.terms_ = std::move(r);
    return e;
  }

  friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

  friend Expr operator*(const Expr& a, const Expr& b) {
    if (a.terms_.empty() || b.terms_.empty()) return Expr();
    if (b.terms_.size() == 1) return mul_term(a, b.terms_[0]);
    if (a.terms_.size() == 1) return mul_term(b, a.terms_[0]);
    std::map<Monomial, Rational, decltype(&mono_less)> acc(&mono_less);
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        Monomial m = mono_mul(ta.first, tb.first);
        acc[std::move(m)] += ta.second * tb.second;
      }
    Expr r;
    r.terms_.reserve(acc.size());
    for (auto it = acc.rbegin(); it != acc.rend(); ++it)
      if (!is_zero(it->second)) r.terms_.push_back({it->first, it->second});
    return r;
  }

  friend Expr operator*(const Expr& a, const Rational& c) {
    if (is_zero(c)) return Expr();
    Expr r = a;
    for (auto& t : r.terms_) t.second *= c;
    return r;
  }
  friend Expr operator*(const Rational& c, const Expr& a) { return a * c; }

  /// Integer power. Negative exponents require a single-term base.
  Expr pow(int n) const {
    if (n == 0) return one();
    if (n < 0) {
      if (terms_.size() != 1) fail(Errc::NonMonomialDivision, "negative power of a sum");
      Monomial m = terms_[0].first;
      for (auto& x : m.f) x.exp *= n;
      Rational c(1);
      for (int k = 0; k < -n; ++k) c /= terms_[0].second;
      return Expr(c, std::move(m));
    }
    Expr r = one();
    Expr b = *this;
    int k = n;
    while (k > 0) {
      if (k & 1) r = r * b;
      b = b * b;
      k >>= 1;
    }
    return r;
  }

  /// All symbols occurring in the expression.
  std::set<Symbol> atoms() const {
    std::set<Symbol> s;
    for (const auto& t : terms_)
      for (const auto& x : t.first.f) s.insert(x.sym);
    return s;
  }

  bool contains(Symbol s) const {
    for (const auto& t : terms_)
      for (const auto& x : t.first.f)
        if (x.sym == s) return true;
    return false;
  }

  /// Max degree in the symbols accepted by `pred`.
  int degree_in(const std::function<bool(Symbol)>& pred) const {
    int d = 0;
    for (const auto& t : terms_) {
      int td = 0;
      for (const auto& x : t.first.f)
        if (pred(x.sym)) td += x.exp > 0 ? x.exp : -x.exp;
      d = std::max(d, td);
    }
    return d;
  }

  std::string str() const;

 private:
  static Expr mul_term(const Expr& a, const Term& t) {
    std::vector<Term> r;
    r.reserve(a.terms_.size());
    for (const auto& ta : a.terms_) r.push_back({mono_mul(ta.first, t.first), ta.second * t.second});
    return collect(std::move(r));  // term multiplication can reorder monomials
  }

  std::vector<Term> terms_;
};

inline Expr operator+(const Expr& a, long long c) { return a + Expr(c); }
inline Expr operator-(const Expr& a, long long c) { return a - Expr(c); }

inline std::string mono_str(const Monomial& m) {
  std::string s;
  for (size_t i = 0; i < m.f.size(); ++i) {
    if (i) s += "*";
    s += m.f[i].sym->name;
    if (m.f[i].exp != 1) s += "^" + std::to_string(m.f[i].exp);
  }
  return s;
}

inline std::string Expr::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < terms_.size(); ++i) {
    const auto& [m, c] = terms_[i];
    bool neg = c < 0;
    Rational a = neg ? Rational(-c) : c;
    if (i == 0)
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    if (m.is_one()) {
      s += to_string(a);
    } else {
      if (a != 1) s += to_string(a) + "*";
      s += mono_str(m);
    }
  }
  return s;
}

/// Exact division of polynomials; nullopt when not exactly divisible.
inline std::optional<Expr> div_exact(const Expr& a, const Expr& b) {
  if (b.is_zero_expr()) return std::nullopt;
  if (a.is_zero_expr()) return Expr();
  if (b.is_monomial()) {
    const auto& [bm, bc] = b.terms()[0];
    std::vector<Expr::Term> out;
    for (const auto& [m, c] : a.terms()) out.push_back({mono_div(m, bm), c / bc});
    return Expr::collect(std::move(out));
  }
  Expr rem = a, quot;
  const auto& [lm, lc] = b.leading();
  int guard = 0;
  while (!rem.is_zero_expr()) {
    const auto& [rm, rc] = rem.leading();
    if (!mono_divides(lm, rm)) return std::nullopt;
    Expr q(rc / lc, mono_div(rm, lm));
    quot += q;
    rem -= q * b;
    if (++guard > 100000) return std::nullopt;
  }
  return quot;
}

/// Strips the numeric content and normalizes the sign so the leading
/// coefficient is positive; used to put constraints in a stable shape.
inline Expr primitive_part(const Expr& e) {
  if (e.is_zero_expr()) return e;
  BigInt num_gcd = 0, den_lcm = 1;
  for (const auto& [m, c] : e.terms()) {
    num_gcd = boost::multiprecision::gcd(num_gcd, boost::multiprecision::abs(numerator(c)));
    den_lcm = boost::multiprecision::lcm(den_lcm, denominator(c));
  }
  Rational scale = Rational(den_lcm) / Rational(num_gcd);
  if (e.leading().second < 0) scale = -scale;
  return e * scale;
}

}  // namespace multisym
