#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace multisym {

/// Role of a symbol. The order of enumerators fixes the canonical factor
/// ordering inside monomials (base coordinates sort first, then fields,
/// jets, momenta, the extended momentum, parameters, derived quantities,
/// multivector coefficient unknowns, and section-derivative markers).
enum class SymKind : uint8_t {
  Base = 0,
  Field = 1,
  Jet = 2,
  Momentum = 3,
  PMom = 4,
  Param = 5,
  Derived = 6,
  Unknown = 7,
  Marker = 8,
};

struct SymbolData;
using Symbol = const SymbolData*;

/// Immutable interned symbol: a named family member with concrete integer
/// indices, plus an optional multiset of formal partial-derivative
/// directions (for opaque functions and section markers). Equality is
/// pointer equality; ordering uses the precomputed key so normalized
/// output is stable across runs regardless of creation order.
struct SymbolData {
  SymKind kind;
  std::string family;
  std::vector<int> indices;
  std::vector<Symbol> derivs;  // sorted by key
  std::string key;
  std::string name;
};

namespace detail {

inline std::string symbol_key(SymKind kind, const std::string& family,
                              const std::vector<int>& indices, const std::vector<Symbol>& derivs) {
  std::string k;
  k.push_back(static_cast<char>('A' + static_cast<int>(kind)));
  k += family;
  k.push_back('\x01');
  for (int i : indices) {
    k += std::to_string(i);
    k.push_back(',');
  }
  k.push_back('\x01');
  for (Symbol d : derivs) {
    k += d->key;
    k.push_back(';');
  }
  return k;
}

inline std::string symbol_name(const std::string& family, const std::vector<int>& indices,
                               const std::vector<Symbol>& derivs) {
  std::string n = family;
  if (!indices.empty()) {
    n.push_back('[');
    for (size_t i = 0; i < indices.size(); ++i) {
      if (i) n.push_back(',');
      n += std::to_string(indices[i]);
    }
    n.push_back(']');
  }
  if (!derivs.empty()) {
    n += "_,";
    for (Symbol d : derivs) n += d->name;
  }
  return n;
}

struct Interner {
  std::mutex mu;
  std::map<std::string, std::unique_ptr<SymbolData>> table;

  static Interner& instance() {
    static Interner in;
    return in;
  }
};

}  // namespace detail

inline Symbol make_symbol(SymKind kind, std::string family, std::vector<int> indices = {},
                          std::vector<Symbol> derivs = {}) {
  std::sort(derivs.begin(), derivs.end(), [](Symbol a, Symbol b) { return a->key < b->key; });
  std::string key = detail::symbol_key(kind, family, indices, derivs);
  auto& in = detail::Interner::instance();
  std::lock_guard<std::mutex> lock(in.mu);
  auto it = in.table.find(key);
  if (it != in.table.end()) return it->second.get();
  auto data = std::make_unique<SymbolData>();
  data->kind = kind;
  data->family = std::move(family);
  data->indices = std::move(indices);
  data->derivs = std::move(derivs);
  data->key = key;
  data->name = detail::symbol_name(data->family, data->indices, data->derivs);
  Symbol s = data.get();
  in.table.emplace(std::move(key), std::move(data));
  return s;
}

/// Formal partial of an opaque symbol: appends `wrt` to the derivative
/// multiset (kept sorted, so mixed partials commute structurally).
inline Symbol formal_partial(Symbol s, Symbol wrt) {
  std::vector<Symbol> derivs = s->derivs;
  derivs.push_back(wrt);
  return make_symbol(s->kind, s->family, s->indices, std::move(derivs));
}

inline bool sym_less(Symbol a, Symbol b) { return a->key < b->key; }

}  // namespace multisym
