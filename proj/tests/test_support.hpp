#pragma once

#include <random>

#include "multisym/context.hpp"
#include "multisym/expr.hpp"

namespace multisym::testing {

/// Deterministic random expression generator over a fixed symbol pool.
/// Depth-bounded trees of +, *, integer powers and rational leaves.
class ExprGen {
 public:
  ExprGen(std::vector<Symbol> pool, uint64_t seed) : pool_(std::move(pool)), rng_(seed) {}

  Expr gen(int depth) {
    if (depth <= 0) return leaf();
    switch (rng_() % 5) {
      case 0:
      case 1: {
        Expr a = gen(depth - 1), b = gen(depth - 1);
        return a + b;
      }
      case 2:
      case 3: {
        Expr a = gen(depth - 1), b = gen(depth - 1);
        return a * b;
      }
      default: {
        Expr a = gen(depth - 1);
        return a.pow(static_cast<int>(rng_() % 3));
      }
    }
  }

  Expr leaf() {
    if (rng_() % 4 == 0) return Expr(rand_rat());
    return Expr(pool_[rng_() % pool_.size()]);
  }

  Rational rand_rat() {
    long long num = static_cast<long long>(rng_() % 21) - 10;
    long long den = 1 + static_cast<long long>(rng_() % 9);
    return rat(num, den);
  }

  /// Nonzero rational in a small box, bounded away from 0.
  Rational rand_point_value() {
    long long num = 1 + static_cast<long long>(rng_() % 12);
    long long den = 1 + static_cast<long long>(rng_() % 7);
    if (rng_() % 2) num = -num;
    return rat(num, den);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::vector<Symbol> pool_;
  std::mt19937_64 rng_;
};

}  // namespace multisym::testing
