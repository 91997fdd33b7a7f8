#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "pathspin/qcore.hpp"

namespace pathspin::testutil {

inline Complex random_complex(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(g), n(g)};
}

template <std::size_t N>
Ket<N> random_ket(std::mt19937_64& g) {
  Ket<N> k{};
  for (auto& z : k) z = random_complex(g);
  return k;
}

template <std::size_t N>
State<N> random_state(std::mt19937_64& g) {
  return normalize(random_ket<N>(g));
}

inline QubitOperator random_qubit_op(std::mt19937_64& g) {
  QubitOperator m;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) m(r, c) = random_complex(g);
  return m;
}

inline QubitOperator random_hermitian(std::mt19937_64& g) {
  const QubitOperator a = random_qubit_op(g);
  return 0.5 * (a + a.adjoint());
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

// Equality up to a global phase: |<a|b>| = 1 for normalized kets.
template <std::size_t N>
double phase_distance(const Ket<N>& a, const Ket<N>& b) {
  return std::abs(1.0 - std::abs(inner(a, b)));
}

}  // namespace pathspin::testutil
