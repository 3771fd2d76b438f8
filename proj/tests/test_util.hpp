#pragma once

// Shared generators for the randomized suites.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dcsim/fock_core.hpp"

namespace dcsim::testing {

// Random coupling table with the requested mode count and total strength xi.
inline CouplingTable random_table(std::mt19937_64& rng, std::size_t modes,
                                  double xi) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Complex> etas(modes);
  double sum_sq = 0.0;
  for (auto& e : etas) {
    e = Complex(unit(rng), unit(rng));
    sum_sq += std::norm(e);
  }
  const double scale = xi / std::sqrt(sum_sq);
  for (auto& e : etas) e *= scale;
  return build_coupling_table(std::move(etas), rng() % modes);
}

// Mode count in 1..max_modes, xi in (0, 1.5].
inline CouplingTable random_table(std::mt19937_64& rng,
                                  std::size_t max_modes = 50) {
  std::uniform_real_distribution<double> xi_dist(1e-3, 1.5);
  const std::size_t modes = 1 + rng() % max_modes;
  return random_table(rng, modes, xi_dist(rng));
}

}  // namespace dcsim::testing
