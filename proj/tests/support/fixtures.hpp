#pragma once

#include "steam/pipeline.hpp"
#include "steam/sim.hpp"

#include <cmath>

namespace steam::testing {

//! Moderate-shift study at a size that estimates in well under a second.
inline SimDataset small_study(std::uint64_t seed, Eigen::Index N = 2000, Eigen::Index n = 200)
{
  SimScenario sc;
  sc.n = n;
  sc.N = N;
  sc.N_t = N;
  sc.n_target_labeled = 100;
  Rng rng(seed);
  return generate_dataset(sc, rng);
}

inline EstimationConfig small_config()
{
  EstimationConfig c;
  const auto [mu, pi] = scenario_bases(Misspec::both_correct);
  c.mu_basis = mu;
  c.pi_basis = pi;
  return c;
}

//! Truncated Gaussian kernel written out independently of the library.
inline double gauss(double d, double h)
{
  const double u = d / h;
  return std::abs(u) <= 8.0 ? std::exp(-0.5 * u * u) : 0.0;
}

inline bool close(double a, double b, double tol)
{
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace steam::testing
