#pragma once

// Gaussian Nadaraya-Watson sums shared by the density-ratio and risk
// smoothers. Kernel weights beyond kTruncation bandwidths are exactly zero,
// which lets every routine restrict itself to a sorted window. Queries are
// distributed over OpenMP threads; each query's sums are computed by a single
// thread so results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace steam::kernels {

inline constexpr double kTruncation = 8.0;

//! Per-query numerator sum K*value and denominator sum K.
struct NwSums {
  std::vector<double> num;
  std::vector<double> den;
};

//! Two-dimensional product-kernel sums. `a` must be sorted ascending; `b` and
//! `value` are aligned with it.
NwSums nw2d(std::span<const double> a, std::span<const double> b,
            std::span<const double> value, double ha, double hb,
            std::span<const double> query_a, std::span<const double> query_b);

//! One-dimensional weighted sums: num = sum K*wy, den = sum K*w. `x` must be
//! sorted ascending.
NwSums nw1d(std::span<const double> x, std::span<const double> wy,
            std::span<const double> w, double h, std::span<const double> query);

//! Index range [first, last) of sorted `x` within `radius` of `center`.
struct Window {
  std::size_t first;
  std::size_t last;
};
Window window(std::span<const double> sorted, double center, double radius);

//! Lattice version of nw1d. Support points and queries all lie on the grid
//! r / size, r = 0..size, so each kernel weight depends only on the integer
//! offset and the sums become a sparse convolution with a precomputed
//! kernel. Returns sums at every grid point 0..size.
NwSums nw1d_lattice(std::span<const long> support_rank, std::span<const double> wy,
                    std::span<const double> w, double h, long size);

//! Number of worker threads currently configured.
int thread_count();
//! Caps the worker count for all subsequent parallel regions (<= 0 keeps the
//! runtime default).
void set_thread_count(int threads);

} // namespace steam::kernels
