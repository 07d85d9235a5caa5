#pragma once

// Serial double-loop smoothers. They share the truncation convention of the
// parallel kernels but nothing else (no sorting, no windows, no lattice), and
// exist only as an independent check in tests and benchmarks.

#include "steam/kernels.hpp"

#include <span>

namespace steam::reference {

kernels::NwSums nw2d(std::span<const double> a, std::span<const double> b,
                     std::span<const double> value, double ha, double hb,
                     std::span<const double> query_a, std::span<const double> query_b);

kernels::NwSums nw1d(std::span<const double> x, std::span<const double> wy,
                     std::span<const double> w, double h, std::span<const double> query);

} // namespace steam::reference
