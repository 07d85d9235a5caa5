#include "reference_kernels.hpp"

#include <cmath>

namespace steam::reference {

namespace {

double gauss(double d, double h)
{
  if (std::fabs(d) > kernels::kTruncation * h)
    return 0.0;
  const double u = d / h;
  return std::exp(-0.5 * u * u);
}

} // namespace

kernels::NwSums nw2d(std::span<const double> a, std::span<const double> b,
                     std::span<const double> value, double ha, double hb,
                     std::span<const double> query_a, std::span<const double> query_b)
{
  kernels::NwSums out;
  out.num.assign(query_a.size(), 0.0);
  out.den.assign(query_a.size(), 0.0);
  for (std::size_t k = 0; k < query_a.size(); ++k) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double kern = gauss(a[j] - query_a[k], ha) * gauss(b[j] - query_b[k], hb);
      out.num[k] += kern * value[j];
      out.den[k] += kern;
    }
  }
  return out;
}

kernels::NwSums nw1d(std::span<const double> x, std::span<const double> wy,
                     std::span<const double> w, double h, std::span<const double> query)
{
  kernels::NwSums out;
  out.num.assign(query.size(), 0.0);
  out.den.assign(query.size(), 0.0);
  for (std::size_t k = 0; k < query.size(); ++k) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double kern = gauss(x[j] - query[k], h);
      out.num[k] += kern * wy[j];
      out.den[k] += kern * w[j];
    }
  }
  return out;
}

} // namespace steam::reference
