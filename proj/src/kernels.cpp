#include "steam/kernels.hpp"

#include "steam/error.hpp"
#include "steam/simd_math.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace steam::kernels {

Window window(std::span<const double> sorted, double center, double radius)
{
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), center - radius);
  const auto hi = std::upper_bound(lo, sorted.end(), center + radius);
  return {static_cast<std::size_t>(lo - sorted.begin()),
          static_cast<std::size_t>(hi - sorted.begin())};
}

NwSums nw2d(std::span<const double> a, std::span<const double> b,
            std::span<const double> value, double ha, double hb,
            std::span<const double> query_a, std::span<const double> query_b)
{
  if (b.size() != a.size() || value.size() != a.size() || query_b.size() != query_a.size())
    throw Error(ErrorCode::invalid_argument, "nw2d: mismatched lengths");
  if (!(ha > 0.0) || !(hb > 0.0))
    throw Error(ErrorCode::invalid_argument, "nw2d: bandwidths must be positive");
  const std::size_t m = query_a.size();
  NwSums out{std::vector<double>(m), std::vector<double>(m)};
  const double ca = 0.5 / (ha * ha);
  const double cb = 0.5 / (hb * hb);
  const double rb = kTruncation * hb;
  const double* pa = a.data();
  const double* pb = b.data();
  const double* pv = value.data();

#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t k = 0; k < m; ++k) {
    const double xa = query_a[k];
    const double xb = query_b[k];
    const Window win = window(a, xa, kTruncation * ha);
    double num = 0.0;
    double den = 0.0;
#pragma omp simd reduction(+ : num, den)
    for (std::size_t j = win.first; j < win.last; ++j) {
      const double da = pa[j] - xa;
      const double db = pb[j] - xb;
      const double e = exp(-(ca * da * da + cb * db * db));
      const double kern = std::fabs(db) <= rb ? e : 0.0;
      num += kern * pv[j];
      den += kern;
    }
    out.num[k] = num;
    out.den[k] = den;
  }
  return out;
}

NwSums nw1d(std::span<const double> x, std::span<const double> wy,
            std::span<const double> w, double h, std::span<const double> query)
{
  if (wy.size() != x.size() || w.size() != x.size())
    throw Error(ErrorCode::invalid_argument, "nw1d: mismatched lengths");
  if (!(h > 0.0))
    throw Error(ErrorCode::invalid_argument, "nw1d: bandwidth must be positive");
  const std::size_t m = query.size();
  NwSums out{std::vector<double>(m), std::vector<double>(m)};
  const double c = 0.5 / (h * h);
  const double* px = x.data();
  const double* pwy = wy.data();
  const double* pw = w.data();

#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < m; ++k) {
    const double q = query[k];
    const Window win = window(x, q, kTruncation * h);
    double num = 0.0;
    double den = 0.0;
#pragma omp simd reduction(+ : num, den)
    for (std::size_t j = win.first; j < win.last; ++j) {
      const double d = px[j] - q;
      const double kern = exp(-c * d * d);
      num += kern * pwy[j];
      den += kern * pw[j];
    }
    out.num[k] = num;
    out.den[k] = den;
  }
  return out;
}

NwSums nw1d_lattice(std::span<const long> support_rank, std::span<const double> wy,
                    std::span<const double> w, double h, long size)
{
  if (wy.size() != support_rank.size() || w.size() != support_rank.size())
    throw Error(ErrorCode::invalid_argument, "nw1d_lattice: mismatched lengths");
  if (!(h > 0.0) || size < 1)
    throw Error(ErrorCode::invalid_argument, "nw1d_lattice: invalid bandwidth or size");
  const double step = 1.0 / static_cast<double>(size);
  const double radius = kTruncation * h;
  // Largest offset d with d/size <= radius; exact for the boundary case.
  long reach = static_cast<long>(std::floor(radius * static_cast<double>(size)));
  while (static_cast<double>(reach + 1) / static_cast<double>(size) <= radius)
    ++reach;
  while (reach > 0 && static_cast<double>(reach) / static_cast<double>(size) > radius)
    --reach;
  reach = std::min(reach, size);

  std::vector<double> kern(static_cast<std::size_t>(reach) + 1);
  const double c = 0.5 / (h * h);
  for (long d = 0; d <= reach; ++d) {
    const double u = static_cast<double>(d) * step;
    kern[static_cast<std::size_t>(d)] = std::exp(-c * u * u);
  }

  // Aggregate coincident support points first.
  std::vector<double> agg_wy(static_cast<std::size_t>(size) + 1, 0.0);
  std::vector<double> agg_w(static_cast<std::size_t>(size) + 1, 0.0);
  std::vector<long> occupied;
  occupied.reserve(support_rank.size());
  for (std::size_t i = 0; i < support_rank.size(); ++i) {
    const long r = support_rank[i];
    if (r < 0 || r > size)
      throw Error(ErrorCode::invalid_argument, "nw1d_lattice: rank outside lattice");
    const auto ri = static_cast<std::size_t>(r);
    if (agg_w[ri] == 0.0 && agg_wy[ri] == 0.0)
      occupied.push_back(r);
    agg_wy[ri] += wy[i];
    agg_w[ri] += w[i];
  }
  std::sort(occupied.begin(), occupied.end());
  occupied.erase(std::unique(occupied.begin(), occupied.end()), occupied.end());

  const auto len = static_cast<std::size_t>(size) + 1;
  NwSums out{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
  const double* pk = kern.data();

  // Each thread owns a block of output points and gathers from every support
  // point that reaches it, so writes never race and the summation order per
  // output point is fixed.
#pragma omp parallel for schedule(static)
  for (long q0 = 0; q0 < static_cast<long>(len); q0 += 512) {
    const long q1 = std::min<long>(q0 + 512, static_cast<long>(len));
    double* num = out.num.data();
    double* den = out.den.data();
    for (long r : occupied) {
      const long lo = std::max(q0, r - reach);
      const long hi = std::min(q1, r + reach + 1);
      if (lo >= hi)
        continue;
      const double vy = agg_wy[static_cast<std::size_t>(r)];
      const double vw = agg_w[static_cast<std::size_t>(r)];
      // Split at r so both halves read the kernel table contiguously.
      const long mid = std::clamp(r, lo, hi);
#pragma omp simd
      for (long q = lo; q < mid; ++q) {
        num[q] += pk[r - q] * vy;
        den[q] += pk[r - q] * vw;
      }
#pragma omp simd
      for (long q = mid; q < hi; ++q) {
        num[q] += pk[q - r] * vy;
        den[q] += pk[q - r] * vw;
      }
    }
  }
  return out;
}

int thread_count()
{
  return omp_get_max_threads();
}

void set_thread_count(int threads)
{
  if (threads > 0)
    omp_set_num_threads(threads);
}

} // namespace steam::kernels
