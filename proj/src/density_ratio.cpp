#include "steam/density_ratio.hpp"

#include "steam/kernels.hpp"
#include "steam/simd_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace steam {

namespace {

constexpr double kTinyDenominator = 1e-300;

std::span<const double> view(const Eigen::VectorXd& v)
{
  return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace

Coefficients fit_selection_model(const StudyData& data, const BasisExpansion& expansion,
                                 std::span<const double> lambda_grid,
                                 const AdaptiveLassoOptions& options)
{
  const Eigen::MatrixXd design = expand_matrix(data.pooled_unlabeled(), expansion);
  const Eigen::VectorXd s = data.pooled_selection();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(design.rows());
  return fit_adaptive_lasso(design, s, ones, 1.0, lambda_grid, options);
}

double PiCalibrator::default_bandwidth(std::span<const double> pit_values, double multiplier)
{
  const double sd = sample_sd(pit_values);
  if (!(sd > 0.0))
    throw Error(ErrorCode::degenerate, "degenerate score: zero spread after PIT");
  return multiplier * sd * std::pow(static_cast<double>(pit_values.size()), -1.0 / 6.0);
}

PiCalibrator::PiCalibrator(const Eigen::VectorXd& alpha_scores, const Eigen::MatrixXd& pooled_z,
                           const Eigen::VectorXd& response, Eigen::VectorXd beta,
                           const PiOptions& options)
{
  const Eigen::Index m = alpha_scores.size();
  if (m < 2 || pooled_z.rows() != m || response.size() != m)
    throw Error(ErrorCode::invalid_argument, "pi calibration: pooled inputs disagree in length");
  if (pooled_z.cols() != beta.size())
    throw Error(ErrorCode::invalid_argument, "pi calibration: beta length differs from design");
  if (!(options.pi_min > 0.0 && options.pi_min < 0.5))
    throw Error(ErrorCode::invalid_argument, "pi_min must lie in (0, 0.5)");
  if (!(options.h1_multiplier > 0.0))
    throw Error(ErrorCode::invalid_argument, "h1 multiplier must be positive");

  auto pool = std::make_shared<Pool>();
  pool->pit_a = PitTransform::fit(view(alpha_scores));
  Eigen::VectorXd a = alpha_scores;
  pool->pit_a.apply({a.data(), static_cast<std::size_t>(m)});

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a[i] < a[j]; });
  pool->a.resize(m);
  pool->s.resize(m);
  pool->z.resize(m, pooled_z.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = order[static_cast<std::size_t>(k)];
    pool->a[k] = a[i];
    pool->s[k] = response[i];
    pool->z.row(k) = pooled_z.row(i);
  }
  pool->z_mean = pool->z.colwise().mean();
  pool->a_sd = sample_sd(view(pool->a));

  pool_ = std::move(pool);
  pi_min_ = options.pi_min;
  multiplier_ = options.h1_multiplier;
  set_beta(std::move(beta));
  if (options.bandwidth) {
    if (!(options.bandwidth->a > 0.0) || !(options.bandwidth->b > 0.0))
      throw Error(ErrorCode::invalid_argument, "bandwidths must be positive");
    bandwidth_ = *options.bandwidth;
  } else {
    bandwidth_.a = default_bandwidth(view(pool_->a), multiplier_);
    bandwidth_.b = default_bandwidth(view(b_), multiplier_);
  }
}

PiCalibrator::PiCalibrator(std::shared_ptr<const Pool> pool, Eigen::VectorXd beta, double pi_min)
  : pool_(std::move(pool))
  , pi_min_(pi_min)
{
  set_beta(std::move(beta));
}

void PiCalibrator::set_beta(Eigen::VectorXd beta)
{
  if (beta.size() != pool_->z.cols())
    throw Error(ErrorCode::invalid_argument, "pi calibration: beta length differs from design");
  beta_ = std::move(beta);
  u_ = pool_->z * beta_;
  pit_b_ = PitTransform::fit(view(u_));
  t_ = (u_.array() - pit_b_.mean) / pit_b_.sd;
  b_ = u_;
  pit_b_.apply({b_.data(), static_cast<std::size_t>(b_.size())});
}

PiCalibrator PiCalibrator::with_beta(Eigen::VectorXd beta) const
{
  PiCalibrator out(pool_, std::move(beta), pi_min_);
  out.multiplier_ = multiplier_;
  out.bandwidth_ = bandwidth_;
  return out;
}

PiCalibrator PiCalibrator::with_default_bandwidth(Eigen::VectorXd beta) const
{
  PiCalibrator out(pool_, std::move(beta), pi_min_);
  out.multiplier_ = multiplier_;
  out.bandwidth_.a = default_bandwidth(view(pool_->a), multiplier_);
  out.bandwidth_.b = default_bandwidth(view(out.b_), multiplier_);
  return out;
}

PiCalibrator::Evaluation PiCalibrator::evaluate(const Eigen::VectorXd& query_alpha,
                                                const Eigen::MatrixXd& query_z) const
{
  const Eigen::Index n = query_alpha.size();
  if (query_z.rows() != n || query_z.cols() != beta_.size())
    throw Error(ErrorCode::invalid_argument, "pi evaluation: query shapes disagree");
  std::vector<double> qa(static_cast<std::size_t>(n));
  std::vector<double> qb(static_cast<std::size_t>(n));
  const Eigen::VectorXd qu = query_z * beta_;
  for (Eigen::Index i = 0; i < n; ++i) {
    qa[static_cast<std::size_t>(i)] = query_alpha[i];
    qb[static_cast<std::size_t>(i)] = qu[i];
  }
  pool_->pit_a.apply(qa);
  pit_b_.apply(qb);

  const auto sums = kernels::nw2d(view(pool_->a), view(b_), view(pool_->s), bandwidth_.a,
                                  bandwidth_.b, qa, qb);
  Evaluation out;
  out.pi.resize(n);
  out.pi_raw.resize(n);
  const double lo = pi_min_;
  const double hi = 1.0 - pi_min_;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double value;
    if (sums.den[k] < kTinyDenominator) {
      out.pi_raw[i] = std::numeric_limits<double>::quiet_NaN();
      // Response of the nearest pooled point on the bandwidth-scaled plane.
      double best = std::numeric_limits<double>::infinity();
      value = 0.5;
      for (Eigen::Index j = 0; j < pool_->a.size(); ++j) {
        const double da = (pool_->a[j] - qa[k]) / bandwidth_.a;
        const double db = (b_[j] - qb[k]) / bandwidth_.b;
        const double d = da * da + db * db;
        if (d < best) {
          best = d;
          value = pool_->s[j];
        }
      }
      ++out.fallback_count;
    } else {
      value = sums.num[k] / sums.den[k];
      out.pi_raw[i] = value;
    }
    if (value < lo || value > hi || sums.den[k] < kTinyDenominator) {
      ++out.clip_count;
      value = std::clamp(value, lo, hi);
    }
    out.pi[i] = value;
  }
  return out;
}

Eigen::MatrixXd PiCalibrator::gradient_wrt_beta(const Eigen::VectorXd& query_alpha,
                                                const Eigen::MatrixXd& query_z) const
{
  const Eigen::Index n = query_alpha.size();
  const Eigen::Index q = beta_.size();
  if (query_z.rows() != n || query_z.cols() != q)
    throw Error(ErrorCode::invalid_argument, "pi gradient: query shapes disagree");
  const Pool& pool = *pool_;
  const Eigen::Index m = pool.a.size();
  const double s = pit_b_.sd;

  // d sd(u) / d beta with u = Z beta over the pool.
  const Eigen::VectorXd centered = u_.array() - pit_b_.mean;
  const Eigen::RowVectorXd dsd =
    (centered.transpose() * pool.z - centered.sum() * pool.z_mean) /
    (static_cast<double>(m - 1) * s);
  Eigen::VectorXd phi(m);
  for (Eigen::Index j = 0; j < m; ++j)
    phi[j] = normal_pdf(t_[j]);

  const double ca = 0.5 / (bandwidth_.a * bandwidth_.a);
  const double cb = 0.5 / (bandwidth_.b * bandwidth_.b);
  const double inv_hb2 = 1.0 / (bandwidth_.b * bandwidth_.b);
  const double ra = kernels::kTruncation * bandwidth_.a;
  const double rb = kernels::kTruncation * bandwidth_.b;
  const Eigen::VectorXd qu = query_z * beta_;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, q);

#pragma omp parallel
  {
    std::vector<double> kern;
    std::vector<double> v;
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xa = pool.pit_a(query_alpha[i]);
      const double tx = (qu[i] - pit_b_.mean) / s;
      const double xb = normal_cdf(tx);
      const auto win = kernels::window(view(pool.a), xa, ra);
      const std::size_t len = win.last - win.first;
      kern.resize(len);
      v.resize(len);
      const double* pa = pool.a.data() + win.first;
      const double* pb = b_.data() + win.first;
      const double* ps = pool.s.data() + win.first;
      const double* pphi = phi.data() + win.first;
      const double* pt = t_.data() + win.first;
      double num = 0.0;
      double den = 0.0;
#pragma omp simd reduction(+ : num, den)
      for (std::size_t j = 0; j < len; ++j) {
        const double da = pa[j] - xa;
        const double db = pb[j] - xb;
        const double e = exp(-(ca * da * da + cb * db * db));
        const double k = std::fabs(db) <= rb ? e : 0.0;
        kern[j] = k;
        num += k * ps[j];
        den += k;
      }
      if (den < kTinyDenominator)
        continue;
      const double pi = num / den;
      double c0 = 0.0;
      double c1 = 0.0;
      double ct = 0.0;
#pragma omp simd reduction(+ : c0, c1, ct)
      for (std::size_t j = 0; j < len; ++j) {
        const double c = kern[j] * (-(pb[j] - xb) * inv_hb2) * (ps[j] - pi);
        const double vj = c * pphi[j] / s;
        v[j] = vj;
        c0 += c;
        c1 += vj;
        ct += vj * pt[j];
      }
      const Eigen::Map<const Eigen::VectorXd> vmap(v.data(), static_cast<Eigen::Index>(len));
      Eigen::RowVectorXd g =
        vmap.transpose() * pool.z.middleRows(static_cast<Eigen::Index>(win.first),
                                             static_cast<Eigen::Index>(len));
      const Eigen::RowVectorXd dbx =
        normal_pdf(tx) / s * (query_z.row(i) - pool.z_mean - tx * dsd);
      g -= c1 * pool.z_mean + ct * dsd + c0 * dbx;
      grad.row(i) = g / den;
    }
  }
  return grad;
}

CalibratedWeights weights_from_pi(const PiCalibrator::Evaluation& eval)
{
  CalibratedWeights out;
  out.pi = eval.pi;
  out.w = (1.0 - eval.pi.array()) / eval.pi.array();
  out.clip_count = eval.clip_count;
  out.fallback_count = eval.fallback_count;
  return out;
}

CalibratedWeights calibrated_weights(const PiCalibrator& pi, const Eigen::VectorXd& query_alpha,
                                     const Eigen::MatrixXd& query_z)
{
  return weights_from_pi(pi.evaluate(query_alpha, query_z));
}

} // namespace steam
