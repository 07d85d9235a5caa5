#pragma once

#include "steam/data_model.hpp"
#include "steam/glm.hpp"
#include "steam/scores.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>

namespace steam {

//! Kernel bandwidths of the (selection score, outcome score) smoother, on
//! the PIT scale.
struct Bandwidth2D {
  double a = 0.0;
  double b = 0.0;
};

struct CalibratedWeights {
  Eigen::VectorXd w;
  Eigen::VectorXd pi;
  //! Units whose probability was clipped, including denominator fallbacks.
  Eigen::Index clip_count = 0;
  //! Units whose kernel denominator vanished.
  Eigen::Index fallback_count = 0;
};

//! Adaptive LASSO (gamma = 1) of S on the pooled unlabeled source and target
//! rows, design expanded by `expansion`.
Coefficients fit_selection_model(const StudyData& data, const BasisExpansion& expansion,
                                 std::span<const double> lambda_grid = {},
                                 const AdaptiveLassoOptions& options = {});

struct PiOptions {
  double pi_min = 0.01;
  //! Multiplies both default bandwidths.
  double h1_multiplier = 1.0;
  //! Fixed bandwidths; overrides the plug-in rule when set.
  std::optional<Bandwidth2D> bandwidth;
};

//! Two-dimensional Nadaraya-Watson estimate of P(S = 1 | alpha'Psi, beta'Z)
//! over the pooled unlabeled rows, both scores PIT-standardized with pooled
//! moments. Immutable; copies share the pooled data.
class PiCalibrator {
public:
  struct Evaluation {
    Eigen::VectorXd pi;
    //! Before clipping; NaN where the kernel denominator vanished.
    Eigen::VectorXd pi_raw;
    Eigen::Index clip_count = 0;
    Eigen::Index fallback_count = 0;
  };

  //! `alpha_scores` are alpha'Psi on the pooled rows, `pooled_z` the outcome
  //! design of the same rows and `response` the selection indicator S.
  PiCalibrator(const Eigen::VectorXd& alpha_scores, const Eigen::MatrixXd& pooled_z,
               const Eigen::VectorXd& response, Eigen::VectorXd beta,
               const PiOptions& options = {});

  //! Same pooled data and bandwidths, different outcome coefficients.
  PiCalibrator with_beta(Eigen::VectorXd beta) const;
  //! Same pooled data and coefficients, bandwidths from the plug-in rule.
  PiCalibrator with_default_bandwidth(Eigen::VectorXd beta) const;

  //! `query_alpha` holds alpha'Psi at the query units, `query_z` their outcome
  //! design rows.
  Evaluation evaluate(const Eigen::VectorXd& query_alpha, const Eigen::MatrixXd& query_z) const;

  //! d pi_raw / d beta at each query (rows), bandwidths held fixed.
  Eigen::MatrixXd gradient_wrt_beta(const Eigen::VectorXd& query_alpha,
                                    const Eigen::MatrixXd& query_z) const;

  const Bandwidth2D& bandwidth() const noexcept { return bandwidth_; }
  const Eigen::VectorXd& beta() const noexcept { return beta_; }
  const PitTransform& pit_alpha() const noexcept { return pool_->pit_a; }
  const PitTransform& pit_beta() const noexcept { return pit_b_; }
  double pi_min() const noexcept { return pi_min_; }
  Eigen::Index pooled_size() const noexcept { return pool_->a.size(); }

  //! Plug-in bandwidth sd * multiplier * size^(-1/6) of one PIT coordinate.
  static double default_bandwidth(std::span<const double> pit_values, double multiplier);

private:
  struct Pool {
    Eigen::VectorXd a;
    Eigen::VectorXd s;
    Eigen::MatrixXd z;
    Eigen::RowVectorXd z_mean;
    PitTransform pit_a;
    double a_sd = 0.0;
  };

  PiCalibrator(std::shared_ptr<const Pool> pool, Eigen::VectorXd beta, double pi_min);
  void set_beta(Eigen::VectorXd beta);

  std::shared_ptr<const Pool> pool_;
  Eigen::VectorXd beta_;
  PitTransform pit_b_;
  //! Pooled outcome scores: raw u, standardized t and PIT b, in pool order.
  Eigen::VectorXd u_;
  Eigen::VectorXd t_;
  Eigen::VectorXd b_;
  Bandwidth2D bandwidth_;
  double multiplier_ = 1.0;
  double pi_min_ = 0.01;
};

//! w = (1 - pi) / pi for already clipped probabilities.
CalibratedWeights weights_from_pi(const PiCalibrator::Evaluation& eval);

CalibratedWeights calibrated_weights(const PiCalibrator& pi, const Eigen::VectorXd& query_alpha,
                                     const Eigen::MatrixXd& query_z);

} // namespace steam
