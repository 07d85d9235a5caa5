#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace steam {

//! The three cohorts of a covariate-shift evaluation study.
//!
//! Every matrix carries an intercept column of ones in position 0 followed by
//! the covariates. The object is immutable after construction and validates
//! its invariants up front, so it can be shared read-only between workers.
//! Target outcomes never live here: see ValidationLabels.
class StudyData {
public:
  StudyData(Eigen::MatrixXd labeled_source,
            Eigen::VectorXd y,
            Eigen::MatrixXd unlabeled_source,
            Eigen::MatrixXd target,
            std::vector<std::string> feature_names);

  const Eigen::MatrixXd& labeled_source() const noexcept { return labeled_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::MatrixXd& unlabeled_source() const noexcept { return unlabeled_; }
  const Eigen::MatrixXd& target() const noexcept { return target_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  Eigen::Index n() const noexcept { return labeled_.rows(); }
  Eigen::Index n_unlabeled() const noexcept { return unlabeled_.rows(); }
  Eigen::Index n_target() const noexcept { return target_.rows(); }
  //! Number of covariates, excluding the intercept.
  Eigen::Index p() const noexcept { return labeled_.cols() - 1; }

  //! Rows of the unlabeled source stacked on top of the target.
  Eigen::MatrixXd pooled_unlabeled() const;
  //! Selection indicator matching pooled_unlabeled(): 1 for source, 0 for target.
  Eigen::VectorXd pooled_selection() const;

  //! Restrict every cohort to the given row subsets.
  StudyData subset(const std::vector<Eigen::Index>& labeled_rows,
                   const std::vector<Eigen::Index>& unlabeled_rows,
                   const std::vector<Eigen::Index>& target_rows) const;

private:
  Eigen::MatrixXd labeled_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd unlabeled_;
  Eigen::MatrixXd target_;
  std::vector<std::string> names_;
};

//! Outcomes observed on a subset of target rows. Estimators never receive
//! these; only the target_labeled comparator and validation code read them.
class ValidationLabels {
public:
  ValidationLabels(std::vector<Eigen::Index> target_rows, std::vector<int> y);

  const std::vector<Eigen::Index>& target_rows() const noexcept { return rows_; }
  const std::vector<int>& y() const noexcept { return y_; }
  std::size_t size() const noexcept { return rows_.size(); }

  //! The first `count` labels only.
  ValidationLabels head(std::size_t count) const;

private:
  std::vector<Eigen::Index> rows_;
  std::vector<int> y_;
};

struct LoadedStudy {
  StudyData data;
  std::optional<ValidationLabels> validation;
};

//! Column roles of a study CSV. An empty feature list selects every column
//! that is not one of the three role columns, in file order.
struct ColumnRoles {
  std::string s_col = "s";
  std::string label_col = "labeled";
  std::string y_col = "y";
  std::vector<std::string> features;
};

LoadedStudy load_study_csv(const std::filesystem::path& path,
                           const ColumnRoles& roles = {});
LoadedStudy parse_study_csv(std::istream& in, const ColumnRoles& roles = {});

//! Writes `s,labeled,y,<features>` rows: labeled source, unlabeled source,
//! then target (with validation outcomes when given). Numbers use 17
//! significant digits so load -> save -> load is exact.
void save_study_csv(const std::filesystem::path& path,
                    const StudyData& data,
                    const ValidationLabels* validation = nullptr);
void write_study_csv(std::ostream& out,
                     const StudyData& data,
                     const ValidationLabels* validation = nullptr);

//! One term of a design expansion. Column indices refer to design columns,
//! so covariate X_k is index k (the intercept is index 0).
struct BasisTerm {
  enum class Kind { raw, interaction };
  Kind kind = Kind::raw;
  int first = 1;
  int second = 0;

  static BasisTerm raw(int index) { return {Kind::raw, index, 0}; }
  static BasisTerm interaction(int a, int b) { return {Kind::interaction, a, b}; }
};

//! Derived columns appended to the raw design. Raw covariates are always
//! kept; `raw` terms only document that and add no column.
struct BasisExpansion {
  std::vector<BasisTerm> terms;

  static BasisExpansion none() { return {}; }
  static BasisExpansion interactions(const std::vector<std::pair<int, int>>& pairs);

  std::size_t added_columns() const;
  //! Throws unless every index lies in [1, p] and interaction pairs differ.
  void validate(Eigen::Index p) const;
  bool operator==(const BasisExpansion&) const;
};

bool operator==(const BasisTerm& a, const BasisTerm& b);

Eigen::MatrixXd expand_matrix(const Eigen::MatrixXd& design,
                              const BasisExpansion& expansion);
StudyData expand_basis(const StudyData& data, const BasisExpansion& expansion);

} // namespace steam
