#include "fixtures.hpp"
#include "steam/data_model.hpp"
#include "steam/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace steam;

namespace {

LoadedStudy parse(const std::string& text, const ColumnRoles& roles = {})
{
  std::istringstream in(text);
  return parse_study_csv(in, roles);
}

const char* kStudy = "s,labeled,y,a,b\n"
                     "1,1,1,0.5,1\n"
                     "1,1,0,-0.5,2\n"
                     "1,0,,0.25,3\n"
                     "0,0,,1.5,4\n"
                     "0,0,1,2.5,5\n";

template <class F>
DataError data_error(F&& f)
{
  try {
    f();
  } catch (const DataError& e) {
    return e;
  }
  FAIL("no DataError thrown");
  return DataError(0, "", "");
}

} // namespace

TEST_CASE("CSV rows are split into the three cohorts")
{
  const LoadedStudy s = parse(kStudy);
  CHECK(s.data.n() == 2);
  CHECK(s.data.n_unlabeled() == 1);
  CHECK(s.data.n_target() == 2);
  CHECK(s.data.p() == 2);
  CHECK(s.data.labeled_source()(0, 0) == 1.0);
  CHECK(s.data.labeled_source()(1, 1) == -0.5);
  CHECK(s.data.y()[0] == 1.0);
  REQUIRE(s.validation);
  CHECK(s.validation->target_rows() == std::vector<Eigen::Index>{1});
  CHECK(s.validation->y() == std::vector<int>{1});
  CHECK(s.data.pooled_selection() == Eigen::Vector3d(1.0, 0.0, 0.0));
}

TEST_CASE("feature selection and renamed role columns")
{
  ColumnRoles roles;
  roles.s_col = "src";
  roles.label_col = "lab";
  roles.y_col = "out";
  roles.features = {"b"};
  const LoadedStudy s = parse("b,out,src,lab,a\n2,1,1,1,9\n3,0,1,1,9\n4,,1,0,9\n5,,0,0,9\n",
                              roles);
  CHECK(s.data.p() == 1);
  CHECK(s.data.labeled_source()(1, 1) == 3.0);
  CHECK(s.data.feature_names() == std::vector<std::string>{"b"});
}

TEST_CASE("malformed rows name their row and column")
{
  const auto missing = data_error([] { parse("s,labeled,y,a\n1,1,,0.5\n0,0,,1\n1,0,,1\n"); });
  CHECK(missing.row() == 2);
  CHECK(missing.column() == "y");
  CHECK(std::string(missing.what()).find("missing outcome") != std::string::npos);

  const auto range = data_error([] { parse("s,labeled,y,a\n1,1,2,0.5\n"); });
  CHECK(range.column() == "y");

  const auto text = data_error([] { parse("s,labeled,y,a\n1,1,1,0.5\n1,1,0,abc\n"); });
  CHECK(text.row() == 3);
  CHECK(text.column() == "a");

  CHECK_THROWS_AS(parse("s,labeled,y,a\n1,1,1,0.5\n1,0,,1\n"), DataError);
  CHECK_THROWS_AS(parse("s,labeled,a\n1,1,0.5\n"), DataError);
}

TEST_CASE("save then load is exact")
{
  const SimDataset ds = testing::small_study(3, 300, 50);
  std::ostringstream out;
  write_study_csv(out, ds.data, &ds.validation);
  std::istringstream in(out.str());
  const LoadedStudy back = parse_study_csv(in);
  CHECK(back.data.labeled_source() == ds.data.labeled_source());
  CHECK(back.data.unlabeled_source() == ds.data.unlabeled_source());
  CHECK(back.data.target() == ds.data.target());
  CHECK(back.data.y() == ds.data.y());
  REQUIRE(back.validation);
  CHECK(back.validation->y() == ds.validation.y());
  CHECK(back.validation->target_rows() == ds.validation.target_rows());
}

TEST_CASE("basis expansion appends interaction products")
{
  Eigen::MatrixXd d(2, 4);
  d << 1, 2, 3, 4, 1, -1, 0.5, 2;
  const auto basis = BasisExpansion::interactions({{1, 2}, {2, 3}});
  const Eigen::MatrixXd z = expand_matrix(d, basis);
  REQUIRE(z.cols() == 6);
  CHECK(z(0, 4) == 6.0);
  CHECK(z(0, 5) == 12.0);
  CHECK(z(1, 4) == -0.5);
  CHECK(basis.added_columns() == 2);
  CHECK_THROWS_AS(BasisExpansion::interactions({{1, 4}}).validate(3), Error);
  CHECK_THROWS_AS(BasisExpansion::interactions({{2, 2}}).validate(3), Error);
}

TEST_CASE("StudyData rejects inconsistent inputs")
{
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 2);
  CHECK_THROWS_AS(StudyData(x, Eigen::VectorXd::Ones(2), x, x, {"a"}), Error);
  CHECK_THROWS_AS(StudyData(x, Eigen::Vector3d(0, 1, 2), x, x, {"a"}), Error);
  CHECK_THROWS_AS(StudyData(x, Eigen::Vector3d(0, 1, 1), Eigen::MatrixXd(0, 2), x, {"a"}), Error);
}

TEST_CASE("validation labels head")
{
  const ValidationLabels v({4, 7, 9}, {1, 0, 1});
  const ValidationLabels h = v.head(2);
  CHECK(h.size() == 2);
  CHECK(h.target_rows() == std::vector<Eigen::Index>{4, 7});
  CHECK_THROWS_AS(ValidationLabels({1}, {2}), Error);
}
