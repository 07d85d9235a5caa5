#include "steam/data_model.hpp"

#include "steam/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace steam {

namespace {

void check_design(const Eigen::MatrixXd& m, Eigen::Index cols, const char* name)
{
  if (m.rows() < 1)
    throw Error(ErrorCode::invalid_argument, std::string("empty cohort: ") + name);
  if (m.cols() != cols)
    throw Error(ErrorCode::invalid_argument,
                std::string("column count mismatch in ") + name);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, 0) != 1.0)
      throw Error(ErrorCode::invalid_argument,
                  std::string("first column must be the intercept in ") + name);
  }
  if (!m.allFinite())
    throw Error(ErrorCode::invalid_argument,
                std::string("non-finite covariate in ") + name);
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows)
{
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::optional<double> parse_number(std::string_view field)
{
  if (field.empty())
    return std::nullopt;
  if (field.front() == '+')
    field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    return std::nullopt;
  return value;
}

int parse_flag(std::string_view field, std::size_t row, const std::string& column)
{
  auto v = parse_number(field);
  if (!v)
    throw DataError(row, column, "expected 0 or 1, got '" + std::string(field) + "'");
  if (*v != 0.0 && *v != 1.0)
    throw DataError(row, column, "value outside {0,1}");
  return static_cast<int>(*v);
}

void write_number(std::ostream& out, double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

} // namespace

StudyData::StudyData(Eigen::MatrixXd labeled_source,
                     Eigen::VectorXd y,
                     Eigen::MatrixXd unlabeled_source,
                     Eigen::MatrixXd target,
                     std::vector<std::string> feature_names)
  : labeled_(std::move(labeled_source))
  , y_(std::move(y))
  , unlabeled_(std::move(unlabeled_source))
  , target_(std::move(target))
  , names_(std::move(feature_names))
{
  const Eigen::Index cols = labeled_.cols();
  if (cols < 1)
    throw Error(ErrorCode::invalid_argument, "design needs an intercept column");
  check_design(labeled_, cols, "labeled source");
  check_design(unlabeled_, cols, "unlabeled source");
  check_design(target_, cols, "target");
  if (y_.size() != labeled_.rows())
    throw Error(ErrorCode::invalid_argument, "outcome length differs from labeled rows");
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (y_[i] != 0.0 && y_[i] != 1.0)
      throw Error(ErrorCode::invalid_argument, "outcome outside {0,1}");
  }
  if (names_.empty()) {
    for (Eigen::Index j = 1; j < cols; ++j)
      names_.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(names_.size()) != cols - 1)
    throw Error(ErrorCode::invalid_argument, "feature name count differs from covariates");
}

Eigen::MatrixXd StudyData::pooled_unlabeled() const
{
  Eigen::MatrixXd pooled(unlabeled_.rows() + target_.rows(), unlabeled_.cols());
  pooled.topRows(unlabeled_.rows()) = unlabeled_;
  pooled.bottomRows(target_.rows()) = target_;
  return pooled;
}

Eigen::VectorXd StudyData::pooled_selection() const
{
  Eigen::VectorXd s(unlabeled_.rows() + target_.rows());
  s.head(unlabeled_.rows()).setOnes();
  s.tail(target_.rows()).setZero();
  return s;
}

StudyData StudyData::subset(const std::vector<Eigen::Index>& labeled_rows,
                            const std::vector<Eigen::Index>& unlabeled_rows,
                            const std::vector<Eigen::Index>& target_rows) const
{
  Eigen::VectorXd y(static_cast<Eigen::Index>(labeled_rows.size()));
  for (std::size_t i = 0; i < labeled_rows.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = y_[labeled_rows[i]];
  return StudyData(take_rows(labeled_, labeled_rows), std::move(y),
                   take_rows(unlabeled_, unlabeled_rows),
                   take_rows(target_, target_rows), names_);
}

ValidationLabels::ValidationLabels(std::vector<Eigen::Index> target_rows, std::vector<int> y)
  : rows_(std::move(target_rows)), y_(std::move(y))
{
  if (rows_.size() != y_.size())
    throw Error(ErrorCode::invalid_argument, "validation rows and labels differ in length");
  for (int v : y_) {
    if (v != 0 && v != 1)
      throw Error(ErrorCode::invalid_argument, "validation label outside {0,1}");
  }
}

ValidationLabels ValidationLabels::head(std::size_t count) const
{
  count = std::min(count, rows_.size());
  return ValidationLabels({rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(count)},
                          {y_.begin(), y_.begin() + static_cast<std::ptrdiff_t>(count)});
}

LoadedStudy load_study_csv(const std::filesystem::path& path, const ColumnRoles& roles)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::io, "cannot open " + path.string());
  return parse_study_csv(in, roles);
}

LoadedStudy parse_study_csv(std::istream& in, const ColumnRoles& roles)
{
  std::string line;
  if (!std::getline(in, line))
    throw DataError(1, "", "missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);

  std::vector<std::string> header;
  for (auto f : split(line))
    header.emplace_back(f);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!index.emplace(header[j], j).second)
      throw DataError(1, header[j], "duplicate column");
  }
  auto require = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end())
      throw DataError(1, name, "required column missing");
    return it->second;
  };
  const std::size_t s_idx = require(roles.s_col);
  const std::size_t l_idx = require(roles.label_col);
  const std::size_t y_idx = require(roles.y_col);

  std::vector<std::string> features = roles.features;
  if (features.empty()) {
    for (const auto& h : header) {
      if (h != roles.s_col && h != roles.label_col && h != roles.y_col)
        features.push_back(h);
    }
  }
  if (features.empty())
    throw DataError(1, "", "no covariate columns");
  std::vector<std::size_t> f_idx;
  for (const auto& f : features)
    f_idx.push_back(require(f));

  const std::size_t cols = features.size() + 1;
  std::vector<double> lab, unl, tgt, y;
  std::vector<Eigen::Index> val_rows;
  std::vector<int> val_y;
  std::size_t row = 1;
  std::vector<double> buf(cols);
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty())
      continue;
    auto fields = split(line);
    if (fields.size() != header.size())
      throw DataError(row, "", "expected " + std::to_string(header.size()) +
                                   " fields, found " + std::to_string(fields.size()));
    const int s = parse_flag(fields[s_idx], row, roles.s_col);
    const int labeled = parse_flag(fields[l_idx], row, roles.label_col);
    buf[0] = 1.0;
    for (std::size_t j = 0; j < f_idx.size(); ++j) {
      auto v = parse_number(fields[f_idx[j]]);
      if (!v)
        throw DataError(row, features[j], fields[f_idx[j]].empty()
                                            ? "missing covariate"
                                            : "non-numeric covariate '" +
                                                std::string(fields[f_idx[j]]) + "'");
      if (!std::isfinite(*v))
        throw DataError(row, features[j], "non-finite covariate");
      buf[j + 1] = *v;
    }
    const auto y_field = fields[y_idx];
    if (s == 1 && labeled == 1) {
      if (y_field.empty())
        throw DataError(row, roles.y_col, "missing outcome");
      y.push_back(parse_flag(y_field, row, roles.y_col));
      lab.insert(lab.end(), buf.begin(), buf.end());
    } else if (s == 1) {
      unl.insert(unl.end(), buf.begin(), buf.end());
    } else {
      if (!y_field.empty()) {
        val_rows.push_back(static_cast<Eigen::Index>(tgt.size() / cols));
        val_y.push_back(parse_flag(y_field, row, roles.y_col));
      }
      tgt.insert(tgt.end(), buf.begin(), buf.end());
    }
  }

  auto to_matrix = [cols](const std::vector<double>& flat, const char* cohort) {
    if (flat.empty())
      throw DataError(0, "", std::string("empty cohort: ") + cohort);
    const auto rows = static_cast<Eigen::Index>(flat.size() / cols);
    return Eigen::MatrixXd(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                          Eigen::RowMajor>>(
      flat.data(), rows, static_cast<Eigen::Index>(cols)));
  };
  Eigen::MatrixXd labeled = to_matrix(lab, "labeled source");
  Eigen::MatrixXd unlabeled = to_matrix(unl, "unlabeled source");
  Eigen::MatrixXd target = to_matrix(tgt, "target");
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));

  LoadedStudy out{StudyData(std::move(labeled), std::move(yv), std::move(unlabeled),
                            std::move(target), features),
                  std::nullopt};
  if (!val_rows.empty())
    out.validation.emplace(std::move(val_rows), std::move(val_y));
  return out;
}

void write_study_csv(std::ostream& out, const StudyData& data, const ValidationLabels* validation)
{
  out << "s,labeled,y";
  for (const auto& name : data.feature_names())
    out << ',' << name;
  out << '\n';

  auto write_row = [&](const Eigen::MatrixXd& m, Eigen::Index i) {
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
      out << ',';
      write_number(out, m(i, j));
    }
    out << '\n';
  };
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << "1,1," << static_cast<int>(data.y()[i]);
    write_row(data.labeled_source(), i);
  }
  for (Eigen::Index i = 0; i < data.n_unlabeled(); ++i) {
    out << "1,0,";
    write_row(data.unlabeled_source(), i);
  }
  std::vector<int> target_y(static_cast<std::size_t>(data.n_target()), -1);
  if (validation) {
    for (std::size_t k = 0; k < validation->size(); ++k)
      target_y[static_cast<std::size_t>(validation->target_rows()[k])] = validation->y()[k];
  }
  for (Eigen::Index i = 0; i < data.n_target(); ++i) {
    out << "0,0,";
    if (target_y[static_cast<std::size_t>(i)] >= 0)
      out << target_y[static_cast<std::size_t>(i)];
    write_row(data.target(), i);
  }
}

void save_study_csv(const std::filesystem::path& path, const StudyData& data,
                    const ValidationLabels* validation)
{
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::io, "cannot write " + path.string());
  write_study_csv(out, data, validation);
  if (!out)
    throw Error(ErrorCode::io, "write failed: " + path.string());
}

bool operator==(const BasisTerm& a, const BasisTerm& b)
{
  return a.kind == b.kind && a.first == b.first && a.second == b.second;
}

BasisExpansion BasisExpansion::interactions(const std::vector<std::pair<int, int>>& pairs)
{
  BasisExpansion e;
  for (auto [a, b] : pairs)
    e.terms.push_back(BasisTerm::interaction(a, b));
  return e;
}

std::size_t BasisExpansion::added_columns() const
{
  return static_cast<std::size_t>(std::count_if(terms.begin(), terms.end(), [](const BasisTerm& t) {
    return t.kind == BasisTerm::Kind::interaction;
  }));
}

void BasisExpansion::validate(Eigen::Index p) const
{
  for (const auto& t : terms) {
    if (t.first < 1 || t.first > p)
      throw Error(ErrorCode::invalid_argument,
                  "basis index " + std::to_string(t.first) + " out of range [1," +
                    std::to_string(p) + "]");
    if (t.kind == BasisTerm::Kind::interaction) {
      if (t.second < 1 || t.second > p)
        throw Error(ErrorCode::invalid_argument,
                    "basis index " + std::to_string(t.second) + " out of range [1," +
                      std::to_string(p) + "]");
      if (t.first == t.second)
        throw Error(ErrorCode::invalid_argument, "interaction indices must differ");
    }
  }
}

bool BasisExpansion::operator==(const BasisExpansion& other) const
{
  return terms == other.terms;
}

Eigen::MatrixXd expand_matrix(const Eigen::MatrixXd& design, const BasisExpansion& expansion)
{
  expansion.validate(design.cols() - 1);
  Eigen::MatrixXd out(design.rows(), design.cols() + static_cast<Eigen::Index>(expansion.added_columns()));
  out.leftCols(design.cols()) = design;
  Eigen::Index col = design.cols();
  for (const auto& t : expansion.terms) {
    if (t.kind != BasisTerm::Kind::interaction)
      continue;
    out.col(col++) = design.col(t.first).cwiseProduct(design.col(t.second));
  }
  return out;
}

StudyData expand_basis(const StudyData& data, const BasisExpansion& expansion)
{
  if (expansion.added_columns() == 0) {
    expansion.validate(data.p());
    return data;
  }
  std::vector<std::string> names = data.feature_names();
  for (const auto& t : expansion.terms) {
    if (t.kind == BasisTerm::Kind::interaction)
      names.push_back(data.feature_names()[static_cast<std::size_t>(t.first - 1)] + "*" +
                      data.feature_names()[static_cast<std::size_t>(t.second - 1)]);
  }
  return StudyData(expand_matrix(data.labeled_source(), expansion), data.y(),
                   expand_matrix(data.unlabeled_source(), expansion),
                   expand_matrix(data.target(), expansion), std::move(names));
}

} // namespace steam
