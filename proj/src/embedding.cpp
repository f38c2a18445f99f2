#include "gdvalign/embedding.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "gdvalign/errors.h"

namespace gdvalign {

namespace {

Eigen::MatrixXd to_matrix(const GdvMatrix &a, const GdvMatrix &b, bool log_transform) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(a.size() + b.size()), Eigen::Index(kNumOrbits));
  Eigen::Index r = 0;
  for (const GdvMatrix *m : {&a, &b})
    for (const Gdv &row : *m) {
      for (std::size_t k = 0; k < kNumOrbits; ++k) {
        double v = static_cast<double>(row[k]);
        x(r, Eigen::Index(k)) = log_transform ? std::log1p(v) : v;
      }
      ++r;
    }
  return x;
}

}  // namespace

PcaResult pca_reduce(const GdvMatrix &gdv1, const GdvMatrix &gdv2, const PcaOptions &options) {
  if (gdv1.size() + gdv2.size() < 3)
    throw ParameterError("PCA needs at least 3 rows in total");
  if (options.min_components < 1 || options.min_components > int(kNumOrbits))
    throw ParameterError("min_components must be within [1, 15]");
  if (!(options.variance_threshold > 0.0 && options.variance_threshold <= 1.0))
    throw ParameterError("variance threshold must be within (0, 1]");

  Eigen::MatrixXd x = to_matrix(gdv1, gdv2, options.log_transform);
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::MatrixXd cov = (x.transpose() * x) / double(x.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw InternalError("eigendecomposition failed");

  // Eigen returns ascending eigenvalues; reorder to descending.
  const Eigen::Index d = cov.rows();
  std::vector<double> eig(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i)
    eig[std::size_t(i)] = std::max(0.0, solver.eigenvalues()(d - 1 - i));
  double total = 0.0;
  for (double e : eig) total += e;
  // Relative to the raw scale so that rounding noise on constant data counts as zero.
  const double scale = std::max(1.0, mean.cwiseAbs().maxCoeff());
  if (total <= 1e-20 * scale * scale)
    throw DegenerateInputError(
        "all GDVs are identical (zero variance); use the raw GDVs instead of PCA");

  int r = options.min_components;
  double captured = 0.0;
  for (int i = 0; i < r; ++i) captured += eig[std::size_t(i)];
  while (r < d && captured / total < options.variance_threshold - 1e-12) {
    captured += eig[std::size_t(r)];
    ++r;
  }

  Eigen::MatrixXd basis(d, r);
  for (int i = 0; i < r; ++i) basis.col(i) = solver.eigenvectors().col(d - 1 - i);
  Eigen::MatrixXd projected = x * basis;

  PcaResult out;
  const auto n1 = static_cast<Eigen::Index>(gdv1.size());
  out.first.rows = projected.topRows(n1);
  out.second.rows = projected.bottomRows(projected.rows() - n1);
  out.components = r;
  out.explained_variance = std::min(1.0, captured / total);
  out.eigenvalues = std::move(eig);
  return out;
}

SimilarityMatrix::SimilarityMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  for (std::size_t i = 0; i < rows; ++i) row_labels_.push_back(std::to_string(i));
  for (std::size_t j = 0; j < cols; ++j) col_labels_.push_back(std::to_string(j));
}

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> row_labels,
                                   std::vector<std::string> col_labels, double fill)
    : rows_(row_labels.size()),
      cols_(col_labels.size()),
      values_(rows_ * cols_, fill),
      row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)) {}

void SimilarityMatrix::set_labels(std::vector<std::string> row_labels,
                                  std::vector<std::string> col_labels) {
  if (row_labels.size() != rows_ || col_labels.size() != cols_)
    throw ParameterError("label table sizes do not match similarity matrix");
  row_labels_ = std::move(row_labels);
  col_labels_ = std::move(col_labels);
}

SimilarityMatrix SimilarityMatrix::transposed() const {
  SimilarityMatrix t(col_labels_, row_labels_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SimilarityMatrix cosine_similarity_matrix(const FeatureMatrix &f1, const FeatureMatrix &f2) {
  if (f1.dim() != f2.dim())
    throw ParameterError("feature dimensions differ: " + std::to_string(f1.dim()) + " vs " +
                         std::to_string(f2.dim()));
  auto normalized = [](const Eigen::MatrixXd &m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      double norm = out.row(i).norm();
      if (norm > 0.0) out.row(i) /= norm;
      else out.row(i).setZero();
    }
    return out;
  };
  Eigen::MatrixXd cos = normalized(f1.rows) * normalized(f2.rows).transpose();

  SimilarityMatrix sim(static_cast<std::size_t>(cos.rows()), static_cast<std::size_t>(cos.cols()));
  for (Eigen::Index i = 0; i < cos.rows(); ++i)
    for (Eigen::Index j = 0; j < cos.cols(); ++j)
      sim(std::size_t(i), std::size_t(j)) = std::clamp((cos(i, j) + 1.0) / 2.0, 0.0, 1.0);
  return sim;
}

SimilarityMatrix graphlet_similarity(const LabeledGdv &a, const LabeledGdv &b,
                                     const PcaOptions &options, PcaResult *pca_out) {
  PcaResult pca = pca_reduce(a.gdv, b.gdv, options);
  SimilarityMatrix sim = cosine_similarity_matrix(pca.first, pca.second);
  sim.set_labels(a.labels, b.labels);
  if (pca_out) *pca_out = std::move(pca);
  return sim;
}

namespace {

using LabelIndex = std::unordered_map<std::string, std::size_t>;

LabelIndex index_of(const std::vector<std::string> &labels) {
  LabelIndex idx;
  for (std::size_t i = 0; i < labels.size(); ++i) idx.emplace(labels[i], i);
  return idx;
}

struct Triple {
  std::size_t row, col;
  double value;
};

}  // namespace

SimilarityMatrix read_similarity(std::istream &in, const std::vector<std::string> *row_labels,
                                 const std::vector<std::string> *col_labels) {
  std::vector<std::string> rows_seen, cols_seen;
  LabelIndex row_idx = row_labels ? index_of(*row_labels) : LabelIndex{};
  LabelIndex col_idx = col_labels ? index_of(*col_labels) : LabelIndex{};

  auto resolve = [](LabelIndex &idx, std::vector<std::string> &seen, bool fixed,
                    const std::string &label, std::size_t line_no) -> std::size_t {
    auto it = idx.find(label);
    if (it != idx.end()) return it->second;
    if (fixed) throw FormatError("unknown node label '" + label + "'", line_no);
    idx.emplace(label, seen.size());
    seen.push_back(label);
    return seen.size() - 1;
  };

  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::string a, b, v, extra;
    if (!(row >> a >> b >> v)) throw FormatError("expected 'label1 label2 value'", line_no);
    if (row >> extra) throw FormatError("more than three columns", line_no);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw FormatError("similarity '" + v + "' is not a number", line_no);
    if (!(value >= 0.0 && value <= 1.0))
      throw FormatError("similarity " + v + " outside [0, 1]", line_no);
    std::size_t i = resolve(row_idx, rows_seen, row_labels != nullptr, a, line_no);
    std::size_t j = resolve(col_idx, cols_seen, col_labels != nullptr, b, line_no);
    triples.push_back({i, j, value});
  }

  SimilarityMatrix sim(row_labels ? *row_labels : rows_seen, col_labels ? *col_labels : cols_seen);
  for (const Triple &t : triples) sim(t.row, t.col) = t.value;
  return sim;
}

SimilarityMatrix read_similarity(std::string_view text, const std::vector<std::string> *row_labels,
                                 const std::vector<std::string> *col_labels) {
  std::istringstream in{std::string(text)};
  return read_similarity(in, row_labels, col_labels);
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_similarity(const SimilarityMatrix &sim, std::ostream &out) {
  for (std::size_t i = 0; i < sim.rows(); ++i)
    for (std::size_t j = 0; j < sim.cols(); ++j)
      out << sim.row_labels()[i] << ' ' << sim.col_labels()[j] << ' ' << format_double(sim(i, j))
          << '\n';
}

}  // namespace gdvalign
