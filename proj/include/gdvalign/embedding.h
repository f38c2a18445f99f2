#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gdvalign/graphlets.h"

namespace gdvalign {

enum class FeatureSource { kGraphletPca, kExternal };

struct FeatureMatrix {
  Eigen::MatrixXd rows;  // one node per row
  FeatureSource source = FeatureSource::kGraphletPca;

  Eigen::Index dim() const { return rows.cols(); }
};

struct PcaOptions {
  double variance_threshold = 0.90;
  int min_components = 2;
  bool log_transform = false;  // apply log(1 + count) before centering
};

struct PcaResult {
  FeatureMatrix first;
  FeatureMatrix second;
  int components = 0;
  double explained_variance = 0.0;  // fraction captured by the kept components
  std::vector<double> eigenvalues;  // descending, all 15
};

// Joint PCA over the stacked rows of both matrices; both are projected onto
// the same leading components. Keeps the smallest r >= min_components whose
// cumulative explained variance reaches the threshold. Throws
// DegenerateInputError when every row is identical.
PcaResult pca_reduce(const GdvMatrix &gdv1, const GdvMatrix &gdv2,
                     const PcaOptions &options = {});

// Dense |V1| x |V2| matrix of similarities in [0, 1].
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  SimilarityMatrix(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                   double fill = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  double &operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }

  const std::vector<std::string> &row_labels() const noexcept { return row_labels_; }
  const std::vector<std::string> &col_labels() const noexcept { return col_labels_; }
  void set_labels(std::vector<std::string> row_labels, std::vector<std::string> col_labels);

  SimilarityMatrix transposed() const;

  friend bool operator==(const SimilarityMatrix &, const SimilarityMatrix &) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
};

// (cos(f1[u], f2[v]) + 1) / 2; zero vectors have cosine 0 against anything.
SimilarityMatrix cosine_similarity_matrix(const FeatureMatrix &f1, const FeatureMatrix &f2);

// GDV -> PCA -> cosine, labelled with the given label tables.
SimilarityMatrix graphlet_similarity(const LabeledGdv &a, const LabeledGdv &b,
                                     const PcaOptions &options = {},
                                     PcaResult *pca_out = nullptr);

// Three columns per line: "label1 label2 value". When label tables are given,
// labels must belong to them; otherwise tables are built in first-appearance
// order. Missing pairs are 0. Values outside [0, 1] raise FormatError.
SimilarityMatrix read_similarity(std::istream &in,
                                 const std::vector<std::string> *row_labels = nullptr,
                                 const std::vector<std::string> *col_labels = nullptr);
SimilarityMatrix read_similarity(std::string_view text,
                                 const std::vector<std::string> *row_labels = nullptr,
                                 const std::vector<std::string> *col_labels = nullptr);

// All pairs in row-major label order, shortest round-trip decimal values.
void write_similarity(const SimilarityMatrix &sim, std::ostream &out);

std::string format_double(double value);

}  // namespace gdvalign
