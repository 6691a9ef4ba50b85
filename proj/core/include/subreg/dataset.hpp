#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "subreg/errors.hpp"

namespace subreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

// Regression data: covariate rows X (n x p) and responses y (n). Immutable
// after construction; all operations below return new values. Row gathers
// (subsamples) are Datasets too, so a Dataset may be smaller than what a
// full model fit needs; operations that require residual degrees of freedom
// check n >= p + 2 themselves.
class Dataset {
 public:
  Dataset(Matrix X, Vector y);

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }

 private:
  Matrix X_;
  Vector y_;
};

// Plain column means of X and mean of y.
struct CenteringStats {
  Vector x_bar;
  double y_bar = 0.0;
};

// Weighted means under a probability vector w (w_i > 0, sum w_i = 1),
// together with the inverse-weight sum C = sum_i 1/w_i that scales the
// asymptotic variances.
struct WeightedStats {
  Vector w;
  Vector x_bar_w;
  double y_bar_w = 0.0;
  double inverse_weight_sum = 0.0;
};

// True data-generating parameters: intercept, slopes, error variance.
struct ModelSpec {
  double alpha = 0.0;
  Vector beta;
  double sigma2 = 1.0;

  ModelSpec(double alpha_, Vector beta_, double sigma2_);
};

CenteringStats full_means(const Dataset& d);

// Weighted means. Requires every w_i > 0 and sum w_i = 1 within 1e-10.
WeightedStats weighted_means(const Dataset& d, const Vector& w);

// Row gather. Duplicate indices are allowed (with-replacement draws produce
// them); every index must lie in [0, n).
Dataset take_rows(const Dataset& d, const IndexList& idx);

// Subtracts x0 from every covariate row and y0 from every response.
Dataset shift(const Dataset& d, const Vector& x0, double y0);

// Headerless CSV of n rows x (p+1) columns: covariates then response,
// '.' decimal, comma separator.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& d, const std::string& path);

// Compensated (Kahan-Babuska) sum; keeps the means accurate enough for the
// 1e-10 identity checks at n = 1e5.
double compensated_sum(const double* values, Index count);

}  // namespace subreg
