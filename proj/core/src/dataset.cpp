#include "subreg/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace subreg {

namespace {

constexpr double kWeightSumTol = 1e-10;

}  // namespace

Dataset::Dataset(Matrix X, Vector y) : X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() != y_.size()) {
    throw DimensionMismatch("dataset: X has " + std::to_string(X_.rows()) +
                            " rows but y has " + std::to_string(y_.size()) +
                            " entries");
  }
  if (X_.rows() < 1 || X_.cols() < 1) {
    throw DimensionMismatch("dataset: needs at least one row and one column");
  }
  if (!X_.allFinite() || !y_.allFinite()) {
    throw NonFiniteData("dataset: X or y contains NaN or Inf");
  }
}

ModelSpec::ModelSpec(double alpha_, Vector beta_, double sigma2_)
    : alpha(alpha_), beta(std::move(beta_)), sigma2(sigma2_) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw Error("model spec: sigma2 must be positive and finite");
  }
  if (!std::isfinite(alpha) || !beta.allFinite()) {
    throw NonFiniteData("model spec: parameters must be finite");
  }
}

double compensated_sum(const double* values, Index count) {
  // Kahan-Babuska (Neumaier) variant: the compensation also covers the case
  // where the running sum is smaller than the addend.
  double sum = 0.0;
  double comp = 0.0;
  for (Index i = 0; i < count; ++i) {
    const double v = values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

CenteringStats full_means(const Dataset& d) {
  const Index n = d.n();
  const Index p = d.p();
  CenteringStats stats;
  stats.x_bar.resize(p);
  for (Index j = 0; j < p; ++j) {
    stats.x_bar(j) = compensated_sum(d.X().col(j).data(), n) / double(n);
  }
  stats.y_bar = compensated_sum(d.y().data(), n) / double(n);
  return stats;
}

WeightedStats weighted_means(const Dataset& d, const Vector& w) {
  const Index n = d.n();
  const Index p = d.p();
  if (w.size() != n) {
    throw DimensionMismatch("weighted_means: weight vector length " +
                            std::to_string(w.size()) + " != n = " +
                            std::to_string(n));
  }
  for (Index i = 0; i < n; ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i))) {
      throw NonPositiveWeight("weighted_means: w[" + std::to_string(i) +
                              "] = " + std::to_string(w(i)));
    }
  }
  const double total = compensated_sum(w.data(), n);
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw WeightNormalization("weighted_means: sum of weights is " +
                              std::to_string(total) + ", expected 1");
  }

  WeightedStats stats;
  stats.w = w;
  stats.x_bar_w.resize(p);
  Vector scratch(n);
  for (Index j = 0; j < p; ++j) {
    scratch = d.X().col(j).cwiseProduct(w);
    stats.x_bar_w(j) = compensated_sum(scratch.data(), n);
  }
  scratch = d.y().cwiseProduct(w);
  stats.y_bar_w = compensated_sum(scratch.data(), n);
  scratch = w.cwiseInverse();
  stats.inverse_weight_sum = compensated_sum(scratch.data(), n);
  return stats;
}

Dataset take_rows(const Dataset& d, const IndexList& idx) {
  const Index n = d.n();
  Matrix X(static_cast<Index>(idx.size()), d.p());
  Vector y(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Index i = idx[k];
    if (i < 0 || i >= n) {
      throw IndexOutOfRange("take_rows: index " + std::to_string(i) +
                            " outside [0, " + std::to_string(n) + ")");
    }
    X.row(static_cast<Index>(k)) = d.X().row(i);
    y(static_cast<Index>(k)) = d.y()(i);
  }
  return Dataset(std::move(X), std::move(y));
}

Dataset shift(const Dataset& d, const Vector& x0, double y0) {
  if (x0.size() != d.p()) {
    throw DimensionMismatch("shift: shift point has length " +
                            std::to_string(x0.size()) + " but p = " +
                            std::to_string(d.p()));
  }
  Matrix X = d.X().rowwise() - x0.transpose();
  Vector y = d.y().array() - y0;
  return Dataset(std::move(X), std::move(y));
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("load_csv: cannot open " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &pos);
      } catch (const std::exception&) {
        throw Error("load_csv: bad numeric field '" + field + "' in " + path);
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error("load_csv: ragged row in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2) {
    throw Error("load_csv: need at least one row and two columns in " + path);
  }
  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(rows.front().size()) - 1;
  Matrix X(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) X(i, j) = rows[i][static_cast<std::size_t>(j)];
    y(i) = rows[i].back();
  }
  return Dataset(std::move(X), std::move(y));
}

void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("save_csv: cannot open " + path + " for writing");
  }
  char buf[32];
  for (Index i = 0; i < d.n(); ++i) {
    for (Index j = 0; j < d.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.X()(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", d.y()(i));
    out << buf << '\n';
  }
  if (!out) {
    throw Error("save_csv: write failed for " + path);
  }
}

}  // namespace subreg
