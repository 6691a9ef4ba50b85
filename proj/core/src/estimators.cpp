#include "subreg/estimators.hpp"

#include <cmath>
#include <limits>

namespace subreg {

namespace {

// Relative pivot tolerance for all rank checks: an R diagonal entry counts
// toward the rank only if it exceeds max(rows, cols) * eps times the largest
// diagonal entry.
double pivot_threshold(Index rows, Index cols) {
  return double(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

// QR solve with rank check. Returns the least-squares solution of A x = b.
Vector solve_full_rank(const Matrix& A, const Vector& b) {
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(pivot_threshold(A.rows(), A.cols()));
  const Index rank = qr.rank();
  if (rank < A.cols()) {
    throw RankDeficient(rank, A.cols());
  }
  return qr.solve(b);
}

void check_weights(const Vector& w, Index n) {
  if (w.size() != n) {
    throw DimensionMismatch("weights: length " + std::to_string(w.size()) +
                            " != number of rows " + std::to_string(n));
  }
  for (Index i = 0; i < n; ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i))) {
      throw NonPositiveWeight("weights: w[" + std::to_string(i) + "] = " +
                              std::to_string(w(i)));
    }
  }
}

Matrix with_intercept_column(const Matrix& X) {
  Matrix Z(X.rows(), X.cols() + 1);
  Z.col(0).setOnes();
  Z.rightCols(X.cols()) = X;
  return Z;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kFullOls: return "full_ols";
    case Variant::kSubOlsWi: return "sub_ols_wi";
    case Variant::kSubOlsWoi: return "sub_ols_woi";
    case Variant::kSubWlsWi: return "sub_wls_wi";
    case Variant::kSubWlsWoiPlain: return "sub_wls_woi_plain";
    case Variant::kSubWlsWoiWeighted: return "sub_wls_woi_weighted";
  }
  return "unknown";
}

EstimatorOutput ols_with_intercept(const Dataset& d, Variant tag) {
  const Vector theta = solve_full_rank(with_intercept_column(d.X()), d.y());
  EstimatorOutput out;
  out.alpha = theta(0);
  out.beta = theta.tail(d.p());
  out.variant = tag;
  return out;
}

EstimatorOutput ols_slope_no_intercept(const Dataset& d_shifted) {
  EstimatorOutput out;
  out.alpha = std::nullopt;
  out.beta = solve_full_rank(d_shifted.X(), d_shifted.y());
  out.variant = Variant::kSubOlsWoi;
  return out;
}

double recover_intercept(const CenteringStats& stats, const Vector& beta) {
  if (beta.size() != stats.x_bar.size()) {
    throw DimensionMismatch("recover_intercept: beta length " +
                            std::to_string(beta.size()) + " != p = " +
                            std::to_string(stats.x_bar.size()));
  }
  return stats.y_bar - stats.x_bar.dot(beta);
}

double recover_intercept(const WeightedStats& stats, const Vector& beta) {
  if (beta.size() != stats.x_bar_w.size()) {
    throw DimensionMismatch("recover_intercept: beta length " +
                            std::to_string(beta.size()) + " != p = " +
                            std::to_string(stats.x_bar_w.size()));
  }
  return stats.y_bar_w - stats.x_bar_w.dot(beta);
}

EstimatorOutput wls_with_intercept(const Dataset& d, const Vector& w_star) {
  check_weights(w_star, d.n());
  const Vector s = w_star.cwiseSqrt();
  const Matrix Zw = s.asDiagonal() * with_intercept_column(d.X());
  const Vector yw = s.cwiseProduct(d.y());
  const Vector theta = solve_full_rank(Zw, yw);
  EstimatorOutput out;
  out.alpha = theta(0);
  out.beta = theta.tail(d.p());
  out.variant = Variant::kSubWlsWi;
  return out;
}

EstimatorOutput wls_slope_no_intercept(const Dataset& d_shifted,
                                       const Vector& w_star, Variant tag) {
  if (tag != Variant::kSubWlsWoiPlain && tag != Variant::kSubWlsWoiWeighted) {
    throw UnsupportedVariant(
        "wls_slope_no_intercept: tag must record the applied shift");
  }
  check_weights(w_star, d_shifted.n());
  const Vector s = w_star.cwiseSqrt();
  const Matrix Xw = s.asDiagonal() * d_shifted.X();
  const Vector yw = s.cwiseProduct(d_shifted.y());
  EstimatorOutput out;
  out.alpha = std::nullopt;
  out.beta = solve_full_rank(Xw, yw);
  out.variant = tag;
  return out;
}

double estimate_sigma2(const Dataset& d) {
  const Index dof = d.n() - d.p() - 1;
  if (dof < 1) {
    throw Error("estimate_sigma2: need n >= p + 2 rows, got n = " +
                std::to_string(d.n()) + ", p = " + std::to_string(d.p()));
  }
  const EstimatorOutput fit = ols_with_intercept(d, Variant::kFullOls);
  const Vector resid =
      d.y().array() - *fit.alpha - (d.X() * fit.beta).array();
  return resid.squaredNorm() / double(dof);
}

}  // namespace subreg
