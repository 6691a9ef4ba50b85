#include "subreg/variance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_set>

namespace subreg {

namespace {

constexpr double kDegenerateTol = 1e-12;
constexpr double kIdentityThreshold = 1e-10;

double pivot_threshold(Index rows, Index cols) {
  return double(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

// Moore-Penrose pseudoinverse (A'A)^-1 A' of a full-column-rank matrix,
// computed from a column-pivoted QR. Throws RankDeficient otherwise.
Matrix left_pseudoinverse(const Matrix& A) {
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(pivot_threshold(A.rows(), A.cols()));
  const Index rank = qr.rank();
  if (rank < A.cols()) {
    throw RankDeficient(rank, A.cols());
  }
  return qr.solve(Matrix::Identity(A.rows(), A.rows()));
}

void require_rank(const Matrix& A) {
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(pivot_threshold(A.rows(), A.cols()));
  const Index rank = qr.rank();
  if (rank < A.cols()) {
    throw RankDeficient(rank, A.cols());
  }
}

void check_indices(const IndexList& idx, Index n) {
  for (const Index i : idx) {
    if (i < 0 || i >= n) {
      throw IndexOutOfRange("selection index " + std::to_string(i) +
                            " outside [0, " + std::to_string(n) + ")");
    }
  }
}

void check_distinct(const IndexList& idx) {
  std::unordered_set<Index> seen(idx.begin(), idx.end());
  if (seen.size() != idx.size()) {
    throw Error("selection must consist of distinct row indices");
  }
}

Matrix gather_rows(const Matrix& X, const IndexList& idx) {
  Matrix out(static_cast<Index>(idx.size()), X.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.row(static_cast<Index>(k)) = X.row(idx[k]);
  }
  return out;
}

Vector column_means(const Matrix& X) {
  Vector m(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    m(j) = compensated_sum(X.col(j).data(), X.rows()) / double(X.rows());
  }
  return m;
}

Matrix symmetrized(Matrix m) { return 0.5 * (m + m.transpose()); }

Matrix intercept_augmented(const Matrix& X) {
  Matrix Z(X.rows(), X.cols() + 1);
  Z.col(0).setOnes();
  Z.rightCols(X.cols()) = X;
  return Z;
}

// Scatters the columns of a per-selection map into full-data columns.
// Duplicate indices accumulate, matching S' composition exactly.
Matrix scatter_columns(const Matrix& per_selection, const IndexList& idx,
                       Index n) {
  Matrix out = Matrix::Zero(per_selection.rows(), n);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.col(idx[k]) += per_selection.col(static_cast<Index>(k));
  }
  return out;
}

// Post-composes a map with the centering projector I - J: subtracts the row
// mean of L from every column, so the map sees mean-shifted responses.
Matrix center_columns(const Matrix& L) {
  const Vector row_sums = L.rowwise().sum();
  return L - row_sums * Matrix::Constant(1, L.cols(), 1.0 / double(L.cols()));
}

double relative_residual(const Matrix& lhs, const Matrix& rhs,
                         const Matrix& scale_ref) {
  const double scale =
      std::numeric_limits<double>::epsilon() + scale_ref.norm();
  return (lhs - rhs).norm() / scale;
}

}  // namespace

LinearEstimatorMap estimator_map(Variant variant, const Matrix& X,
                                 const IndexList& idx, MapPart part) {
  const Index n = X.rows();
  const Index p = X.cols();
  check_indices(idx, n);

  LinearEstimatorMap map;
  map.variant = variant;
  map.part = part;

  switch (variant) {
    case Variant::kFullOls:
    case Variant::kSubOlsWi: {
      Matrix L;
      if (variant == Variant::kFullOls) {
        L = left_pseudoinverse(intercept_augmented(X));
      } else {
        const Matrix Zs = intercept_augmented(gather_rows(X, idx));
        L = scatter_columns(left_pseudoinverse(Zs), idx, n);
      }
      switch (part) {
        case MapPart::kWhole: map.L = std::move(L); break;
        case MapPart::kSlope: map.L = L.bottomRows(p); break;
        case MapPart::kIntercept: map.L = L.topRows(1); break;
      }
      return map;
    }
    case Variant::kSubOlsWoi: {
      const Vector x_bar = column_means(X);
      Matrix Xs;
      IndexList all;
      const IndexList* sel = &idx;
      if (idx.empty()) {
        // Empty selection means "all rows".
        all.resize(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
        sel = &all;
      }
      Xs = gather_rows(X, *sel);
      Xs.rowwise() -= x_bar.transpose();
      // Slope map: pseudoinverse of the shifted selection, composed with
      // selection scatter and the full-data centering projector.
      const Matrix L =
          center_columns(scatter_columns(left_pseudoinverse(Xs), *sel, n));
      switch (part) {
        case MapPart::kWhole:
        case MapPart::kSlope:
          map.L = L;
          break;
        case MapPart::kIntercept:
          // Recovered intercept y_bar - x_bar' beta as a single row.
          map.L = Matrix::Constant(1, n, 1.0 / double(n)) -
                  x_bar.transpose() * L;
          break;
      }
      return map;
    }
    case Variant::kSubWlsWi:
    case Variant::kSubWlsWoiPlain:
    case Variant::kSubWlsWoiWeighted:
      throw UnsupportedVariant(
          "estimator_map: WLS estimators of random subsamples have no exact "
          "finite-sample map");
  }
  throw UnsupportedVariant("estimator_map: unknown variant");
}

CovMatrix exact_variance(const LinearEstimatorMap& map, double sigma2) {
  return CovMatrix{symmetrized(sigma2 * (map.L * map.L.transpose()))};
}

SlopeVarianceGap slope_variance_gap(const Matrix& X, const IndexList& idx,
                                    double sigma2) {
  const Index n = X.rows();
  const Index p = X.cols();
  const Index r = static_cast<Index>(idx.size());
  check_indices(idx, n);
  check_distinct(idx);
  if (r < p + 2) {
    throw SubsampleTooSmall("slope_variance_gap: r = " + std::to_string(r) +
                            " < p + 2 = " + std::to_string(p + 2));
  }

  const Vector x_bar = column_means(X);
  const Matrix Xs = gather_rows(X, idx);
  const Vector x_bar_sub = column_means(Xs);
  const Matrix Xcs = Xs.rowwise() - x_bar.transpose();

  require_rank(Xcs);
  require_rank(intercept_augmented(Xs));

  const Matrix gram = Xcs.transpose() * Xcs;
  const Vector shift = x_bar_sub - x_bar;
  const Vector u = gram.ldlt().solve(shift);
  const double d = double(r) * shift.dot(u);
  if (1.0 - d < kDegenerateTol) {
    throw DegenerateGap("slope_variance_gap: 1 - d = " +
                        std::to_string(1.0 - d) + " below threshold");
  }

  const double coef =
      sigma2 * (double(r) / (1.0 - d) + double(r) * double(r) / double(n));
  SlopeVarianceGap out;
  out.d = d;
  out.mean_shift = shift;
  out.gap = CovMatrix{symmetrized(coef * (u * u.transpose()))};
  return out;
}

CovMatrix wls_asymptotic_variance(const Dataset& d, const WeightedStats& ws,
                                  Index r, AvarTarget target, double sigma2) {
  const Index n = d.n();
  const Index p = d.p();
  if (ws.w.size() != n) {
    throw DimensionMismatch("wls_asymptotic_variance: weights sized " +
                            std::to_string(ws.w.size()) + " for n = " +
                            std::to_string(n));
  }
  if (r < p + 2) {
    throw SubsampleTooSmall("wls_asymptotic_variance: r = " +
                            std::to_string(r) + " < p + 2");
  }

  Matrix D;
  switch (target) {
    case AvarTarget::kTheta:
      D = intercept_augmented(d.X());
      break;
    case AvarTarget::kSlopePlain: {
      const Vector x_bar = column_means(d.X());
      D = d.X().rowwise() - x_bar.transpose();
      break;
    }
    case AvarTarget::kSlopeWeighted:
      D = d.X().rowwise() - ws.x_bar_w.transpose();
      break;
  }
  require_rank(D);

  const Matrix A = D.transpose() * D;
  const Matrix B = D.transpose() * ws.w.asDiagonal() * D;
  const auto ldlt = A.ldlt();
  const Matrix T = ldlt.solve(B);
  Matrix M = ldlt.solve(T.transpose()).transpose();
  M *= ws.inverse_weight_sum * sigma2 / double(r);
  return CovMatrix{symmetrized(std::move(M))};
}

LoewnerResult loewner_leq(const CovMatrix& A, const CovMatrix& B, double tol) {
  if (A.m.rows() != B.m.rows() || A.m.cols() != B.m.cols()) {
    throw DimensionMismatch("loewner_leq: matrices have different shapes");
  }
  const Matrix diff = symmetrized(B.m - A.m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(diff,
                                            Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  return LoewnerResult{min_eig >= -tol * (1.0 + B.m.norm()), min_eig};
}

std::vector<IdentityResidual> centering_identities(const Matrix& X,
                                                   const IndexList& idx,
                                                   const Vector& w,
                                                   double gram_perturbation) {
  const Index n = X.rows();
  const Index r = static_cast<Index>(idx.size());
  check_indices(idx, n);
  check_distinct(idx);
  if (w.size() != n) {
    throw DimensionMismatch("centering_identities: weights sized " +
                            std::to_string(w.size()) + " for n = " +
                            std::to_string(n));
  }

  // Subsample-level identities.
  const Vector x_bar = column_means(X);
  const Matrix Xs = gather_rows(X, idx);
  const Vector x_bar_sub = column_means(Xs);
  const Matrix Xcs = Xs.rowwise() - x_bar.transpose();          // full-mean shift
  const Matrix Xcr = Xs.rowwise() - x_bar_sub.transpose();      // own-mean shift
  require_rank(Xcs);
  require_rank(Xcr);

  Matrix gram_shifted = Xcs.transpose() * Xcs;
  gram_shifted(0, 0) += gram_perturbation;
  const Matrix gram_own = Xcr.transpose() * Xcr;
  const Vector shift = x_bar_sub - x_bar;
  const Matrix shift_outer = shift * shift.transpose();

  std::vector<IdentityResidual> rows;
  rows.reserve(4);

  {
    const Matrix rhs = gram_shifted - double(r) * shift_outer;
    const double res = relative_residual(gram_own, rhs, gram_own);
    rows.push_back({"subsample_gram_rank_one", res, kIdentityThreshold,
                    res <= kIdentityThreshold});
  }
  {
    const Matrix gram_shifted_inv = gram_shifted.inverse();
    const Matrix gram_own_inv = gram_own.inverse();
    const Vector u = gram_shifted_inv * shift;
    const double d = double(r) * shift.dot(u);
    const Matrix rhs =
        gram_shifted_inv + double(r) * (u * u.transpose()) / (1.0 - d);
    const double res = relative_residual(gram_own_inv, rhs, gram_own_inv);
    rows.push_back({"subsample_gram_inverse_rank_one", res,
                    kIdentityThreshold, res <= kIdentityThreshold});
  }

  // Full-data identities for plain vs weighted centering.
  for (Index i = 0; i < n; ++i) {
    if (!(w(i) > 0.0)) {
      throw NonPositiveWeight("centering_identities: w[" + std::to_string(i) +
                              "] must be positive");
    }
  }
  const Vector x_bar_w = X.transpose() * w;
  const Matrix Xc = X.rowwise() - x_bar.transpose();
  const Matrix Xwc = X.rowwise() - x_bar_w.transpose();
  const Vector wshift = x_bar_w - x_bar;
  const Matrix wshift_outer = wshift * wshift.transpose();

  {
    const Matrix lhs = Xc.transpose() * w.asDiagonal() * Xc -
                       Xwc.transpose() * w.asDiagonal() * Xwc;
    const Matrix scale_ref = Xc.transpose() * w.asDiagonal() * Xc;
    const double res = relative_residual(lhs, wshift_outer, scale_ref);
    rows.push_back({"weighted_gram_shift", res, kIdentityThreshold,
                    res <= kIdentityThreshold});
  }
  {
    const Matrix lhs = Xwc.transpose() * Xwc - Xc.transpose() * Xc;
    const Matrix scale_ref = Xwc.transpose() * Xwc;
    const double res =
        relative_residual(lhs, double(n) * wshift_outer, scale_ref);
    rows.push_back({"unweighted_gram_shift", res, kIdentityThreshold,
                    res <= kIdentityThreshold});
  }
  return rows;
}

void save_residuals_csv(const std::vector<IdentityResidual>& rows,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("save_residuals_csv: cannot open " + path + " for writing");
  }
  out << "identity_name,residual,threshold,pass\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%d", row.residual,
                  row.threshold, row.pass ? 1 : 0);
    out << row.name << buf << '\n';
  }
  if (!out) {
    throw Error("save_residuals_csv: write failed for " + path);
  }
}

}  // namespace subreg
