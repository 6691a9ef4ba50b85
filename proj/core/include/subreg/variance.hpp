#pragma once

#include <string>
#include <vector>

#include "subreg/dataset.hpp"
#include "subreg/estimators.hpp"

namespace subreg {

// Symmetric covariance matrix (p x p, or (p+1) x (p+1) for joint
// intercept/slope variances).
struct CovMatrix {
  Matrix m;

  Index dim() const { return m.rows(); }
  double frobenius() const { return m.norm(); }
};

// Which block of the estimator a linear map computes.
enum class MapPart {
  kWhole,      // the full estimated vector
  kSlope,      // slope coordinates only
  kIntercept,  // the (possibly recovered) intercept, a 1 x n map
};

// Exact representation of an estimator as a linear map on the full response
// vector: estimate = L * y, for fixed covariates and a fixed selection.
// Columns are indexed by full-data rows.
struct LinearEstimatorMap {
  Matrix L;
  Variant variant = Variant::kFullOls;
  MapPart part = MapPart::kWhole;

  Vector apply(const Vector& y) const { return L * y; }
};

// Builds the exact map for the deterministic-selection OLS estimators:
//   kFullOls    - OLS on all rows (idx is ignored),
//   kSubOlsWi   - intercept-model OLS on the selected rows,
//   kSubOlsWoi  - no-intercept OLS on the selected rows shifted by the
//                 full-data means; its kIntercept part is the recovered
//                 intercept y_bar - x_bar' beta.
// WLS variants have no exact finite-sample map and throw UnsupportedVariant.
// Duplicate indices are allowed and handled exactly (columns accumulate).
LinearEstimatorMap estimator_map(Variant variant, const Matrix& X,
                                 const IndexList& idx,
                                 MapPart part = MapPart::kWhole);

// Conditional variance of L * y when the responses carry i.i.d. errors with
// variance sigma2: sigma2 * L * L', symmetrized.
CovMatrix exact_variance(const LinearEstimatorMap& map, double sigma2);

// The closed-form difference Var(slope, intercept model) minus
// Var(slope, shifted no-intercept model) for a deterministic selection:
//   gap = sigma2 * (r/(1-d) + r^2/n) * G^-1 (x*_bar - x_bar)^{x2} G^-1
// with G the Gram matrix of the mean-shifted selected rows and
//   d = r (x*_bar - x_bar)' G^-1 (x*_bar - x_bar), always in [0, 1).
// The gap matrix is positive semidefinite with rank at most one.
struct SlopeVarianceGap {
  double d = 0.0;
  CovMatrix gap;
  Vector mean_shift;  // x*_bar - x_bar
};

SlopeVarianceGap slope_variance_gap(const Matrix& X, const IndexList& idx,
                                    double sigma2);

// Asymptotic variance targets for noninformative weighted subsampling with
// r with-replacement draws and inverse-probability weights.
enum class AvarTarget {
  kTheta,          // joint intercept/slope estimator, raw design
  kSlopePlain,     // slope estimator, rows centered at the plain means
  kSlopeWeighted,  // slope estimator, rows centered at the weighted means
};

// (C sigma2 / r) * A^-1 B A^-1 with A = D'D and B = D'WD, where D is the
// (augmented or centered) full-data design selected by `target` and W the
// diagonal matrix of the full-data weights in `ws`.
CovMatrix wls_asymptotic_variance(const Dataset& d, const WeightedStats& ws,
                                  Index r, AvarTarget target, double sigma2);

struct LoewnerResult {
  bool leq = false;
  double min_eigenvalue = 0.0;
};

// A <= B in the Loewner order: smallest eigenvalue of the symmetrized B - A
// is at least -tol * (1 + ||B||_F).
LoewnerResult loewner_leq(const CovMatrix& A, const CovMatrix& B, double tol);

struct IdentityResidual {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Checks the four exact matrix identities behind the variance comparisons as
// relative Frobenius residuals (threshold 1e-10 each):
//   subsample_gram_rank_one          own-mean Gram = shifted Gram minus the
//                                    rank-one mean-shift correction
//   subsample_gram_inverse_rank_one  the matching rank-one inverse update
//   weighted_gram_shift              weighted Grams under plain vs weighted
//                                    centering differ by (x_bar_w-x_bar)^{x2}
//   unweighted_gram_shift            plain Grams differ by n times the same
//                                    rank-one matrix
// idx must be distinct row indices; w a positive full-data weight vector
// summing to 1. gram_perturbation is a fault-injection hook for testing the
// checker itself: it is added to one Gram entry before the comparison.
std::vector<IdentityResidual> centering_identities(
    const Matrix& X, const IndexList& idx, const Vector& w,
    double gram_perturbation = 0.0);

// Serializes residual rows as CSV: identity_name,residual,threshold,pass.
void save_residuals_csv(const std::vector<IdentityResidual>& rows,
                        const std::string& path);

}  // namespace subreg
