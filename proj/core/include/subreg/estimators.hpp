#pragma once

#include <optional>

#include "subreg/dataset.hpp"

namespace subreg {

// Which estimator produced a result. The two weighted no-intercept variants
// share one solver; the tag records whether the caller shifted the rows by
// the plain or the weighted full-data means.
enum class Variant {
  kFullOls,
  kSubOlsWi,
  kSubOlsWoi,
  kSubWlsWi,
  kSubWlsWoiPlain,
  kSubWlsWoiWeighted,
};

const char* variant_name(Variant v);

struct EstimatorOutput {
  std::optional<double> alpha;
  Vector beta;
  Variant variant = Variant::kFullOls;
};

// OLS of y on (1 X). Solved through a column-pivoted QR of the design;
// throws RankDeficient when a diagonal factor entry falls below
// max(n, p+1) * machine epsilon relative to the largest one.
EstimatorOutput ols_with_intercept(const Dataset& d,
                                   Variant tag = Variant::kSubOlsWi);

// No-intercept OLS slope. The caller is responsible for having shifted the
// rows (by the full-data means) beforehand.
EstimatorOutput ols_slope_no_intercept(const Dataset& d_shifted);

// Intercept recovered from full-data means: y_bar - x_bar' beta.
double recover_intercept(const CenteringStats& stats, const Vector& beta);
// Weighted-mean version: y_bar_w - x_bar_w' beta.
double recover_intercept(const WeightedStats& stats, const Vector& beta);

// WLS of y on (1 X) with positive row weights w_star (scale-free: only the
// relative weights matter). Solved via QR of the sqrt(w)-scaled design.
EstimatorOutput wls_with_intercept(const Dataset& d, const Vector& w_star);

// Weighted no-intercept slope on pre-shifted rows.
EstimatorOutput wls_slope_no_intercept(const Dataset& d_shifted,
                                       const Vector& w_star, Variant tag);

// Residual variance estimate e'e / (n - p - 1) from the intercept model.
double estimate_sigma2(const Dataset& d);

}  // namespace subreg
