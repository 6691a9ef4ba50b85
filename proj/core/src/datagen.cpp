#include "subreg/datagen.hpp"

#include <cmath>
#include <random>

namespace subreg {

const char* case_name(CaseKind kind) {
  switch (kind) {
    case CaseKind::kNormal: return "normal";
    case CaseKind::kLogNormal: return "lognormal";
    case CaseKind::kT5: return "t5";
  }
  return "unknown";
}

Matrix ar1_sigma(Index p, double rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw InvalidRho("ar1_sigma: |rho| must be < 1, got " +
                     std::to_string(rho));
  }
  if (p < 1) {
    throw DimensionMismatch("ar1_sigma: p must be >= 1");
  }
  Matrix sigma(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      sigma(i, j) = std::pow(rho, double(std::abs(i - j)));
    }
  }
  return sigma;
}

CovariateSampler::CovariateSampler(const SimCase& c) : case_(c) {
  const Matrix sigma = ar1_sigma(c.p, c.rho);
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error("covariate sampler: AR(1) matrix is not positive definite");
  }
  chol_lower_ = llt.matrixL();
}

Matrix CovariateSampler::sample(Index n, Xoshiro256pp& rng) const {
  const Index p = case_.p;
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix G(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      G(i, j) = normal(rng);
    }
  }
  Matrix X = G * chol_lower_.transpose();

  switch (case_.kind) {
    case CaseKind::kNormal:
      break;
    case CaseKind::kLogNormal:
      X = X.array().exp();
      break;
    case CaseKind::kT5: {
      // Scale mixture: one chi-square(5) divisor per row, shared across the
      // row's coordinates, preserving the AR(1) dependence.
      std::chi_squared_distribution<double> chi2(5.0);
      for (Index i = 0; i < n; ++i) {
        X.row(i) *= std::sqrt(5.0 / chi2(rng));
      }
      break;
    }
  }
  return X;
}

Matrix gen_covariates(const SimCase& c, Index n, Xoshiro256pp& rng) {
  return CovariateSampler(c).sample(n, rng);
}

Vector gen_response(const Matrix& X, const ModelSpec& spec,
                    Xoshiro256pp& rng) {
  if (spec.beta.size() != X.cols()) {
    throw DimensionMismatch("gen_response: beta has length " +
                            std::to_string(spec.beta.size()) + " but p = " +
                            std::to_string(X.cols()));
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(spec.sigma2));
  Vector y = X * spec.beta;
  for (Index i = 0; i < y.size(); ++i) {
    y(i) += spec.alpha + normal(rng);
  }
  return y;
}

}  // namespace subreg
