#pragma once

#include "subreg/dataset.hpp"
#include "subreg/rng.hpp"

namespace subreg {

// Covariate row distributions: all share the AR(1) dependence structure
// Sigma[i][j] = rho^|i-j|.
enum class CaseKind {
  kNormal,     // N(0, Sigma)
  kLogNormal,  // elementwise exp of N(0, Sigma)
  kT5,         // multivariate t with 5 df and scale matrix Sigma
};

const char* case_name(CaseKind kind);

struct SimCase {
  CaseKind kind = CaseKind::kNormal;
  double rho = 0.5;
  Index p = 19;
};

// AR(1) covariance matrix with entries rho^|i-j|; requires |rho| < 1.
Matrix ar1_sigma(Index p, double rho);

// Draws i.i.d. covariate rows for a SimCase. Holds the Cholesky factor of
// Sigma so repeated draws across replications skip the factorization.
class CovariateSampler {
 public:
  explicit CovariateSampler(const SimCase& c);

  Matrix sample(Index n, Xoshiro256pp& rng) const;
  const SimCase& sim_case() const { return case_; }

 private:
  SimCase case_;
  Matrix chol_lower_;
};

// One-shot convenience wrapper around CovariateSampler.
Matrix gen_covariates(const SimCase& c, Index n, Xoshiro256pp& rng);

// Responses y_i = alpha + x_i' beta + eps_i with eps_i iid N(0, sigma2).
Vector gen_response(const Matrix& X, const ModelSpec& spec, Xoshiro256pp& rng);

}  // namespace subreg
