#pragma once

#include <stdexcept>
#include <string>

namespace subreg {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class NonFiniteData : public Error {
 public:
  using Error::Error;
};

class NonPositiveWeight : public Error {
 public:
  using Error::Error;
};

class WeightNormalization : public Error {
 public:
  using Error::Error;
};

// Design matrix failed the pivot-tolerance rank check. Carries the rank the
// factorization actually found so callers can report how degenerate the
// input was.
class RankDeficient : public Error {
 public:
  RankDeficient(long effective_rank, long expected_rank)
      : Error("rank-deficient design: effective rank " +
              std::to_string(effective_rank) + " < " +
              std::to_string(expected_rank)),
        effective_rank_(effective_rank),
        expected_rank_(expected_rank) {}

  long effective_rank() const { return effective_rank_; }
  long expected_rank() const { return expected_rank_; }

 private:
  long effective_rank_;
  long expected_rank_;
};

class SizeExceedsPopulation : public Error {
 public:
  using Error::Error;
};

class SubsampleTooSmall : public Error {
 public:
  using Error::Error;
};

class InvalidRho : public Error {
 public:
  using Error::Error;
};

// The rank-one variance gap divides by 1-d; thrown when 1-d falls below the
// degeneracy threshold (the selection sits numerically at the exclusion
// boundary).
class DegenerateGap : public Error {
 public:
  using Error::Error;
};

class UnsupportedVariant : public Error {
 public:
  using Error::Error;
};

class VerificationFailure : public Error {
 public:
  using Error::Error;
};

// Monte Carlo run aborted because too many replications failed.
class SimulationAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace subreg
