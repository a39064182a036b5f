#pragma once

#include <Eigen/Core>
#include <string>

namespace blochlab {

struct SigmaOptions {
  enum class Method { automatic, dense, iterative };
  Method method = Method::automatic;
  int dense_limit = 512;    // automatic: dense SVD up to this dimension
  double tol = 1e-13;       // Ritz-value stagnation tolerance
  int max_iterations = 400;
};

struct SigmaResult {
  double value = 0.0;
  std::string method;     // "diagonal" | "dense-svd" | "lanczos-inverse" | "lanczos"
  int iterations = 0;
  double error_bound = 0.0;  // Lanczos a-posteriori bound on the Ritz value
};

// Smallest singular value. Automatic path: exact enumeration for diagonal
// matrices, dense SVD below dense_limit, otherwise Lanczos on (M^* M)^{-1}
// through an LU factorization of M.
SigmaResult sigma_min(const Eigen::MatrixXcd& m, const SigmaOptions& options = {});

// Largest singular value (operator 2-norm); Lanczos on M^* M when large.
SigmaResult sigma_max(const Eigen::MatrixXcd& m, const SigmaOptions& options = {});

}  // namespace blochlab
