#pragma once

#include <Eigen/Dense>

namespace nlbox {

struct SymmetricEigen {
  Eigen::VectorXd values;   // sorted descending
  Eigen::MatrixXd vectors;  // column k pairs with values(k)
};

// Cyclic Jacobi diagonalization of a symmetric matrix. Sweeps the upper
// triangle row by row in a fixed order; stops when the off-diagonal
// Frobenius norm falls below 1e-14 relative to the input norm.
SymmetricEigen jacobi_eigen(Eigen::MatrixXd a);

}  // namespace nlbox
