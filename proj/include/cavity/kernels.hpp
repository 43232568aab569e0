#pragma once

#include <Eigen/Dense>

#include "cavity/model.hpp"

namespace cavity {

// Every parallel kernel has a serial twin; tests compare them and bench/ times them.
enum class Execution { Serial, Parallel };

// y = A x for a row-major sparse matrix.
void spmv_serial(const SparseMatrix& a, const double* x, double* y);
void spmv_parallel(const SparseMatrix& a, const double* x, double* y);
void spmv(const SparseMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y, Execution exec);

// y = O x for a (possibly complex) operator on a complex vector.
Eigen::VectorXcd apply(const OperatorMatrix& op, const Eigen::VectorXcd& x, Execution exec = Execution::Parallel);

// Block Gram-Schmidt step: w -= V (V^T w), returns the coefficients.
Eigen::VectorXd project_out_serial(const Eigen::MatrixXd& v, Eigen::Index cols, Eigen::VectorXd& w);
Eigen::VectorXd project_out_parallel(const Eigen::MatrixXd& v, Eigen::Index cols, Eigen::VectorXd& w);

int worker_count();
void set_worker_count(int n);

}  // namespace cavity
