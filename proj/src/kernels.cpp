#include "cavity/kernels.hpp"

#include <omp.h>

namespace cavity {

void spmv_serial(const SparseMatrix& a, const double* x, double* y) {
    const int* outer = a.outerIndexPtr();
    const int* inner = a.innerIndexPtr();
    const double* val = a.valuePtr();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        double s = 0;
        for (int k = outer[r]; k < outer[r + 1]; ++k) s += val[k] * x[inner[k]];
        y[r] = s;
    }
}

void spmv_parallel(const SparseMatrix& a, const double* x, double* y) {
    const int* outer = a.outerIndexPtr();
    const int* inner = a.innerIndexPtr();
    const double* val = a.valuePtr();
    const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static) if (rows > 4096)
    for (Eigen::Index r = 0; r < rows; ++r) {
        double s = 0;
        for (int k = outer[r]; k < outer[r + 1]; ++k) s += val[k] * x[inner[k]];
        y[r] = s;
    }
}

void spmv(const SparseMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y, Execution exec) {
    y.resize(a.rows());
    if (exec == Execution::Parallel)
        spmv_parallel(a, x.data(), y.data());
    else
        spmv_serial(a, x.data(), y.data());
}

Eigen::VectorXcd apply(const OperatorMatrix& op, const Eigen::VectorXcd& x, Execution exec) {
    if (x.size() != op.dimension()) throw ValidationError("vector length does not match operator dimension");
    Eigen::VectorXd xr = x.real(), xi = x.imag(), t1, t2;
    spmv(op.re, xr, t1, exec);
    spmv(op.re, xi, t2, exec);
    Eigen::VectorXcd y(x.size());
    y.real() = t1;
    y.imag() = t2;
    if (!op.is_real()) {
        // (R + iI)(xr + i xi) = (R xr - I xi) + i (R xi + I xr)
        spmv(op.im, xi, t1, exec);
        spmv(op.im, xr, t2, exec);
        y.real() -= t1;
        y.imag() += t2;
    }
    return y;
}

Eigen::VectorXd project_out_serial(const Eigen::MatrixXd& v, Eigen::Index cols, Eigen::VectorXd& w) {
    Eigen::VectorXd c(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        double s = 0;
        for (Eigen::Index i = 0; i < v.rows(); ++i) s += v(i, j) * w[i];
        c[j] = s;
    }
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < v.rows(); ++i) w[i] -= c[j] * v(i, j);
    return c;
}

Eigen::VectorXd project_out_parallel(const Eigen::MatrixXd& v, Eigen::Index cols, Eigen::VectorXd& w) {
    const Eigen::Index n = v.rows();
    Eigen::VectorXd c(cols);
#pragma omp parallel for schedule(static) if (n * cols > 200000)
    for (Eigen::Index j = 0; j < cols; ++j) c[j] = v.col(j).dot(w);
#pragma omp parallel for schedule(static) if (n * cols > 200000)
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0;
        for (Eigen::Index j = 0; j < cols; ++j) s += c[j] * v(i, j);
        w[i] -= s;
    }
    return c;
}

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int n) {
    if (n > 0) omp_set_num_threads(n);
}

}  // namespace cavity
