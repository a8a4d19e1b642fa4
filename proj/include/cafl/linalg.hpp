#pragma once

#include <vector>

namespace cafl {

using Vec = std::vector<double>;

/// Dense row-major matrix. Small sizes only (cluster mixing matrices and
/// objective Hessians); no view machinery.
class Mat {
public:
    Mat() : rows_(0), cols_(0) {}
    Mat(int rows, int cols) : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Mat identity(int n);

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Mat& other) const = default;

private:
    int rows_, cols_;
    std::vector<double> data_;
};

Vec matvec(const Mat& a, const Vec& x);
Mat matmul(const Mat& a, const Mat& b);

/// A^T A, computed symmetric by construction (upper triangle mirrored).
Mat gram(const Mat& a);

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double squared_distance(const Vec& a, const Vec& b);

/// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);

/// Solves A x = b for symmetric positive definite A via Cholesky.
/// Throws NumericalError if a pivot is not strictly positive.
Vec cholesky_solve(Mat a, Vec b);

/// Householder QR of a square matrix; returns Q with det-sign fixed so the
/// factorization is unique (R diagonal nonnegative). Used to orthonormalize
/// random matrices.
Mat qr_orthonormal(const Mat& a);

}  // namespace cafl
