#include "cafl/linalg.hpp"

#include <cmath>

#include "cafl/errors.hpp"

namespace cafl {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec matvec(const Mat& a, const Vec& x) {
    if (a.cols() != static_cast<int>(x.size())) {
        throw InvariantViolation("matvec: dimension mismatch");
    }
    Vec y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw InvariantViolation("matmul: dimension mismatch");
    Mat c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Mat gram(const Mat& a) {
    Mat g(a.cols(), a.cols());
    for (int i = 0; i < a.cols(); ++i) {
        for (int j = i; j < a.cols(); ++j) {
            double s = 0.0;
            for (int k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
            g(i, j) = s;
            g(j, i) = s;  // exact symmetry, same accumulation
        }
    }
    return g;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InvariantViolation("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double squared_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InvariantViolation("squared_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy(double alpha, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw InvariantViolation("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec cholesky_solve(Mat a, Vec b) {
    const int n = a.rows();
    if (a.cols() != n || static_cast<int>(b.size()) != n) {
        throw InvariantViolation("cholesky_solve: dimension mismatch");
    }
    // In-place lower-triangular factor A = L L^T.
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0)) throw NumericalError("cholesky_solve: matrix not positive definite");
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
    }
    // Forward then backward substitution.
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
        b[i] = s / a(i, i);
    }
    return b;
}

Mat qr_orthonormal(const Mat& a) {
    const int n = a.rows();
    if (a.cols() != n) throw InvariantViolation("qr_orthonormal: square input required");
    Mat r = a;
    Mat q = Mat::identity(n);
    // Householder reflections applied to R, accumulated into Q.
    for (int k = 0; k < n - 1; ++k) {
        double nx = 0.0;
        for (int i = k; i < n; ++i) nx += r(i, k) * r(i, k);
        nx = std::sqrt(nx);
        if (nx == 0.0) continue;
        Vec v(n - k, 0.0);
        const double alpha = r(k, k) >= 0.0 ? -nx : nx;
        v[0] = r(k, k) - alpha;
        for (int i = k + 1; i < n; ++i) v[i - k] = r(i, k);
        double vnorm2 = 0.0;
        for (double vi : v) vnorm2 += vi * vi;
        if (vnorm2 == 0.0) continue;
        // R <- (I - 2 v v^T / v^T v) R on rows k..n-1
        for (int j = k; j < n; ++j) {
            double s = 0.0;
            for (int i = k; i < n; ++i) s += v[i - k] * r(i, j);
            const double f = 2.0 * s / vnorm2;
            for (int i = k; i < n; ++i) r(i, j) -= f * v[i - k];
        }
        // Q <- Q (I - 2 v v^T / v^T v) on columns k..n-1
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k; j < n; ++j) s += q(i, j) * v[j - k];
            const double f = 2.0 * s / vnorm2;
            for (int j = k; j < n; ++j) q(i, j) -= f * v[j - k];
        }
    }
    // Nonnegative R diagonal makes Q unique given A.
    for (int j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) {
            for (int i = 0; i < n; ++i) q(i, j) = -q(i, j);
        }
    }
    return q;
}

}  // namespace cafl
