#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>

namespace fvsim {

// Fixed-capacity vector/matrix for state dimensions up to kMaxDim.
// Everything is stack-allocated; dimension is a runtime value.
inline constexpr int kMaxDim = 8;

class Vec {
  public:
    Vec() : n_(0) { a_.fill(0.0); }
    explicit Vec(int n) : n_(n) {
        assert(n >= 0 && n <= kMaxDim);
        a_.fill(0.0);
    }
    Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
        assert(n_ <= kMaxDim);
        a_.fill(0.0);
        std::copy(xs.begin(), xs.end(), a_.begin());
    }

    int size() const { return n_; }
    double& operator[](int i) { return a_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return a_[static_cast<size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Vec& operator*=(double c) {
        for (int i = 0; i < n_; ++i) a_[i] *= c;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double c, Vec a) { return a *= c; }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += a_[i] * o.a_[i];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this)); }

    bool all_finite() const {
        for (int i = 0; i < n_; ++i)
            if (!std::isfinite(a_[i])) return false;
        return true;
    }

  private:
    int n_;
    std::array<double, kMaxDim> a_;
};

// Square matrix, row-major, capacity kMaxDim x kMaxDim.
class Mat {
  public:
    Mat() : n_(0) { a_.fill(0.0); }
    explicit Mat(int n) : n_(n) {
        assert(n >= 0 && n <= kMaxDim);
        a_.fill(0.0);
    }

    static Mat identity(int n) {
        Mat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat zero(int n) { return Mat(n); }

    int size() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * kMaxDim + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * kMaxDim + j]; }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
        return *this;
    }
    Mat& operator*=(double c) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) (*this)(i, j) *= c;
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(double c, Mat a) { return a *= c; }

    Vec apply(const Vec& x) const {
        Vec y(n_);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    Mat mul(const Mat& o) const {
        Mat r(n_);
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) {
                const double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }

    Mat transposed() const {
        Mat r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    // a a^T
    Mat gram() const { return mul(transposed()); }

    double frobenius_norm() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (!std::isfinite((*this)(i, j))) return false;
        return true;
    }

  private:
    int n_;
    std::array<double, kMaxDim * kMaxDim> a_;
};

struct SymEigen {
    Vec values;   // ascending
    Mat vectors;  // columns are eigenvectors
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Deterministic; adequate for the small (<= 8x8) matrices used here.
SymEigen sym_eigen(const Mat& s);

/// Symmetric PSD square root via eigendecomposition.
/// Eigenvalues below -tol signal a non-PSD input (std::domain_error);
/// tiny negatives in [-tol, 0] are clamped to zero.
Mat sym_sqrt(const Mat& s, double tol = 1e-10);

/// Smallest eigenvalue of a symmetric matrix.
double min_sym_eigenvalue(const Mat& s);

/// Smallest singular value of a general square matrix.
double min_singular_value(const Mat& a);

}  // namespace fvsim
