#include "fvsim/linalg.hpp"

#include <numeric>

namespace fvsim {

SymEigen sym_eigen(const Mat& s) {
    const int n = s.size();
    Mat a = s;
    Mat v = Mat::identity(n);

    // symmetrize defensively; callers pass nearly-symmetric matrices
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = a(j, i) = m;
        }

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= 1e-30) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    // sort eigenpairs ascending
    std::array<int, kMaxDim> order{};
    std::iota(order.begin(), order.begin() + n, 0);
    std::sort(order.begin(), order.begin() + n,
              [&](int i, int j) { return a(i, i) < a(j, j); });

    SymEigen out;
    out.values = Vec(n);
    out.vectors = Mat(n);
    for (int c = 0; c < n; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (int r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

Mat sym_sqrt(const Mat& s, double tol) {
    const int n = s.size();
    const SymEigen e = sym_eigen(s);
    if (e.values[0] < -tol)
        throw std::domain_error("sym_sqrt: matrix is not positive semidefinite "
                                "(min eigenvalue " + std::to_string(e.values[0]) + ")");
    Mat r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                const double lam = std::max(e.values[k], 0.0);
                acc += e.vectors(i, k) * std::sqrt(lam) * e.vectors(j, k);
            }
            r(i, j) = acc;
        }
    return r;
}

double min_sym_eigenvalue(const Mat& s) { return sym_eigen(s).values[0]; }

double min_singular_value(const Mat& a) {
    const Mat ata = a.transposed().mul(a);
    const double lam = min_sym_eigenvalue(ata);
    return std::sqrt(std::max(lam, 0.0));
}

}  // namespace fvsim
