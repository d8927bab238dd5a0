#include "infodcl/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace infodcl {

std::vector<double> SVDFactors::top_right_singular_vector() const {
    std::vector<double> out(v.rows);
    for (int i = 0; i < v.rows; ++i) out[i] = v.at(i, 0);
    return out;
}

Mat SVDFactors::reconstruct() const {
    Mat y(u.rows, v.rows);
    const int d = static_cast<int>(sigma.size());
    for (int r = 0; r < u.rows; ++r) {
        for (int j = 0; j < d; ++j) {
            const double c = u.at(r, j) * sigma[j];
            if (c == 0.0) continue;
            for (int i = 0; i < v.rows; ++i) y.at(r, i) += c * v.at(i, j);
        }
    }
    return y;
}

SVDFactors truncated_svd(const Mat& y, int rank) {
    const int n = y.rows;
    const int dim = y.cols;
    if (n < 1 || dim < 1) throw NumericError("truncated_svd: empty matrix");
    if (rank < 1 || rank > std::min(n, dim)) {
        throw NumericError("truncated_svd: rank out of range");
    }
    if (!all_finite(y)) throw NumericError("truncated_svd: non-finite input");

    // One-sided Jacobi: orthogonalize the columns of a working copy W = Y*V,
    // accumulating the rotations into V. Column norms become singular values.
    Mat w = y;                 // n x dim, columns rotated in place
    Mat v(dim, dim);           // accumulated right singular vectors
    for (int i = 0; i < dim; ++i) v.at(i, i) = 1.0;

    std::vector<double> col_sq(dim, 0.0);
    for (int j = 0; j < dim; ++j) {
        double s = 0.0;
        for (int r = 0; r < n; ++r) s += w.at(r, j) * w.at(r, j);
        col_sq[j] = s;
    }
    const double total_sq = std::accumulate(col_sq.begin(), col_sq.end(), 0.0);
    const double tol = 1e-14;
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < dim - 1; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                double cpq = 0.0;
                for (int r = 0; r < n; ++r) cpq += w.at(r, p) * w.at(r, q);
                const double app = col_sq[p];
                const double aqq = col_sq[q];
                if (std::fabs(cpq) <= tol * std::sqrt(app * aqq) ||
                    std::fabs(cpq) <= tol * total_sq) {
                    continue;
                }
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * cpq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int r = 0; r < n; ++r) {
                    const double wp = w.at(r, p);
                    const double wq = w.at(r, q);
                    w.at(r, p) = c * wp - s * wq;
                    w.at(r, q) = s * wp + c * wq;
                }
                for (int r = 0; r < dim; ++r) {
                    const double vp = v.at(r, p);
                    const double vq = v.at(r, q);
                    v.at(r, p) = c * vp - s * vq;
                    v.at(r, q) = s * vp + c * vq;
                }
                col_sq[p] = app - t * cpq;
                col_sq[q] = aqq + t * cpq;
            }
        }
        if (!rotated) break;
    }

    // Singular values are the column norms of the rotated W, sorted descending.
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> norms(dim);
    for (int j = 0; j < dim; ++j) {
        double s = 0.0;
        for (int r = 0; r < n; ++r) s += w.at(r, j) * w.at(r, j);
        norms[j] = std::sqrt(s);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return norms[a] > norms[b]; });

    SVDFactors f;
    f.u = Mat(n, rank);
    f.v = Mat(dim, rank);
    f.sigma.assign(rank, 0.0);
    const double sigma_floor = 1e-12 * std::sqrt(std::max(total_sq, 1.0));
    for (int j = 0; j < rank; ++j) {
        const int src = order[j];
        const double sg = norms[src];
        f.sigma[j] = sg;
        for (int r = 0; r < dim; ++r) f.v.at(r, j) = v.at(r, src);
        if (sg > sigma_floor) {
            for (int r = 0; r < n; ++r) f.u.at(r, j) = w.at(r, src) / sg;
        } else {
            f.sigma[j] = 0.0;  // rank-deficient: pad with zeros
        }
    }
    return f;
}

}  // namespace infodcl
