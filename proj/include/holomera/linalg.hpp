#pragma once

// Hermitian eigensolves and isometry extraction, with deterministic
// canonicalization so that repeated runs on identical inputs produce
// bit-identical results (the NRG influence checks rely on this).

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "holomera/tensor.hpp"

namespace holomera {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Linear map between index groups of a tensor; contracting the map with
/// itself over the out-group gives the identity on the in-group.
struct Isometry {
    DenseTensor tensor;
    std::vector<index_t> in_axes;   // domain legs
    std::vector<index_t> out_axes;  // codomain legs

    index_t in_dim() const {
        index_t d = 1;
        for (index_t a : in_axes) d *= tensor.dim(a);
        return d;
    }
    index_t out_dim() const {
        index_t d = 1;
        for (index_t a : out_axes) d *= tensor.dim(a);
        return d;
    }

    /// Matrix view [out_dim x in_dim] in (out_axes, in_axes) order.
    DenseTensor as_matrix() const {
        std::vector<index_t> perm = out_axes;
        perm.insert(perm.end(), in_axes.begin(), in_axes.end());
        return permute(tensor, perm).reshaped({out_dim(), in_dim()});
    }

    /// Max elementwise defect of  V^T V - 1  on the in-group.
    double isometry_defect() const {
        DenseTensor m = as_matrix();
        std::vector<std::pair<index_t, index_t>> pair{{0, 0}};
        DenseTensor g = contract(m, m, pair);  // [in, in]
        g -= DenseTensor::identity(in_dim());
        return g.max_abs();
    }
};

inline double symmetry_defect(const DenseTensor& h) {
    return hermiticity_defect(h);
}

namespace detail {

/// Sign-fix each column so its largest-magnitude entry is positive, then sort
/// columns inside degenerate clusters (gap < tol) lexicographically. Keeps the
/// eigendecomposition deterministic under tie-prone inputs.
inline void canonicalize_eigvecs(Eigen::VectorXd& vals, Mat& vecs, double tol = 1e-12) {
    const index_t n = vecs.rows(), k = vecs.cols();
    for (index_t j = 0; j < k; ++j) {
        index_t arg = 0;
        double best = 0.0;
        for (index_t i = 0; i < n; ++i) {
            double a = std::abs(vecs(i, j));
            if (a > best) { best = a; arg = i; }
        }
        if (vecs(arg, j) < 0.0) vecs.col(j) = -vecs.col(j);
    }
    index_t start = 0;
    while (start < k) {
        index_t stop = start + 1;
        while (stop < k && std::abs(vals(stop) - vals(stop - 1)) < tol) ++stop;
        if (stop - start > 1) {
            std::vector<index_t> order(static_cast<size_t>(stop - start));
            std::iota(order.begin(), order.end(), start);
            std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
                for (index_t i = 0; i < n; ++i) {
                    if (vecs(i, a) < vecs(i, b)) return true;
                    if (vecs(i, a) > vecs(i, b)) return false;
                }
                return false;
            });
            Mat block(n, stop - start);
            Eigen::VectorXd vblock(stop - start);
            for (index_t j = 0; j < stop - start; ++j) {
                block.col(j) = vecs.col(order[static_cast<size_t>(j)]);
                vblock(j) = vals(order[static_cast<size_t>(j)]);
            }
            vecs.block(0, start, n, stop - start) = block;
            vals.segment(start, stop - start) = vblock;
        }
        start = stop;
    }
}

}  // namespace detail

struct EighResult {
    std::vector<double> values;  // ascending
    Isometry vectors;            // tensor [n, k]: out axis 0, in axis 1
    bool truncation_degenerate = false;  // kept/dropped edge closer than 1e-12
};

/// k lowest eigenpairs of a symmetric matrix (rank-2 tensor or 2k-index
/// operator reshaped by the caller). Input symmetry is checked to 1e-10.
inline EighResult eigh_lowest(const DenseTensor& h, index_t k) {
    detail::require(h.rank() == 2 && h.dim(0) == h.dim(1), "eigh_lowest: square matrix expected");
    const index_t n = h.dim(0);
    detail::require(k >= 1 && k <= n, "eigh_lowest: k out of range");
    detail::require(hermiticity_defect(h) <= 1e-10, "eigh_lowest: input not symmetric");

    Eigen::Map<const Mat> M(h.data(), n, n);
    Mat sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    detail::require(es.info() == Eigen::Success, "eigh_lowest: eigensolver failed");

    Eigen::VectorXd vals = es.eigenvalues();
    Mat vecs = es.eigenvectors();
    detail::canonicalize_eigvecs(vals, vecs);

    EighResult out;
    out.values.assign(vals.data(), vals.data() + k);
    DenseTensor vt({n, k});
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < k; ++j) vt[i * k + j] = vecs(i, j);
    out.vectors = Isometry{std::move(vt), {1}, {0}};
    out.truncation_degenerate = (k < n) && (std::abs(vals(k) - vals(k - 1)) < 1e-12);
    return out;
}

struct PolarResult {
    Isometry isometry;
    bool rank_deficient = false;  // environment rank below the in-dimension
};

/// Isometry W = -U V^T from the SVD of an environment tensor, minimizing
/// tr(W^T E) over isometries. Axis split gives the domain (in) and codomain
/// (out) legs of the result; in_dim <= out_dim required.
inline PolarResult polar_isometry(const DenseTensor& env,
                                  const std::vector<index_t>& out_axes,
                                  const std::vector<index_t>& in_axes) {
    detail::require(out_axes.size() + in_axes.size() == static_cast<size_t>(env.rank()),
                    "polar_isometry: split must cover all axes");
    index_t m = 1, n = 1;
    for (index_t a : out_axes) m *= env.dim(a);
    for (index_t a : in_axes) n *= env.dim(a);
    detail::require(n <= m, "polar_isometry: in-dimension exceeds out-dimension");

    std::vector<index_t> perm = out_axes;
    perm.insert(perm.end(), in_axes.begin(), in_axes.end());
    DenseTensor e = permute(env, perm).reshaped({m, n});

    Eigen::Map<const Mat> E(e.data(), m, n);
    Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Mat W = -(svd.matrixU() * svd.matrixV().transpose());

    // sign-canonicalize degenerate/null directions: smallest singular values
    // leave U,V columns arbitrary, so rank deficiency is only reported
    const auto& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    bool deficient = false;
    for (index_t j = 0; j < n; ++j)
        if (sv(j) <= smax * 1e-14 || sv(j) == 0.0) deficient = true;

    std::vector<index_t> out_dims;
    for (index_t a : out_axes) out_dims.push_back(env.dim(a));
    for (index_t a : in_axes) out_dims.push_back(env.dim(a));
    DenseTensor wt(out_dims);
    std::memcpy(wt.data(), W.data(), sizeof(double) * static_cast<size_t>(m * n));

    std::vector<index_t> oaxes(out_axes.size()), iaxes(in_axes.size());
    std::iota(oaxes.begin(), oaxes.end(), 0);
    std::iota(iaxes.begin(), iaxes.end(), static_cast<index_t>(out_axes.size()));
    PolarResult res;
    res.isometry = Isometry{std::move(wt), iaxes, oaxes};
    res.rank_deficient = deficient;
    return res;
}

/// Operator Schmidt decomposition of a 2-site operator [o1 o2 i1 i2] into
/// sum_k A_k (x) B_k with singular values folded in; terms below cutoff
/// relative weight are dropped.
inline std::vector<std::pair<DenseTensor, DenseTensor>>
operator_schmidt(const DenseTensor& op, double cutoff = 1e-14) {
    detail::require(op.rank() == 4, "operator_schmidt: 2-site operator expected");
    const index_t d1 = op.dim(0), d2 = op.dim(1);
    detail::require(op.dim(2) == d1 && op.dim(3) == d2, "operator_schmidt: in/out dims differ");
    DenseTensor m = permute(op, {0, 2, 1, 3}).reshaped({d1 * d1, d2 * d2});
    Eigen::Map<const Mat> M(m.data(), d1 * d1, d2 * d2);
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;

    std::vector<std::pair<DenseTensor, DenseTensor>> terms;
    for (index_t k = 0; k < sv.size(); ++k) {
        if (smax == 0.0 || sv(k) <= smax * cutoff) break;
        double s = std::sqrt(sv(k));
        DenseTensor a({d1, d1}), b({d2, d2});
        for (index_t i = 0; i < d1 * d1; ++i) a[i] = s * svd.matrixU()(i, k);
        for (index_t i = 0; i < d2 * d2; ++i) b[i] = s * svd.matrixV()(i, k);
        terms.emplace_back(std::move(a), std::move(b));
    }
    return terms;
}

}  // namespace holomera
