#pragma once

// Dense multi-index tensors over real doubles, row-major layout.
// All higher-level machinery (MERA layers, Wilson chains, NRG) is built on
// the pairwise contraction defined here; there is no automatic contraction
// ordering, callers spell out the sequence they want.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace holomera {

using index_t = std::int64_t;

class TensorError : public std::runtime_error {
public:
    explicit TensorError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw TensorError(msg);
}
}  // namespace detail

/// Multi-index array; product of dims equals data size, layout is row-major
/// (last index fastest), so reshape is a reinterpretation of the same buffer.
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<index_t> dims)
        : dims_(std::move(dims)), data_(checked_size(dims_), 0.0) {}

    DenseTensor(std::vector<index_t> dims, std::vector<double> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        detail::require(static_cast<index_t>(data_.size()) == checked_size(dims_),
                        "DenseTensor: data length does not match dims");
    }

    static DenseTensor scalar(double v) { return DenseTensor({}, {v}); }

    /// Identity matrix as a 2-index tensor.
    static DenseTensor identity(index_t d) {
        DenseTensor t({d, d});
        for (index_t i = 0; i < d; ++i) t.data_[static_cast<size_t>(i * d + i)] = 1.0;
        return t;
    }

    index_t rank() const { return static_cast<index_t>(dims_.size()); }
    const std::vector<index_t>& dims() const { return dims_; }
    index_t dim(index_t axis) const { return dims_.at(static_cast<size_t>(axis)); }
    index_t size() const { return static_cast<index_t>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    double& operator[](index_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](index_t i) const { return data_[static_cast<size_t>(i)]; }

    double& at(const std::vector<index_t>& idx) { return data_[static_cast<size_t>(offset(idx))]; }
    double at(const std::vector<index_t>& idx) const { return data_[static_cast<size_t>(offset(idx))]; }

    /// Zero-copy reinterpretation; product of new dims must match.
    DenseTensor reshaped(std::vector<index_t> new_dims) const {
        detail::require(checked_size(new_dims) == size(), "reshape: size mismatch");
        return DenseTensor(std::move(new_dims), data_);
    }

    DenseTensor& operator+=(const DenseTensor& o) {
        detail::require(dims_ == o.dims_, "operator+=: shape mismatch");
        for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    DenseTensor& operator-=(const DenseTensor& o) {
        detail::require(dims_ == o.dims_, "operator-=: shape mismatch");
        for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    DenseTensor& operator*=(double a) {
        for (double& x : data_) x *= a;
        return *this;
    }

    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { a += b; return a; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { a -= b; return a; }
    friend DenseTensor operator*(double a, DenseTensor t) { t *= a; return t; }

    bool same_shape(const DenseTensor& o) const { return dims_ == o.dims_; }

    /// Frobenius norm.
    double norm() const {
        double s = 0.0;
        for (double x : data_) s += x * x;
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::abs(x));
        return m;
    }

    std::string shape_string() const {
        std::ostringstream os;
        os << "[";
        for (size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
        os << "]";
        return os.str();
    }

private:
    static index_t checked_size(const std::vector<index_t>& dims) {
        index_t n = 1;
        for (index_t d : dims) {
            detail::require(d >= 1, "DenseTensor: dims must be >= 1");
            n *= d;
        }
        return n;
    }

    index_t offset(const std::vector<index_t>& idx) const {
        detail::require(idx.size() == dims_.size(), "at: wrong index count");
        index_t off = 0;
        for (size_t a = 0; a < dims_.size(); ++a) {
            detail::require(idx[a] >= 0 && idx[a] < dims_[a], "at: index out of range");
            off = off * dims_[a] + idx[a];
        }
        return off;
    }

    std::vector<index_t> dims_;
    std::vector<double> data_;
};

/// Reorder axes: result axis k is input axis perm[k].
inline DenseTensor permute(const DenseTensor& t, const std::vector<index_t>& perm) {
    const index_t r = t.rank();
    detail::require(static_cast<index_t>(perm.size()) == r, "permute: wrong perm length");
    std::vector<bool> seen(static_cast<size_t>(r), false);
    for (index_t p : perm) {
        detail::require(p >= 0 && p < r && !seen[static_cast<size_t>(p)], "permute: invalid permutation");
        seen[static_cast<size_t>(p)] = true;
    }
    if (r <= 1) return t;

    std::vector<index_t> in_strides(static_cast<size_t>(r), 1);
    for (index_t a = r - 2; a >= 0; --a)
        in_strides[static_cast<size_t>(a)] = in_strides[static_cast<size_t>(a + 1)] * t.dim(a + 1);

    std::vector<index_t> out_dims(static_cast<size_t>(r));
    std::vector<index_t> out_stride_in(static_cast<size_t>(r));  // input stride of each output axis
    for (index_t k = 0; k < r; ++k) {
        out_dims[static_cast<size_t>(k)] = t.dim(perm[static_cast<size_t>(k)]);
        out_stride_in[static_cast<size_t>(k)] = in_strides[static_cast<size_t>(perm[static_cast<size_t>(k)])];
    }

    DenseTensor out(out_dims);
    std::vector<index_t> counter(static_cast<size_t>(r), 0);
    const double* src = t.data();
    double* dst = out.data();
    const index_t n = t.size();
    index_t in_off = 0;
    for (index_t i = 0; i < n; ++i) {
        dst[i] = src[in_off];
        for (index_t a = r - 1; a >= 0; --a) {
            size_t ua = static_cast<size_t>(a);
            if (++counter[ua] < out_dims[ua]) {
                in_off += out_stride_in[ua];
                break;
            }
            counter[ua] = 0;
            in_off -= out_stride_in[ua] * (out_dims[ua] - 1);
        }
    }
    return out;
}

/// Contract paired indices of a and b; result carries the unpaired indices of
/// a (in order) followed by the unpaired indices of b.
inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            const std::vector<std::pair<index_t, index_t>>& pairs) {
    const index_t ra = a.rank(), rb = b.rank();
    std::vector<bool> a_used(static_cast<size_t>(ra), false), b_used(static_cast<size_t>(rb), false);
    for (const auto& [ia, ib] : pairs) {
        detail::require(ia >= 0 && ia < ra && ib >= 0 && ib < rb, "contract: index out of range");
        detail::require(!a_used[static_cast<size_t>(ia)] && !b_used[static_cast<size_t>(ib)],
                        "contract: repeated index in pairs");
        detail::require(a.dim(ia) == b.dim(ib), "contract: dimension mismatch on pair (" +
                                                    std::to_string(ia) + "," + std::to_string(ib) + ") " +
                                                    a.shape_string() + " vs " + b.shape_string());
        a_used[static_cast<size_t>(ia)] = true;
        b_used[static_cast<size_t>(ib)] = true;
    }

    std::vector<index_t> a_free, b_free, a_con, b_con;
    for (index_t i = 0; i < ra; ++i) (a_used[static_cast<size_t>(i)] ? a_con : a_free).push_back(i);
    // contracted axes of b must follow the pair order used for a
    std::vector<index_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](index_t x, index_t y) {
        return pairs[static_cast<size_t>(x)].first < pairs[static_cast<size_t>(y)].first;
    });
    for (index_t k : order) b_con.push_back(pairs[static_cast<size_t>(k)].second);
    for (index_t i = 0; i < rb; ++i)
        if (!b_used[static_cast<size_t>(i)]) b_free.push_back(i);

    index_t m = 1, kdim = 1, n = 1;
    for (index_t i : a_free) m *= a.dim(i);
    for (index_t i : a_con) kdim *= a.dim(i);
    for (index_t i : b_free) n *= b.dim(i);

    std::vector<index_t> a_perm = a_free;
    a_perm.insert(a_perm.end(), a_con.begin(), a_con.end());
    std::vector<index_t> b_perm = b_con;
    b_perm.insert(b_perm.end(), b_free.begin(), b_free.end());

    DenseTensor am = permute(a, a_perm);
    DenseTensor bm = permute(b, b_perm);

    std::vector<index_t> out_dims;
    for (index_t i : a_free) out_dims.push_back(a.dim(i));
    for (index_t i : b_free) out_dims.push_back(b.dim(i));
    DenseTensor out(out_dims.empty() ? std::vector<index_t>{} : out_dims);

    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> A(am.data(), m, kdim);
    Eigen::Map<const Mat> B(bm.data(), kdim, n);
    Eigen::Map<Mat> C(out.data(), m, n);
    C.noalias() = A * B;
    return out;
}

/// Kronecker product of two matrices (2-index tensors): (a x b)[i1 i2, j1 j2].
inline DenseTensor kron(const DenseTensor& a, const DenseTensor& b) {
    detail::require(a.rank() == 2 && b.rank() == 2, "kron: matrices expected");
    DenseTensor t = contract(a, b, {});   // [i1, j1, i2, j2]
    t = permute(t, {0, 2, 1, 3});         // [i1, i2, j1, j2]
    return t.reshaped({a.dim(0) * b.dim(0), a.dim(1) * b.dim(1)});
}

/// Trace over one axis pair.
inline DenseTensor partial_trace(const DenseTensor& t, index_t ax1, index_t ax2) {
    detail::require(ax1 != ax2 && t.dim(ax1) == t.dim(ax2), "partial_trace: invalid axes");
    return contract(t, DenseTensor::identity(t.dim(ax1)), {{ax1, 0}, {ax2, 1}});
}

inline double trace2(const DenseTensor& m) {
    detail::require(m.rank() == 2 && m.dim(0) == m.dim(1), "trace2: square matrix expected");
    double s = 0.0;
    for (index_t i = 0; i < m.dim(0); ++i) s += m[i * m.dim(1) + i];
    return s;
}

/// Frobenius inner product of identically shaped tensors.
inline double inner(const DenseTensor& a, const DenseTensor& b) {
    detail::require(a.same_shape(b), "inner: shape mismatch");
    double s = 0.0;
    for (index_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Symmetry defect of a 2k-index operator viewed as a matrix over the first
/// half (out) vs second half (in) of its indices.
inline double hermiticity_defect(const DenseTensor& op) {
    detail::require(op.rank() % 2 == 0, "hermiticity_defect: even rank expected");
    const index_t half = op.rank() / 2;
    index_t d = 1;
    for (index_t i = 0; i < half; ++i) {
        detail::require(op.dim(i) == op.dim(i + half), "hermiticity_defect: in/out dims differ");
        d *= op.dim(i);
    }
    DenseTensor m = op.reshaped({d, d});
    double defect = 0.0;
    for (index_t i = 0; i < d; ++i)
        for (index_t j = 0; j < d; ++j)
            defect = std::max(defect, std::abs(m[i * d + j] - m[j * d + i]));
    return defect;
}

inline DenseTensor symmetrized(const DenseTensor& op) {
    const index_t half = op.rank() / 2;
    std::vector<index_t> perm;
    for (index_t i = 0; i < op.rank(); ++i) perm.push_back((i + half) % op.rank());
    DenseTensor t = permute(op, perm);
    t += op;
    t *= 0.5;
    return t;
}

}  // namespace holomera
