#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ligo/errors.hpp"

namespace ligo {

/// Dense row-major matrix. Storage is row-major regardless of the
/// column-major vec() convention below; the two are independent.
template <class T>
class Mat {
  public:
    Mat() = default;

    Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(check_dims(rows, cols), T(0)) {}

    static Mat zeros(int rows, int cols) { return Mat(rows, cols); }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    static Mat from_rows(std::initializer_list<std::initializer_list<T>> rows) {
        const int r = static_cast<int>(rows.size());
        const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
        Mat m(r, c);
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != c)
                throw shape_error("from_rows: ragged initializer");
            int j = 0;
            for (const T& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    /// Column vector from a flat list.
    static Mat col(std::initializer_list<T> values) {
        Mat m(static_cast<int>(values.size()), 1);
        int i = 0;
        for (const T& v : values) m(i++, 0) = v;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    using Emap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using CEmap =
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    Emap map() { return Emap(data_.data(), rows_, cols_); }
    CEmap map() const { return CEmap(data_.data(), rows_, cols_); }

    bool operator==(const Mat& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

  private:
    static std::size_t check_dims(int rows, int cols) {
        if (rows < 0 || cols < 0) throw shape_error("matrix dimensions must be non-negative");
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using MatF = Mat<float>;
using MatD = Mat<double>;

namespace detail {
inline void require(bool ok, const std::string& msg) {
    if (!ok) throw shape_error(msg);
}
} // namespace detail

/// a * b. Dense product via Eigen.
template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
    if (a.cols() != b.rows())
        throw shape_error("matmul: inner dimensions differ, " + a.shape_str() + " vs " +
                          b.shape_str());
    Mat<T> c(a.rows(), b.cols());
    c.map().noalias() = a.map() * b.map();
    return c;
}

/// a * b^T.
template <class T>
Mat<T> matmul_nt(const Mat<T>& a, const Mat<T>& b) {
    if (a.cols() != b.cols())
        throw shape_error("matmul_nt: inner dimensions differ, " + a.shape_str() + " vs " +
                          b.shape_str() + "^T");
    Mat<T> c(a.rows(), b.rows());
    c.map().noalias() = a.map() * b.map().transpose();
    return c;
}

/// a^T * b.
template <class T>
Mat<T> matmul_tn(const Mat<T>& a, const Mat<T>& b) {
    if (a.rows() != b.rows())
        throw shape_error("matmul_tn: inner dimensions differ, " + a.shape_str() + "^T vs " +
                          b.shape_str());
    Mat<T> c(a.cols(), b.cols());
    c.map().noalias() = a.map().transpose() * b.map();
    return c;
}

template <class T>
Mat<T> transpose(const Mat<T>& a) {
    Mat<T> t(a.cols(), a.rows());
    t.map() = a.map().transpose();
    return t;
}

/// y += alpha * x, elementwise.
template <class T>
void add_scaled(Mat<T>& y, const Mat<T>& x, T alpha) {
    if (!y.same_shape(x))
        throw shape_error("add_scaled: shapes differ, " + y.shape_str() + " vs " + x.shape_str());
    y.map() += alpha * x.map();
}

template <class T>
void scale(Mat<T>& m, T alpha) {
    m.map() *= alpha;
}

/// Column-major vectorization: columns stacked top to bottom, so that
/// (A (x) B) vec(W) = vec(B W A^T) holds. Returns an n*1 matrix.
template <class T>
Mat<T> vec(const Mat<T>& w) {
    Mat<T> v(w.rows() * w.cols(), 1);
    std::size_t k = 0;
    for (int c = 0; c < w.cols(); ++c)
        for (int r = 0; r < w.rows(); ++r) v(static_cast<int>(k++), 0) = w(r, c);
    return v;
}

/// Inverse of vec(); exact round-trip.
template <class T>
Mat<T> unvec(const Mat<T>& v, int rows, int cols) {
    if (v.cols() != 1 || v.rows() != rows * cols)
        throw shape_error("unvec: vector " + v.shape_str() + " does not hold " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " entries");
    Mat<T> w(rows, cols);
    std::size_t k = 0;
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) w(r, c) = v(static_cast<int>(k++), 0);
    return w;
}

inline constexpr std::int64_t kKronDefaultCap = 1'000'000;

/// Dense Kronecker product a (x) b. Exists as a verification oracle only,
/// hence the materialization cap.
template <class T>
Mat<T> kron(const Mat<T>& a, const Mat<T>& b, std::int64_t cap_entries = kKronDefaultCap) {
    const std::int64_t entries = static_cast<std::int64_t>(a.rows()) * b.rows() *
                                 static_cast<std::int64_t>(a.cols()) * b.cols();
    if (entries > cap_entries) {
        std::ostringstream os;
        os << "kron: " << a.shape_str() << " (x) " << b.shape_str() << " has " << entries
           << " entries, exceeding cap " << cap_entries;
        throw size_error(os.str());
    }
    Mat<T> k(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const T aij = a(i, j);
            for (int p = 0; p < b.rows(); ++p)
                for (int q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

/// Applies a (x) b to vec(w) without materializing the product:
/// returns B W A^T (shape b.rows x a.rows), which equals
/// unvec((a (x) b) vec(w)) under the column-major vec convention.
template <class T>
Mat<T> kron_apply(const Mat<T>& a, const Mat<T>& b, const Mat<T>& w) {
    if (b.cols() != w.rows() || a.cols() != w.cols())
        throw shape_error("kron_apply: factors " + a.shape_str() + ", " + b.shape_str() +
                          " do not conform with " + w.shape_str());
    return matmul_nt(matmul(b, w), a);
}

template <class T>
double max_abs_diff(const Mat<T>& a, const Mat<T>& b) {
    if (!a.same_shape(b))
        throw shape_error("max_abs_diff: shapes differ, " + a.shape_str() + " vs " +
                          b.shape_str());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(double(a.values()[i]) - double(b.values()[i])));
    return m;
}

template <class T>
bool all_finite(const Mat<T>& m) {
    for (const T& v : m.values())
        if (!std::isfinite(double(v))) return false;
    return true;
}

/// Central-difference gradient oracle: (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).
/// f must be deterministic given x.
inline std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f, std::span<const double> x,
    double eps) {
    if (!(eps > 0.0)) throw numeric_error("finite_diff_grad: eps must be positive");
    std::vector<double> point(x.begin(), x.end());
    std::vector<double> grad(point.size(), 0.0);
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + eps;
        const double fp = f(point);
        point[i] = saved - eps;
        const double fm = f(point);
        point[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw numeric_error("finite_diff_grad: objective returned a non-finite value");
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

} // namespace ligo
