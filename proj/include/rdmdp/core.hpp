#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdmdp {

using real_t = double;
using numvec = std::vector<real_t>;
using indvec = std::vector<int>;

/// Shape or index mismatch between containers that must agree.
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A value failed a domain invariant (row sums, ranges, ...).
struct invariant_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration would exceed the configured bound.
struct enumeration_too_large : std::runtime_error {
    std::size_t requested;
    std::size_t bound;
    enumeration_too_large(std::size_t requested_, std::size_t bound_)
        : std::runtime_error("policy enumeration of size " + std::to_string(requested_) +
                             " exceeds bound " + std::to_string(bound_)),
          requested(requested_), bound(bound_) {}
};

/// An iterative scheme hit its sweep cap before converging.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A theorem hypothesis does not hold for the given instance
/// (e.g. two kernels share an optimal policy, or a value gap is zero).
struct hypothesis_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Conditioning on an observation with zero marginal probability.
struct zero_marginal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal dense row-major matrix. Enough for Q-tables, likelihoods and costs.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, real_t fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw dimension_error("negative matrix dimension");
    }
    Matrix(int rows, int cols, numvec data) : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != static_cast<std::size_t>(rows) * cols)
            throw dimension_error("matrix data size does not match dimensions");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    real_t& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    real_t operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const numvec& data() const { return data_; }
    numvec& data() { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    numvec data_;
};

/// sup-norm distance between two equally sized vectors
inline real_t linf_distance(const numvec& a, const numvec& b) {
    if (a.size() != b.size()) throw dimension_error("linf_distance: size mismatch");
    real_t d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline real_t linf_norm(const numvec& a) {
    real_t d = 0.0;
    for (real_t x : a) d = std::max(d, std::abs(x));
    return d;
}

inline bool all_finite(const numvec& a) {
    for (real_t x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Checks that v is a probability vector: entries >= 0, sums to 1 within tol.
inline void check_distribution(const numvec& v, real_t tol = 1e-12,
                               const char* what = "distribution") {
    real_t sum = 0.0;
    for (real_t x : v) {
        if (!(x >= 0.0)) throw invariant_error(std::string(what) + ": negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol)
        throw invariant_error(std::string(what) + ": entries sum to " + std::to_string(sum));
}

} // namespace rdmdp
