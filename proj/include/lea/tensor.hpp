#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lea/errors.hpp"

namespace lea::numeric {

// Dense row-major 2-D tensor. Rank is fixed at 2: scalars are 1x1 and
// row vectors 1xN, which covers everything the model needs while keeping
// every primitive's shape rule explicit.
template <typename Real>
struct TensorT {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Real> v;

    TensorT() = default;
    TensorT(std::size_t r, std::size_t c, Real fill = Real(0))
        : rows(r), cols(c), v(r * c, fill) {}

    static TensorT scalar(Real x) {
        TensorT t(1, 1);
        t.v[0] = x;
        return t;
    }

    std::size_t numel() const { return rows * cols; }

    Real& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    Real at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

    bool same_shape(const TensorT& o) const {
        return rows == o.rows && cols == o.cols;
    }

    std::string shape_str() const {
        return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
    }

    void fill(Real x) { std::fill(v.begin(), v.end(), x); }
};

template <typename Real>
struct ParamT {
    std::string name;
    TensorT<Real> value;
    TensorT<Real> grad;

    ParamT() = default;
    ParamT(std::string n, TensorT<Real> val)
        : name(std::move(n)),
          value(std::move(val)),
          grad(value.rows, value.cols) {}

    void zero_grad() { grad.fill(Real(0)); }
};

using Tensor = TensorT<double>;
using Param = ParamT<double>;

template <typename Real>
inline void check_same_shape(const char* op, const TensorT<Real>& a,
                             const TensorT<Real>& b) {
    if (!a.same_shape(b))
        throw ContractViolation(std::string(op) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
}

}  // namespace lea::numeric
