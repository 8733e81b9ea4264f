#include "rrmar/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rrmar {

namespace {

Index shape_product(const std::vector<Index>& shape) {
    Index n = 1;
    for (Index d : shape) n *= d;
    return n;
}

void check_shape(const std::vector<Index>& shape) {
    if (shape.empty()) throw std::invalid_argument("tensor shape must have at least one mode");
    for (Index d : shape) {
        if (d < 1) throw std::invalid_argument("tensor dimensions must be positive");
    }
}

void check_mode(const DenseTensor& x, Index mode) {
    if (mode < 0 || mode >= x.order()) {
        throw std::invalid_argument("mode " + std::to_string(mode) + " out of range for order " +
                                    std::to_string(x.order()) + " tensor");
    }
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Index> shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_ = Vector::Zero(shape_product(shape_));
}

DenseTensor::DenseTensor(std::vector<Index> shape, Vector data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_product(shape_)) {
        throw std::invalid_argument("tensor data length does not match shape product");
    }
}

Index DenseTensor::linear_index(std::initializer_list<Index> idx) const {
    if (static_cast<Index>(idx.size()) != order()) {
        throw std::invalid_argument("index arity does not match tensor order");
    }
    Index linear = 0;
    Index stride = 1;
    Index k = 0;
    for (Index n : idx) {
        if (n < 0 || n >= shape_[static_cast<std::size_t>(k)]) {
            throw std::invalid_argument("tensor index out of range");
        }
        linear += n * stride;
        stride *= shape_[static_cast<std::size_t>(k)];
        ++k;
    }
    return linear;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (!same_shape(other)) throw std::invalid_argument("tensor shape mismatch in addition");
    data_ += other.data_;
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (!same_shape(other)) throw std::invalid_argument("tensor shape mismatch in subtraction");
    data_ -= other.data_;
    return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { a += b; return a; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { a -= b; return a; }
DenseTensor operator*(double s, DenseTensor a) { a *= s; return a; }

Matrix unfold(const DenseTensor& x, Index mode) {
    check_mode(x, mode);
    const auto& shape = x.shape();
    const Index rows = shape[static_cast<std::size_t>(mode)];
    const Index cols = x.size() / rows;

    Index below = 1;  // product of dimensions with mode index < mode
    for (Index m = 0; m < mode; ++m) below *= shape[static_cast<std::size_t>(m)];

    Matrix out(rows, cols);
    const Index block = below * rows;
    for (Index idx = 0; idx < x.size(); ++idx) {
        const Index r = (idx / below) % rows;
        const Index c = idx % below + (idx / block) * below;
        out(r, c) = x[idx];
    }
    return out;
}

DenseTensor refold(const Matrix& m, Index mode, const std::vector<Index>& shape) {
    check_shape(shape);
    if (mode < 0 || mode >= static_cast<Index>(shape.size())) {
        throw std::invalid_argument("refold mode out of range");
    }
    const Index rows = shape[static_cast<std::size_t>(mode)];
    const Index total = shape_product(shape);
    if (m.rows() != rows || m.cols() != total / rows) {
        throw std::invalid_argument("refold matrix dimensions do not match target shape");
    }

    Index below = 1;
    for (Index k = 0; k < mode; ++k) below *= shape[static_cast<std::size_t>(k)];

    Vector data(total);
    const Index block = below * rows;
    for (Index idx = 0; idx < total; ++idx) {
        const Index r = (idx / below) % rows;
        const Index c = idx % below + (idx / block) * below;
        data[idx] = m(r, c);
    }
    return DenseTensor(shape, std::move(data));
}

namespace {

// Row/column strides of a multi-mode matricization: ascending-mode cumulative
// products inside and outside the row set.
struct MultiStrides {
    std::vector<Index> row_stride;  // per mode; 0 where unused
    std::vector<Index> col_stride;
    Index rows = 1;
    Index cols = 1;
};

MultiStrides multi_strides(const std::vector<Index>& shape, const std::vector<Index>& row_modes) {
    const Index order = static_cast<Index>(shape.size());
    if (row_modes.empty()) throw std::invalid_argument("multi_unfold requires a nonempty mode set");
    for (std::size_t i = 0; i < row_modes.size(); ++i) {
        if (row_modes[i] < 0 || row_modes[i] >= order) {
            throw std::invalid_argument("multi_unfold mode out of range");
        }
        if (i > 0 && row_modes[i] <= row_modes[i - 1]) {
            throw std::invalid_argument("multi_unfold modes must be strictly ascending");
        }
    }

    std::vector<bool> in_rows(static_cast<std::size_t>(order), false);
    for (Index m : row_modes) in_rows[static_cast<std::size_t>(m)] = true;

    MultiStrides s;
    s.row_stride.assign(static_cast<std::size_t>(order), 0);
    s.col_stride.assign(static_cast<std::size_t>(order), 0);
    for (Index m = 0; m < order; ++m) {
        if (in_rows[static_cast<std::size_t>(m)]) {
            s.row_stride[static_cast<std::size_t>(m)] = s.rows;
            s.rows *= shape[static_cast<std::size_t>(m)];
        } else {
            s.col_stride[static_cast<std::size_t>(m)] = s.cols;
            s.cols *= shape[static_cast<std::size_t>(m)];
        }
    }
    return s;
}

}  // namespace

Matrix multi_unfold(const DenseTensor& x, const std::vector<Index>& row_modes) {
    const auto& shape = x.shape();
    const MultiStrides s = multi_strides(shape, row_modes);

    Matrix out(s.rows, s.cols);
    std::vector<Index> idx(shape.size(), 0);
    for (Index linear = 0; linear < x.size(); ++linear) {
        Index r = 0, c = 0;
        for (std::size_t m = 0; m < shape.size(); ++m) {
            r += idx[m] * s.row_stride[m];
            c += idx[m] * s.col_stride[m];
        }
        out(r, c) = x[linear];
        for (std::size_t m = 0; m < shape.size(); ++m) {
            if (++idx[m] < shape[m]) break;
            idx[m] = 0;
        }
    }
    return out;
}

DenseTensor multi_refold(const Matrix& m, const std::vector<Index>& row_modes,
                         const std::vector<Index>& shape) {
    check_shape(shape);
    const MultiStrides s = multi_strides(shape, row_modes);
    if (m.rows() != s.rows || m.cols() != s.cols) {
        throw std::invalid_argument("multi_refold matrix dimensions do not match target shape");
    }

    Vector data(shape_product(shape));
    std::vector<Index> idx(shape.size(), 0);
    for (Index linear = 0; linear < data.size(); ++linear) {
        Index r = 0, c = 0;
        for (std::size_t k = 0; k < shape.size(); ++k) {
            r += idx[k] * s.row_stride[k];
            c += idx[k] * s.col_stride[k];
        }
        data[linear] = m(r, c);
        for (std::size_t k = 0; k < shape.size(); ++k) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return DenseTensor(shape, std::move(data));
}

DenseTensor mode_product(const DenseTensor& x, const Matrix& u, Index mode) {
    check_mode(x, mode);
    if (u.cols() != x.dim(mode)) {
        throw std::invalid_argument("mode_product inner dimension mismatch");
    }
    std::vector<Index> new_shape = x.shape();
    new_shape[static_cast<std::size_t>(mode)] = u.rows();
    return refold(u * unfold(x, mode), mode, new_shape);
}

DenseTensor contract(const DenseTensor& x, const DenseTensor& y, Index n_modes) {
    if (n_modes < 1 || n_modes > x.order() || n_modes > y.order()) {
        throw std::invalid_argument("contract: invalid number of contraction modes");
    }
    const Index lead = x.order() - n_modes;
    Index shared = 1;
    for (Index k = 0; k < n_modes; ++k) {
        const Index xs = x.dim(lead + k);
        const Index ys = y.dim(k);
        if (xs != ys) throw std::invalid_argument("contract: contraction dimensions do not match");
        shared *= xs;
    }

    std::vector<Index> out_shape;
    for (Index k = 0; k < lead; ++k) out_shape.push_back(x.dim(k));
    for (Index k = n_modes; k < y.order(); ++k) out_shape.push_back(y.dim(k));
    if (out_shape.empty()) out_shape.push_back(1);  // fully contracted pair -> scalar

    // With mode-0-fastest linearization the leading/trailing mode groups are
    // contiguous, so the contraction is a plain matrix product of reshapes.
    const Index m = x.size() / shared;
    const Index q = y.size() / shared;
    Eigen::Map<const Matrix> xm(x.data().data(), m, shared);
    Eigen::Map<const Matrix> ym(y.data().data(), shared, q);
    Matrix prod = xm * ym;
    return DenseTensor(out_shape, Eigen::Map<Vector>(prod.data(), prod.size()));
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

DenseTensor outer(const DenseTensor& x, const DenseTensor& y) {
    std::vector<Index> shape = x.shape();
    shape.insert(shape.end(), y.shape().begin(), y.shape().end());
    Matrix prod = x.data() * y.data().transpose();
    return DenseTensor(std::move(shape), Eigen::Map<Vector>(prod.data(), prod.size()));
}

DenseTensor tensor_from_matrix(const Matrix& m) {
    return DenseTensor({m.rows(), m.cols()}, Eigen::Map<const Vector>(m.data(), m.size()));
}

}  // namespace rrmar
