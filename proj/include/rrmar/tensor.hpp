#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <vector>

namespace rrmar {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense K-order real tensor. Entries are linearized column-major over the
// modes with mode 0 fastest, i.e. linear index = sum_k n_k * prod_{m<k} N_m.
// All modes are 0-based throughout the library.
class DenseTensor {
public:
    DenseTensor() = default;

    // Zero tensor of the given shape.
    explicit DenseTensor(std::vector<Index> shape);

    // Adopts `data` (length must equal the shape product) in linearization order.
    DenseTensor(std::vector<Index> shape, Vector data);

    Index order() const { return static_cast<Index>(shape_.size()); }
    const std::vector<Index>& shape() const { return shape_; }
    Index dim(Index mode) const { return shape_.at(static_cast<std::size_t>(mode)); }
    Index size() const { return data_.size(); }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    double operator[](Index linear) const { return data_[linear]; }
    double& operator[](Index linear) { return data_[linear]; }

    double operator()(std::initializer_list<Index> idx) const { return data_[linear_index(idx)]; }
    double& operator()(std::initializer_list<Index> idx) { return data_[linear_index(idx)]; }

    Index linear_index(std::initializer_list<Index> idx) const;

    double norm() const { return data_.norm(); }

    bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double s) { data_ *= s; return *this; }

private:
    std::vector<Index> shape_;
    Vector data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double s, DenseTensor a);

// Mode-k unfolding: N_k x prod_{i != k} N_i matrix. Element (n_0,...,n_{K-1})
// lands in row n_k and the column obtained by collapsing the remaining modes
// in ascending order (mode strides shrink across k).
Matrix unfold(const DenseTensor& x, Index mode);

// Inverse of unfold for the given target shape.
DenseTensor refold(const Matrix& m, Index mode, const std::vector<Index>& shape);

// Multi-mode matricization: rows collapse the modes in `row_modes` (strictly
// ascending), columns collapse the complement, both with ascending-mode strides.
Matrix multi_unfold(const DenseTensor& x, const std::vector<Index>& row_modes);

// Inverse of multi_unfold.
DenseTensor multi_refold(const Matrix& m, const std::vector<Index>& row_modes,
                         const std::vector<Index>& shape);

// k-mode product x ×_k u: replaces N_k with rows(u).
DenseTensor mode_product(const DenseTensor& x, const Matrix& u, Index mode);

// Contracted product over the last `n_modes` of x and the first `n_modes` of y.
DenseTensor contract(const DenseTensor& x, const DenseTensor& y, Index n_modes);

// Kronecker product with the usual block layout kron(a,b)(i*rb+k, j*cb+l) = a(i,j) b(k,l).
Matrix kron(const Matrix& a, const Matrix& b);

// Tensor outer product: mode lists concatenate, element (i...,j...) = x(i...) * y(j...).
DenseTensor outer(const DenseTensor& x, const DenseTensor& y);

// Column-major vectorization of a matrix as an order-2 tensor helper.
DenseTensor tensor_from_matrix(const Matrix& m);

}  // namespace rrmar
