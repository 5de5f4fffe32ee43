#include "hill/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "hill/error.hpp"
#include "hill/kernels.hpp"

namespace hill {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(std::string(op) + ": incompatible shapes " + a.shape() + " and " + b.shape());
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error("tensor data has " + std::to_string(data_.size()) + " values, shape needs " +
                std::to_string(rows * cols));
  }
}

Tensor Tensor::row_vector(std::vector<double> data) {
  const auto n = data.size();
  return Tensor(1, n, std::move(data));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Tensor::shape() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

void Tensor::add_scaled(const Tensor& other, double alpha) {
  if (!same_shape(other)) shape_error("add_scaled", *this, other);
  kernels::active().axpy(alpha, other.data_.data(), data_.data(), data_.size());
}

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) throw Error(std::string(where) + ": non-finite value in " + t.shape() + " tensor");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Tensor out(a.rows(), b.cols());
  kernels::active().gemm_nn(a.rows(), b.cols(), a.cols(), a.data().data(), b.data().data(),
                            out.data().data());
  return out;
}

MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& grad_out) {
  if (a.cols() != b.rows()) shape_error("matmul_backward", a, b);
  if (grad_out.rows() != a.rows() || grad_out.cols() != b.cols()) {
    shape_error("matmul_backward", grad_out, Tensor(a.rows(), b.cols()));
  }
  const auto& k = kernels::active();
  MatmulGrads g{Tensor(a.rows(), a.cols()), Tensor(b.rows(), b.cols())};
  // dA = dY B^T, dB = A^T dY
  k.gemm_nt(a.rows(), a.cols(), b.cols(), grad_out.data().data(), b.data().data(), g.a.data().data());
  k.gemm_tn(b.rows(), b.cols(), a.rows(), a.data().data(), grad_out.data().data(), g.b.data().data());
  return g;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) shape_error("add_bias", x, bias);
  Tensor out = x;
  const auto& k = kernels::active();
  for (std::size_t r = 0; r < x.rows(); ++r) k.axpy(1.0, bias.data().data(), out.row(r).data(), x.cols());
  return out;
}

AddBiasGrads add_bias_backward(const Tensor& grad_out) {
  return {grad_out, sum_rows(grad_out)};
}

Tensor relu(const Tensor& x) {
  Tensor out(x.rows(), x.cols());
  kernels::active().relu(x.data().data(), out.data().data(), x.size());
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (!x.same_shape(grad_out)) shape_error("relu_backward", x, grad_out);
  Tensor dx(x.rows(), x.cols());
  kernels::active().relu_backward(x.data().data(), grad_out.data().data(), dx.data().data(), x.size());
  return dx;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = x[i];
    // Split by sign so exp never overflows.
    if (z >= 0) {
      out[i] = 1.0 / (1.0 + std::exp(-z));
    } else {
      const double e = std::exp(z);
      out[i] = e / (1.0 + e);
    }
  }
  return out;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
  if (!y.same_shape(grad_out)) shape_error("sigmoid_backward", y, grad_out);
  Tensor dx(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = grad_out[i] * y[i] * (1.0 - y[i]);
  return dx;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) shape_error("concat_cols", a, b);
  Tensor out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
    std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

ConcatGrads concat_cols_backward(const Tensor& grad_out, std::size_t a_cols) {
  if (a_cols > grad_out.cols()) {
    throw Error("concat_cols_backward: split column " + std::to_string(a_cols) + " beyond " +
                grad_out.shape());
  }
  ConcatGrads g{Tensor(grad_out.rows(), a_cols), Tensor(grad_out.rows(), grad_out.cols() - a_cols)};
  for (std::size_t r = 0; r < grad_out.rows(); ++r) {
    auto src = grad_out.row(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(a_cols), g.a.row(r).begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(a_cols), src.end(), g.b.row(r).begin());
  }
  return g;
}

Tensor sum_rows(const Tensor& x) {
  Tensor out(1, x.cols());
  const auto& k = kernels::active();
  for (std::size_t r = 0; r < x.rows(); ++r) k.axpy(1.0, x.row(r).data(), out.data().data(), x.cols());
  return out;
}

Tensor sum_rows_backward(const Tensor& grad_out, std::size_t rows) {
  if (grad_out.rows() != 1) shape_error("sum_rows_backward", grad_out, Tensor(1, grad_out.cols()));
  Tensor dx(rows, grad_out.cols());
  for (std::size_t r = 0; r < rows; ++r) std::copy(grad_out.data().begin(), grad_out.data().end(), dx.row(r).begin());
  return dx;
}

Tensor mean_rows(const Tensor& x) {
  if (x.rows() == 0) throw Error("mean_rows: tensor has no rows");
  Tensor out = sum_rows(x);
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (auto& v : out.data()) v *= inv;
  return out;
}

Tensor mean_rows_backward(const Tensor& grad_out, std::size_t rows) {
  if (rows == 0) throw Error("mean_rows_backward: zero rows");
  Tensor dx = sum_rows_backward(grad_out, rows);
  const double inv = 1.0 / static_cast<double>(rows);
  for (auto& v : dx.data()) v *= inv;
  return dx;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error("cosine_similarity: lengths " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  const auto& k = kernels::active();
  const double nu = std::sqrt(k.dot(u.data(), u.data(), u.size()));
  const double nv = std::sqrt(k.dot(v.data(), v.data(), v.size()));
  if (nu == 0.0 || nv == 0.0) throw Error("cosine_similarity: zero-norm input");
  return k.dot(u.data(), v.data(), u.size()) / (nu * nv);
}

CosineGrads cosine_similarity_backward(std::span<const double> u, std::span<const double> v,
                                       double grad_out) {
  const double s = cosine_similarity(u, v);
  const auto& k = kernels::active();
  const double nu = std::sqrt(k.dot(u.data(), u.data(), u.size()));
  const double nv = std::sqrt(k.dot(v.data(), v.data(), v.size()));
  // d cos / du = v / (|u||v|) - cos * u / |u|^2
  CosineGrads g{std::vector<double>(u.size()), std::vector<double>(v.size())};
  for (std::size_t i = 0; i < u.size(); ++i) {
    g.u[i] = grad_out * (v[i] / (nu * nv) - s * u[i] / (nu * nu));
    g.v[i] = grad_out * (u[i] / (nu * nv) - s * v[i] / (nv * nv));
  }
  return g;
}

}  // namespace hill
