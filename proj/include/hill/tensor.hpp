#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hill {

/// Dense row-major matrix of doubles. Vectors are 1 x n tensors.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor row_vector(std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape() const;

  /// this += alpha * other
  void add_scaled(const Tensor& other, double alpha = 1.0);

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Throws hill::Error naming `where` if any entry is NaN or infinite.
void require_finite(const Tensor& t, const char* where);

// Each op below has a matching *_backward that maps the output gradient to
// input gradients. Shape mismatches throw hill::Error naming both shapes.

Tensor matmul(const Tensor& a, const Tensor& b);
struct MatmulGrads {
  Tensor a;
  Tensor b;
};
MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& grad_out);

/// x (n x m) plus a 1 x m bias broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);
struct AddBiasGrads {
  Tensor x;
  Tensor bias;
};
AddBiasGrads add_bias_backward(const Tensor& grad_out);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

Tensor sigmoid(const Tensor& x);
/// Takes the forward output y = sigmoid(x).
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

Tensor concat_cols(const Tensor& a, const Tensor& b);
struct ConcatGrads {
  Tensor a;
  Tensor b;
};
ConcatGrads concat_cols_backward(const Tensor& grad_out, std::size_t a_cols);

/// Column sums as a 1 x m tensor.
Tensor sum_rows(const Tensor& x);
Tensor sum_rows_backward(const Tensor& grad_out, std::size_t rows);

Tensor mean_rows(const Tensor& x);
Tensor mean_rows_backward(const Tensor& grad_out, std::size_t rows);

/// u.v / (|u| |v|). Throws on length mismatch or a zero-norm input.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
struct CosineGrads {
  std::vector<double> u;
  std::vector<double> v;
};
CosineGrads cosine_similarity_backward(std::span<const double> u, std::span<const double> v,
                                       double grad_out);

}  // namespace hill
