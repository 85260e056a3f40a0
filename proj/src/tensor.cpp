#include "dhan/tensor.hpp"

#include <algorithm>

#include "dhan/error.hpp"

namespace dhan {

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return from(rows, cols, std::vector<double>(rows * cols, 0.0), requires_grad);
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != rows * cols)
    throw Error(ErrorCode::ShapeMismatch, "tensor data length " +
                                              std::to_string(values.size()) +
                                              " does not match shape " + std::to_string(rows) +
                                              "x" + std::to_string(cols));
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->rows = rows;
  t.impl_->cols = cols;
  t.impl_->data = std::move(values);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::from(const Matrix& m, bool requires_grad) {
  return from(m.rows, m.cols, m.values, requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from(1, 1, {v}, requires_grad); }

double Tensor::item() const {
  if (size() != 1)
    throw Error(ErrorCode::NonScalarLoss, "item() on a " + std::to_string(rows()) + "x" +
                                              std::to_string(cols()) + " tensor");
  return impl_->data[0];
}

std::span<const double> Tensor::grad() const {
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

std::span<double> Tensor::mutable_grad() const {
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() const { impl_->grad.assign(impl_->data.size(), 0.0); }

Tensor Tensor::clone() const { return from(rows(), cols(), impl_->data, requires_grad()); }

void Tape::record(std::function<void()> backward_fn) {
  if (consumed_) throw Error(ErrorCode::TapeConsumed, "recording onto a consumed tape");
  entries_.push_back(std::move(backward_fn));
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw Error(ErrorCode::TapeConsumed, "backward already ran on this tape");
  if (!loss.defined() || loss.size() != 1)
    throw Error(ErrorCode::NonScalarLoss, "backward requires a 1x1 loss tensor");
  consumed_ = true;
  if (!loss.requires_grad()) return;
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
}

void Tape::reset() {
  entries_.clear();
  consumed_ = false;
}

}  // namespace dhan
