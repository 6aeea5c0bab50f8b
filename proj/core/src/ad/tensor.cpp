#include "hit/ad/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "hit/error.hpp"

namespace hit::ad {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {
void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
  for (auto d : shape)
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
}
}  // namespace

template <class T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<Node>()) {
  check_shape(shape);
  node_->values = std::make_shared<Buffer>(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : node_(std::make_shared<Node>()) {
  check_shape(shape);
  if (values.size() != shape_numel(shape))
    throw DimensionError("value count " + std::to_string(values.size()) + " does not match shape " +
                         shape_str(shape));
  node_->values = std::make_shared<Buffer>(values.begin(), values.end());
  node_->shape = std::move(shape);
}

template <class T>
const Shape& Tensor<T>::shape() const {
  if (!node_) throw ContractError("use of undefined tensor");
  return node_->shape;
}

template <class T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw IndexError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  return s[axis];
}

template <class T>
std::size_t Tensor<T>::numel() const {
  return shape_numel(shape());
}

template <class T>
std::span<T> Tensor<T>::data() {
  if (!node_) throw ContractError("use of undefined tensor");
  return {node_->values->data(), node_->values->size()};
}

template <class T>
std::span<const T> Tensor<T>::data() const {
  if (!node_) throw ContractError("use of undefined tensor");
  return {node_->values->data(), node_->values->size()};
}

template <class T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return data()[0];
}

template <class T>
bool Tensor<T>::requires_grad() const {
  return node_ && node_->requires_grad;
}

template <class T>
Tensor<T>& Tensor<T>::set_requires_grad(bool flag) {
  if (!node_) throw ContractError("use of undefined tensor");
  node_->requires_grad = flag;
  return *this;
}

template <class T>
bool Tensor<T>::has_grad() const {
  return node_ && !node_->grad.empty();
}

template <class T>
std::span<T> Tensor<T>::grad() {
  if (!node_) throw ContractError("use of undefined tensor");
  if (node_->grad.empty()) node_->grad.assign(node_->values->size(), T(0));
  return {node_->grad.data(), node_->grad.size()};
}

template <class T>
std::span<const T> Tensor<T>::grad() const {
  if (!node_) throw ContractError("use of undefined tensor");
  return {node_->grad.data(), node_->grad.size()};
}

template <class T>
Tensor<T> Tensor<T>::grad_tensor() const {
  if (!has_grad()) return Tensor(shape());
  return Tensor(shape(), std::vector<T>(node_->grad.begin(), node_->grad.end()));
}

template <class T>
void Tensor<T>::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <class T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(shape(), std::vector<T>(node_->values->begin(), node_->values->end()));
}

template <class T>
Tensor<T> Tensor<T>::share_values() const {
  Tensor out;
  out.node_ = std::make_shared<Node>();
  out.node_->shape = shape();
  out.node_->values = node_->values;
  out.node_->requires_grad = node_->requires_grad;
  return out;
}

template <class T>
Tensor<T> Tensor<T>::view(Shape new_shape) const {
  check_shape(new_shape);
  if (shape_numel(new_shape) != numel())
    throw DimensionError("cannot view " + shape_str(shape()) + " as " + shape_str(new_shape));
  Tensor out;
  out.node_ = std::make_shared<Node>();
  out.node_->shape = std::move(new_shape);
  out.node_->values = node_->values;
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace hit::ad
