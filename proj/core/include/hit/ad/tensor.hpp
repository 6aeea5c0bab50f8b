#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace hit::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major tensor handle.
///
/// Copies share storage: a Tensor is a reference to a node holding the
/// values, an optional gradient buffer of identical shape, and the
/// requires_grad flag. Values are treated as immutable once an op has
/// produced them; only optimizers write into parameter data in place.
namespace detail {

// Buffers start on a 64-byte boundary so vectorized kernels split their
// work identically no matter which thread or arena allocated them.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{64})); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{64}); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

}  // namespace detail

template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), T(1)); }
  static Tensor scalar(T value) { return Tensor(Shape{1}, value); }
  static Tensor of(Shape shape, std::initializer_list<T> values) {
    return Tensor(std::move(shape), std::vector<T>(values));
  }

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<T> data();
  std::span<const T> data() const;
  T* raw() { return data().data(); }
  const T* raw() const { return data().data(); }
  T& operator[](std::size_t i) { return data()[i]; }
  const T& operator[](std::size_t i) const { return data()[i]; }
  T item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);

  /// True once a gradient buffer has been allocated for this node.
  bool has_grad() const;
  /// Gradient buffer, allocated (zero-filled) on first access.
  std::span<T> grad();
  /// Read-only view; empty when no gradient was ever accumulated.
  std::span<const T> grad() const;
  Tensor grad_tensor() const;
  void zero_grad();

  /// Deep copy of values; the copy has no gradient and is a leaf.
  Tensor clone() const;
  /// New node sharing this tensor's value buffer but with its own
  /// gradient slot. Used to give worker threads private gradients.
  Tensor share_values() const;
  /// Same values viewed under another shape; no gradient link.
  Tensor view(Shape shape) const;

  bool same_node(const Tensor& other) const noexcept { return node_ == other.node_; }

 private:
  using Buffer = std::vector<T, detail::AlignedAllocator<T>>;
  struct Node {
    Shape shape;
    std::shared_ptr<Buffer> values;
    Buffer grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Node> node_;
};

template <class U, class T>
Tensor<U> cast(const Tensor<T>& t) {
  std::vector<U> out(t.numel());
  auto src = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(src[i]);
  return Tensor<U>(t.shape(), std::move(out));
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace hit::ad
