#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hit/ad/tensor.hpp"

namespace hit::ad {

/// Define-by-run record of differentiable operations.
///
/// Ops consult the tape that is active on the calling thread; while a
/// Recording guard is alive, every op with a requires_grad input appends
/// its backward closure here. Entries are stored in execution order, so
/// replaying them back to front is a reverse topological traversal.
/// Tapes are thread-confined: each worker owns its own.
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  class Recording {
   public:
    explicit Recording(Tape& tape);
    ~Recording();
    Recording(const Recording&) = delete;
    Recording& operator=(const Recording&) = delete;

   private:
    Tape* previous_;
  };

  static Tape* active() noexcept;

  /// Registers `output` as produced by an op whose adjoint is `fn`.
  void push(const Tensor<T>& output, BackwardFn fn);

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded adjoint in reverse.
  /// Throws ContractError unless `loss` holds exactly one element.
  void backward(Tensor<T> loss);

  std::size_t size() const noexcept { return entries_.size(); }
  void clear() noexcept { entries_.clear(); }

 private:
  struct Entry {
    Tensor<T> output;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
};

/// True when an op with these inputs must be recorded on the active tape.
template <class T, class... Ts>
bool needs_grad(const Tensor<T>& first, const Ts&... rest) {
  if (Tape<T>::active() == nullptr) return false;
  return (first.requires_grad() || ... || rest.requires_grad());
}

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace hit::ad
