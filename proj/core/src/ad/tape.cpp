#include "hit/ad/tape.hpp"

#include "hit/error.hpp"

namespace hit::ad {

namespace {
template <class T>
Tape<T>*& active_slot() {
  thread_local Tape<T>* slot = nullptr;
  return slot;
}
}  // namespace

template <class T>
Tape<T>::Recording::Recording(Tape& tape) : previous_(active_slot<T>()) {
  active_slot<T>() = &tape;
}

template <class T>
Tape<T>::Recording::~Recording() {
  active_slot<T>() = previous_;
}

template <class T>
Tape<T>* Tape<T>::active() noexcept {
  return active_slot<T>();
}

template <class T>
void Tape<T>::push(const Tensor<T>& output, BackwardFn fn) {
  entries_.push_back(Entry{output, std::move(fn)});
}

template <class T>
void Tape<T>::backward(Tensor<T> loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw ContractError("backward() requires a scalar loss, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  loss.grad()[0] += T(1);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    // Entries whose output never received a gradient are unreachable from loss.
    if (!it->output.has_grad()) continue;
    it->fn();
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace hit::ad
