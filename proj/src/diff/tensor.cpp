#include "pcc/diff/tensor.hpp"

#include <cmath>
#include <string>

#include "pcc/diff/params.hpp"
#include "pcc/error.hpp"

namespace pcc::diff {

template <class T>
Tensor<T>::Tensor(std::size_t rows, std::size_t cols, T fill)
    : shape_{rows, cols}, data_(rows * cols, fill) {
  if (rows == 0 || cols == 0)
    fail(ErrorKind::ShapeMismatch, "tensor dimensions must be positive");
}

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  std::size_t n = 1;
  for (const auto d : shape_) {
    if (d == 0)
      fail(ErrorKind::ShapeMismatch, "tensor dimensions must be positive");
    n *= d;
  }
  if (shape_.empty() || n != data_.size())
    fail(ErrorKind::ShapeMismatch,
         "shape holds " + std::to_string(n) + " elements, data has " +
             std::to_string(data_.size()));
}

template <class T>
std::size_t Tensor<T>::rows() const noexcept {
  if (shape_.empty()) return 0;
  std::size_t r = 1;
  for (std::size_t i = 0; i + 1 < shape_.size(); ++i) r *= shape_[i];
  return r;
}

template <class T>
std::size_t Tensor<T>::cols() const noexcept {
  return shape_.empty() ? 0 : shape_.back();
}

template <class T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <class T>
void Tensor<T>::reshape(Shape shape) {
  *this = Tensor<T>(std::move(shape), std::move(data_));
}

template <class T>
void check_finite(std::span<const T> data, const char* where) {
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!std::isfinite(data[i]))
      fail(ErrorKind::NonFinite, std::string("non-finite value in ") + where +
                                     " at element " + std::to_string(i));
}

template <class T>
typename Tape<T>::Node& Tape<T>::node(std::uint32_t id) {
  return nodes_.at(id);
}

template <class T>
const typename Tape<T>::Node& Tape<T>::node(std::uint32_t id) const {
  return nodes_.at(id);
}

template <class T>
const Tensor<T>& Tape<T>::value(std::uint32_t id) const {
  const Node& n = node(id);
  return n.param ? n.param->value : n.owned;
}

template <class T>
bool Tape<T>::needs_grad(std::uint32_t id) const {
  return node(id).requires_grad;
}

template <class T>
std::span<T> Tape<T>::grad_buffer(std::uint32_t id) {
  Node& n = node(id);
  if (n.param) return n.param->grad.data();
  if (n.grad.empty()) n.grad.assign(n.owned.size(), T(0));
  return n.grad;
}

template <class T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  nodes_.push_back(Node{std::move(value), nullptr, {}, false, {}});
  return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
Var<T> Tape<T>::leaf(Tensor<T> value) {
  check_finite<T>(value.data(), "leaf");
  nodes_.push_back(Node{std::move(value), nullptr, {}, record_, {}});
  return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
Var<T> Tape<T>::parameter(Parameter<T>& p) {
  const bool tracked = record_ && p.trainable;
  if (tracked && p.grad.size() != p.value.size())
    p.grad = Tensor<T>(p.value.shape(), std::vector<T>(p.value.size(), T(0)));
  nodes_.push_back(Node{{}, &p, {}, tracked, {}});
  return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
Var<T> Tape<T>::push(Tensor<T> value, std::initializer_list<Var<T>> inputs,
                     BackwardFn backward) {
  return push(std::move(value),
              std::span<const Var<T>>(inputs.begin(), inputs.size()),
              std::move(backward));
}

template <class T>
Var<T> Tape<T>::push(Tensor<T> value, std::span<const Var<T>> inputs,
                     BackwardFn backward) {
  check_finite<T>(value.data(), "op output");
  bool any = false;
  if (record_)
    for (const auto& in : inputs) any = any || node(in.id()).requires_grad;
  nodes_.push_back(
      Node{std::move(value), nullptr, {}, any, any ? std::move(backward) : BackwardFn{}});
  return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.size() != 1)
    fail(ErrorKind::NonScalarLoss,
         "backward needs a scalar loss, got " + std::to_string(loss.size()) +
             " elements");
  if (!node(loss.id()).requires_grad) return;
  grad_buffer(loss.id())[0] += T(1);
  for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
    Node& n = node(id);
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
  }
}

template <class T>
std::span<const T> Tape<T>::grad(Var<T> v) const {
  const Node& n = node(v.id());
  if (n.param) return n.param->grad.data();
  return n.grad;
}

template <class T>
void Tape<T>::note_kink(std::uint64_t v) noexcept {
  // FNV-1a over the 8 bytes of v.
  for (int i = 0; i < 8; ++i) {
    kink_hash_ ^= (v >> (8 * i)) & 0xffu;
    kink_hash_ *= 1099511628211ull;
  }
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template void check_finite<float>(std::span<const float>, const char*);
template void check_finite<double>(std::span<const double>, const char*);

}  // namespace pcc::diff
