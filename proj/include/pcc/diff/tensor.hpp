#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace pcc::diff {

using Shape = std::vector<std::size_t>;

// Dense row-major tensor. Every op in this library treats a tensor as a
// matrix: cols() is the last dimension and rows() the product of the rest.
template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, T fill = T(0));
  // Throws ShapeMismatch if data.size() != product(shape) or a dim is 0.
  Tensor(Shape shape, std::vector<T> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  void fill(T v);
  void reshape(Shape shape);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

template <class T>
struct Parameter;

template <class T>
class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
template <class T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t size() const { return value().size(); }
  bool requires_grad() const;

  Tape<T>* tape() const noexcept { return tape_; }
  std::uint32_t id() const noexcept { return id_; }

 private:
  Tape<T>* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

enum class Mode { Train, Eval };

// Append-only record of a forward computation. Inputs always precede
// outputs, so backward() walks nodes in reverse insertion order exactly once.
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  explicit Tape(Mode mode = Mode::Train, bool record = true)
      : mode_(mode), record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Mode mode() const noexcept { return mode_; }
  bool training() const noexcept { return mode_ == Mode::Train; }
  // False for inference tapes: no backward closures are kept.
  bool recording() const noexcept { return record_; }

  Var<T> constant(Tensor<T> value);
  Var<T> leaf(Tensor<T> value);
  // References p.value without copying; gradients accumulate into p.grad.
  Var<T> parameter(Parameter<T>& p);

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws NonScalarLoss.
  void backward(Var<T> loss);

  // Gradient of a node after backward(); empty span if it received none.
  std::span<const T> grad(Var<T> v) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }

  // Non-smooth decisions (ReLU signs, max/argmin picks) folded into one
  // hash when tracking is on; gradient checks use it to reject finite
  // differences that straddle a kink.
  void set_track_kinks(bool on) noexcept { track_kinks_ = on; }
  bool tracking_kinks() const noexcept { return track_kinks_; }
  void note_kink(std::uint64_t v) noexcept;
  std::uint64_t kink_signature() const noexcept { return kink_hash_; }

  // Op plumbing.
  Var<T> push(Tensor<T> value, std::initializer_list<Var<T>> inputs,
              BackwardFn backward);
  Var<T> push(Tensor<T> value, std::span<const Var<T>> inputs,
              BackwardFn backward);
  const Tensor<T>& value(std::uint32_t id) const;
  bool needs_grad(std::uint32_t id) const;
  // Zero-initialised on first access.
  std::span<T> grad_buffer(std::uint32_t id);

 private:
  struct Node {
    Tensor<T> owned;
    Parameter<T>* param = nullptr;
    std::vector<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Node& node(std::uint32_t id);
  const Node& node(std::uint32_t id) const;

  Mode mode_;
  bool record_;
  bool track_kinks_ = false;
  std::uint64_t kink_hash_ = 1469598103934665603ull;
  std::deque<Node> nodes_;
};

template <class T>
const Tensor<T>& Var<T>::value() const {
  return tape_->value(id_);
}

template <class T>
bool Var<T>::requires_grad() const {
  return tape_->needs_grad(id_);
}

// Throws NonFinite naming `where` if any element is NaN or infinite.
template <class T>
void check_finite(std::span<const T> data, const char* where);

}  // namespace pcc::diff
