#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pcc/diff/tensor.hpp"

namespace pcc::diff {

template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  // Buffers such as batch-norm running statistics are stored and
  // checkpointed alongside weights but never touched by the optimizer.
  bool trainable = true;
};

// Named parameters in registration order. References stay valid for the
// lifetime of the store.
template <class T>
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : rng_(seed) {}
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  // Weight [fan_in, fan_out] initialised uniform in +-1/sqrt(fan_in).
  Parameter<T>& weight(const std::string& name, std::size_t fan_in,
                       std::size_t fan_out);
  // Bias [1, width] initialised uniform in +-1/sqrt(fan_in).
  Parameter<T>& bias(const std::string& name, std::size_t fan_in,
                     std::size_t width);
  Parameter<T>& constant(const std::string& name, std::size_t rows,
                         std::size_t cols, T value, bool trainable);

  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;

  std::deque<Parameter<T>>& all() noexcept { return params_; }
  const std::deque<Parameter<T>>& all() const noexcept { return params_; }

  std::size_t trainable_count() const;
  void zero_grad();
  void scale_grad(T factor);

 private:
  Parameter<T>& add(const std::string& name, Tensor<T> value, bool trainable);

  std::mt19937_64 rng_;
  std::deque<Parameter<T>> params_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class T>
struct AdamMoments {
  std::vector<T> m;
  std::vector<T> v;
};

// One bias-corrected Adam update of a flat parameter block. `step` is the
// 1-based update count. Throws ShapeMismatch if sizes disagree.
template <class T>
void adam_update(std::span<T> param, std::span<const T> grad,
                 AdamMoments<T>& state, std::uint64_t step,
                 const AdamConfig& cfg);

template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  // Applies the gradients currently stored in every trainable parameter.
  void step(ParamStore<T>& store);
  std::uint64_t steps() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return cfg_; }

 private:
  AdamConfig cfg_;
  std::uint64_t steps_ = 0;
  std::vector<AdamMoments<T>> moments_;
};

}  // namespace pcc::diff
