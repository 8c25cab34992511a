#include "pcc/diff/params.hpp"

#include <cmath>

#include "pcc/error.hpp"

namespace pcc::diff {

template <class T>
Parameter<T>& ParamStore<T>::add(const std::string& name, Tensor<T> value,
                                 bool trainable) {
  if (find(name)) fail(ErrorKind::BadArgument, "duplicate parameter " + name);
  // Gradient storage is allocated by the first recording tape that uses it.
  params_.push_back(Parameter<T>{name, std::move(value), {}, trainable});
  return params_.back();
}

template <class T>
Parameter<T>& ParamStore<T>::weight(const std::string& name,
                                    std::size_t fan_in, std::size_t fan_out) {
  Tensor<T> w(fan_in, fan_out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : w.data()) v = static_cast<T>(dist(rng_));
  return add(name, std::move(w), true);
}

template <class T>
Parameter<T>& ParamStore<T>::bias(const std::string& name, std::size_t fan_in,
                                  std::size_t width) {
  Tensor<T> b(1, width);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : b.data()) v = static_cast<T>(dist(rng_));
  return add(name, std::move(b), true);
}

template <class T>
Parameter<T>& ParamStore<T>::constant(const std::string& name,
                                      std::size_t rows, std::size_t cols,
                                      T value, bool trainable) {
  return add(name, Tensor<T>(rows, cols, value), trainable);
}

template <class T>
Parameter<T>* ParamStore<T>::find(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
const Parameter<T>* ParamStore<T>::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
std::size_t ParamStore<T>::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_)
    if (p.trainable) n += p.value.size();
  return n;
}

template <class T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) p.grad.fill(T(0));
}

template <class T>
void ParamStore<T>::scale_grad(T factor) {
  for (auto& p : params_)
    for (auto& g : p.grad.data()) g *= factor;
}

template <class T>
void adam_update(std::span<T> param, std::span<const T> grad,
                 AdamMoments<T>& state, std::uint64_t step,
                 const AdamConfig& cfg) {
  if (grad.size() != param.size())
    fail(ErrorKind::ShapeMismatch, "adam: gradient size " +
                                       std::to_string(grad.size()) +
                                       " != parameter size " +
                                       std::to_string(param.size()));
  if (state.m.empty()) state.m.assign(param.size(), T(0));
  if (state.v.empty()) state.v.assign(param.size(), T(0));
  if (state.m.size() != param.size() || state.v.size() != param.size())
    fail(ErrorKind::ShapeMismatch, "adam: moment size mismatch");
  if (step == 0) fail(ErrorKind::BadArgument, "adam: step is 1-based");

  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    param[i] -= static_cast<T>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

template <class T>
void Adam<T>::step(ParamStore<T>& store) {
  auto& params = store.all();
  if (moments_.size() != params.size()) moments_.resize(params.size());
  ++steps_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (!p.trainable || p.grad.size() == 0) continue;
    adam_update<T>(p.value.data(), p.grad.data(), moments_[i], steps_, cfg_);
  }
}

template class ParamStore<float>;
template class ParamStore<double>;
template class Adam<float>;
template class Adam<double>;
template void adam_update<float>(std::span<float>, std::span<const float>,
                                 AdamMoments<float>&, std::uint64_t,
                                 const AdamConfig&);
template void adam_update<double>(std::span<double>, std::span<const double>,
                                  AdamMoments<double>&, std::uint64_t,
                                  const AdamConfig&);

}  // namespace pcc::diff
