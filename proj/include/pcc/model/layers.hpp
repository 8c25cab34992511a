#pragma once

#include <string>

#include "pcc/diff/ops.hpp"
#include "pcc/diff/params.hpp"

namespace pcc::model {

// Fully connected layer whose weights live in a ParamStore.
template <class T>
struct Linear {
  diff::Parameter<T>* weight = nullptr;
  diff::Parameter<T>* bias = nullptr;

  Linear() = default;
  Linear(diff::ParamStore<T>& store, const std::string& name, std::size_t in,
         std::size_t out)
      : weight(&store.weight(name + ".weight", in, out)),
        bias(&store.bias(name + ".bias", in, out)) {}

  std::size_t in() const { return weight->value.rows(); }
  std::size_t out() const { return weight->value.cols(); }

  diff::Var<T> operator()(diff::Tape<T>& tape, diff::Var<T> x) const {
    return diff::linear(x, tape.parameter(*weight), tape.parameter(*bias));
  }
};

// linear -> relu -> linear
template <class T>
struct Mlp2 {
  Linear<T> first;
  Linear<T> second;

  Mlp2() = default;
  Mlp2(diff::ParamStore<T>& store, const std::string& name, std::size_t in,
       std::size_t hidden, std::size_t out)
      : first(store, name + ".0", in, hidden),
        second(store, name + ".1", hidden, out) {}

  diff::Var<T> operator()(diff::Tape<T>& tape, diff::Var<T> x) const {
    return second(tape, diff::relu(first(tape, x)));
  }
};

template <class T>
struct BatchNorm {
  diff::Parameter<T>* gamma = nullptr;
  diff::Parameter<T>* beta = nullptr;
  diff::Parameter<T>* running_mean = nullptr;
  diff::Parameter<T>* running_var = nullptr;

  BatchNorm() = default;
  BatchNorm(diff::ParamStore<T>& store, const std::string& name,
            std::size_t width)
      : gamma(&store.constant(name + ".gamma", 1, width, T(1), true)),
        beta(&store.constant(name + ".beta", 1, width, T(0), true)),
        running_mean(
            &store.constant(name + ".running_mean", 1, width, T(0), false)),
        running_var(
            &store.constant(name + ".running_var", 1, width, T(1), false)) {}

  diff::Var<T> operator()(diff::Tape<T>& tape, diff::Var<T> x) const {
    return diff::batchnorm(x, tape.parameter(*gamma), tape.parameter(*beta),
                           *running_mean, *running_var);
  }
};

}  // namespace pcc::model
