#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/rng.hpp"

namespace tnet {

/// Ordered collection of named trainable leaves. Registration order is the
/// canonical order for initialization draws, checkpoints and optimizers.
template <typename T>
class ParameterStore {
 public:
  /// Registers a tensor drawn uniformly from [-bound, bound] with bound =
  /// 1/sqrt(fan_in). Draws are made in single precision so float and double
  /// builds from the same seed hold identical values.
  Var<T> add_uniform(const std::string& name, Shape shape, int fan_in, Rng& rng);
  Var<T> add_constant(const std::string& name, Shape shape, T value);

  [[nodiscard]] const std::vector<std::pair<std::string, Var<T>>>& items() const { return items_; }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  /// Total scalar count over all parameters.
  [[nodiscard]] std::size_t scalar_count() const;

  [[nodiscard]] Var<T> find(const std::string& name) const;  // undefined Var if absent
  Var<T> get(const std::string& name) const;

  void zero_grad();

 private:
  Var<T> add(const std::string& name, Tensor<T> value);
  std::vector<std::pair<std::string, Var<T>>> items_;
};

}  // namespace tnet
