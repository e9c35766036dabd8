#include "tnet/params.hpp"

#include <cmath>

namespace tnet {

template <typename T>
Var<T> ParameterStore<T>::add(const std::string& name, Tensor<T> value) {
  if (find(name).defined()) throw ConfigError("duplicate parameter name '" + name + "'");
  Var<T> v(std::move(value), true);
  items_.emplace_back(name, v);
  return v;
}

template <typename T>
Var<T> ParameterStore<T>::add_uniform(const std::string& name, Shape shape, int fan_in,
                                      Rng& rng) {
  Tensor<T> t(shape);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (T& v : t.vec()) v = static_cast<T>(static_cast<float>(rng.uniform(-bound, bound)));
  return add(name, std::move(t));
}

template <typename T>
Var<T> ParameterStore<T>::add_constant(const std::string& name, Shape shape, T value) {
  return add(name, Tensor<T>(shape, value));
}

template <typename T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [name, v] : items_) total += v.value().size();
  return total;
}

template <typename T>
Var<T> ParameterStore<T>::find(const std::string& name) const {
  for (const auto& [n, v] : items_) {
    if (n == name) return v;
  }
  return {};
}

template <typename T>
Var<T> ParameterStore<T>::get(const std::string& name) const {
  Var<T> v = find(name);
  if (!v.defined()) throw ConfigError("unknown parameter '" + name + "'");
  return v;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& [n, v] : items_) v.zero_grad();
}

template class ParameterStore<float>;
template class ParameterStore<double>;

}  // namespace tnet
