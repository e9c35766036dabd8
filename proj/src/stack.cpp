#include "tnet/stack.hpp"

namespace tnet {

namespace {

template <typename T>
Var<T> run_stage(const TNet<T>& net, const Var<T>& x0, const Var<T>& prev, int stage) {
  try {
    return net.forward(ops::concat_channels<T>({x0, prev}));
  } catch (const ShapeError& e) {
    throw ShapeError("stage " + std::to_string(stage) + ": " + e.what());
  }
}

void check_stack_input(const Shape& s) {
  if (s.c != 3) {
    throw ShapeError("stacked network expects a 3-channel image, got " + std::to_string(s.c) +
                     " channels");
  }
}

}  // namespace

template <typename T>
StackOutput<T> stack_forward(const TNet<T>& net, const Var<T>& x0, int stages) {
  if (stages < 1) throw ConfigError("stage count K must be >= 1");
  check_stack_input(x0.shape());
  StackOutput<T> out;
  Var<T> prev = x0;
  for (int k = 1; k <= stages; ++k) {
    prev = run_stage(net, x0, prev, k);
    out.per_stage.push_back(prev);
  }
  return out;
}

template <typename T>
StackTNet<T>::StackTNet(const TNetConfig& net_config, const StackConfig& stack_config,
                        std::uint64_t seed)
    : stack_(stack_config) {
  stack_.validate();
  if (net_config.in_channels != 6 || net_config.out_channels != 3) {
    throw ConfigError("stacked network needs in_channels = 6 and out_channels = 3");
  }
  if (stack_.share_parameters) {
    nets_.push_back(std::make_unique<TNet<T>>(net_config, seed));
  } else {
    for (int k = 1; k <= stack_.stages; ++k) {
      nets_.push_back(std::make_unique<TNet<T>>(net_config, mix_seed(seed + k),
                                                "stage" + std::to_string(k) + "."));
    }
  }
}

template <typename T>
StackOutput<T> StackTNet<T>::forward(const Var<T>& x0, int stages) const {
  const int k_total = stages > 0 ? stages : stack_.stages;
  if (stack_.share_parameters) return stack_forward(*nets_.front(), x0, k_total);
  if (k_total > stack_.stages) {
    throw ConfigError("unshared model has " + std::to_string(stack_.stages) +
                      " stages, requested " + std::to_string(k_total));
  }
  check_stack_input(x0.shape());
  StackOutput<T> out;
  Var<T> prev = x0;
  for (int k = 1; k <= k_total; ++k) {
    prev = run_stage(*nets_[k - 1], x0, prev, k);
    out.per_stage.push_back(prev);
  }
  return out;
}

template <typename T>
std::vector<std::pair<std::string, Var<T>>> StackTNet<T>::named_parameters() const {
  std::vector<std::pair<std::string, Var<T>>> all;
  for (const auto& net : nets_) {
    const auto& items = net->parameters().items();
    all.insert(all.end(), items.begin(), items.end());
  }
  return all;
}

template <typename T>
std::size_t StackTNet<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& net : nets_) total += net->parameter_count();
  return total;
}

template <typename T>
void StackTNet<T>::zero_grad() {
  for (auto& net : nets_) net->parameters().zero_grad();
}

template StackOutput<float> stack_forward<float>(const TNet<float>&, const Var<float>&, int);
template StackOutput<double> stack_forward<double>(const TNet<double>&, const Var<double>&, int);
template class StackTNet<float>;
template class StackTNet<double>;

}  // namespace tnet
