#pragma once

#include <memory>
#include <vector>

#include "tnet/tnet.hpp"

namespace tnet {

struct StackConfig {
  int stages = 3;
  bool share_parameters = true;

  void validate() const {
    if (stages < 1) throw ConfigError("stage count K must be >= 1");
  }
  friend bool operator==(const StackConfig&, const StackConfig&) = default;
};

template <typename T>
struct StackOutput {
  std::vector<Var<T>> per_stage;  // y^1..y^K in the [-1, 1] network domain
  [[nodiscard]] const Var<T>& final() const { return per_stage.back(); }
};

/// Runs K stages of one shared network: x^k = concat(x0, y^{k-1}) with
/// y^0 = x0, y^k = net(x^k). Shape errors carry the stage index.
template <typename T>
StackOutput<T> stack_forward(const TNet<T>& net, const Var<T>& x0, int stages);

/// K-stage model. With shared parameters it owns exactly one backbone; the
/// unshared variant owns one backbone per stage, prefixed "stage<k>.".
template <typename T>
class StackTNet {
 public:
  StackTNet(const TNetConfig& net_config, const StackConfig& stack_config, std::uint64_t seed);

  [[nodiscard]] const TNetConfig& net_config() const { return nets_.front()->config(); }
  [[nodiscard]] const StackConfig& stack_config() const { return stack_; }
  [[nodiscard]] int stages() const { return stack_.stages; }

  /// Runs `stages` stages (defaults to the configured K). A shared model
  /// may run any K; an unshared model needs K <= configured stages.
  StackOutput<T> forward(const Var<T>& x0, int stages = 0) const;

  /// All trainable parameters, in registration order, without duplicates.
  [[nodiscard]] std::vector<std::pair<std::string, Var<T>>> named_parameters() const;
  [[nodiscard]] std::size_t parameter_count() const;
  void zero_grad();

  [[nodiscard]] const TNet<T>& backbone(int stage = 0) const {
    return *nets_[stack_.share_parameters ? 0 : stage];
  }

 private:
  StackConfig stack_;
  std::vector<std::unique_ptr<TNet<T>>> nets_;
};

}  // namespace tnet
