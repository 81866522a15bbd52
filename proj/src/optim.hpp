#ifndef SPECMINE_OPTIM_HPP
#define SPECMINE_OPTIM_HPP

#include <string>
#include <vector>

#include "model.hpp"

namespace specmine {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.1;
  // Hierarchical regularization: parameters whose names contain one of
  // these substrings get weight decay 0 exactly.
  std::vector<std::string> no_decay_names = {"bias", "ln_1", "ln_2"};
};

// Decoupled weight decay Adam. Decay is applied directly to the parameter,
// not through the gradient moments.
class AdamW {
 public:
  AdamW(JointModel& model, AdamWConfig cfg);

  // grads must align with model.params(). Frozen-encoder handling is the
  // caller's job (zero or skip those grads).
  void step(const std::vector<nn::Matrix>& grads);

  // Effective decay for a parameter name: 0 when exempt, cfg.weight_decay
  // otherwise. Exposed so the exemption is inspectable.
  double weight_decay_for(const std::string& name) const;

  struct ParamState {
    std::string name;
    double weight_decay = 0.0;
    bool frozen = false;  // encoder params under freeze_encoder
    nn::Matrix m;
    nn::Matrix v;
  };
  const std::vector<ParamState>& state() const { return state_; }
  const AdamWConfig& config() const { return cfg_; }
  long steps_taken() const { return t_; }

 private:
  JointModel& model_;
  AdamWConfig cfg_;
  std::vector<ParamState> state_;
  long t_ = 0;
};

}  // namespace specmine

#endif  // SPECMINE_OPTIM_HPP
