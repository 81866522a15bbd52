#include "optim.hpp"

#include <cmath>

#include "common.hpp"

namespace specmine {

AdamW::AdamW(JointModel& model, AdamWConfig cfg)
    : model_(model), cfg_(std::move(cfg)) {
  if (cfg_.learning_rate <= 0) {
    throw Error(Err::Config, "learning rate must be positive");
  }
  if (cfg_.weight_decay < 0) {
    throw Error(Err::Config, "weight decay must be non-negative");
  }
  state_.reserve(model_.params().size());
  for (const auto& p : model_.params()) {
    ParamState s;
    s.name = p.name;
    s.weight_decay = weight_decay_for(p.name);
    s.frozen = model_.config().freeze_encoder &&
               !JointModel::is_head_param(p.name);
    s.m = nn::Matrix::Zero(p.value.rows(), p.value.cols());
    s.v = nn::Matrix::Zero(p.value.rows(), p.value.cols());
    state_.push_back(std::move(s));
  }
}

double AdamW::weight_decay_for(const std::string& name) const {
  for (const auto& fragment : cfg_.no_decay_names) {
    if (name.find(fragment) != std::string::npos) return 0.0;
  }
  return cfg_.weight_decay;
}

void AdamW::step(const std::vector<nn::Matrix>& grads) {
  auto& params = model_.mutable_params();
  if (grads.size() != params.size()) {
    throw Error(Err::ShapeMismatch, "gradient list does not match parameters");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value;
    auto& s = state_[i];
    if (s.frozen) continue;
    const auto& g = grads[i];
    if (g.rows() != p.rows() || g.cols() != p.cols()) {
      throw Error(Err::ShapeMismatch,
                  "gradient shape mismatch for " + params[i].name);
    }
    s.m = cfg_.beta1 * s.m + (1.0 - cfg_.beta1) * g;
    s.v = cfg_.beta2 * s.v.array().matrix() +
          (1.0 - cfg_.beta2) * g.array().square().matrix();
    const nn::Matrix m_hat = s.m / bc1;
    const nn::Matrix v_hat = s.v / bc2;
    p.array() -= cfg_.learning_rate *
                 (m_hat.array() / (v_hat.array().sqrt() + cfg_.eps) +
                  s.weight_decay * p.array());
  }
}

}  // namespace specmine
