#include "train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace specmine {

using nn::Matrix;

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(Err::Config, "epochs must be >= 1");
  if (learning_rate <= 0) throw Error(Err::Config, "learning rate must be > 0");
  if (weight_decay < 0) throw Error(Err::Config, "weight decay must be >= 0");
  if (batch_size < 1) throw Error(Err::Config, "batch size must be >= 1");
  if (fp_loss_weight < 0) {
    throw Error(Err::Config, "fp loss weight must be >= 0");
  }
}

double acc_idf(const std::vector<std::vector<int>>& predicted,
               const std::vector<std::vector<int>>& gold) {
  if (predicted.size() != gold.size()) {
    throw Error(Err::ShapeMismatch, "acc_idf: batch sizes disagree");
  }
  long correct = 0;
  long scorable = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].size() != gold[i].size()) {
      throw Error(Err::ShapeMismatch, "acc_idf: sequence lengths disagree");
    }
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      if (gold[i][j] == kIgnoreLabel) continue;
      ++scorable;
      if (predicted[i][j] == gold[i][j]) ++correct;
    }
  }
  if (scorable == 0) throw Error(Err::EmptyBatch, "acc_idf: nothing scorable");
  return static_cast<double>(correct) / static_cast<double>(scorable);
}

double acc_fprop(const std::vector<std::vector<int>>& predicted,
                 const std::vector<std::vector<int>>& gold,
                 bool any_position) {
  if (predicted.size() != gold.size()) {
    throw Error(Err::ShapeMismatch, "acc_fprop: batch sizes disagree");
  }
  if (gold.empty()) throw Error(Err::EmptyBatch, "acc_fprop: empty batch");
  long correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].size() != gold[i].size()) {
      throw Error(Err::ShapeMismatch, "acc_fprop: sequence lengths disagree");
    }
    int relation_pos = -1;
    int gold_id = 0;
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      if (gold[i][j] == kIgnoreLabel || gold[i][j] == 0) continue;
      if (relation_pos >= 0) {
        throw Error(Err::Parse,
                    "acc_fprop: example has more than one relation position");
      }
      relation_pos = static_cast<int>(j);
      gold_id = gold[i][j];
    }
    if (relation_pos < 0) {
      throw Error(Err::Parse, "acc_fprop: example has no relation position");
    }
    if (any_position) {
      for (std::size_t j = 0; j < gold[i].size(); ++j) {
        if (gold[i][j] == kIgnoreLabel) continue;
        if (predicted[i][j] == gold_id) {
          ++correct;
          break;
        }
      }
    } else if (predicted[i][relation_pos] == gold_id) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

void accumulate_confusion(const std::vector<int>& gold,
                          const std::vector<int>& predicted,
                          std::vector<std::vector<long>>& counts) {
  if (gold.size() != predicted.size()) {
    throw Error(Err::ShapeMismatch, "confusion: sequence lengths disagree");
  }
  const int n = static_cast<int>(counts.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == kIgnoreLabel) continue;
    if (gold[i] < 0 || gold[i] >= n || predicted[i] < 0 || predicted[i] >= n) {
      throw Error(Err::ShapeMismatch, "confusion: label out of range");
    }
    counts[gold[i]][predicted[i]] += 1;
  }
}

Trainer::Trainer(JointModel& model, TrainConfig cfg)
    : model_(model), cfg_(std::move(cfg)),
      optimizer_(model, AdamWConfig{cfg_.learning_rate, 0.9, 0.999, 1e-8,
                                    cfg_.weight_decay,
                                    cfg_.no_regularization_names}) {
  cfg_.validate();
}

double Trainer::run_epoch(const std::vector<ModelReadyExample>& train_set,
                          std::vector<std::size_t>& order,
                          std::mt19937_64& rng, int epoch) {
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::size_t j = draw_below(rng, i + 1);
    std::swap(order[i], order[j]);
  }

  const auto& params = model_.params();
  double loss_sum = 0.0;
  std::size_t cursor = 0;
  while (cursor < order.size()) {
    const std::size_t batch_end =
        std::min(cursor + static_cast<std::size_t>(cfg_.batch_size),
                 order.size());
    std::vector<Matrix> grads;
    grads.reserve(params.size());
    for (const auto& p : params) {
      grads.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
    const std::size_t batch_count = batch_end - cursor;
    for (std::size_t b = cursor; b < batch_end; ++b) {
      const auto& example = train_set[order[b]];
      auto graph = model_.forward(example.subword_ids);
      auto loss =
          combined_loss(graph.tape, graph.idf_logits, graph.fp_logits,
                        example.identifier_labels, example.fp_labels,
                        cfg_.fp_loss_weight);
      const double value = graph.tape.value(loss.total)(0, 0);
      if (!std::isfinite(value)) {
        throw Error(Err::Divergence,
                    "non-finite loss at epoch " + std::to_string(epoch) +
                        " (" + example.sentence_id + ")");
      }
      loss_sum += value;
      graph.tape.backward(loss.total);
      for (std::size_t i = 0; i < params.size(); ++i) {
        grads[i] += graph.tape.grad(graph.params[i]);
      }
    }
    for (auto& g : grads) g /= static_cast<double>(batch_count);
    optimizer_.step(grads);  // frozen-encoder params are skipped inside
    cursor = batch_end;
  }
  return loss_sum / static_cast<double>(order.size());
}

std::vector<MetricRecord> Trainer::train(
    const std::vector<ModelReadyExample>& train_set,
    const std::vector<ModelReadyExample>& valid_set) {
  if (train_set.empty() || valid_set.empty()) {
    throw Error(Err::EmptyBatch, "train and valid splits must be non-empty");
  }
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(cfg_.seed);

  std::vector<MetricRecord> history;
  history.reserve(cfg_.epochs);
  for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    run_epoch(train_set, order, rng, epoch);
    // Reported accuracies and losses come from a post-epoch pass.
    const EvalResult on_train = evaluate(train_set);
    const EvalResult on_valid = evaluate(valid_set);
    MetricRecord rec;
    rec.epoch = epoch;
    rec.train_idf = on_train.idf_accuracy;
    rec.train_fprop = on_train.fprop_accuracy;
    rec.valid_idf = on_valid.idf_accuracy;
    rec.valid_fprop = on_valid.fprop_accuracy;
    rec.train_loss = on_train.mean_loss;
    rec.valid_loss = on_valid.mean_loss;
    history.push_back(rec);
  }
  return history;
}

EvalResult Trainer::evaluate(
    const std::vector<ModelReadyExample>& examples) const {
  if (examples.empty()) {
    throw Error(Err::EmptyBatch, "evaluate: empty example set");
  }
  std::vector<std::vector<int>> idf_pred, idf_gold, fp_pred, fp_gold;
  double loss_sum = 0.0;
  for (const auto& example : examples) {
    auto graph = model_.forward(example.subword_ids);
    auto loss = combined_loss(graph.tape, graph.idf_logits, graph.fp_logits,
                              example.identifier_labels, example.fp_labels,
                              cfg_.fp_loss_weight);
    loss_sum += graph.tape.value(loss.total)(0, 0);
    idf_pred.push_back(predict_labels(graph.tape.value(graph.idf_logits)));
    idf_gold.push_back(example.identifier_labels);
    fp_pred.push_back(predict_labels(graph.tape.value(graph.fp_logits)));
    fp_gold.push_back(example.fp_labels);
  }
  EvalResult out;
  out.idf_accuracy = acc_idf(idf_pred, idf_gold);
  out.fprop_accuracy = acc_fprop(fp_pred, fp_gold, cfg_.fprop_any_position);
  out.mean_loss = loss_sum / static_cast<double>(examples.size());
  return out;
}

ErrorDistribution Trainer::error_distribution(
    const std::vector<ModelReadyExample>& examples) const {
  ErrorDistribution dist;
  dist.identifier.assign(IdentifierLabelMap::kNumLabels,
                         std::vector<long>(IdentifierLabelMap::kNumLabels, 0));
  dist.fp.assign(FormalPropertyLabelMap::kNumLabels,
                 std::vector<long>(FormalPropertyLabelMap::kNumLabels, 0));
  for (const auto& example : examples) {
    auto graph = model_.forward(example.subword_ids);
    accumulate_confusion(example.identifier_labels,
                         predict_labels(graph.tape.value(graph.idf_logits)),
                         dist.identifier);
    accumulate_confusion(example.fp_labels,
                         predict_labels(graph.tape.value(graph.fp_logits)),
                         dist.fp);
  }
  return dist;
}

void write_metrics_csv(const std::vector<MetricRecord>& history,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write metrics: " + path);
  out << "epoch,train_idf,train_fprop,valid_idf,valid_fprop,train_loss,"
         "valid_loss\n";
  char line[256];
  for (const auto& r : history) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.epoch, r.train_idf, r.train_fprop, r.valid_idf,
                  r.valid_fprop, r.train_loss, r.valid_loss);
    out << line;
  }
}

void write_error_distribution_json(const ErrorDistribution& dist,
                                   const std::string& path) {
  nlohmann::json j = {{"identifier", dist.identifier}, {"fp", dist.fp}};
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write error distribution: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace specmine
