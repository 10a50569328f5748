#pragma once

// Seeded training loop with per-epoch dev evaluation and best-epoch
// selection. Fully deterministic for a fixed seed and config.

#include <cstdint>
#include <string>
#include <vector>

#include "punnet/data.hpp"
#include "punnet/heads.hpp"
#include "punnet/metrics.hpp"
#include "punnet/model.hpp"
#include "punnet/optim.hpp"

namespace punnet {

struct TrainConfig {
  double lr = 5e-5;
  std::size_t batch_size = 32;
  double dropout = 0.1;
  std::size_t epochs = 20;
  std::uint64_t seed = 42;
  Task task = Task::Detection;

  void validate() const {
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) {
      throw ArgumentError("dropout must be in [0,1), got " + std::to_string(dropout));
    }
    if (epochs == 0) throw ArgumentError("epochs must be >= 1");
  }
};

struct EpochLog {
  std::size_t epoch = 0;       // 1-based
  double train_loss = 0.0;     // batch-size weighted mean of batch losses
  MetricsReport dev;
  double dev_f1 = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 1-based
  double best_dev_f1 = 0.0;
};

template <typename T>
MetricsReport evaluate_detection(const PunModel<T>& model, const std::vector<Example>& dataset) {
  std::vector<int> preds, golds;
  preds.reserve(dataset.size());
  golds.reserve(dataset.size());
  for (const auto& ex : dataset) {
    preds.push_back(model.detect(ex).label);
    golds.push_back(ex.label);
  }
  return score_detection(preds, golds);
}

template <typename T>
MetricsReport evaluate_location(const PunModel<T>& model, const std::vector<Example>& dataset,
                                LocateMode mode = LocateMode::Argmax) {
  std::vector<std::vector<std::size_t>> preds;
  std::vector<std::optional<std::size_t>> golds;
  for (const auto& ex : dataset) {
    if (!ex.pun_index) continue;
    LocationResult r = model.locate(ex);
    preds.push_back(mode == LocateMode::Argmax ? std::vector<std::size_t>{r.index}
                                               : threshold_locations(r));
    golds.push_back(ex.pun_index);
  }
  return score_location(preds, golds);
}

namespace detail {

inline std::vector<Example> punned_only(const std::vector<Example>& dataset) {
  std::vector<Example> out;
  for (const auto& ex : dataset) {
    if (ex.pun_index) out.push_back(ex);
  }
  return out;
}

template <typename T>
std::vector<std::vector<T>> snapshot_params(const std::vector<Tensor<T>>& params) {
  std::vector<std::vector<T>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.value());
  return out;
}

template <typename T>
void restore_params(std::vector<Tensor<T>>& params, const std::vector<std::vector<T>>& snap) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].mutable_value() = snap[i];
}

}  // namespace detail

template <typename T>
TrainResult train(PunModel<T>& model, const std::vector<Example>& train_set,
                  const std::vector<Example>& dev_set, const TrainConfig& config) {
  config.validate();
  std::vector<Example> train_data = train_set;
  std::vector<Example> dev_data = dev_set;
  if (config.task == Task::Location) {
    train_data = detail::punned_only(train_data);
    dev_data = detail::punned_only(dev_data);
    if (train_data.empty()) {
      throw ArgumentError("location training set has no pun-labeled examples");
    }
  }
  if (train_data.empty()) throw ArgumentError("empty training set");
  model.set_dropout(config.dropout);

  Rng rng = seeded_rng(config.seed);
  std::vector<Tensor<T>> params = model.parameter_tensors();
  typename Adam<T>::Hyper hyper;
  hyper.lr = static_cast<T>(config.lr);
  Adam<T> optimizer(params, hyper);

  TrainResult result;
  std::vector<std::vector<T>> best_snapshot;
  std::vector<std::size_t> order(train_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Example> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_data[order[i]]);
      Tensor<T> loss = model.loss(batch, config.task, /*train=*/true, &rng);
      backward(loss);
      optimizer.step();
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(seen);
    if (!dev_data.empty()) {
      log.dev = config.task == Task::Detection ? evaluate_detection(model, dev_data)
                                               : evaluate_location(model, dev_data);
      log.dev_f1 = log.dev.f1();
    }
    result.log.push_back(log);

    if (dev_data.empty()) {
      result.best_epoch = epoch;  // no dev set: keep the final parameters
    } else if (result.best_epoch == 0 || log.dev_f1 > result.best_dev_f1) {
      result.best_epoch = epoch;
      result.best_dev_f1 = log.dev_f1;
      best_snapshot = detail::snapshot_params(params);
    }
  }

  if (!best_snapshot.empty()) detail::restore_params(params, best_snapshot);
  return result;
}

}  // namespace punnet
