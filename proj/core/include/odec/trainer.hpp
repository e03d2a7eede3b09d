#ifndef ODEC_TRAINER_HPP
#define ODEC_TRAINER_HPP

#include "odec/dataset.hpp"
#include "odec/layers.hpp"

namespace odec {

struct TrainConfig {
  int epochs = 3;
  Index batch_size = 32;
  double learning_rate = 0.04;  // initial; decays multiplicatively per epoch
  double decay = 0.9;
  std::uint64_t seed = 1;
  // Layer indices to update; empty means the readout alone. Every entry must
  // lie strictly after the ODE block and name a linear or readout layer.
  std::vector<std::size_t> trainable_layers;
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;  // full-train-set loss after the epoch's updates
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;  // NaN when no validation split given
};

struct LossGrad {
  double loss = 0.0;
  Matrix grad_weights;
  Vector grad_bias;
  Matrix grad_features;  // d loss / d features, per column
};

// Softmax cross-entropy of a linear readout on a feature batch (columns are
// samples). Gradient is (probabilities - one_hot) features^T, batch-averaged.
LossGrad loss_and_grad(const Matrix& weights, const Vector& bias, const Matrix& features,
                       const std::vector<int>& labels);

// SGD on the masked layers; everything else (the ODE block included) stays
// frozen, and features through the frozen prefix are computed once per
// dataset. Deterministic for a fixed seed.
std::vector<EpochMetrics> fit(ModelSpec& model, const Dataset& train, const Dataset* val,
                              const TrainConfig& cfg);

// CSV rows: epoch,loss,train_acc,val_acc
void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::string& path,
                       const std::string& provenance_comment = "");

}  // namespace odec

#endif
