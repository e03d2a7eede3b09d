#include "odec/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace odec {

LossGrad loss_and_grad(const Matrix& weights, const Vector& bias, const Matrix& features,
                       const std::vector<int>& labels) {
  const Index batch = features.cols();
  if (batch == 0) fail("loss_and_grad: empty batch");
  if (static_cast<Index>(labels.size()) != batch)
    fail("loss_and_grad: ", labels.size(), " labels for ", batch, " samples");
  if (!all_finite(features)) fail("loss_and_grad: non-finite features");
  const Index classes = weights.rows();

  LossGrad out;
  out.grad_weights = Matrix::Zero(weights.rows(), weights.cols());
  out.grad_bias = Vector::Zero(bias.size());
  out.grad_features = Matrix::Zero(features.rows(), batch);

  for (Index j = 0; j < batch; ++j) {
    const int label = labels[static_cast<std::size_t>(j)];
    if (label < 0 || label >= classes)
      fail("loss_and_grad: label ", label, " out of range for ", classes, " classes");
    const Vector f = features.col(j);
    const Vector p = softmax(weights * f + bias);
    out.loss -= std::log(std::max(p(label), 1e-300));
    Vector d = p;
    d(label) -= 1.0;
    out.grad_weights += d * f.transpose();
    out.grad_bias += d;
    out.grad_features.col(j) = weights.transpose() * d;
  }
  const double inv = 1.0 / static_cast<double>(batch);
  out.loss *= inv;
  out.grad_weights *= inv;
  out.grad_bias *= inv;
  out.grad_features *= inv;
  return out;
}

namespace {

struct SuffixEval {
  std::vector<Vector> inputs;  // input of each suffix layer
  std::vector<std::vector<Index>> argmax;
  Vector probabilities;
};

SuffixEval run_suffix(const ModelSpec& model, std::size_t begin, const Vector& features) {
  SuffixEval ev;
  Vector x = features;
  for (std::size_t i = begin; i < model.layers.size(); ++i) {
    ev.inputs.push_back(x);
    LayerEval le = eval_layer(model.layers[i], x);
    ev.argmax.push_back(std::move(le.maxpool_argmax));
    x = std::move(le.output);
  }
  ev.probabilities = x;
  return ev;
}

// Gradient of the per-sample cross-entropy with respect to each trainable
// suffix layer, walking backward from the readout.
void backprop_suffix(const ModelSpec& model, std::size_t begin, const SuffixEval& ev, int label,
                     const std::vector<bool>& trainable, std::vector<Matrix>& grad_w,
                     std::vector<Vector>& grad_b) {
  Vector d;  // gradient w.r.t. the current layer's output
  for (std::size_t rev = model.layers.size(); rev-- > begin;) {
    const Layer& layer = model.layers[rev];
    const Vector& x = ev.inputs[rev - begin];
    if (const auto* ro = std::get_if<ReadoutLayer>(&layer)) {
      Vector dz = ev.probabilities;
      dz(label) -= 1.0;
      if (trainable[rev]) {
        grad_w[rev] += dz * x.transpose();
        grad_b[rev] += dz;
      }
      d = ro->weights.transpose() * dz;
    } else if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
      if (trainable[rev]) {
        grad_w[rev] += d * x.transpose();
        if (lin->bias.size() > 0) grad_b[rev] += d;
      }
      d = lin->weights.transpose() * d;
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      d = (x.array() > 0.0).select(d, 0.0);
    } else if (std::holds_alternative<FlattenLayer>(layer)) {
      // identity
    } else if (const auto* sc = std::get_if<ScatterLayer>(&layer)) {
      Vector dx(static_cast<Index>(sc->indices.size()));
      for (std::size_t j = 0; j < sc->indices.size(); ++j)
        dx(static_cast<Index>(j)) = d(sc->indices[j]);
      d = dx;
    } else if (const auto* ga = std::get_if<GatherLayer>(&layer)) {
      Vector dx = Vector::Zero(x.size());
      for (std::size_t j = 0; j < ga->indices.size(); ++j)
        dx(ga->indices[j]) += d(static_cast<Index>(j));
      d = dx;
    } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
      const auto& winners = ev.argmax[rev - begin];
      Vector dx = Vector::Zero(x.size());
      for (std::size_t j = 0; j < winners.size(); ++j)
        dx(winners[j]) += d(static_cast<Index>(j));
      d = dx;
    } else {
      fail("backprop through ", layer_kind(layer), " layers is not supported");
    }
  }
}

Index argmax_prob(const Vector& p) {
  Index best = 0;
  for (Index i = 1; i < p.size(); ++i)
    if (p(i) > p(best)) best = i;
  return best;
}

}  // namespace

std::vector<EpochMetrics> fit(ModelSpec& model, const Dataset& train, const Dataset* val,
                              const TrainConfig& cfg) {
  model.validate();
  train.validate();
  if (cfg.epochs < 0) fail("fit: epochs must be >= 0");
  if (cfg.batch_size < 1) fail("fit: batch size must be >= 1");

  const Index ode_at = model.ode_layer_index();
  std::vector<std::size_t> mask = cfg.trainable_layers;
  if (mask.empty()) mask.push_back(model.layers.size() - 1);
  std::vector<bool> trainable(model.layers.size(), false);
  std::size_t earliest = model.layers.size();
  for (std::size_t idx : mask) {
    if (idx >= model.layers.size()) fail("fit: trainable layer ", idx, " out of range");
    if (static_cast<Index>(idx) <= ode_at)
      fail("fit: layer ", idx, " is not after the ODE block (index ", ode_at,
           "); only following layers may be fine-tuned");
    if (!std::holds_alternative<LinearLayer>(model.layers[idx]) &&
        !std::holds_alternative<ReadoutLayer>(model.layers[idx]))
      fail("fit: layer ", idx, " (", layer_kind(model.layers[idx]), ") has no weights to train");
    trainable[idx] = true;
    earliest = std::min(earliest, idx);
  }

  // Features through the frozen prefix, once per dataset.
  auto prefix_features = [&](const Dataset& data) {
    Matrix feats;
    for (Index s = 0; s < data.sample_count(); ++s) {
      Vector x = data.images.col(s);
      for (std::size_t i = 0; i < earliest; ++i) x = eval_layer(model.layers[i], x).output;
      if (feats.size() == 0) feats.resize(x.size(), data.sample_count());
      feats.col(s) = x;
    }
    return feats;
  };
  const Matrix train_feats = prefix_features(train);
  Matrix val_feats;
  if (val != nullptr) val_feats = prefix_features(*val);

  auto dataset_metrics = [&](const Matrix& feats, const std::vector<int>& labels,
                             bool with_loss) -> std::pair<double, double> {
    double loss = 0.0;
    long correct = 0;
    for (Index s = 0; s < feats.cols(); ++s) {
      const SuffixEval ev = run_suffix(model, earliest, feats.col(s));
      const int label = labels[static_cast<std::size_t>(s)];
      if (with_loss) loss -= std::log(std::max(ev.probabilities(label), 1e-300));
      if (argmax_prob(ev.probabilities) == label) ++correct;
    }
    return {loss / static_cast<double>(feats.cols()),
            static_cast<double>(correct) / static_cast<double>(feats.cols())};
  };

  std::vector<EpochMetrics> metrics;
  Rng rng(cfg.seed);
  std::vector<Index> order(static_cast<std::size_t>(train.sample_count()));
  std::iota(order.begin(), order.end(), Index{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate * std::pow(cfg.decay, epoch);
    rng.shuffle(order);

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));

      std::vector<Matrix> grad_w(model.layers.size());
      std::vector<Vector> grad_b(model.layers.size());
      for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (!trainable[i]) continue;
        if (const auto* lin = std::get_if<LinearLayer>(&model.layers[i])) {
          grad_w[i] = Matrix::Zero(lin->weights.rows(), lin->weights.cols());
          grad_b[i] = Vector::Zero(lin->bias.size());
        } else {
          const auto& ro = std::get<ReadoutLayer>(model.layers[i]);
          grad_w[i] = Matrix::Zero(ro.weights.rows(), ro.weights.cols());
          grad_b[i] = Vector::Zero(ro.bias.size());
        }
      }

      double batch_loss = 0.0;
      for (std::size_t s = start; s < stop; ++s) {
        const Index sample = order[s];
        const SuffixEval ev = run_suffix(model, earliest, train_feats.col(sample));
        const int label = train.labels[static_cast<std::size_t>(sample)];
        batch_loss -= std::log(std::max(ev.probabilities(label), 1e-300));
        backprop_suffix(model, earliest, ev, label, trainable, grad_w, grad_b);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      if (!std::isfinite(batch_loss))
        fail("fit: loss diverged in epoch ", epoch, " (non-finite batch loss)");

      for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (!trainable[i]) continue;
        if (auto* lin = std::get_if<LinearLayer>(&model.layers[i])) {
          lin->weights -= lr * inv * grad_w[i];
          if (lin->bias.size() > 0) lin->bias -= lr * inv * grad_b[i];
        } else {
          auto& ro = std::get<ReadoutLayer>(model.layers[i]);
          ro.weights -= lr * inv * grad_w[i];
          ro.bias -= lr * inv * grad_b[i];
        }
      }
    }

    EpochMetrics em;
    em.epoch = epoch;
    auto [loss, acc] = dataset_metrics(train_feats, train.labels, true);
    em.loss = loss;
    em.train_accuracy = acc;
    if (!std::isfinite(em.loss)) fail("fit: loss diverged in epoch ", epoch);
    em.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (val != nullptr) em.val_accuracy = dataset_metrics(val_feats, val->labels, false).second;
    metrics.push_back(em);
  }
  return metrics;
}

void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::string& path,
                       const std::string& provenance_comment) {
  std::ofstream out(path);
  if (!out) fail("cannot write metrics csv: ", path);
  out << "# schema: odec-metrics/1\n";
  if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
  out << "epoch,loss,train_acc,val_acc\n";
  for (const auto& m : metrics)
    out << m.epoch << "," << format_double(m.loss) << "," << format_double(m.train_accuracy)
        << "," << format_double(m.val_accuracy) << "\n";
}

}  // namespace odec
