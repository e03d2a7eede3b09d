#include "odec/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace odec {

std::string layer_kind(const Layer& l) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearLayer>) return "linear";
        if constexpr (std::is_same_v<T, ReluLayer>) return "relu";
        if constexpr (std::is_same_v<T, FlattenLayer>) return "flatten";
        if constexpr (std::is_same_v<T, MaxPoolLayer>) return "maxpool";
        if constexpr (std::is_same_v<T, OdeLayer>) return "ode";
        if constexpr (std::is_same_v<T, ReadoutLayer>) return "readout";
        if constexpr (std::is_same_v<T, ScatterLayer>) return "scatter";
        if constexpr (std::is_same_v<T, GatherLayer>) return "gather";
      },
      l);
}

Index ModelSpec::input_dim() const {
  Index d = 1;
  for (Index s : input_shape) d *= s;
  return d;
}

Index ModelSpec::ode_layer_index() const {
  Index found = -1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (std::holds_alternative<OdeLayer>(layers[i])) {
      if (found >= 0) fail("model has more than one ODE layer");
      found = static_cast<Index>(i);
    }
  }
  if (found < 0) fail("model has no ODE layer");
  return found;
}

Vector softmax(const Vector& scores) {
  const double m = scores.maxCoeff();
  Vector e = (scores.array() - m).exp();
  return e / e.sum();
}

Index layer_output_dim(const Layer& layer, Index input_dim) {
  return std::visit(
      [&](const auto& l) -> Index {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, LinearLayer>) {
          if (l.weights.cols() != input_dim)
            fail("linear layer expects ", l.weights.cols(), " inputs, got ", input_dim);
          return l.weights.rows();
        } else if constexpr (std::is_same_v<T, ReluLayer> || std::is_same_v<T, FlattenLayer>) {
          return input_dim;
        } else if constexpr (std::is_same_v<T, MaxPoolLayer>) {
          if (l.channels * l.height * l.width != input_dim)
            fail("maxpool expects ", l.channels * l.height * l.width, " inputs, got ", input_dim);
          return l.out_dim();
        } else if constexpr (std::is_same_v<T, OdeLayer>) {
          if (l.input == OdeInput::InitialValue) {
            if (l.system->dim() != input_dim)
              fail("ODE layer dimension ", l.system->dim(), " does not match input ", input_dim);
          } else {
            if (l.signal_dim < 1) fail("signal-mode ODE layer needs signal_dim >= 1");
            if (input_dim % l.signal_dim != 0)
              fail("sequence length ", input_dim, " is not a multiple of signal width ",
                   l.signal_dim);
          }
          return l.system->dim();
        } else if constexpr (std::is_same_v<T, ReadoutLayer>) {
          if (l.weights.cols() != input_dim)
            fail("readout expects ", l.weights.cols(), " inputs, got ", input_dim);
          return l.weights.rows();
        } else if constexpr (std::is_same_v<T, ScatterLayer>) {
          if (static_cast<Index>(l.indices.size()) != input_dim)
            fail("scatter expects ", l.indices.size(), " inputs, got ", input_dim);
          return l.dim;
        } else {  // GatherLayer
          for (Index idx : l.indices)
            if (idx < 0 || idx >= input_dim) fail("gather index ", idx, " out of range");
          return static_cast<Index>(l.indices.size());
        }
      },
      layer);
}

void ModelSpec::validate() const {
  if (layers.empty()) fail("model has no layers");
  if (class_count < 1) fail("model class_count must be >= 1");
  ode_layer_index();
  if (!std::holds_alternative<ReadoutLayer>(layers.back()))
    fail("last layer must be the readout, got ", layer_kind(layers.back()));
  Index d = input_dim();
  for (const Layer& l : layers) d = layer_output_dim(l, d);
  if (d != class_count)
    fail("readout produces ", d, " scores but class_count is ", class_count);
}

namespace {

LayerEval eval_maxpool(const MaxPoolLayer& l, const Vector& x) {
  LayerEval ev;
  ev.output.resize(l.out_dim());
  ev.maxpool_argmax.resize(static_cast<std::size_t>(l.out_dim()));
  const Index oh = l.out_height();
  const Index ow = l.out_width();
  Index out = 0;
  for (Index c = 0; c < l.channels; ++c) {
    const Index base = c * l.height * l.width;
    for (Index i = 0; i < oh; ++i) {
      for (Index j = 0; j < ow; ++j) {
        Index best = base + (i * l.stride) * l.width + (j * l.stride);
        double v = x(best);
        for (Index di = 0; di < l.window; ++di) {
          for (Index dj = 0; dj < l.window; ++dj) {
            const Index idx = base + (i * l.stride + di) * l.width + (j * l.stride + dj);
            if (x(idx) > v) {
              v = x(idx);
              best = idx;
            }
          }
        }
        ev.output(out) = v;
        ev.maxpool_argmax[static_cast<std::size_t>(out)] = best;
        ++out;
      }
    }
  }
  return ev;
}

Vector eval_ode(const OdeLayer& l, const Vector& x, Trajectory* trace,
                std::optional<long> record_stride) {
  std::optional<long> stride;
  if (trace != nullptr) stride = record_stride.value_or(1);

  if (l.input == OdeInput::InitialValue) {
    Trajectory t = integrate(*l.system, x, nullptr, l.solver, stride);
    if (trace != nullptr) *trace = t;
    return t.final_state;
  }

  // Signal mode: the layer input is a flattened i x T sequence fed
  // sample-and-hold, starting from x(0) = 0.
  const Index i = l.signal_dim;
  const Index total = x.size();
  const Index count = total / i;
  InputSignal signal;
  signal.samples.resize(i, count);
  for (Index c = 0; c < count; ++c) signal.samples.col(c) = x.segment(c * i, i);
  signal.hold = static_cast<double>(l.steps_per_input) * l.solver.dt;

  SolverConfig cfg = l.solver;
  cfg.t0 = 0.0;
  cfg.t_end = signal.hold * static_cast<double>(count);

  Trajectory t = integrate(*l.system, Vector::Zero(l.system->dim()), &signal, cfg, stride);
  if (trace != nullptr) *trace = t;
  return t.final_state;
}

}  // namespace

LayerEval eval_layer(const Layer& layer, const Vector& input, Trajectory* ode_trace,
                     std::optional<long> record_stride) {
  layer_output_dim(layer, input.size());  // dimension guard
  return std::visit(
      [&](const auto& l) -> LayerEval {
        using T = std::decay_t<decltype(l)>;
        LayerEval ev;
        if constexpr (std::is_same_v<T, LinearLayer>) {
          ev.output = l.weights * input;
          if (l.bias.size() > 0) ev.output += l.bias;
        } else if constexpr (std::is_same_v<T, ReluLayer>) {
          ev.output = input.cwiseMax(0.0);
        } else if constexpr (std::is_same_v<T, FlattenLayer>) {
          ev.output = input;
        } else if constexpr (std::is_same_v<T, MaxPoolLayer>) {
          ev = eval_maxpool(l, input);
        } else if constexpr (std::is_same_v<T, OdeLayer>) {
          ev.output = eval_ode(l, input, ode_trace, record_stride);
        } else if constexpr (std::is_same_v<T, ReadoutLayer>) {
          ev.output = softmax(l.weights * input + l.bias);
        } else if constexpr (std::is_same_v<T, ScatterLayer>) {
          ev.output = Vector::Zero(l.dim);
          for (std::size_t j = 0; j < l.indices.size(); ++j)
            ev.output(l.indices[j]) = input(static_cast<Index>(j));
        } else {  // GatherLayer
          ev.output.resize(static_cast<Index>(l.indices.size()));
          for (std::size_t j = 0; j < l.indices.size(); ++j)
            ev.output(static_cast<Index>(j)) = input(l.indices[j]);
        }
        return ev;
      },
      layer);
}

Vector forward(const ModelSpec& model, const Vector& input, Trajectory* ode_trace,
               std::optional<long> record_stride) {
  if (input.size() != model.input_dim())
    fail("forward: input size ", input.size(), " does not match model input ",
         model.input_dim());
  Vector x = input;
  for (const Layer& l : model.layers) {
    Trajectory* trace = std::holds_alternative<OdeLayer>(l) ? ode_trace : nullptr;
    x = eval_layer(l, x, trace, record_stride).output;
  }
  return x;
}

Matrix build_antisymmetric(const AntisymmetricParams& params) {
  if (params.W.rows() != params.W.cols())
    fail("build_antisymmetric: W must be square, got ", params.W.rows(), "x", params.W.cols());
  Matrix a = params.W - params.W.transpose();
  a.diagonal().array() -= params.gamma;
  return a;
}

Vector forward_rnn(const RnnSpec& spec, const Matrix& sequence) {
  if (sequence.cols() < 1) fail("forward_rnn: empty sequence");
  if (sequence.rows() != spec.input_matrix.cols())
    fail("forward_rnn: sequence row count ", sequence.rows(), " does not match Z columns ",
         spec.input_matrix.cols());

  OdeBlock block;
  block.weights = build_antisymmetric(spec.antisym);
  block.bias = spec.bias;
  block.input_matrix = spec.input_matrix;
  block.activation = Activation::Tanh;
  block.validate();

  InputSignal signal;
  signal.samples = sequence;
  signal.hold = static_cast<double>(spec.steps_per_input) * spec.dt;

  SolverConfig cfg;
  cfg.method = SolverMethod::Euler;
  cfg.t0 = 0.0;
  cfg.dt = spec.dt;
  cfg.t_end = signal.hold * static_cast<double>(sequence.cols());

  Trajectory t = integrate(block, Vector::Zero(spec.hidden), &signal, cfg);
  return softmax(spec.readout_weights * t.final_state + spec.readout_bias);
}

ModelSpec rnn_to_model(const RnnSpec& spec) {
  auto block = std::make_shared<OdeBlock>();
  block->weights = build_antisymmetric(spec.antisym);
  block->bias = spec.bias;
  block->input_matrix = spec.input_matrix;
  block->activation = Activation::Tanh;
  block->validate();

  OdeLayer ode;
  ode.system = block;
  ode.solver.method = SolverMethod::Euler;
  ode.solver.t0 = 0.0;
  ode.solver.dt = spec.dt;
  ode.input = OdeInput::Signal;
  ode.signal_dim = spec.input_matrix.cols();
  ode.steps_per_input = spec.steps_per_input;

  ModelSpec model;
  model.layers.push_back(ode);
  model.layers.push_back(ReadoutLayer{spec.readout_weights, spec.readout_bias});
  model.class_count = static_cast<int>(spec.readout_weights.rows());
  return model;
}

std::pair<Matrix, Vector> conv_to_matrix(const std::vector<std::vector<Matrix>>& kernels,
                                         Index height, Index width, const Vector& channel_bias) {
  if (kernels.empty() || kernels[0].empty()) fail("conv_to_matrix: no kernels");
  const auto c_out = static_cast<Index>(kernels.size());
  const auto c_in = static_cast<Index>(kernels[0].size());
  const Index side = kernels[0][0].rows();
  if (side % 2 == 0) fail("conv_to_matrix: kernel side must be odd, got ", side);
  for (const auto& per_out : kernels) {
    if (static_cast<Index>(per_out.size()) != c_in)
      fail("conv_to_matrix: ragged kernel set");
    for (const Matrix& k : per_out)
      if (k.rows() != side || k.cols() != side)
        fail("conv_to_matrix: kernel must be ", side, "x", side, ", got ", k.rows(), "x",
             k.cols());
  }
  if (channel_bias.size() != c_out)
    fail("conv_to_matrix: bias length ", channel_bias.size(), " does not match ", c_out,
         " output channels");

  const Index pad = (side - 1) / 2;
  const Index plane = height * width;
  Matrix m = Matrix::Zero(c_out * plane, c_in * plane);
  Vector bias(c_out * plane);

  for (Index co = 0; co < c_out; ++co) {
    for (Index r = 0; r < height; ++r) {
      for (Index c = 0; c < width; ++c) {
        const Index row = co * plane + r * width + c;
        bias(row) = channel_bias(co);
        for (Index ci = 0; ci < c_in; ++ci) {
          const Matrix& k = kernels[co][ci];
          for (Index dr = 0; dr < side; ++dr) {
            const Index rr = r + dr - pad;
            if (rr < 0 || rr >= height) continue;
            for (Index dc = 0; dc < side; ++dc) {
              const Index cc = c + dc - pad;
              if (cc < 0 || cc >= width) continue;
              m(row, ci * plane + rr * width + cc) = k(dr, dc);
            }
          }
        }
      }
    }
  }
  return {std::move(m), std::move(bias)};
}

CountsMethod counts_method_from_string(const std::string& s) {
  if (s == "original") return CountsMethod::Original;
  if (s == "pod-deim") return CountsMethod::PodDeim;
  if (s == "apoz") return CountsMethod::Apoz;
  if (s == "svd") return CountsMethod::Svd;
  fail("unknown parameter-count method: ", s);
}

LayerCounts parameter_counts(CountsMethod method, CountsCase c, long n, long k, long i, long o) {
  if (n < k || k < 1) fail("parameter_counts: need n >= k >= 1, got n=", n, " k=", k);
  switch (method) {
    case CountsMethod::Original:
      return {n * n, n, n * i, o * n};
    case CountsMethod::PodDeim:
      if (c == CountsCase::Best) return {2 * k * k, k, k * i, o * k};
      return {2 * k * k, k, n * (i + k), n * (o + k)};
    case CountsMethod::Apoz:
      if (c == CountsCase::Best) return {k * k, k, k * i, o * k};
      return {k * k, k, k * i, n * (o + 1)};
    case CountsMethod::Svd:
      return {2 * k * n, n, n * i, o * n};
  }
  fail("unreachable counts method");
}

}  // namespace odec
