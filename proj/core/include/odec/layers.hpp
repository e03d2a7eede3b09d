#ifndef ODEC_LAYERS_HPP
#define ODEC_LAYERS_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "odec/ode.hpp"

namespace odec {

struct LinearLayer {
  Matrix weights;
  Vector bias;  // size 0 means no bias
};

struct ReluLayer {};

struct FlattenLayer {};

// Channel-wise max pooling over a (channels, height, width) vectorization.
struct MaxPoolLayer {
  Index channels = 0;
  Index height = 0;
  Index width = 0;
  Index window = 0;
  Index stride = 0;

  Index out_height() const { return (height - window) / stride + 1; }
  Index out_width() const { return (width - window) / stride + 1; }
  Index out_dim() const { return channels * out_height() * out_width(); }
};

enum class OdeInput {
  InitialValue,  // x(0) = output of the preceding layer
  Signal         // x(0) = 0, layer input is a flattened sample-and-hold sequence
};

struct OdeLayer {
  std::shared_ptr<const OdeSystem> system;
  SolverConfig solver;
  OdeInput input = OdeInput::InitialValue;
  Index signal_dim = 0;      // per-sample input width (Signal mode)
  long steps_per_input = 1;  // solver steps spent on each held sample (Signal mode)
};

// Linear map followed by softmax; always the last layer.
struct ReadoutLayer {
  Matrix weights;
  Vector bias;
};

// Places k values at fixed indices of a zero n-vector (APoZ worst case:
// nonlinear followers keep their original geometry).
struct ScatterLayer {
  Index dim = 0;
  std::vector<Index> indices;
};

// Selects entries by index (used when a pruned ODE block follows a
// nonlinear layer).
struct GatherLayer {
  std::vector<Index> indices;
};

using Layer = std::variant<LinearLayer, ReluLayer, FlattenLayer, MaxPoolLayer, OdeLayer,
                           ReadoutLayer, ScatterLayer, GatherLayer>;

std::string layer_kind(const Layer& l);

// Metadata sections of the shared model-file schema. Points are stored
// 0-based in files (documentation follows the 1-based convention).
struct MorSection {
  Index k = 0;
  Index m = 0;
  Index o = 0;
  bool fold = false;
  std::vector<Index> points;
  std::string snapshot_hash;
};

struct CompressionSection {
  std::string method;
  Index dimension = 0;
  std::string provenance;
};

struct ModelSpec {
  std::vector<Layer> layers;
  std::vector<Index> input_shape;  // e.g. {channels, h, w} or {sequence_len}
  int class_count = 0;
  std::uint64_t seed = 0;
  std::optional<MorSection> mor;
  std::optional<CompressionSection> compression;
  std::map<std::string, std::string> provenance;

  Index input_dim() const;
  Index ode_layer_index() const;  // fails unless exactly one ODE layer
  void validate() const;
};

Vector softmax(const Vector& scores);

// One layer application. MaxPool records the winning input index per output
// entry (consumed by APoZ bookkeeping and by fine-tuning backprop).
struct LayerEval {
  Vector output;
  std::vector<Index> maxpool_argmax;
};

LayerEval eval_layer(const Layer& layer, const Vector& input, Trajectory* ode_trace = nullptr,
                     std::optional<long> record_stride = std::nullopt);

Index layer_output_dim(const Layer& layer, Index input_dim);

// Full forward pass; returns softmax class probabilities. When ode_trace is
// given the ODE layer records its trajectory at record_stride (default 1).
Vector forward(const ModelSpec& model, const Vector& input, Trajectory* ode_trace = nullptr,
               std::optional<long> record_stride = std::nullopt);

// A = W - W^T - gamma I; eigenvalue real parts all equal -gamma.
struct AntisymmetricParams {
  Matrix W;
  double gamma = 0.0;
};

Matrix build_antisymmetric(const AntisymmetricParams& params);

// Shifted antisymmetric ODE-RNN: tanh block with input matrix Z, integrated
// from x(0) = 0 with one Euler step per held input sample.
struct RnnSpec {
  Index hidden = 0;
  AntisymmetricParams antisym;
  Vector bias;
  Matrix input_matrix;  // n x i
  Matrix readout_weights;
  Vector readout_bias;
  double dt = 0.1;
  long steps_per_input = 1;
};

Vector forward_rnn(const RnnSpec& spec, const Matrix& sequence);  // i x T columns
ModelSpec rnn_to_model(const RnnSpec& spec);

// Zero-padded same convolution as an explicit matrix on the channel-major
// vectorization. kernels[co][ci] is an odd-sided square kernel; the result
// is sparse Toeplitz-structured but stored dense.
std::pair<Matrix, Vector> conv_to_matrix(const std::vector<std::vector<Matrix>>& kernels,
                                         Index height, Index width, const Vector& channel_bias);

// Theoretical per-layer sizes of the original and compressed ODE models.
enum class CountsMethod { Original, PodDeim, Apoz, Svd };
enum class CountsCase { Best, Worst };

CountsMethod counts_method_from_string(const std::string& s);

struct LayerCounts {
  long ode_weights = 0;
  long ode_activations = 0;
  long preceding = 0;
  long following = 0;
};

LayerCounts parameter_counts(CountsMethod method, CountsCase c, long n, long k, long i, long o);

}  // namespace odec

#endif
