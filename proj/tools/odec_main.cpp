// odec: build, train, snapshot, compress and benchmark continuous-layer
// classifiers at desk scale.

#include <CLI11.hpp>

#include <cctype>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "odec/baselines.hpp"
#include "odec/bench.hpp"
#include "odec/dataset.hpp"
#include "odec/layers.hpp"
#include "odec/model_io.hpp"
#include "odec/mor.hpp"
#include "odec/snapshots.hpp"
#include "odec/trainer.hpp"
#include "odec/util.hpp"

using namespace odec;

namespace {

// Option values resolve flags > ODEC_* environment > config file > default.
// The config file is pre-scanned so file values can seed the variables that
// CLI11 then overrides only when a flag is present.
class DefaultSource {
 public:
  void load_file(const std::string& path) { file_ = load_run_config(path); }

  std::string get(const std::string& key, const std::string& hard) const {
    std::string v = hard;
    if (auto it = file_.find(key); it != file_.end()) v = it->second;
    std::string env_name = "ODEC_";
    for (char c : key) env_name += c == '-' ? '_' : static_cast<char>(std::toupper(c));
    if (const char* env = std::getenv(env_name.c_str())) v = env;
    return v;
  }

  long get_long(const std::string& key, long hard) const {
    return std::stol(get(key, std::to_string(hard)));
  }
  double get_double(const std::string& key, double hard) const {
    return std::stod(get(key, format_double(hard)));
  }
  bool get_bool(const std::string& key, bool hard) const {
    const std::string v = get(key, hard ? "true" : "false");
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail("config: boolean expected for '", key, "', got '", v, "'");
  }

 private:
  std::map<std::string, std::string> file_;
};

std::string resolved_hash(const std::map<std::string, std::string>& resolved) {
  std::string canon;
  for (const auto& [k, v] : resolved) canon += k + "=" + v + "\n";
  return hash_string(fnv1a64(canon));
}

// Data inputs are hashed by file content for idx URIs and by the URI string
// for synthetic data (the URI determines the bytes).
std::string dataset_hash(const std::string& uri) {
  if (uri.rfind("idx:", 0) == 0) return hash_string(fnv1a64(uri));
  return hash_string(fnv1a64(uri));
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Index> split_csv_long(const std::string& s) {
  std::vector<Index> out;
  for (const std::string& item : split_csv(s)) out.push_back(std::stol(item));
  return out;
}

Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

Vector random_vector(Rng& rng, Index n, double scale) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

struct InitParams {
  std::string type = "dense";
  Index n = 64;
  Index input_c = 1, input_h = 8, input_w = 8;
  int classes = 10;
  std::uint64_t seed = 1;
  std::string activation = "tanh";
  double gamma = 0.1;
  std::string solver = "";
  double t_end = 1.0, dt = 0.1;
  Index channels = 4;
  Index signal_dim = 1;
  long steps_per_input = 1;
};

ModelSpec build_dense(const InitParams& p) {
  Rng rng(p.seed);
  const Index in = p.input_c * p.input_h * p.input_w;
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(in));
  const double n_scale = 1.0 / std::sqrt(static_cast<double>(p.n));

  auto block = std::make_shared<OdeBlock>();
  block->weights =
      build_antisymmetric({random_matrix(rng, p.n, p.n, n_scale), p.gamma});
  block->bias = random_vector(rng, p.n, n_scale);
  block->activation = activation_from_string(p.activation);

  OdeLayer ode;
  ode.system = block;
  ode.solver = {solver_method_from_string(p.solver.empty() ? "rk4" : p.solver), 0.0, p.t_end,
                p.dt};

  ModelSpec model;
  model.layers.push_back(LinearLayer{random_matrix(rng, p.n, in, in_scale), Vector()});
  model.layers.push_back(ode);
  model.layers.push_back(
      ReadoutLayer{random_matrix(rng, p.classes, p.n, n_scale), Vector::Zero(p.classes)});
  model.input_shape = {p.input_c, p.input_h, p.input_w};
  model.class_count = p.classes;
  model.seed = p.seed;
  return model;
}

ModelSpec build_conv(const InitParams& p) {
  Rng rng(p.seed);
  if (p.input_h % 4 != 0 || p.input_w % 4 != 0)
    fail("conv model: input sides must be divisible by 4 (two 2x2 pools), got ", p.input_h,
         "x", p.input_w);

  auto kernel_set = [&](Index c_out, Index c_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(c_in) * 9.0);
    std::vector<std::vector<Matrix>> ks(static_cast<std::size_t>(c_out));
    for (auto& row : ks)
      for (Index ci = 0; ci < c_in; ++ci) row.push_back(random_matrix(rng, 3, 3, scale));
    return ks;
  };

  ModelSpec model;
  // pre-ODE convolution in matrix form (the evaluation-time representation),
  // then relu and 2x2 pooling
  auto [m1, b1] = conv_to_matrix(kernel_set(p.channels, p.input_c), p.input_h, p.input_w,
                                 random_vector(rng, p.channels, 0.1));
  model.layers.push_back(LinearLayer{std::move(m1), std::move(b1)});
  model.layers.push_back(ReluLayer{});
  model.layers.push_back(MaxPoolLayer{p.channels, p.input_h, p.input_w, 2, 2});

  const Index h2 = p.input_h / 2, w2 = p.input_w / 2;
  auto [mo, bo] = conv_to_matrix(kernel_set(p.channels, p.channels), h2, w2,
                                 random_vector(rng, p.channels, 0.1));
  auto block = std::make_shared<OdeBlock>();
  block->weights = std::move(mo);
  block->bias = std::move(bo);
  block->activation = activation_from_string(p.activation);

  OdeLayer ode;
  ode.system = block;
  ode.solver = {solver_method_from_string(p.solver.empty() ? "rk4" : p.solver), 0.0, p.t_end,
                p.dt};
  model.layers.push_back(ode);
  model.layers.push_back(MaxPoolLayer{p.channels, h2, w2, 2, 2});

  const Index readout_in = p.channels * (h2 / 2) * (w2 / 2);
  const double ro_scale = 1.0 / std::sqrt(static_cast<double>(readout_in));
  model.layers.push_back(ReadoutLayer{random_matrix(rng, p.classes, readout_in, ro_scale),
                                      Vector::Zero(p.classes)});
  model.input_shape = {p.input_c, p.input_h, p.input_w};
  model.class_count = p.classes;
  model.seed = p.seed;
  return model;
}

ModelSpec build_rnn(const InitParams& p) {
  Rng rng(p.seed);
  const double n_scale = 1.0 / std::sqrt(static_cast<double>(p.n));

  RnnSpec spec;
  spec.hidden = p.n;
  // weights drawn from a unit normal, then 1/sqrt(n) stabilization scaling
  spec.antisym = {random_matrix(rng, p.n, p.n, n_scale), p.gamma};
  spec.bias = random_vector(rng, p.n, n_scale);
  spec.input_matrix = random_matrix(rng, p.n, p.signal_dim, n_scale);
  spec.readout_weights = random_matrix(rng, p.classes, p.n, n_scale);
  spec.readout_bias = Vector::Zero(p.classes);
  spec.dt = p.dt;
  spec.steps_per_input = p.steps_per_input;

  ModelSpec model = rnn_to_model(spec);
  model.input_shape = {p.input_c, p.input_h, p.input_w};
  model.class_count = p.classes;
  model.seed = p.seed;
  const Index seq = p.input_c * p.input_h * p.input_w;
  if (seq % p.signal_dim != 0)
    fail("rnn model: sequence length ", seq, " is not a multiple of signal width ",
         p.signal_dim);
  return model;
}

void print_model_summary(const ModelSpec& model) {
  std::cout << "schema: odec-model/1\n";
  std::cout << "input_shape:";
  for (Index s : model.input_shape) std::cout << " " << s;
  std::cout << "\nclass_count: " << model.class_count << "\nseed: " << model.seed << "\n";
  Index dim = model.input_dim();
  long params = 0;
  std::cout << "layers:\n";
  for (const Layer& l : model.layers) {
    const Index out = layer_output_dim(l, dim);
    long layer_params = 0;
    if (const auto* lin = std::get_if<LinearLayer>(&l))
      layer_params = lin->weights.size() + lin->bias.size();
    else if (const auto* ro = std::get_if<ReadoutLayer>(&l))
      layer_params = ro->weights.size() + ro->bias.size();
    else if (const auto* ode = std::get_if<OdeLayer>(&l)) {
      if (const auto* d = dynamic_cast<const OdeBlock*>(ode->system.get()))
        layer_params = d->weights.size() + d->bias.size() +
                       (d->input_matrix ? d->input_matrix->size() : 0);
      else if (const auto* f = dynamic_cast<const SvdTruncatedBlock*>(ode->system.get()))
        layer_params = f->first.size() + f->second.size() + f->bias.size() +
                       (f->input_matrix ? f->input_matrix->size() : 0);
      else if (const auto* r = dynamic_cast<const ReducedOdeBlock*>(ode->system.get()))
        layer_params = r->sampled_weights.size() + r->sampled_bias.size() +
                       r->interpolation.size() +
                       (r->input_matrix ? r->input_matrix->size() : 0);
    }
    params += layer_params;
    std::cout << "  " << layer_kind(l) << ": " << dim << " -> " << out;
    if (layer_params > 0) std::cout << "  (params " << layer_params << ")";
    if (const auto* ode = std::get_if<OdeLayer>(&l)) {
      std::cout << "  [activations/rhs " << ode->system->activation_count() << ", solver "
                << to_string(ode->solver.method) << ", dt " << ode->solver.dt << "]";
    }
    std::cout << "\n";
    dim = out;
  }
  std::cout << "total parameters: " << params << "\n";
  if (model.mor) {
    std::cout << "mor: k=" << model.mor->k << " m=" << model.mor->m << " o=" << model.mor->o
              << " fold=" << (model.mor->fold ? "true" : "false")
              << " snapshot_hash=" << model.mor->snapshot_hash << "\n";
  }
  if (model.compression) {
    std::cout << "compression: method=" << model.compression->method
              << " dimension=" << model.compression->dimension << " ("
              << model.compression->provenance << ")\n";
  }
  for (const auto& [k, v] : model.provenance) std::cout << "provenance " << k << ": " << v << "\n";
}

void print_snapshot_summary(const SnapshotSet& snaps) {
  std::cout << "snapshot matrices: " << snaps.states.rows() << " x " << snaps.states.cols()
            << " (X and F)\n";
  std::cout << "provenance: " << snaps.provenance << "\n";
  const Vector sx = singular_spectrum(snaps.states);
  const Vector sf = singular_spectrum(snaps.nonlinear);
  const Index show = std::min<Index>(10, sx.size());
  std::cout << "X spectrum (sigma_i / sum):";
  for (Index i = 0; i < show; ++i) std::cout << " " << format_double(sx(i));
  std::cout << "\nF spectrum (sigma_i / sum):";
  for (Index i = 0; i < std::min<Index>(10, sf.size()); ++i)
    std::cout << " " << format_double(sf(i));
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-layer classifier compression workbench"};
  app.require_subcommand(1);

  // config file path comes from argv or ODEC_CONFIG before anything else
  DefaultSource defaults;
  std::string config_path;
  if (const char* env = std::getenv("ODEC_CONFIG")) config_path = env;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];

  try {
    if (!config_path.empty()) defaults.load_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  app.add_option("--config", config_path, "JSON config file with a \"run\" section");

  // ---- init-model ----
  auto* cmd_init = app.add_subcommand("init-model", "create a reservoir-style model file");
  InitParams ip;
  ip.type = defaults.get("type", "dense");
  ip.n = defaults.get_long("n", 64);
  ip.input_c = defaults.get_long("input-c", 1);
  ip.input_h = defaults.get_long("input-h", 8);
  ip.input_w = defaults.get_long("input-w", 8);
  ip.classes = static_cast<int>(defaults.get_long("classes", 10));
  ip.seed = static_cast<std::uint64_t>(defaults.get_long("seed", 1));
  ip.activation = defaults.get("activation", "tanh");
  ip.gamma = defaults.get_double("gamma", 0.1);
  ip.solver = defaults.get("solver", "");
  ip.t_end = defaults.get_double("t-end", 1.0);
  ip.dt = defaults.get_double("dt", 0.1);
  ip.channels = defaults.get_long("channels", 4);
  ip.signal_dim = defaults.get_long("signal-dim", 1);
  ip.steps_per_input = defaults.get_long("steps-per-input", 1);
  std::string init_out = defaults.get("out", "");
  cmd_init->add_option("--type", ip.type, "dense | conv | rnn");
  cmd_init->add_option("--n", ip.n, "ODE state dimension (dense) or hidden units (rnn)");
  cmd_init->add_option("--input-c", ip.input_c);
  cmd_init->add_option("--input-h", ip.input_h);
  cmd_init->add_option("--input-w", ip.input_w);
  cmd_init->add_option("--classes", ip.classes);
  cmd_init->add_option("--seed", ip.seed);
  cmd_init->add_option("--activation", ip.activation, "tanh | relu | identity");
  cmd_init->add_option("--gamma", ip.gamma, "antisymmetric shift");
  cmd_init->add_option("--solver", ip.solver, "euler | rk4");
  cmd_init->add_option("--t-end", ip.t_end);
  cmd_init->add_option("--dt", ip.dt);
  cmd_init->add_option("--channels", ip.channels, "conv: feature channels");
  cmd_init->add_option("--signal-dim", ip.signal_dim, "rnn: input width per step");
  cmd_init->add_option("--steps-per-input", ip.steps_per_input, "rnn: solver steps per sample");
  cmd_init->add_option("--out", init_out)->required();

  // ---- train-readout ----
  auto* cmd_train = app.add_subcommand("train-readout", "fit post-ODE layers with SGD");
  std::string tr_model = defaults.get("model", "");
  std::string tr_out = defaults.get("out", "");
  std::string tr_data = defaults.get("data", "");
  std::string tr_val = defaults.get("val-data", "");
  std::string tr_metrics = defaults.get("metrics", "");
  TrainConfig tr_cfg;
  tr_cfg.epochs = static_cast<int>(defaults.get_long("epochs", 8));
  tr_cfg.batch_size = defaults.get_long("batch", 32);
  tr_cfg.learning_rate = defaults.get_double("lr", 0.04);
  tr_cfg.decay = defaults.get_double("decay", 0.9);
  tr_cfg.seed = static_cast<std::uint64_t>(defaults.get_long("seed", 1));
  cmd_train->add_option("--model", tr_model)->required();
  cmd_train->add_option("--out", tr_out)->required();
  cmd_train->add_option("--data", tr_data, "training dataset uri")->required();
  cmd_train->add_option("--val-data", tr_val, "validation dataset uri");
  cmd_train->add_option("--metrics", tr_metrics, "per-epoch metrics CSV path");
  cmd_train->add_option("--epochs", tr_cfg.epochs);
  cmd_train->add_option("--batch", tr_cfg.batch_size);
  cmd_train->add_option("--lr", tr_cfg.learning_rate);
  cmd_train->add_option("--decay", tr_cfg.decay);
  cmd_train->add_option("--seed", tr_cfg.seed);

  // ---- snapshot ----
  auto* cmd_snap = app.add_subcommand("snapshot", "collect POD/DEIM snapshot matrices");
  std::string sn_model = defaults.get("model", "");
  std::string sn_data = defaults.get("data", "");
  std::string sn_out = defaults.get("out", "");
  long sn_samples = defaults.get_long("samples", 200);
  long sn_stride = defaults.get_long("stride", 2);
  cmd_snap->add_option("--model", sn_model)->required();
  cmd_snap->add_option("--data", sn_data)->required();
  cmd_snap->add_option("--out", sn_out)->required();
  cmd_snap->add_option("--samples", sn_samples, "trajectories to record");
  cmd_snap->add_option("--stride", sn_stride, "record every stride-th solver step");

  // ---- reduce ----
  auto* cmd_reduce = app.add_subcommand("reduce", "compress the ODE block");
  std::string rd_model = defaults.get("model", "");
  std::string rd_out = defaults.get("out", "");
  std::string rd_method = defaults.get("method", "pod-deim");
  std::string rd_snapshots = defaults.get("snapshots", "");
  std::string rd_data = defaults.get("data", "");
  std::string rd_apoz_mode = defaults.get("apoz-mode", "abs-magnitude");
  long rd_k = defaults.get_long("k", 0);
  long rd_m = defaults.get_long("m", 0);
  long rd_o = defaults.get_long("o", 0);
  long rd_samples = defaults.get_long("samples", 200);
  bool rd_fold = defaults.get_bool("fold", false);
  cmd_reduce->add_option("--model", rd_model)->required();
  cmd_reduce->add_option("--out", rd_out)->required();
  cmd_reduce->add_option("--method", rd_method, "pod-deim | svd | apoz");
  cmd_reduce->add_option("--snapshots", rd_snapshots, "snapshot file (pod-deim)");
  cmd_reduce->add_option("--data", rd_data, "training dataset uri (apoz scores)");
  cmd_reduce->add_option("--apoz-mode", rd_apoz_mode, "zero-fraction | abs-magnitude");
  cmd_reduce->add_option("--k", rd_k, "subspace dimension / kept neurons / rank")->required();
  cmd_reduce->add_option("--m", rd_m, "DEIM basis size (default k)");
  cmd_reduce->add_option("--o", rd_o, "ODEIM oversamples (1 gives m+1 points)");
  cmd_reduce->add_option("--samples", rd_samples, "apoz: samples for scoring");
  cmd_reduce->add_flag("--fold,!--no-fold", rd_fold, "fold projections into linear neighbors");

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "accuracy and wall-time of a model");
  std::string ev_model = defaults.get("model", "");
  std::string ev_data = defaults.get("data", "");
  std::string ev_report = defaults.get("report", "");
  long ev_reps = defaults.get_long("timing-reps", 10);
  cmd_eval->add_option("--model", ev_model)->required();
  cmd_eval->add_option("--data", ev_data)->required();
  cmd_eval->add_option("--report", ev_report, "write a one-row report CSV");
  cmd_eval->add_option("--timing-reps", ev_reps, "timed passes (median reported)");

  // ---- sweep ----
  auto* cmd_sweep = app.add_subcommand("sweep", "methods x dimensions x tuning stages");
  std::string sw_model = defaults.get("model", "");
  std::string sw_snapshots = defaults.get("snapshots", "");
  std::string sw_data = defaults.get("data", "");
  std::string sw_test = defaults.get("test-data", "");
  std::string sw_out = defaults.get("out", "report.csv");
  std::string sw_curve = defaults.get("curve", "");
  std::string sw_svg = defaults.get("svg", "");
  std::string sw_methods = defaults.get("methods", "pod-deim,svd,apoz");
  std::string sw_dims = defaults.get("dims", "");
  std::string sw_stages = defaults.get("stages", "none,short,long");
  SweepConfig sw_cfg;
  sw_cfg.epochs_short = static_cast<int>(defaults.get_long("epochs-short", 3));
  sw_cfg.epochs_long = static_cast<int>(defaults.get_long("epochs-long", 30));
  sw_cfg.timing_reps = static_cast<int>(defaults.get_long("timing-reps", 10));
  sw_cfg.oversamples = defaults.get_long("o", 0);
  sw_cfg.fold = defaults.get_bool("fold", false);
  sw_cfg.apoz_samples = defaults.get_long("apoz-samples", 200);
  sw_cfg.train.batch_size = defaults.get_long("batch", 32);
  sw_cfg.train.learning_rate = defaults.get_double("lr", 0.04);
  sw_cfg.train.decay = defaults.get_double("decay", 0.9);
  sw_cfg.train.seed = static_cast<std::uint64_t>(defaults.get_long("seed", 1));
  cmd_sweep->add_option("--model", sw_model)->required();
  cmd_sweep->add_option("--snapshots", sw_snapshots)->required();
  cmd_sweep->add_option("--data", sw_data, "training dataset uri")->required();
  cmd_sweep->add_option("--test-data", sw_test, "test dataset uri")->required();
  cmd_sweep->add_option("--out", sw_out, "report CSV path");
  cmd_sweep->add_option("--curve", sw_curve, "relative-curve CSV path");
  cmd_sweep->add_option("--svg", sw_svg, "optional SVG chart path");
  cmd_sweep->add_option("--methods", sw_methods, "comma list: pod-deim,svd,apoz");
  cmd_sweep->add_option("--dims", sw_dims, "comma list of dimensions")->required();
  cmd_sweep->add_option("--stages", sw_stages, "comma list: none,short,long");
  cmd_sweep->add_option("--epochs-short", sw_cfg.epochs_short);
  cmd_sweep->add_option("--epochs-long", sw_cfg.epochs_long);
  cmd_sweep->add_option("--timing-reps", sw_cfg.timing_reps);
  cmd_sweep->add_option("--o", sw_cfg.oversamples);
  cmd_sweep->add_flag("--fold,!--no-fold", sw_cfg.fold);
  cmd_sweep->add_option("--apoz-samples", sw_cfg.apoz_samples);
  cmd_sweep->add_option("--batch", sw_cfg.train.batch_size);
  cmd_sweep->add_option("--lr", sw_cfg.train.learning_rate);
  cmd_sweep->add_option("--decay", sw_cfg.train.decay);
  cmd_sweep->add_option("--seed", sw_cfg.train.seed);

  // ---- inspect ----
  auto* cmd_inspect = app.add_subcommand("inspect", "summarize a model/snapshot/report file");
  std::string in_model, in_snapshots, in_report;
  cmd_inspect->add_option("--model", in_model);
  cmd_inspect->add_option("--snapshots", in_snapshots);
  cmd_inspect->add_option("--report", in_report);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_init->parsed()) {
      std::map<std::string, std::string> resolved = {
          {"command", "init-model"}, {"type", ip.type},
          {"n", std::to_string(ip.n)}, {"classes", std::to_string(ip.classes)},
          {"seed", std::to_string(ip.seed)}, {"activation", ip.activation},
          {"gamma", format_double(ip.gamma)}, {"t-end", format_double(ip.t_end)},
          {"dt", format_double(ip.dt)},
          {"input", concat(ip.input_c, "x", ip.input_h, "x", ip.input_w)}};
      ModelSpec model;
      if (ip.type == "dense")
        model = build_dense(ip);
      else if (ip.type == "conv")
        model = build_conv(ip);
      else if (ip.type == "rnn")
        model = build_rnn(ip);
      else
        fail("unknown model type '", ip.type, "' (dense | conv | rnn)");
      model.validate();
      model.provenance["config_hash"] = resolved_hash(resolved);
      save_model(model, init_out);
      std::cerr << "wrote " << init_out << " (" << ip.type << ", ODE dim "
                << std::get<OdeLayer>(model.layers[static_cast<std::size_t>(
                                          model.ode_layer_index())]).system->dim()
                << ")\n";
    } else if (cmd_train->parsed()) {
      ModelSpec model = load_model(tr_model);
      Dataset train = load_dataset(tr_data);
      std::optional<Dataset> val;
      if (!tr_val.empty()) val = load_dataset(tr_val);
      const auto metrics = fit(model, train, val ? &*val : nullptr, tr_cfg);
      std::map<std::string, std::string> resolved = {
          {"command", "train-readout"}, {"epochs", std::to_string(tr_cfg.epochs)},
          {"batch", std::to_string(tr_cfg.batch_size)},
          {"lr", format_double(tr_cfg.learning_rate)},
          {"decay", format_double(tr_cfg.decay)}, {"seed", std::to_string(tr_cfg.seed)},
          {"data", tr_data}};
      model.provenance["config_hash"] = resolved_hash(resolved);
      model.provenance["input:model"] = hash_file(tr_model);
      model.provenance["input:data"] = dataset_hash(tr_data);
      save_model(model, tr_out);
      if (!tr_metrics.empty())
        write_metrics_csv(metrics, tr_metrics,
                          concat("config_hash=", resolved_hash(resolved)));
      if (!metrics.empty())
        std::cerr << "epoch " << metrics.back().epoch << ": loss " << metrics.back().loss
                  << ", train acc " << metrics.back().train_accuracy << ", val acc "
                  << metrics.back().val_accuracy << "\n";
      std::cerr << "wrote " << tr_out << "\n";
    } else if (cmd_snap->parsed()) {
      ModelSpec model = load_model(sn_model);
      Dataset data = load_dataset(sn_data);
      CollectStats stats;
      SnapshotSet snaps = collect(model, data, sn_samples, sn_stride, &stats);
      std::map<std::string, std::string> resolved = {
          {"command", "snapshot"}, {"samples", std::to_string(sn_samples)},
          {"stride", std::to_string(sn_stride)}, {"data", sn_data}};
      snaps.provenance += concat(" config=", resolved_hash(resolved),
                                 " model=", hash_file(sn_model));
      save_snapshots(snaps, sn_out);
      std::cerr << "wrote " << sn_out << " (" << snaps.states.rows() << " x "
                << snaps.states.cols() << ", " << stats.samples_skipped << " skipped)\n";
    } else if (cmd_reduce->parsed()) {
      ModelSpec model = load_model(rd_model);
      if (rd_k < 1) fail("reduce: --k must be >= 1");
      if (rd_m == 0) rd_m = rd_k;
      std::map<std::string, std::string> resolved = {
          {"command", "reduce"}, {"method", rd_method}, {"k", std::to_string(rd_k)},
          {"m", std::to_string(rd_m)}, {"o", std::to_string(rd_o)},
          {"fold", rd_fold ? "true" : "false"}};
      ModelSpec out;
      if (rd_method == "pod-deim") {
        if (rd_snapshots.empty()) fail("reduce --method pod-deim needs --snapshots");
        SnapshotSet snaps = load_snapshots(rd_snapshots);
        out = reduce_model(model, snaps, rd_k, rd_m, rd_o, rd_fold);
        out.provenance["input:snapshots"] = hash_file(rd_snapshots);
      } else if (rd_method == "svd") {
        out = svd_truncate_model(model, rd_k);
      } else if (rd_method == "apoz") {
        if (rd_data.empty()) fail("reduce --method apoz needs --data for scoring");
        Dataset data = load_dataset(rd_data);
        const ApozScores scores =
            apoz_scores(model, data, rd_samples, apoz_mode_from_string(rd_apoz_mode));
        out = apoz_prune(model, scores, rd_k);
        out.compression->provenance += concat(" data=", rd_data, " samples=", rd_samples);
        out.provenance["input:data"] = dataset_hash(rd_data);
      } else {
        fail("unknown reduce method '", rd_method, "' (pod-deim | svd | apoz)");
      }
      out.provenance["config_hash"] = resolved_hash(resolved);
      out.provenance["input:model"] = hash_file(rd_model);
      save_model(out, rd_out);
      std::cerr << "wrote " << rd_out << " (" << rd_method << ", dim " << rd_k << ")\n";
    } else if (cmd_eval->parsed()) {
      ModelSpec model = load_model(ev_model);
      Dataset data = load_dataset(ev_data);
      const EvalResult r = evaluate(model, data, static_cast<int>(ev_reps));
      std::cout << "method " << r.method << " dim " << r.dimension << ": top-1 " << r.top1
                << ", top-3 " << r.top3 << ", wall-time " << r.wall_time << " s over "
                << r.sample_count << " samples";
      if (r.divergences > 0) std::cout << " (" << r.divergences << " diverged)";
      std::cout << "\n";
      if (!ev_report.empty()) {
        SweepReport rep;
        rep.original = r;
        std::map<std::string, std::string> resolved = {
            {"command", "eval"}, {"timing-reps", std::to_string(ev_reps)},
            {"data", ev_data}};
        write_report_csv(rep, ev_report,
                         concat("config_hash=", resolved_hash(resolved),
                                " input:model=", hash_file(ev_model)));
        std::cerr << "wrote " << ev_report << "\n";
      }
    } else if (cmd_sweep->parsed()) {
      ModelSpec model = load_model(sw_model);
      SnapshotSet snaps = load_snapshots(sw_snapshots);
      Dataset train = load_dataset(sw_data);
      Dataset test = load_dataset(sw_test);
      sw_cfg.methods = split_csv(sw_methods);
      sw_cfg.dimensions = split_csv_long(sw_dims);
      sw_cfg.stages = split_csv(sw_stages);
      const SweepReport report = sweep(model, snaps, train, test, sw_cfg);
      std::map<std::string, std::string> resolved = {
          {"command", "sweep"}, {"methods", sw_methods}, {"dims", sw_dims},
          {"stages", sw_stages}, {"o", std::to_string(sw_cfg.oversamples)},
          {"fold", sw_cfg.fold ? "true" : "false"},
          {"timing-reps", std::to_string(sw_cfg.timing_reps)},
          {"seed", std::to_string(sw_cfg.train.seed)}};
      const std::string comment =
          concat("config_hash=", resolved_hash(resolved), " input:model=", hash_file(sw_model),
                 " input:snapshots=", hash_file(sw_snapshots));
      write_report_csv(report, sw_out, comment);
      std::cerr << "wrote " << sw_out << " (" << report.rows.size() << " rows, "
                << report.failures.size() << " failures)\n";
      if (!sw_curve.empty() || !sw_svg.empty()) {
        const RelativeCurve curve = relative_curve(report.original, report.rows);
        if (!sw_curve.empty()) {
          write_curve_csv(curve, sw_curve, comment);
          std::cerr << "wrote " << sw_curve << "\n";
        }
        if (!sw_svg.empty()) {
          write_svg_chart(curve, sw_svg, comment);
          std::cerr << "wrote " << sw_svg << "\n";
        }
      }
    } else if (cmd_inspect->parsed()) {
      if (!in_model.empty()) print_model_summary(load_model(in_model));
      if (!in_snapshots.empty()) print_snapshot_summary(load_snapshots(in_snapshots));
      if (!in_report.empty()) {
        for (const EvalResult& r : read_report_csv(in_report))
          std::cout << r.method << " dim " << r.dimension << " stage " << r.stage << ": top-1 "
                    << r.top1 << ", top-3 " << r.top3 << ", runtime " << r.wall_time << " s\n";
      }
      if (in_model.empty() && in_snapshots.empty() && in_report.empty())
        fail("inspect: give --model, --snapshots or --report");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
