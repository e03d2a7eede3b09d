#include "odec/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "odec/baselines.hpp"
#include "odec/mor.hpp"

namespace odec {

namespace {

using Json = nlohmann::ordered_json;

Json tensor_json(const Matrix& m) {
  Json t;
  t["shape"] = {m.rows(), m.cols()};
  t["data"] = std::vector<double>(m.data(), m.data() + m.size());  // row-major
  return t;
}

Json tensor_json(const Vector& v) {
  Json t;
  t["shape"] = {v.size()};
  t["data"] = std::vector<double>(v.data(), v.data() + v.size());
  return t;
}

Matrix matrix_from_json(const Json& t) {
  const auto shape = t.at("shape").get<std::vector<Index>>();
  if (shape.size() != 2) fail("model file: expected a rank-2 tensor");
  const auto data = t.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != shape[0] * shape[1])
    fail("model file: tensor data length ", data.size(), " does not match shape ", shape[0],
         "x", shape[1]);
  Matrix m(shape[0], shape[1]);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

Vector vector_from_json(const Json& t) {
  const auto shape = t.at("shape").get<std::vector<Index>>();
  if (shape.size() != 1) fail("model file: expected a rank-1 tensor");
  const auto data = t.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != shape[0])
    fail("model file: tensor data length ", data.size(), " does not match shape ", shape[0]);
  Vector v(shape[0]);
  std::copy(data.begin(), data.end(), v.data());
  return v;
}

Json solver_json(const SolverConfig& cfg) {
  Json j;
  j["method"] = to_string(cfg.method);
  j["t0"] = cfg.t0;
  j["t_end"] = cfg.t_end;
  j["dt"] = cfg.dt;
  return j;
}

SolverConfig solver_from_json(const Json& j) {
  SolverConfig cfg;
  cfg.method = solver_method_from_string(j.at("method").get<std::string>());
  cfg.t0 = j.at("t0").get<double>();
  cfg.t_end = j.at("t_end").get<double>();
  cfg.dt = j.at("dt").get<double>();
  return cfg;
}

Json block_json(const OdeSystem& system) {
  Json b;
  if (const auto* dense = dynamic_cast<const OdeBlock*>(&system)) {
    b["type"] = "dense";
    b["activation"] = to_string(dense->activation);
    b["weights"] = tensor_json(dense->weights);
    b["bias"] = tensor_json(dense->bias);
    if (dense->input_matrix) b["input_matrix"] = tensor_json(*dense->input_matrix);
  } else if (const auto* fac = dynamic_cast<const SvdTruncatedBlock*>(&system)) {
    b["type"] = "svd_truncated";
    b["activation"] = to_string(fac->activation);
    b["first"] = tensor_json(fac->first);
    b["second"] = tensor_json(fac->second);
    b["bias"] = tensor_json(fac->bias);
    if (fac->input_matrix) b["input_matrix"] = tensor_json(*fac->input_matrix);
  } else if (const auto* red = dynamic_cast<const ReducedOdeBlock*>(&system)) {
    b["type"] = "reduced";
    b["activation"] = to_string(red->activation);
    b["sampled_weights"] = tensor_json(red->sampled_weights);
    b["sampled_bias"] = tensor_json(red->sampled_bias);
    b["interpolation"] = tensor_json(red->interpolation);
    if (red->input_matrix) b["input_matrix"] = tensor_json(*red->input_matrix);
  } else {
    fail("model file: unknown ODE block type");
  }
  return b;
}

std::shared_ptr<const OdeSystem> block_from_json(const Json& b) {
  const std::string type = b.at("type").get<std::string>();
  if (type == "dense") {
    auto block = std::make_shared<OdeBlock>();
    block->activation = activation_from_string(b.at("activation").get<std::string>());
    block->weights = matrix_from_json(b.at("weights"));
    block->bias = vector_from_json(b.at("bias"));
    if (b.contains("input_matrix")) block->input_matrix = matrix_from_json(b.at("input_matrix"));
    block->validate();
    return block;
  }
  if (type == "svd_truncated") {
    auto block = std::make_shared<SvdTruncatedBlock>();
    block->activation = activation_from_string(b.at("activation").get<std::string>());
    block->first = matrix_from_json(b.at("first"));
    block->second = matrix_from_json(b.at("second"));
    block->bias = vector_from_json(b.at("bias"));
    if (b.contains("input_matrix")) block->input_matrix = matrix_from_json(b.at("input_matrix"));
    return block;
  }
  if (type == "reduced") {
    auto block = std::make_shared<ReducedOdeBlock>();
    block->activation = activation_from_string(b.at("activation").get<std::string>());
    block->sampled_weights = matrix_from_json(b.at("sampled_weights"));
    block->sampled_bias = vector_from_json(b.at("sampled_bias"));
    block->interpolation = matrix_from_json(b.at("interpolation"));
    if (b.contains("input_matrix")) block->input_matrix = matrix_from_json(b.at("input_matrix"));
    return block;
  }
  fail("model file: unknown ODE block type '", type, "'");
}

Json layer_json(const Layer& layer) {
  Json j;
  j["kind"] = layer_kind(layer);
  if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
    j["weights"] = tensor_json(lin->weights);
    if (lin->bias.size() > 0) j["bias"] = tensor_json(lin->bias);
  } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
    j["channels"] = mp->channels;
    j["height"] = mp->height;
    j["width"] = mp->width;
    j["window"] = mp->window;
    j["stride"] = mp->stride;
  } else if (const auto* ode = std::get_if<OdeLayer>(&layer)) {
    j["input"] = ode->input == OdeInput::InitialValue ? "initial_value" : "signal";
    if (ode->input == OdeInput::Signal) {
      j["signal_dim"] = ode->signal_dim;
      j["steps_per_input"] = ode->steps_per_input;
    }
    j["solver"] = solver_json(ode->solver);
    j["block"] = block_json(*ode->system);
  } else if (const auto* ro = std::get_if<ReadoutLayer>(&layer)) {
    j["weights"] = tensor_json(ro->weights);
    j["bias"] = tensor_json(ro->bias);
  } else if (const auto* sc = std::get_if<ScatterLayer>(&layer)) {
    j["dim"] = sc->dim;
    j["indices"] = sc->indices;
  } else if (const auto* ga = std::get_if<GatherLayer>(&layer)) {
    j["indices"] = ga->indices;
  }
  return j;
}

Layer layer_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    LinearLayer l;
    l.weights = matrix_from_json(j.at("weights"));
    if (j.contains("bias")) l.bias = vector_from_json(j.at("bias"));
    return l;
  }
  if (kind == "relu") return ReluLayer{};
  if (kind == "flatten") return FlattenLayer{};
  if (kind == "maxpool") {
    MaxPoolLayer l;
    l.channels = j.at("channels").get<Index>();
    l.height = j.at("height").get<Index>();
    l.width = j.at("width").get<Index>();
    l.window = j.at("window").get<Index>();
    l.stride = j.at("stride").get<Index>();
    return l;
  }
  if (kind == "ode") {
    OdeLayer l;
    const std::string input = j.at("input").get<std::string>();
    if (input == "initial_value") {
      l.input = OdeInput::InitialValue;
    } else if (input == "signal") {
      l.input = OdeInput::Signal;
      l.signal_dim = j.at("signal_dim").get<Index>();
      l.steps_per_input = j.at("steps_per_input").get<long>();
    } else {
      fail("model file: unknown ODE input mode '", input, "'");
    }
    l.solver = solver_from_json(j.at("solver"));
    l.system = block_from_json(j.at("block"));
    return l;
  }
  if (kind == "readout") {
    ReadoutLayer l;
    l.weights = matrix_from_json(j.at("weights"));
    l.bias = vector_from_json(j.at("bias"));
    return l;
  }
  if (kind == "scatter") {
    ScatterLayer l;
    l.dim = j.at("dim").get<Index>();
    l.indices = j.at("indices").get<std::vector<Index>>();
    return l;
  }
  if (kind == "gather") {
    GatherLayer l;
    l.indices = j.at("indices").get<std::vector<Index>>();
    return l;
  }
  fail("model file: unknown layer kind '", kind, "'");
}

constexpr const char* kSchema = "odec-model/1";

}  // namespace

std::string encode_model(const ModelSpec& model) {
  Json j;
  j["schema"] = kSchema;
  j["input_shape"] = model.input_shape;
  j["class_count"] = model.class_count;
  j["seed"] = model.seed;
  j["layers"] = Json::array();
  for (const Layer& l : model.layers) j["layers"].push_back(layer_json(l));
  if (model.mor) {
    Json m;
    m["k"] = model.mor->k;
    m["m"] = model.mor->m;
    m["o"] = model.mor->o;
    m["fold"] = model.mor->fold;
    m["points_base"] = 0;  // stored indices are 0-based
    m["points"] = model.mor->points;
    m["snapshot_hash"] = model.mor->snapshot_hash;
    j["mor"] = m;
  }
  if (model.compression) {
    Json c;
    c["method"] = model.compression->method;
    c["dimension"] = model.compression->dimension;
    c["provenance"] = model.compression->provenance;
    j["compression"] = c;
  }
  if (!model.provenance.empty()) j["provenance"] = model.provenance;
  return j.dump(1);
}

ModelSpec decode_model(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    fail("model file: invalid JSON: ", e.what());
  }
  const std::string schema = j.at("schema").get<std::string>();
  if (schema != kSchema)
    fail("model file: schema version mismatch, expected ", kSchema, ", got ", schema);

  ModelSpec model;
  model.input_shape = j.at("input_shape").get<std::vector<Index>>();
  model.class_count = j.at("class_count").get<int>();
  model.seed = j.at("seed").get<std::uint64_t>();
  for (const Json& lj : j.at("layers")) model.layers.push_back(layer_from_json(lj));
  if (j.contains("mor")) {
    const Json& m = j.at("mor");
    MorSection s;
    s.k = m.at("k").get<Index>();
    s.m = m.at("m").get<Index>();
    s.o = m.at("o").get<Index>();
    s.fold = m.at("fold").get<bool>();
    if (m.contains("points_base") && m.at("points_base").get<Index>() != 0)
      fail("model file: mor points must be stored 0-based");
    s.points = m.at("points").get<std::vector<Index>>();
    s.snapshot_hash = m.at("snapshot_hash").get<std::string>();
    model.mor = s;
  }
  if (j.contains("compression")) {
    const Json& c = j.at("compression");
    model.compression = CompressionSection{c.at("method").get<std::string>(),
                                           c.at("dimension").get<Index>(),
                                           c.at("provenance").get<std::string>()};
  }
  if (j.contains("provenance"))
    model.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
  model.validate();
  return model;
}

void save_model(const ModelSpec& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write model file: ", path);
  out << encode_model(model) << "\n";
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open model file: ", path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(text);
}

std::map<std::string, std::string> load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: ", path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    fail("config file: invalid JSON: ", e.what());
  }
  if (!j.contains("run")) fail("config file: missing \"run\" section");
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : j.at("run").items()) {
    if (value.is_string())
      out[key] = value.get<std::string>();
    else
      out[key] = value.dump();
  }
  return out;
}

}  // namespace odec
