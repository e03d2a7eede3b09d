#include "odec/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace odec {

void Dataset::validate() const {
  if (images.cols() != static_cast<Index>(labels.size()))
    fail("dataset: ", images.cols(), " images but ", labels.size(), " labels");
  Index d = 1;
  for (Index s : shape) d *= s;
  if (d != images.rows())
    fail("dataset: shape product ", d, " does not match image dim ", images.rows());
  for (int l : labels)
    if (l < 0 || l >= class_count)
      fail("dataset: label ", l, " out of range for ", class_count, " classes");
}

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

}  // namespace

IdxTensor parse_idx(const std::uint8_t* bytes, std::size_t len) {
  if (len < 4) fail("idx: truncated header (", len, " bytes)");
  if (bytes[0] != 0 || bytes[1] != 0)
    fail("idx: bad magic, first two bytes must be zero");
  const std::uint8_t dtype = bytes[2];
  const std::uint8_t ndims = bytes[3];
  if (dtype != 0x08)
    fail("idx: unsupported dtype 0x", std::hex, static_cast<int>(dtype),
         " (only unsigned byte 0x08 is supported)");
  if (ndims == 0) fail("idx: zero-dimensional tensor");
  const std::size_t header = 4 + 4 * static_cast<std::size_t>(ndims);
  if (len < header) fail("idx: truncated dimension list");

  IdxTensor t;
  std::size_t count = 1;
  for (std::uint8_t i = 0; i < ndims; ++i) {
    const std::uint32_t d = read_be32(bytes + 4 + 4 * i);
    t.dims.push_back(static_cast<Index>(d));
    count *= d;
  }
  if (len - header != count)
    fail("idx: payload has ", len - header, " bytes, expected ", count);
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    t.data[i] = static_cast<double>(bytes[header + i]) / 255.0;
  return t;
}

IdxTensor load_idx_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open IDX file: ", path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return parse_idx(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size());
}

Dataset synth_dataset(std::uint64_t seed, int classes, Index samples,
                      const std::vector<Index>& shape, double margin,
                      const std::string& split) {
  if (classes < 1) fail("synth_dataset: classes must be >= 1");
  if (samples < 1) fail("synth_dataset: samples must be >= 1");
  if (margin < 0.0) fail("synth_dataset: margin must be >= 0");
  Index dim = 1;
  for (Index s : shape) dim *= s;

  // Class templates depend on the seed alone, so train/test splits of the
  // same seed share one class structure; per-sample noise is split-specific.
  Rng template_rng(seed);
  Matrix templates(dim, classes);
  for (Index c = 0; c < classes; ++c)
    for (Index i = 0; i < dim; ++i) templates(i, c) = template_rng.normal();

  Rng rng(fnv1a64(concat(seed, ":", split)));

  Dataset ds;
  ds.images.resize(dim, samples);
  ds.labels.resize(static_cast<std::size_t>(samples));
  ds.shape = shape;
  ds.class_count = classes;
  ds.split = split;

  for (Index s = 0; s < samples; ++s) {
    const int label = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(classes));
    ds.labels[static_cast<std::size_t>(s)] = label;
    for (Index i = 0; i < dim; ++i) {
      const double raw = margin * templates(i, label) + rng.normal();
      ds.images(i, s) = 1.0 / (1.0 + std::exp(-raw));
    }
  }
  ds.validate();
  return ds;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    const std::string item = body.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) fail("dataset uri: expected key=value, got '", item, "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
    pos = comma + 1;
  }
  return kv;
}

std::string take(std::map<std::string, std::string>& kv, const std::string& key,
                 const std::string& fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::string v = it->second;
  kv.erase(it);
  return v;
}

}  // namespace

Dataset load_dataset(const std::string& uri) {
  const std::size_t colon = uri.find(':');
  if (colon == std::string::npos) fail("dataset uri missing scheme: ", uri);
  const std::string scheme = uri.substr(0, colon);
  auto kv = parse_kv(uri.substr(colon + 1));

  Dataset ds;
  if (scheme == "synth") {
    const int classes = std::stoi(take(kv, "classes", "10"));
    const Index samples = std::stol(take(kv, "samples", "256"));
    const Index c = std::stol(take(kv, "c", "1"));
    const Index h = std::stol(take(kv, "h", "8"));
    const Index w = std::stol(take(kv, "w", "8"));
    const double margin = std::stod(take(kv, "margin", "3.0"));
    const auto seed = static_cast<std::uint64_t>(std::stoull(take(kv, "seed", "1")));
    const std::string split = take(kv, "split", "train");
    ds = synth_dataset(seed, classes, samples, {c, h, w}, margin, split);
  } else if (scheme == "idx") {
    const std::string images = take(kv, "images", "");
    const std::string labels = take(kv, "labels", "");
    if (images.empty() || labels.empty()) fail("idx dataset uri needs images= and labels=");
    const std::string split = take(kv, "split", "train");
    const long limit = std::stol(take(kv, "limit", "0"));
    const int classes = std::stoi(take(kv, "classes", "10"));

    IdxTensor img = load_idx_file(images);
    IdxTensor lab = load_idx_file(labels);
    if (img.dims.size() != 3 && img.dims.size() != 4)
      fail("idx images: expected 3 or 4 dims, got ", img.dims.size());
    if (lab.dims.size() != 1) fail("idx labels: expected 1 dim, got ", lab.dims.size());

    Index n = img.dims[0];
    if (lab.dims[0] != n) fail("idx: ", n, " images but ", lab.dims[0], " labels");
    const Index channels = img.dims.size() == 4 ? img.dims[1] : 1;
    const Index h = img.dims[img.dims.size() - 2];
    const Index w = img.dims[img.dims.size() - 1];
    if (limit > 0 && limit < n) n = limit;

    const Index dim = channels * h * w;
    ds.images.resize(dim, n);
    ds.labels.resize(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s) {
      for (Index i = 0; i < dim; ++i)
        ds.images(i, s) = img.data[static_cast<std::size_t>(s * dim + i)];
      // labels were scaled by 1/255 like any u8 payload; undo for class ids
      ds.labels[static_cast<std::size_t>(s)] =
          static_cast<int>(std::lround(lab.data[static_cast<std::size_t>(s)] * 255.0));
    }
    ds.shape = {channels, h, w};
    ds.class_count = classes;
    ds.split = split;
    ds.validate();
  } else {
    fail("unknown dataset scheme '", scheme, "' in uri: ", uri);
  }

  if (!kv.empty()) fail("dataset uri: unknown key '", kv.begin()->first, "'");
  ds.id = uri;
  return ds;
}

}  // namespace odec
