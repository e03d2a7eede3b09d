#include "odec/snapshots.hpp"

#include <cstring>
#include <fstream>
#include <iostream>

namespace odec {

void SnapshotSet::validate() const {
  if (states.rows() != nonlinear.rows() || states.cols() != nonlinear.cols())
    fail("snapshots: X is ", states.rows(), "x", states.cols(), " but F is ",
         nonlinear.rows(), "x", nonlinear.cols());
  if (states.cols() < 1) fail("snapshots: empty");
  if (!all_finite(states) || !all_finite(nonlinear)) fail("snapshots: non-finite entries");
}

SnapshotSet collect(const ModelSpec& model, const Dataset& data, long sample_limit,
                    long record_stride, CollectStats* stats) {
  if (sample_limit < 1) fail("collect: sample_limit must be >= 1");
  if (record_stride < 1) fail("collect: record_stride must be >= 1");
  model.validate();

  const long n = std::min<long>(sample_limit, data.sample_count());
  std::vector<Matrix> xs, fs;
  long used = 0, skipped = 0;
  Index total_cols = 0;
  for (long s = 0; s < n; ++s) {
    Trajectory traj;
    try {
      forward(model, data.images.col(s), &traj, record_stride);
    } catch (const DivergenceError& e) {
      std::cerr << "warning: snapshot sample " << s << " skipped: " << e.what() << "\n";
      ++skipped;
      continue;
    }
    total_cols += traj.states.cols();
    xs.push_back(std::move(traj.states));
    fs.push_back(std::move(traj.activations));
    ++used;
  }
  if (used == 0) fail("collect: every sample diverged (", skipped, " skipped)");

  SnapshotSet out;
  out.states.resize(xs[0].rows(), total_cols);
  out.nonlinear.resize(fs[0].rows(), total_cols);
  Index at = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.states.middleCols(at, xs[i].cols()) = xs[i];
    out.nonlinear.middleCols(at, fs[i].cols()) = fs[i];
    at += xs[i].cols();
  }
  out.provenance = concat("dataset=", data.id.empty() ? "(unnamed)" : data.id,
                          " split=", data.split, " samples=", used, " skipped=", skipped,
                          " stride=", record_stride);
  if (stats != nullptr) *stats = {used, skipped};
  out.validate();
  return out;
}

Matrix pod_basis(const Matrix& snapshots, Index k) {
  const Index bound = std::min(snapshots.rows(), snapshots.cols());
  if (k < 1 || k > bound)
    fail("pod_basis: k=", k, " exceeds rank bound ", bound);
  SvdResult s = svd(snapshots);
  return s.left.leftCols(k);
}

Vector singular_spectrum(const Matrix& m) {
  SvdResult s = svd(m);
  const double total = s.singular.sum();
  if (total == 0.0) {
    // all-zero matrix: flat spectrum by convention
    return Vector::Constant(s.singular.size(), 1.0 / static_cast<double>(s.singular.size()));
  }
  return s.singular / total;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.append(b, 4);
}

std::uint32_t get_u32(const std::string& s, std::size_t at) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data() + at);
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_matrix_colmajor(std::string& out, const Matrix& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      char b[8];
      std::memcpy(b, &v, 8);
      out.append(b, 8);
    }
  }
}

Matrix get_matrix_colmajor(const std::string& s, std::size_t at, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      double v;
      std::memcpy(&v, s.data() + at, 8);
      at += 8;
      m(r, c) = v;
    }
  }
  return m;
}

}  // namespace

std::string encode_snapshots(const SnapshotSet& s) {
  s.validate();
  std::string out;
  out.append("SNP1", 4);
  put_u32(out, static_cast<std::uint32_t>(s.states.rows()));
  put_u32(out, static_cast<std::uint32_t>(s.states.cols()));
  put_matrix_colmajor(out, s.states);
  put_matrix_colmajor(out, s.nonlinear);
  put_u32(out, static_cast<std::uint32_t>(s.provenance.size()));
  out.append(s.provenance);
  return out;
}

SnapshotSet decode_snapshots(const std::string& bytes) {
  if (bytes.size() < 12) fail("snapshot file: truncated header");
  if (bytes.compare(0, 4, "SNP1") != 0) fail("snapshot file: bad magic");
  const Index rows = static_cast<Index>(get_u32(bytes, 4));
  const Index cols = static_cast<Index>(get_u32(bytes, 8));
  const std::size_t mat = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 8;
  std::size_t need = 12 + 2 * mat + 4;
  if (bytes.size() < need) fail("snapshot file: truncated payload");

  SnapshotSet s;
  s.states = get_matrix_colmajor(bytes, 12, rows, cols);
  s.nonlinear = get_matrix_colmajor(bytes, 12 + mat, rows, cols);
  const std::uint32_t plen = get_u32(bytes, 12 + 2 * mat);
  if (bytes.size() < need + plen) fail("snapshot file: truncated provenance");
  s.provenance = bytes.substr(12 + 2 * mat + 4, plen);
  s.validate();
  return s;
}

void save_snapshots(const SnapshotSet& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write snapshot file: ", path);
  const std::string bytes = encode_snapshots(s);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail("short write to snapshot file: ", path);
}

SnapshotSet load_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open snapshot file: ", path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshots(bytes);
}

}  // namespace odec
