#ifndef ODEC_SNAPSHOTS_HPP
#define ODEC_SNAPSHOTS_HPP

#include <string>

#include "odec/dataset.hpp"
#include "odec/layers.hpp"

namespace odec {

// Paired POD/DEIM snapshot matrices gathered from ODE-block trajectories.
// Column j of nonlinear holds f(A x + b) evaluated at the state in column j
// of states.
struct SnapshotSet {
  Matrix states;     // X, n x s
  Matrix nonlinear;  // F, n x s
  std::string provenance;

  void validate() const;
};

struct CollectStats {
  long samples_used = 0;
  long samples_skipped = 0;  // diverged trajectories
};

// Runs the model over the first sample_limit dataset items and concatenates
// trajectory snapshots in dataset order. record_stride counts solver steps
// (step 0 included). Diverged samples are skipped and counted.
SnapshotSet collect(const ModelSpec& model, const Dataset& data, long sample_limit,
                    long record_stride, CollectStats* stats = nullptr);

// First k left singular vectors of the snapshot matrix.
Matrix pod_basis(const Matrix& snapshots, Index k);

// Singular values normalized to sum 1 (the spectrum-decay diagnostic).
Vector singular_spectrum(const Matrix& m);

// Binary snapshot container, little-endian:
//   "SNP1" | u32 rows | u32 cols | rows*cols f64 X (column-major)
//   | rows*cols f64 F (column-major) | u32 len | provenance UTF-8
std::string encode_snapshots(const SnapshotSet& s);
SnapshotSet decode_snapshots(const std::string& bytes);
void save_snapshots(const SnapshotSet& s, const std::string& path);
SnapshotSet load_snapshots(const std::string& path);

}  // namespace odec

#endif
