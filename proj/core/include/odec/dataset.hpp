#ifndef ODEC_DATASET_HPP
#define ODEC_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "odec/matrix.hpp"

namespace odec {

struct Dataset {
  Matrix images;  // (channels*h*w) x samples, values in [0, 1]
  std::vector<int> labels;
  std::vector<Index> shape;  // {channels, h, w}
  int class_count = 0;
  std::string split;  // "train" or "test"
  std::string id;     // provenance URI

  Index sample_count() const { return images.cols(); }
  Index sample_dim() const { return images.rows(); }
  void validate() const;
};

// Raw IDX tensor: big-endian header [0, 0, dtype, ndims] then ndims u32
// dimensions, then the payload. Only the unsigned-byte dtype (0x08) is
// supported; payload bytes are scaled by 1/255.
struct IdxTensor {
  std::vector<Index> dims;
  std::vector<double> data;
};

IdxTensor parse_idx(const std::uint8_t* bytes, std::size_t len);
IdxTensor load_idx_file(const std::string& path);

// Deterministic class-conditional Gaussian blobs: per-class template drawn
// once from the seed, samples are logistic-squashed template + unit noise.
// margin 0 makes classes indistinguishable; large margins are separable by
// a linear readout.
Dataset synth_dataset(std::uint64_t seed, int classes, Index samples,
                      const std::vector<Index>& shape, double margin,
                      const std::string& split = "train");

// Dataset URIs:
//   synth:classes=10,samples=512,c=1,h=8,w=8,margin=3,seed=7,split=train
//   idx:images=<path>,labels=<path>,split=test[,limit=N][,classes=10]
Dataset load_dataset(const std::string& uri);

}  // namespace odec

#endif
