// Named-tensor weights container: fixed header, per-tensor name/shape/f32
// payload, trailing CRC32. Plus helpers to generate and slice model weights.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovgen/compress.hpp"
#include "ovgen/model.hpp"

namespace ovgen {

struct NamedTensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (std::int64_t d : shape) n *= d;
    return n;
  }
};

struct TensorContainer {
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
};

void write_weights(const std::string& path, const TensorContainer& container);
TensorContainer read_weights(const std::string& path);

// Seeded synthetic weights for every layer of a model (tensor per layer named
// after the layer; conv shape [n_out, n_in, k, k], fc shape [n_out, n_in]).
// Values are drawn uniform in [-1, 1) and are reproducible per seed.
TensorContainer random_weights(const ModelSpec& model, std::uint64_t seed);

// Extract one layer's weights as a FilterBank (fc treated as 1x1).
FilterBank layer_filters(const TensorContainer& container, const LayerSpec& layer);

}  // namespace ovgen
