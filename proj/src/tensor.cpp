#include "ovgen/tensor.hpp"

#include <cstring>
#include <random>

#include "binio.hpp"

namespace ovgen {

namespace {

constexpr char kWeightsMagic[4] = {'O', 'V', 'W', 'T'};
constexpr std::uint32_t kWeightsVersion = 1;

}  // namespace

const NamedTensor* TensorContainer::find(const std::string& name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

void write_weights(const std::string& path, const TensorContainer& container) {
  detail::ByteWriter w;
  w.raw(kWeightsMagic, 4);
  w.u32(kWeightsVersion);
  w.u32(static_cast<std::uint32_t>(container.tensors.size()));
  for (const NamedTensor& t : container.tensors) {
    if (t.numel() != static_cast<std::int64_t>(t.data.size()))
      throw validation_error("tensor " + t.name + ": data does not match shape");
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (std::int64_t d : t.shape) w.u64(static_cast<std::uint64_t>(d));
    for (float v : t.data) w.f32(v);
  }
  detail::write_file_with_crc(path, w.buf);
}

TensorContainer read_weights(const std::string& path) {
  std::string payload = detail::read_file_with_crc(path);
  detail::ByteReader r(payload);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kWeightsMagic, 4) != 0)
    throw parse_error("bad magic in weights container: " + path);
  if (r.u32() != kWeightsVersion)
    throw parse_error("unsupported weights container version: " + path);

  TensorContainer container;
  std::uint32_t count = r.u32();
  container.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str();
    std::uint32_t ndim = r.u32();
    t.shape.resize(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) t.shape[d] = static_cast<std::int64_t>(r.u64());
    std::int64_t n = t.numel();
    if (n < 0) throw parse_error("negative tensor size in " + path);
    t.data.resize(static_cast<std::size_t>(n));
    for (float& v : t.data) v = r.f32();
    container.tensors.push_back(std::move(t));
  }
  return container;
}

TensorContainer random_weights(const ModelSpec& model, std::uint64_t seed) {
  TensorContainer container;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (const LayerSpec& l : model.layers) {
    NamedTensor t;
    t.name = l.name;
    if (l.kind == LayerKind::conv)
      t.shape = {l.n_out, l.n_in, l.k, l.k};
    else
      t.shape = {l.n_out, l.n_in};
    t.data.resize(static_cast<std::size_t>(t.numel()));
    for (float& v : t.data) v = dist(rng);
    container.tensors.push_back(std::move(t));
  }
  return container;
}

FilterBank layer_filters(const TensorContainer& container, const LayerSpec& layer) {
  const NamedTensor* t = container.find(layer.name);
  if (!t) throw validation_error("weights container has no tensor for layer " + layer.name);
  int k = (layer.kind == LayerKind::conv) ? layer.k : 1;
  std::int64_t expect = static_cast<std::int64_t>(layer.n_out) * layer.n_in * k * k;
  if (t->numel() != expect)
    throw validation_error("tensor " + layer.name + " has wrong element count");
  FilterBank fb = FilterBank::zeros(layer.n_out, layer.n_in, k);
  std::copy(t->data.begin(), t->data.end(), fb.data.begin());
  return fb;
}

}  // namespace ovgen
