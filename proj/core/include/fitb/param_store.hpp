#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fitb/rng.hpp"
#include "fitb/tensor.hpp"

namespace fitb {

template <class S>
struct ParamEntry {
  Tensor<S> value;
  Tensor<S> grad;          // same shape, zero-initialized
  Tensor<S> adam_m;        // first moment, allocated lazily on first update
  Tensor<S> adam_v;        // second moment
  bool trainable = true;
  bool grad_populated = false;  // set by Graph::backward, cleared by adam_update
};

// Named, ordered collection of parameter tensors with gradients and
// optimizer moments. Iteration order is insertion order and defines the
// checkpoint blob layout.
template <class S>
class ParameterStore {
 public:
  ParameterStore() = default;

  Tensor<S>& add(const std::string& name, Tensor<S> value, bool trainable = true);

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  ParamEntry<S>& entry(const std::string& name);
  const ParamEntry<S>& entry(const std::string& name) const;
  Tensor<S>& value(const std::string& name) { return entry(name).value; }
  const Tensor<S>& value(const std::string& name) const { return entry(name).value; }

  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }
  std::size_t coord_count() const;

  void zero_grads();

  std::uint64_t rng_seed() const { return rng_seed_; }
  void set_rng_seed(std::uint64_t s) { rng_seed_ = s; }

  template <class T>
  ParameterStore<T> cast() const {
    ParameterStore<T> out;
    out.set_rng_seed(rng_seed_);
    for (const auto& name : order_) {
      const auto& e = entries_.at(name);
      out.add(name, e.value.template cast<T>(), e.trainable);
    }
    return out;
  }

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, ParamEntry<S>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t rng_seed_ = 0;
};

using ParamStoreF = ParameterStore<float>;
using ParamStoreD = ParameterStore<double>;

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam step over all trainable entries. Requires every
// trainable entry's gradient to have been populated since the last step;
// zeroes gradients afterwards. `step` is 1-based.
template <class S>
void adam_update(ParameterStore<S>& store, const AdamConfig& cfg, std::int64_t step);

// Checkpoint: JSON manifest (names, shapes, dtype, format version, rng
// seed, optional extras) plus a raw blob of little-endian 32-bit reals
// concatenated in manifest order.
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const ParameterStore<float>& store, const std::string& manifest_path,
                     const std::string& blob_path, const std::string& extras_json = "");

// Returns the store; if extras_json_out != nullptr receives the manifest's
// extras object serialized as a JSON string ("null" when absent).
ParameterStore<float> load_checkpoint(const std::string& manifest_path,
                                      std::string* extras_json_out = nullptr);

// Parameter initializers (deterministic given the rng).
template <class S>
Tensor<S> xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);
template <class S>
Tensor<S> normal_init(std::vector<std::size_t> shape, double sigma, Rng& rng);

}  // namespace fitb
