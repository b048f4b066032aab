#include "fitb/param_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fitb/error.hpp"

namespace fitb {

template <class S>
Tensor<S>& ParameterStore<S>::add(const std::string& name, Tensor<S> value, bool trainable) {
  if (has(name)) throw StateError("parameter already registered: " + name);
  ParamEntry<S> e;
  e.grad = Tensor<S>::zeros(value.shape());
  e.value = std::move(value);
  e.trainable = trainable;
  index_[name] = order_.size();
  order_.push_back(name);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

template <class S>
ParamEntry<S>& ParameterStore<S>::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw StateError("unknown parameter: " + name);
  return it->second;
}

template <class S>
const ParamEntry<S>& ParameterStore<S>::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw StateError("unknown parameter: " + name);
  return it->second;
}

template <class S>
std::size_t ParameterStore<S>::coord_count() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += entries_.at(name).value.size();
  return n;
}

template <class S>
void ParameterStore<S>::zero_grads() {
  for (auto& name : order_) {
    auto& e = entries_.at(name);
    std::fill(e.grad.raw().begin(), e.grad.raw().end(), S(0));
    e.grad_populated = false;
  }
}

template class ParameterStore<float>;
template class ParameterStore<double>;

template <class S>
void adam_update(ParameterStore<S>& store, const AdamConfig& cfg, std::int64_t step) {
  if (step < 1) throw StateError("adam_update: step must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (const auto& name : store.names()) {
    auto& e = store.entry(name);
    if (!e.trainable) continue;
    if (!e.grad_populated)
      throw StateError("adam_update: gradient not populated for parameter " + name);
    if (e.adam_m.size() != e.value.size()) {
      e.adam_m = Tensor<S>::zeros(e.value.shape());
      e.adam_v = Tensor<S>::zeros(e.value.shape());
    }
    S* w = e.value.data();
    S* g = e.grad.data();
    S* m = e.adam_m.data();
    S* v = e.adam_v.data();
    const std::size_t n = e.value.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<S>(mi);
      v[i] = static_cast<S>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      w[i] = static_cast<S>(static_cast<double>(w[i]) - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
    std::fill(e.grad.raw().begin(), e.grad.raw().end(), S(0));
    e.grad_populated = false;
  }
}

template void adam_update<float>(ParameterStore<float>&, const AdamConfig&, std::int64_t);
template void adam_update<double>(ParameterStore<double>&, const AdamConfig&, std::int64_t);

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob writer assumes a little-endian host");

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void save_checkpoint(const ParameterStore<float>& store, const std::string& manifest_path,
                     const std::string& blob_path, const std::string& extras_json) {
  nlohmann::json manifest;
  manifest["kind"] = "fitb-checkpoint";
  manifest["format_version"] = kCheckpointVersion;
  manifest["dtype"] = "f32";
  manifest["rng_seed"] = store.rng_seed();
  manifest["blob"] = std::filesystem::path(blob_path).filename().string();
  auto tensors = nlohmann::json::array();
  std::string blob;
  for (const auto& name : store.names()) {
    const auto& t = store.entry(name).value;
    tensors.push_back({{"name", name}, {"shape", t.shape()}});
    const std::size_t bytes = t.size() * sizeof(float);
    const std::size_t off = blob.size();
    blob.resize(off + bytes);
    std::memcpy(blob.data() + off, t.data(), bytes);
  }
  manifest["tensors"] = std::move(tensors);
  if (!extras_json.empty()) manifest["extras"] = nlohmann::json::parse(extras_json);
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  write_file_atomic(blob_path, blob);
}

ParameterStore<float> load_checkpoint(const std::string& manifest_path,
                                      std::string* extras_json_out) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open checkpoint manifest: " + manifest_path);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest " + manifest_path + ": " + e.what());
  }
  if (manifest.value("format_version", -1) != kCheckpointVersion)
    throw VersionError("unsupported checkpoint format_version in " + manifest_path);
  if (manifest.value("dtype", "") != "f32")
    throw VersionError("unsupported checkpoint dtype in " + manifest_path);

  const std::string blob_path =
      (std::filesystem::path(manifest_path).parent_path() / manifest.at("blob").get<std::string>())
          .string();
  std::ifstream blob_in(blob_path, std::ios::binary);
  if (!blob_in) throw IoError("cannot open checkpoint blob: " + blob_path);
  std::string blob((std::istreambuf_iterator<char>(blob_in)), std::istreambuf_iterator<char>());

  ParameterStore<float> store;
  store.set_rng_seed(manifest.value("rng_seed", std::uint64_t(0)));
  std::size_t off = 0;
  for (const auto& rec : manifest.at("tensors")) {
    const std::string name = rec.at("name").get<std::string>();
    const auto shape = rec.at("shape").get<std::vector<std::size_t>>();
    Tensor<float> t(shape);
    const std::size_t bytes = t.size() * sizeof(float);
    if (off + bytes > blob.size())
      throw IoError("checkpoint blob truncated at tensor " + name + " in " + blob_path);
    std::memcpy(t.data(), blob.data() + off, bytes);
    off += bytes;
    store.add(name, std::move(t));
  }
  if (off != blob.size()) throw IoError("checkpoint blob has trailing bytes: " + blob_path);
  if (extras_json_out)
    *extras_json_out = manifest.contains("extras") ? manifest["extras"].dump() : "null";
  return store;
}

template <class S>
Tensor<S> xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor<S> t({fan_in, fan_out});
  for (auto& x : t.raw()) x = static_cast<S>(rng.uniform(-bound, bound));
  return t;
}

template <class S>
Tensor<S> normal_init(std::vector<std::size_t> shape, double sigma, Rng& rng) {
  Tensor<S> t(std::move(shape));
  for (auto& x : t.raw()) x = static_cast<S>(rng.normal(0.0, sigma));
  return t;
}

template Tensor<float> xavier_uniform<float>(std::size_t, std::size_t, Rng&);
template Tensor<double> xavier_uniform<double>(std::size_t, std::size_t, Rng&);
template Tensor<float> normal_init<float>(std::vector<std::size_t>, double, Rng&);
template Tensor<double> normal_init<double>(std::vector<std::size_t>, double, Rng&);

}  // namespace fitb
