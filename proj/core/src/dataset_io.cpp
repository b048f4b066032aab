#include "fitb/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fitb/error.hpp"

namespace fitb {

namespace {

static_assert(std::endian::native == std::endian::little,
              "feature pack writer assumes a little-endian host");

constexpr char kPackMagic[4] = {'F', 'I', 'T', 'B'};
constexpr std::uint16_t kPackVersion = 1;

std::string pack_path(const std::string& json_path, const char* suffix) {
  std::filesystem::path p(json_path);
  p.replace_extension();
  return p.string() + suffix;
}

class PackWriter {
 public:
  explicit PackWriter(std::uint16_t dim) : dim_(dim) {}

  std::uint32_t append(const float* v, std::size_t n) {
    if (n != dim_) throw DataError("feature pack: vector dim mismatch");
    const std::size_t off = data_.size();
    data_.resize(off + n * sizeof(float));
    std::memcpy(data_.data() + off, v, n * sizeof(float));
    return count_++;
  }

  void write(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open for writing: " + tmp);
      out.write(kPackMagic, 4);
      out.write(reinterpret_cast<const char*>(&kPackVersion), 2);
      out.write(reinterpret_cast<const char*>(&dim_), 2);
      out.write(reinterpret_cast<const char*>(&count_), 4);
      out.write(data_.data(), static_cast<std::streamsize>(data_.size()));
      if (!out) throw IoError("short write: " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::uint16_t dim_;
  std::uint32_t count_ = 0;
  std::string data_;
};

class PackReader {
 public:
  PackReader(const std::string& path, std::size_t expected_dim) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature pack: " + path);
    char magic[4];
    std::uint16_t version = 0, dim = 0;
    std::uint32_t count = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 2);
    in.read(reinterpret_cast<char*>(&dim), 2);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in || std::memcmp(magic, kPackMagic, 4) != 0)
      throw DataError("feature pack " + path + ": bad header magic");
    if (version != kPackVersion)
      throw VersionError("feature pack " + path + ": unsupported version " +
                         std::to_string(version));
    if (dim != expected_dim)
      throw DataError("feature pack " + path + ": dim " + std::to_string(dim) +
                      " does not match manifest dim " + std::to_string(expected_dim));
    dim_ = dim;
    count_ = count;
    data_.assign(static_cast<std::size_t>(count) * dim, 0.0f);
    in.read(reinterpret_cast<char*>(data_.data()),
            static_cast<std::streamsize>(data_.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != data_.size() * sizeof(float))
      throw DataError("feature pack " + path + ": truncated blob, expected " +
                      std::to_string(count) + " vectors");
  }

  const float* vec(std::uint32_t index, const std::string& context) const {
    if (index >= count_)
      throw DataError("feature pack " + path_ + ": index " + std::to_string(index) +
                      " out of range at " + context);
    return data_.data() + static_cast<std::size_t>(index) * dim_;
  }

  std::size_t dim() const { return dim_; }

 private:
  std::string path_;
  std::size_t dim_ = 0;
  std::uint32_t count_ = 0;
  std::vector<float> data_;
};

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << text;
    if (!out) throw IoError("short write: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& json_path,
                  const std::string& provenance_json) {
  const std::string faces_path = pack_path(json_path, ".faces.bin");
  const std::string segs_path = pack_path(json_path, ".segs.bin");

  PackWriter faces(static_cast<std::uint16_t>(ds.dims.d_face));
  PackWriter segs(static_cast<std::uint16_t>(ds.dims.d_vid));

  nlohmann::ordered_json doc;
  doc["kind"] = "fitb-dataset";
  doc["format_version"] = kDatasetVersion;
  doc["split"] = to_string(ds.split);
  doc["window_length"] = ds.window_length;
  doc["feature_dims"] = {{"d_face", ds.dims.d_face}, {"d_vid", ds.dims.d_vid}, {"t", ds.dims.t}};
  doc["face_pack"] = std::filesystem::path(faces_path).filename().string();
  doc["segment_pack"] = std::filesystem::path(segs_path).filename().string();
  if (!provenance_json.empty()) doc["provenance"] = nlohmann::ordered_json::parse(provenance_json);

  auto movies = nlohmann::ordered_json::array();
  for (const auto& movie : ds.movies) {
    nlohmann::ordered_json mj;
    mj["movie_id"] = movie.movie_id;
    auto clips = nlohmann::ordered_json::array();
    for (const auto& clip : movie.clips) {
      nlohmann::ordered_json cj;
      cj["num_frames"] = clip.num_frames;
      cj["sentence"] = clip.sentence;
      auto blanks = nlohmann::ordered_json::array();
      for (const auto& b : clip.blanks) {
        nlohmann::ordered_json bj;
        bj["token_position"] = b.token_position;
        if (!b.gt_global_id.empty()) bj["global_id"] = b.gt_global_id;
        if (b.gt_gender) bj["gender"] = to_string(*b.gt_gender);
        blanks.push_back(std::move(bj));
      }
      cj["blanks"] = std::move(blanks);
      auto faces_arr = nlohmann::ordered_json::array();
      for (const auto& f : clip.face_observations) {
        const std::uint32_t idx = faces.append(f.embedding.data(), f.embedding.size());
        faces_arr.push_back({{"frame", f.frame_index}, {"index", idx}});
      }
      cj["faces"] = std::move(faces_arr);
      if (clip.segment_features.rows() != ds.dims.t)
        throw DataError("save_dataset: clip in movie " + movie.movie_id +
                        " has wrong segment row count");
      std::uint32_t first = 0;
      for (std::size_t t = 0; t < ds.dims.t; ++t) {
        const std::uint32_t idx =
            segs.append(clip.segment_features.data() + t * ds.dims.d_vid, ds.dims.d_vid);
        if (t == 0) first = idx;
      }
      cj["segment_index"] = first;
      clips.push_back(std::move(cj));
    }
    mj["clips"] = std::move(clips);
    movies.push_back(std::move(mj));
  }
  doc["movies"] = std::move(movies);

  faces.write(faces_path);
  segs.write(segs_path);
  write_text_atomic(json_path, doc.dump(2) + "\n");
}

Dataset load_dataset(const std::string& json_path, std::string* provenance_json_out) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open dataset: " + json_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed dataset document " + json_path + ": " + e.what());
  }
  if (doc.value("kind", "") != "fitb-dataset")
    throw DataError(json_path + ": not a fitb-dataset document");
  if (doc.value("format_version", -1) != kDatasetVersion)
    throw VersionError(json_path + ": unsupported format_version " +
                       std::to_string(doc.value("format_version", -1)));

  Dataset ds;
  try {
    ds.split = split_from_string(doc.at("split").get<std::string>());
    ds.window_length = doc.at("window_length").get<std::size_t>();
    const auto& fd = doc.at("feature_dims");
    ds.dims.d_face = fd.at("d_face").get<std::size_t>();
    ds.dims.d_vid = fd.at("d_vid").get<std::size_t>();
    ds.dims.t = fd.at("t").get<std::size_t>();

    const auto dir = std::filesystem::path(json_path).parent_path();
    PackReader faces((dir / doc.at("face_pack").get<std::string>()).string(), ds.dims.d_face);
    PackReader segs((dir / doc.at("segment_pack").get<std::string>()).string(), ds.dims.d_vid);

    for (const auto& mj : doc.at("movies")) {
      Movie movie;
      movie.movie_id = mj.at("movie_id").get<std::string>();
      std::size_t ci = 0;
      for (const auto& cj : mj.at("clips")) {
        const std::string where = "movie " + movie.movie_id + " clip " + std::to_string(ci);
        Clip clip;
        clip.num_frames = cj.at("num_frames").get<std::size_t>();
        clip.sentence = cj.at("sentence").get<std::vector<std::string>>();
        for (const auto& bj : cj.at("blanks")) {
          Clip::ClipBlank b;
          b.token_position = bj.at("token_position").get<std::size_t>();
          if (bj.contains("global_id")) b.gt_global_id = bj.at("global_id").get<std::string>();
          if (bj.contains("gender"))
            b.gt_gender = gender_from_string(bj.at("gender").get<std::string>());
          clip.blanks.push_back(std::move(b));
        }
        for (const auto& fj : cj.at("faces")) {
          FaceObservation f;
          f.frame_index = fj.at("frame").get<std::size_t>();
          const std::uint32_t idx = fj.at("index").get<std::uint32_t>();
          const float* v = faces.vec(idx, where);
          f.embedding.assign(v, v + ds.dims.d_face);
          clip.face_observations.push_back(std::move(f));
        }
        const std::uint32_t seg0 = cj.at("segment_index").get<std::uint32_t>();
        clip.segment_features = Tensor<float>({ds.dims.t, ds.dims.d_vid});
        for (std::size_t t = 0; t < ds.dims.t; ++t) {
          const float* v = segs.vec(seg0 + static_cast<std::uint32_t>(t), where);
          std::copy(v, v + ds.dims.d_vid, clip.segment_features.data() + t * ds.dims.d_vid);
        }
        movie.clips.push_back(std::move(clip));
        ++ci;
      }
      ds.movies.push_back(std::move(movie));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed dataset document " + json_path + ": " + e.what());
  }

  rebuild_sets(ds);
  for (const auto& cs : ds.sets) {
    auto violations = validate_set(cs, ds.dims);
    if (!violations.empty())
      throw DataError(json_path + ": movie " + cs.movie_id + " window " +
                      std::to_string(cs.window_index) + ": " + violations.front().field + ": " +
                      violations.front().message);
  }
  if (provenance_json_out)
    *provenance_json_out = doc.contains("provenance") ? doc["provenance"].dump() : "null";
  return ds;
}

}  // namespace fitb
