#include "segcurate/select.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "segcurate/rng.hpp"

namespace segcurate {

using nlohmann::json;

void validate_vote_config(const VoteConfig& cfg) {
  if (cfg.k < 1) throw ConfigError("vote: k must be >= 1");
  if (!(cfg.delta_c > 0.0 && cfg.delta_c < 1.0))
    throw ConfigError("vote: delta_c must lie in (0, 1)");
}

VoteOutcome vote(const Embedding& query, const LabeledEmbeddingSet& ref, const VoteConfig& cfg) {
  validate_vote_config(cfg);
  if (ref.size() < static_cast<std::size_t>(cfg.k))
    throw DataError("vote: reference set holds " + std::to_string(ref.size()) +
                    " entries but k = " + std::to_string(cfg.k));
  if (ref.labels.size() != ref.embeddings.size())
    throw DataError("vote: reference set labels and embeddings must align");

  const std::size_t n = ref.size();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ref.embeddings[i].z.size() != query.z.size())
      throw DataError("vote: embedding dimension mismatch against the reference set");
    dist[i] = (query.z - ref.embeddings[i].z).norm();
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
  });

  double total = 0.0;
  double positive = 0.0;
  for (int i = 0; i < cfg.k; ++i) {
    const std::size_t idx = order[i];
    const double w = std::exp(-dist[idx]);
    total += w;
    if (ref.labels[idx] == QualityLabel::Positive) positive += w;
  }
  VoteOutcome out;
  out.score = positive / total;
  out.label = out.score >= cfg.delta_c ? QualityLabel::Positive : QualityLabel::Negative;
  return out;
}

ClassifyResult classify_segments(const std::vector<Segment>& segs, const EncoderParams& params,
                                 const LabeledEmbeddingSet& ref, const Camera& cam,
                                 const VoteConfig& cfg, int threads) {
  validate_camera(cam);
  ClassifyResult res;
  res.scores.resize(segs.size());
  res.labels.resize(segs.size());
  res.embeddings.resize(segs.size());
  const TrajRaster end_view = blank_raster(cam.width, cam.height);

  parallel_for(segs.size(), threads, [&](std::size_t i) {
    Embedding z = encode(render_segment(segs[i], cam), end_view, params);
    const VoteOutcome v = vote(z, ref, cfg);
    res.scores[i] = v.score;
    res.labels[i] = v.label;
    res.embeddings[i] = std::move(z);
  });

  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (res.labels[i] == QualityLabel::Positive)
      res.positives.push_back(segs[i]);
    else
      res.negatives.push_back(segs[i]);
  }
  return res;
}

void save_embedding_set(const LabeledEmbeddingSet& set, const std::string& path) {
  if (set.labels.size() != set.embeddings.size())
    throw DataError("embedding set: labels and embeddings must align");
  const int dim = set.embeddings.empty() ? 0 : static_cast<int>(set.embeddings[0].z.size());
  json header;
  header["count"] = set.embeddings.size();
  header["dim"] = dim;
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open embedding set for writing: " + path);
  const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
  const unsigned char lenbuf[4] = {static_cast<unsigned char>(hlen & 0xff),
                                   static_cast<unsigned char>((hlen >> 8) & 0xff),
                                   static_cast<unsigned char>((hlen >> 16) & 0xff),
                                   static_cast<unsigned char>((hlen >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(lenbuf), 4);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& e : set.embeddings) {
    if (e.z.size() != dim) throw DataError("embedding set: inconsistent embedding dimensions");
    std::vector<float> buf(dim);
    for (int i = 0; i < dim; ++i) buf[i] = static_cast<float>(e.z(i));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  for (auto l : set.labels) {
    const char byte = l == QualityLabel::Positive ? 1 : 0;
    out.write(&byte, 1);
  }
  if (!out) throw DataError("failed writing embedding set: " + path);
}

LabeledEmbeddingSet load_embedding_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding set: " + path);
  unsigned char lenbuf[4];
  if (!in.read(reinterpret_cast<char*>(lenbuf), 4)) throw DataError(path + ": truncated header");
  const std::uint32_t hlen = static_cast<std::uint32_t>(lenbuf[0]) |
                             (static_cast<std::uint32_t>(lenbuf[1]) << 8) |
                             (static_cast<std::uint32_t>(lenbuf[2]) << 16) |
                             (static_cast<std::uint32_t>(lenbuf[3]) << 24);
  std::string hs(hlen, '\0');
  if (!in.read(hs.data(), hlen)) throw DataError(path + ": truncated header");
  json header;
  try {
    header = json::parse(hs);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": invalid header JSON: " + e.what());
  }
  std::size_t count = 0;
  int dim = 0;
  try {
    count = header.at("count").get<std::size_t>();
    dim = header.at("dim").get<int>();
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed header: " + e.what());
  }
  if (dim < 0) throw DataError(path + ": malformed header: negative dim");

  LabeledEmbeddingSet set;
  set.embeddings.resize(count);
  std::vector<float> buf(dim);
  for (std::size_t i = 0; i < count; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(float))))
      throw DataError(path + ": truncated embedding data");
    set.embeddings[i].z.resize(dim);
    for (int d = 0; d < dim; ++d) set.embeddings[i].z(d) = buf[d];
  }
  set.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    char byte;
    if (!in.read(&byte, 1)) throw DataError(path + ": truncated label data");
    set.labels[i] = byte == 1 ? QualityLabel::Positive : QualityLabel::Negative;
  }
  char extra;
  if (in.read(&extra, 1)) throw DataError(path + ": trailing bytes after label data");
  return set;
}

}  // namespace segcurate
