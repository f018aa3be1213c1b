#include "segcurate/repr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "segcurate/rng.hpp"

namespace segcurate {

using nlohmann::json;

namespace {

constexpr double kNormFloor = 1e-12;

void check_arch(const EncoderArch& arch) {
  if (arch.input_width < 1 || arch.input_height < 1)
    throw ConfigError("encoder: input raster dimensions must be positive");
  for (int h : arch.hidden)
    if (h < 1) throw ConfigError("encoder: hidden layer widths must be positive");
  if (arch.proj_dim < 1) throw ConfigError("encoder: proj_dim must be >= 1");
}

DenseLayer init_layer(Rng& rng, int out, int in) {
  DenseLayer l;
  l.W.resize(out, in);
  const double s = 1.0 / std::sqrt(static_cast<double>(in));
  for (int r = 0; r < out; ++r)
    for (int c = 0; c < in; ++c) l.W(r, c) = rng.uniform(-s, s);
  l.b = Eigen::VectorXd::Zero(out);
  return l;
}

BranchParams init_branch(Rng& rng, const EncoderArch& arch) {
  BranchParams b;
  int in = arch.input_dim();
  for (int h : arch.hidden) {
    b.layers.push_back(init_layer(rng, h, in));
    in = h;
  }
  b.proj = init_layer(rng, arch.proj_dim, in);
  return b;
}

struct BranchCache {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[i] = post ReLU
  Eigen::MatrixXd proj_out;           // rows = samples
};

BranchCache forward_branch(const Eigen::MatrixXd& X, const BranchParams& p) {
  BranchCache c;
  c.acts.push_back(X);
  for (const auto& l : p.layers) {
    Eigen::MatrixXd a = (c.acts.back() * l.W.transpose()).rowwise() + l.b.transpose();
    c.acts.push_back(a.cwiseMax(0.0));  // ReLU; gradient at exactly 0 is 0
  }
  c.proj_out = (c.acts.back() * p.proj.W.transpose()).rowwise() + p.proj.b.transpose();
  return c;
}

/// dL/d(proj_out) -> parameter grads, returning dL/d(branch input is not needed).
void backward_branch(const BranchParams& p, const BranchCache& c, const Eigen::MatrixXd& g_proj,
                     BranchParams& g) {
  g.proj.W = g_proj.transpose() * c.acts.back();
  g.proj.b = g_proj.colwise().sum();
  Eigen::MatrixXd g_act = g_proj * p.proj.W;
  for (int i = static_cast<int>(p.layers.size()) - 1; i >= 0; --i) {
    const Eigen::MatrixXd g_pre =
        ((c.acts[i + 1].array() > 0.0).cast<double>() * g_act.array()).matrix();
    g.layers[i].W = g_pre.transpose() * c.acts[i];
    g.layers[i].b = g_pre.colwise().sum();
    if (i > 0) g_act = g_pre * p.layers[i].W;
  }
}

BranchParams zero_like(const BranchParams& p) {
  BranchParams z;
  for (const auto& l : p.layers)
    z.layers.push_back({Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()),
                        Eigen::VectorXd::Zero(l.b.size())});
  z.proj = {Eigen::MatrixXd::Zero(p.proj.W.rows(), p.proj.W.cols()),
            Eigen::VectorXd::Zero(p.proj.b.size())};
  return z;
}

Eigen::MatrixXd flatten_batch(const std::vector<RasterPair>& pairs, const std::vector<int>& idx,
                              bool start_view, const EncoderArch& arch) {
  const int dim = arch.input_dim();
  Eigen::MatrixXd X(static_cast<int>(idx.size()), dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const TrajRaster& t = start_view ? pairs[idx[r]].start_view : pairs[idx[r]].end_view;
    if (t.width != arch.input_width || t.height != arch.input_height)
      throw DataError("encoder: raster size does not match the trained architecture");
    for (int i = 0; i < dim; ++i) X(static_cast<int>(r), i) = t.pixels[i];
  }
  return X;
}

struct ForwardCache {
  BranchCache start, end;
  Eigen::MatrixXd Z;            // normalized embeddings, rows = samples
  Eigen::VectorXd norms;        // pre-normalization norms
};

ForwardCache forward_all(const EncoderParams& params, const std::vector<RasterPair>& pairs,
                         const std::vector<int>& idx) {
  ForwardCache f;
  f.start = forward_branch(flatten_batch(pairs, idx, true, params.arch), params.start);
  f.end = forward_branch(flatten_batch(pairs, idx, false, params.arch), params.end);
  const int n = static_cast<int>(idx.size());
  const int p = params.arch.proj_dim;
  Eigen::MatrixXd V(n, 2 * p);
  V << f.start.proj_out, f.end.proj_out;
  f.Z.resize(n, 2 * p);
  f.norms.resize(n);
  for (int r = 0; r < n; ++r) {
    const double nrm = V.row(r).norm();
    f.norms(r) = nrm;
    if (nrm < kNormFloor) {
      f.Z.row(r).setZero();
      f.Z(r, 0) = 1.0;
    } else {
      f.Z.row(r) = V.row(r) / nrm;
    }
  }
  return f;
}

std::vector<QualityLabel> select_labels(const std::vector<QualityLabel>& labels,
                                        const std::vector<int>& idx) {
  std::vector<QualityLabel> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

}  // namespace

EncoderParams init_params(const EncoderArch& arch, std::uint64_t seed) {
  check_arch(arch);
  Rng rng(derive_seed(seed, 0x1217));
  EncoderParams p;
  p.arch = arch;
  p.start = init_branch(rng, arch);
  p.end = init_branch(rng, arch);
  return p;
}

Embedding encode(const TrajRaster& start_view, const TrajRaster& end_view,
                 const EncoderParams& params) {
  std::vector<RasterPair> one{{start_view, end_view}};
  const ForwardCache f = forward_all(params, one, {0});
  Embedding e;
  e.z = f.Z.row(0);
  return e;
}

SupConResult supcon_loss(const Eigen::MatrixXd& Z, const std::vector<QualityLabel>& labels,
                         double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("supcon: temperature must be > 0");
  const int n = static_cast<int>(Z.rows());
  if (static_cast<int>(labels.size()) != n)
    throw DataError("supcon: one label per embedding required");

  SupConResult res;
  res.grads = Eigen::MatrixXd::Zero(n, Z.cols());
  if (n < 2) return res;

  const Eigen::MatrixXd S = (Z * Z.transpose()) / temperature;

  // Class sizes; each anchor term is scaled by 1 / |B_c| of its own class.
  int class_count[2] = {0, 0};
  for (auto l : labels) ++class_count[static_cast<int>(l)];

  for (int a = 0; a < n; ++a) {
    int partners = 0;
    for (int b = 0; b < n; ++b)
      if (b != a && labels[b] == labels[a]) ++partners;
    if (partners == 0) continue;
    const double w = 1.0 / class_count[static_cast<int>(labels[a])];

    // Softmax over all b' != a, log-sum-exp stabilized.
    double m = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < n; ++b)
      if (b != a) m = std::max(m, S(a, b));
    double denom = 0.0;
    for (int b = 0; b < n; ++b)
      if (b != a) denom += std::exp(S(a, b) - m);
    const double lse = m + std::log(denom);

    for (int b = 0; b < n; ++b) {
      if (b == a || labels[b] != labels[a]) continue;
      res.loss += -w * (S(a, b) - lse);
    }
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const double q = std::exp(S(a, b) - lse);
      const double coeff = w * (partners * q - (labels[b] == labels[a] ? 1.0 : 0.0)) / temperature;
      res.grads.row(a) += coeff * Z.row(b);
      res.grads.row(b) += coeff * Z.row(a);
    }
  }
  return res;
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (cfg.batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (!(cfg.temperature > 0.0)) throw ConfigError("train: temperature must be > 0");
  if (cfg.embed_dim < 2 || cfg.embed_dim % 2 != 0)
    throw ConfigError("train: embed_dim must be an even number >= 2");
  for (int h : cfg.hidden)
    if (h < 1) throw ConfigError("train: hidden layer widths must be positive");
}

double batch_loss(const EncoderParams& params, const std::vector<RasterPair>& pairs,
                  const std::vector<int>& idx, const std::vector<QualityLabel>& labels,
                  double temperature) {
  const ForwardCache f = forward_all(params, pairs, idx);
  return supcon_loss(f.Z, select_labels(labels, idx), temperature).loss;
}

EncoderParams batch_gradients(const EncoderParams& params, const std::vector<RasterPair>& pairs,
                              const std::vector<int>& idx, const std::vector<QualityLabel>& labels,
                              double temperature, double* loss_out) {
  const ForwardCache f = forward_all(params, pairs, idx);
  const SupConResult sc = supcon_loss(f.Z, select_labels(labels, idx), temperature);
  if (loss_out) *loss_out = sc.loss;

  const int n = static_cast<int>(idx.size());
  const int p = params.arch.proj_dim;
  Eigen::MatrixXd g_v(n, 2 * p);
  for (int r = 0; r < n; ++r) {
    if (f.norms(r) < kNormFloor) {
      g_v.row(r).setZero();  // the e1 fallback is constant around zero
      continue;
    }
    const double zg = f.Z.row(r).dot(sc.grads.row(r));
    g_v.row(r) = (sc.grads.row(r) - zg * f.Z.row(r)) / f.norms(r);
  }

  EncoderParams g;
  g.arch = params.arch;
  g.start = zero_like(params.start);
  g.end = zero_like(params.end);
  backward_branch(params.start, f.start, g_v.leftCols(p), g.start);
  backward_branch(params.end, f.end, g_v.rightCols(p), g.end);
  return g;
}

namespace {

void sgd_step(BranchParams& p, const BranchParams& g, double lr) {
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    p.layers[i].W -= lr * g.layers[i].W;
    p.layers[i].b -= lr * g.layers[i].b;
  }
  p.proj.W -= lr * g.proj.W;
  p.proj.b -= lr * g.proj.b;
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

}  // namespace

TrainResult train(const std::vector<RasterPair>& positives,
                  const std::vector<RasterPair>& negatives, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (positives.empty() || negatives.empty())
    throw DataError("train: need at least one sample of each label");

  EncoderArch arch;
  arch.input_width = positives[0].start_view.width;
  arch.input_height = positives[0].start_view.height;
  arch.hidden = cfg.hidden;
  arch.proj_dim = cfg.embed_dim / 2;

  std::vector<RasterPair> pairs;
  pairs.reserve(positives.size() + negatives.size());
  pairs.insert(pairs.end(), positives.begin(), positives.end());
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  std::vector<QualityLabel> labels(pairs.size(), QualityLabel::Positive);
  std::fill(labels.begin() + positives.size(), labels.end(), QualityLabel::Negative);

  TrainResult res;
  res.params = init_params(arch, cfg.seed);
  Rng rng(derive_seed(cfg.seed, 0xBA7C));

  const int n = static_cast<int>(pairs.size());
  const int n_batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<int> pos_idx(positives.size()), neg_idx(negatives.size());
  for (std::size_t i = 0; i < pos_idx.size(); ++i) pos_idx[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < neg_idx.size(); ++i)
    neg_idx[i] = static_cast<int>(positives.size() + i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(pos_idx, rng);
    shuffle(neg_idx, rng);
    // Stratified batches: deal each shuffled class round robin so every
    // batch carries both labels whenever counts allow.
    std::vector<std::vector<int>> batches(n_batches);
    for (std::size_t i = 0; i < pos_idx.size(); ++i) batches[i % n_batches].push_back(pos_idx[i]);
    for (std::size_t i = 0; i < neg_idx.size(); ++i) batches[i % n_batches].push_back(neg_idx[i]);

    double loss_sum = 0.0;
    int counted = 0;
    for (const auto& batch : batches) {
      if (batch.size() < 2) continue;
      double loss = 0.0;
      const EncoderParams g = batch_gradients(res.params, pairs, batch, labels, cfg.temperature, &loss);
      sgd_step(res.params.start, g.start, cfg.learning_rate);
      sgd_step(res.params.end, g.end, cfg.learning_rate);
      loss_sum += loss;
      ++counted;
    }
    res.epoch_loss.push_back(counted > 0 ? loss_sum / counted : 0.0);
  }
  return res;
}

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw DataError(path + ": truncated header");
  return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

void write_tensor(std::ofstream& out, const Eigen::MatrixXd& m) {
  std::vector<float> buf(static_cast<std::size_t>(m.rows()) * m.cols());
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) buf[k++] = static_cast<float>(m(r, c));
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_tensor(std::ifstream& in, Eigen::MatrixXd& m, const std::string& path) {
  std::vector<float> buf(static_cast<std::size_t>(m.rows()) * m.cols());
  if (!in.read(reinterpret_cast<char*>(buf.data()),
               static_cast<std::streamsize>(buf.size() * sizeof(float))))
    throw DataError(path + ": truncated tensor data");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = buf[k++];
}

void write_branch(std::ofstream& out, const BranchParams& b) {
  for (const auto& l : b.layers) {
    write_tensor(out, l.W);
    write_tensor(out, l.b);
  }
  write_tensor(out, b.proj.W);
  write_tensor(out, b.proj.b);
}

void read_branch(std::ifstream& in, BranchParams& b, const std::string& path) {
  for (auto& l : b.layers) {
    read_tensor(in, l.W, path);
    Eigen::MatrixXd bv(l.b.size(), 1);
    read_tensor(in, bv, path);
    l.b = bv.col(0);
  }
  read_tensor(in, b.proj.W, path);
  Eigen::MatrixXd bv(b.proj.b.size(), 1);
  read_tensor(in, bv, path);
  b.proj.b = bv.col(0);
}

}  // namespace

EncoderParams to_float32(const EncoderParams& params) {
  EncoderParams out = params;
  auto round_branch = [](BranchParams& b) {
    for (auto& l : b.layers) {
      l.W = l.W.cast<float>().cast<double>();
      l.b = l.b.cast<float>().cast<double>();
    }
    b.proj.W = b.proj.W.cast<float>().cast<double>();
    b.proj.b = b.proj.b.cast<float>().cast<double>();
  };
  round_branch(out.start);
  round_branch(out.end);
  return out;
}

void save_params(const EncoderParams& params, const std::string& path) {
  check_arch(params.arch);
  json header;
  header["input_width"] = params.arch.input_width;
  header["input_height"] = params.arch.input_height;
  header["hidden"] = params.arch.hidden;
  header["proj_dim"] = params.arch.proj_dim;
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open params file for writing: " + path);
  write_u32(out, static_cast<std::uint32_t>(hs.size()));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  write_branch(out, params.start);
  write_branch(out, params.end);
  if (!out) throw DataError("failed writing params file: " + path);
}

EncoderParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open params file: " + path);
  const std::uint32_t hlen = read_u32(in, path);
  std::string hs(hlen, '\0');
  if (!in.read(hs.data(), hlen)) throw DataError(path + ": truncated header");
  json header;
  try {
    header = json::parse(hs);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": invalid header JSON: " + e.what());
  }
  EncoderArch arch;
  try {
    arch.input_width = header.at("input_width").get<int>();
    arch.input_height = header.at("input_height").get<int>();
    arch.hidden = header.at("hidden").get<std::vector<int>>();
    arch.proj_dim = header.at("proj_dim").get<int>();
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed header: " + e.what());
  }
  check_arch(arch);

  EncoderParams p;
  p.arch = arch;
  for (BranchParams* b : {&p.start, &p.end}) {
    int in_dim = arch.input_dim();
    for (int h : arch.hidden) {
      DenseLayer l;
      l.W.resize(h, in_dim);
      l.b.resize(h);
      b->layers.push_back(std::move(l));
      in_dim = h;
    }
    b->proj.W.resize(arch.proj_dim, in_dim);
    b->proj.b.resize(arch.proj_dim);
  }
  read_branch(in, p.start, path);
  read_branch(in, p.end, path);
  char extra;
  if (in.read(&extra, 1)) throw DataError(path + ": trailing bytes after tensor data");
  return p;
}

}  // namespace segcurate
