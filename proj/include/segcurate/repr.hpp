#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "segcurate/core.hpp"
#include "segcurate/render.hpp"

namespace segcurate {

/// Twin-branch MLP encoder: the trajectory sketch and the ending raster are
/// flattened and passed through separate ReLU towers with linear projection
/// heads; the two projections are concatenated and L2-normalized.
struct EncoderArch {
  int input_width = 64;
  int input_height = 64;
  std::vector<int> hidden{512, 256};
  int proj_dim = 128;  // per branch; the embedding is twice this

  int input_dim() const { return input_width * input_height; }
  int embed_dim() const { return 2 * proj_dim; }
};

struct DenseLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;
};

struct BranchParams {
  std::vector<DenseLayer> layers;  // hidden layers, ReLU activations
  DenseLayer proj;                 // linear head
};

struct EncoderParams {
  EncoderArch arch;
  BranchParams start;
  BranchParams end;
};

/// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero
/// biases. Deterministic in the seed.
EncoderParams init_params(const EncoderArch& arch, std::uint64_t seed);

struct Embedding {
  Eigen::VectorXd z;
  bool normalized = true;
};

/// Embeds one raster pair. A zero vector before normalization maps to the
/// first basis vector so the result always lies on the unit sphere.
Embedding encode(const TrajRaster& start_view, const TrajRaster& end_view,
                 const EncoderParams& params);

struct SupConResult {
  double loss = 0.0;
  Eigen::MatrixXd grads;  // n x d, d(loss)/d(z_i) per row
};

/// Supervised contrastive loss over a batch of embeddings (rows of Z).
/// Both classes act as anchor sets; every other batch element appears in
/// each anchor's denominator. Anchors with no same-label partner contribute
/// nothing. Log-sum-exp stabilized, exact analytic gradients.
SupConResult supcon_loss(const Eigen::MatrixXd& Z, const std::vector<QualityLabel>& labels,
                         double temperature);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 0.005;  // plain SGD
  double temperature = 0.1;
  std::vector<int> hidden{512, 256};
  int embed_dim = 256;  // split evenly across the two branch heads
  std::uint64_t seed = 0;
};

void validate_train_config(const TrainConfig& cfg);

struct TrainResult {
  EncoderParams params;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Trains the encoder on labeled raster pairs. Batches are stratified by
/// shuffling each class and dealing it round robin across the epoch's
/// batches, so every batch sees both labels. Single threaded and
/// bit-deterministic in cfg.seed.
TrainResult train(const std::vector<RasterPair>& positives,
                  const std::vector<RasterPair>& negatives, const TrainConfig& cfg);

/// Loss and parameter gradients of one explicit batch; idx selects rows of
/// pairs. Exposed so finite differences can check the full backward pass.
double batch_loss(const EncoderParams& params, const std::vector<RasterPair>& pairs,
                  const std::vector<int>& idx, const std::vector<QualityLabel>& labels,
                  double temperature);
EncoderParams batch_gradients(const EncoderParams& params, const std::vector<RasterPair>& pairs,
                              const std::vector<int>& idx, const std::vector<QualityLabel>& labels,
                              double temperature, double* loss_out = nullptr);

/// Binary container: u32 little-endian header length, a JSON arch
/// descriptor, then float32 tensors in declaration order (start branch
/// first, per layer W row-major then b).
void save_params(const EncoderParams& params, const std::string& path);
EncoderParams load_params(const std::string& path);

/// Rounds every tensor through float32, matching the on-disk precision so
/// in-process results agree with a save/load cycle.
EncoderParams to_float32(const EncoderParams& params);

}  // namespace segcurate
