#pragma once

#include <string>
#include <vector>

#include "segcurate/core.hpp"
#include "segcurate/render.hpp"
#include "segcurate/repr.hpp"

namespace segcurate {

/// Reference set for voting: one embedding plus quality label per entry.
struct LabeledEmbeddingSet {
  std::vector<Embedding> embeddings;
  std::vector<QualityLabel> labels;

  std::size_t size() const { return embeddings.size(); }
  int count(QualityLabel l) const {
    int n = 0;
    for (auto v : labels) n += v == l ? 1 : 0;
    return n;
  }
};

/// Binary container mirroring the params file: u32 little-endian header
/// length, JSON {"count", "dim"}, float32 embeddings row by row, then one
/// label byte per entry (1 = positive, 0 = negative).
void save_embedding_set(const LabeledEmbeddingSet& set, const std::string& path);
LabeledEmbeddingSet load_embedding_set(const std::string& path);

struct VoteConfig {
  int k = 64;
  double delta_c = 0.5;  // positive iff score >= delta_c
};

void validate_vote_config(const VoteConfig& cfg);

struct VoteOutcome {
  QualityLabel label = QualityLabel::Negative;
  double score = 0.0;  // weighted share of positive neighbors, in [0, 1]
};

/// Exact brute force kNN with distance-weighted voting: among the k nearest
/// reference entries (Euclidean, ties broken by entry index), each neighbor
/// votes with weight exp(-distance) and the score is the positive share of
/// the total weight. The reference set must hold at least k entries.
VoteOutcome vote(const Embedding& query, const LabeledEmbeddingSet& ref, const VoteConfig& cfg);

struct ClassifyResult {
  std::vector<Segment> positives;
  std::vector<Segment> negatives;
  std::vector<double> scores;          // aligned with the input segment order
  std::vector<QualityLabel> labels;    // aligned with the input segment order
  std::vector<Embedding> embeddings;   // aligned with the input segment order
};

/// Renders each segment from the fixed camera (blank ending raster),
/// embeds it and votes against the reference set. Thread-parallel over
/// segments with byte-identical output for any thread count.
ClassifyResult classify_segments(const std::vector<Segment>& segs, const EncoderParams& params,
                                 const LabeledEmbeddingSet& ref, const Camera& cam,
                                 const VoteConfig& cfg, int threads = 1);

}  // namespace segcurate
