#pragma once

#include <optional>
#include <string>
#include <vector>

#include "segcurate/config.hpp"
#include "segcurate/optimize.hpp"
#include "segcurate/report.hpp"
#include "segcurate/select.hpp"
#include "segcurate/synth.hpp"

namespace segcurate {

struct CurateInputs {
  Dataset mixed;                    // data to curate
  Dataset expert;                   // role must be ExpertReference
  std::optional<GroundTruth> truth; // enables classification metrics
};

/// Raster pairs produced by the augmentation stage plus the canonical
/// renders of the source segments, which train and vote as positives.
struct AugmentArtifacts {
  int width = 0;
  int height = 0;
  std::vector<RasterPair> originals;
  std::vector<RasterPair> positives;
  std::vector<RasterPair> negatives;
};

void save_augment_dir(const AugmentArtifacts& art, const std::string& dir);
AugmentArtifacts load_augment_dir(const std::string& dir);

struct SegmentLabelRecord {
  std::string demo_id;
  int start = 0;
  int end = 0;
  double score = 0.0;
  QualityLabel label = QualityLabel::Positive;
};

void save_labels(const std::vector<SegmentLabelRecord>& records, const std::string& path);
std::vector<SegmentLabelRecord> load_labels(const std::string& path);

void save_segments_index(const std::vector<Segment>& segs, const std::string& path);

/// Optimizer artifacts: retained indices plus the steps the pipeline emits
/// for the segment (relabeled, or retained-only without relabeling).
struct OptimizedRecord {
  std::string demo_id;
  int start = 0;
  int end = 0;
  std::vector<int> retained;
  std::vector<Step> steps;
};

void save_optimized(const std::vector<OptimizedRecord>& records, const std::string& path);

struct CurateOutputs {
  Dataset curated;
  CurationReport report;
  bool classifier_ran = false;          // false under selection level None
  EncoderParams params;                 // valid when classifier_ran
  LabeledEmbeddingSet reference;        // valid when classifier_ran
  Camera camera;                        // canonical classification camera
  AugmentArtifacts augmented;           // valid when classifier_ran
  std::vector<Embedding> segment_embeddings;  // mixed segments, classifier order
  std::vector<QualityLabel> segment_labels;   // final predictions, same order
};

/// Full curation pass: segmentation, contrastive sample generation,
/// representation training, voting based selection, greedy trajectory
/// optimization, action relabeling and demo reassembly, per the config
/// switches. Deterministic in the config for any thread count; wall clock
/// timings are the only nondeterministic report fields.
CurateOutputs curate(const CurateInputs& in, const CurationConfig& cfg);

/// curate plus materialized stage artifacts: resolved_config.json,
/// segments_{mixed,expert}.jsonl, aug/, params.bin, ref.bin, labels.jsonl,
/// optimized.jsonl, curated.jsonl, report.json and embeddings_pca.csv.
CurateOutputs curate_to_dir(const CurateInputs& in, const CurationConfig& cfg,
                            const std::string& out_dir);

}  // namespace segcurate
