#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "segcurate/core.hpp"
#include "segcurate/repr.hpp"

namespace segcurate {

/// Confusion counts with the clean (positive) class as the target.
struct ClassificationMetrics {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

ClassificationMetrics compute_metrics(int tp, int fp, int tn, int fn);

struct SegmentRecord {
  std::string demo_id;
  int start = 0;
  int end = 0;
  bool classified = false;  // false when selection is disabled
  double score = 0.0;
  QualityLabel predicted = QualityLabel::Positive;
  std::optional<bool> truth_corrupted;
  bool optimized = false;
  bool discarded = false;
  int retained_count = 0;
  double original_path_length = 0.0;
  double retained_path_length = 0.0;
};

struct CurationReport {
  int schema_version = 1;
  int input_demos = 0;
  std::size_t input_steps = 0;
  int emitted_demos = 0;
  std::size_t emitted_steps = 0;
  int segment_count = 0;
  int positive_segments = 0;
  int negative_segments = 0;
  int optimized_segments = 0;
  int discarded_segments = 0;
  double utilization = 0.0;  // emitted steps over input steps
  double mean_path_reduction = 0.0;  // over optimized segments
  std::optional<ClassificationMetrics> metrics;
  std::vector<SegmentRecord> segments;
  std::vector<std::pair<std::string, double>> timings_ms;  // excluded from determinism checks

  nlohmann::json to_json() const;
};

void save_report(const CurationReport& report, const std::string& path);

/// 2D PCA projection of the embeddings, written as CSV "pc1,pc2,label".
/// Component signs are fixed so the largest magnitude coordinate of each
/// axis is positive. Fewer than two embeddings project to zeros.
void write_embedding_projection(const std::vector<Embedding>& embeddings,
                                const std::vector<QualityLabel>& labels, const std::string& path);

/// Writes dir/report.json and dir/embeddings_pca.csv.
void report_export(const CurationReport& report, const std::vector<Embedding>& embeddings,
                   const std::vector<QualityLabel>& labels, const std::string& dir);

}  // namespace segcurate
