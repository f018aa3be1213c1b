#include "segcurate/report.hpp"

#include <filesystem>
#include <fstream>

#include "json_out.hpp"

namespace segcurate {

using nlohmann::json;

ClassificationMetrics compute_metrics(int tp, int fp, int tn, int fn) {
  ClassificationMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  const int total = tp + fp + tn + fn;
  m.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
  return m;
}

json CurationReport::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["counts"] = {{"input_demos", input_demos},
                 {"input_steps", input_steps},
                 {"emitted_demos", emitted_demos},
                 {"emitted_steps", emitted_steps},
                 {"segments", segment_count},
                 {"positive_segments", positive_segments},
                 {"negative_segments", negative_segments},
                 {"optimized_segments", optimized_segments},
                 {"discarded_segments", discarded_segments}};
  j["utilization"] = utilization;
  j["mean_path_reduction"] = mean_path_reduction;
  if (metrics) {
    j["classification"] = {{"tp", metrics->tp},       {"fp", metrics->fp},
                           {"tn", metrics->tn},       {"fn", metrics->fn},
                           {"precision", metrics->precision}, {"recall", metrics->recall},
                           {"f1", metrics->f1},       {"accuracy", metrics->accuracy}};
  }
  json segs = json::array();
  for (const auto& s : segments) {
    json e;
    e["demo_id"] = s.demo_id;
    e["start"] = s.start;
    e["end"] = s.end;
    if (s.classified) {
      e["score"] = s.score;
      e["label"] = s.predicted == QualityLabel::Positive ? "positive" : "negative";
    }
    if (s.truth_corrupted) e["truth_corrupted"] = *s.truth_corrupted;
    e["optimized"] = s.optimized;
    e["discarded"] = s.discarded;
    e["retained_count"] = s.retained_count;
    e["original_path_length"] = s.original_path_length;
    e["retained_path_length"] = s.retained_path_length;
    segs.push_back(std::move(e));
  }
  j["segments"] = std::move(segs);
  json timings = json::object();
  for (const auto& [stage, ms] : timings_ms) timings[stage] = ms;
  j["timings_ms"] = std::move(timings);
  return j;
}

void save_report(const CurationReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open report file for writing: " + path);
  out << report.to_json().dump(2) << "\n";
  if (!out) throw DataError("failed writing report file: " + path);
}

void write_embedding_projection(const std::vector<Embedding>& embeddings,
                                const std::vector<QualityLabel>& labels, const std::string& path) {
  if (embeddings.size() != labels.size())
    throw DataError("embedding projection: labels and embeddings must align");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open projection file for writing: " + path);
  out << "pc1,pc2,label\n";

  const std::size_t n = embeddings.size();
  Eigen::MatrixXd P(n, 2);
  P.setZero();
  if (n >= 2) {
    const Eigen::Index d = embeddings[0].z.size();
    Eigen::MatrixXd Z(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (embeddings[i].z.size() != d)
        throw DataError("embedding projection: inconsistent embedding dimensions");
      Z.row(i) = embeddings[i].z;
    }
    const Eigen::RowVectorXd mean = Z.colwise().mean();
    Z.rowwise() -= mean;
    const Eigen::MatrixXd cov = Z.transpose() * Z / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // Eigenvalues come back ascending; take the top two components and fix
    // their signs so the largest magnitude coordinate is positive.
    for (int c = 0; c < 2 && c < d; ++c) {
      Eigen::VectorXd axis = es.eigenvectors().col(d - 1 - c);
      Eigen::Index imax;
      axis.cwiseAbs().maxCoeff(&imax);
      if (axis(imax) < 0.0) axis = -axis;
      P.col(c) = Z * axis;
    }
  }
  std::string buf;
  for (std::size_t i = 0; i < n; ++i) {
    buf.clear();
    jsonout::append_double(buf, P(i, 0));
    buf += ',';
    jsonout::append_double(buf, P(i, 1));
    buf += ',';
    buf += labels[i] == QualityLabel::Positive ? "positive" : "negative";
    buf += '\n';
    out << buf;
  }
  if (!out) throw DataError("failed writing projection file: " + path);
}

void report_export(const CurationReport& report, const std::vector<Embedding>& embeddings,
                   const std::vector<QualityLabel>& labels, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_report(report, (base / "report.json").string());
  write_embedding_projection(embeddings, labels, (base / "embeddings_pca.csv").string());
}

}  // namespace segcurate
