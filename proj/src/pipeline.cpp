#include "segcurate/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "json_out.hpp"

namespace segcurate {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

Embedding round_embedding(const Embedding& e) {
  Embedding out;
  out.z = e.z.cast<float>().cast<double>();
  out.normalized = e.normalized;
  return out;
}

enum class Disposition { Keep, Optimize, Discard };

/// Majority truth label of a segment span; ties count as corrupted.
std::optional<bool> span_truth(const GroundTruth& truth, const std::string& demo_id, int start,
                               int end) {
  const DemoTruth* dt = truth.find(demo_id);
  if (!dt || dt->boundaries.empty()) return std::nullopt;
  int corrupted = 0;
  for (int t = start; t <= end; ++t) {
    std::size_t k = 0;
    while (k + 1 < dt->boundaries.size() && dt->boundaries[k] < t) ++k;
    if (k < dt->corrupted.size() && dt->corrupted[k]) ++corrupted;
  }
  return corrupted * 2 >= end - start + 1;
}

struct StageClock {
  std::vector<std::pair<std::string, double>>& sink;

  template <typename Fn>
  void run(const std::string& stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    sink.emplace_back(stage, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
};

}  // namespace

CurateOutputs curate(const CurateInputs& in, const CurationConfig& cfg) {
  validate_config(cfg);
  if (in.expert.role != DatasetRole::ExpertReference)
    throw DataError("curate: the expert dataset must carry the expert reference role");
  if (in.expert.demos.empty()) throw DataError("curate: expert reference dataset is empty");
  if (in.mixed.demos.empty()) throw DataError("curate: mixed dataset is empty");
  for (const auto& d : in.expert.demos) validate_demo(d, "expert demo " + d.id);
  for (const auto& d : in.mixed.demos) validate_demo(d, "mixed demo " + d.id);
  const ActionKind kind = in.mixed.demos[0].action_kind;
  for (const auto& d : in.mixed.demos)
    if (d.action_kind != kind)
      throw DataError("curate: demos with differing action kinds in one run are not supported");

  CurateOutputs out;
  CurationReport& rep = out.report;
  StageClock clock{rep.timings_ms};

  // Segmentation.
  std::vector<Segment> mixed_segs;
  std::vector<std::vector<std::size_t>> demo_seg_idx(in.mixed.demos.size());
  std::vector<Segment> expert_segs;
  clock.run("segment", [&] {
    for (std::size_t d = 0; d < in.mixed.demos.size(); ++d) {
      for (auto& seg : segment_demo(in.mixed.demos[d], cfg.segmentation)) {
        demo_seg_idx[d].push_back(mixed_segs.size());
        mixed_segs.push_back(std::move(seg));
      }
    }
    expert_segs = segment_dataset(in.expert, cfg.segmentation);
  });

  // Selection: augment, train, embed, vote.
  const bool classify = cfg.pipeline.selection_level != SelectionLevel::None;
  std::vector<double> scores(mixed_segs.size(), 0.0);
  std::vector<QualityLabel> pred(mixed_segs.size(), QualityLabel::Positive);
  out.classifier_ran = classify;
  if (classify) {
    AugmentConfig acfg = cfg.augment;
    acfg.threads = cfg.threads;

    clock.run("augment", [&] {
      const AugmentResult aug = augment_expert(expert_segs, acfg);
      out.camera = canonical_camera(expert_segs, acfg);
      out.augmented.width = acfg.width;
      out.augmented.height = acfg.height;
      const TrajRaster blank = blank_raster(acfg.width, acfg.height);
      for (const auto& seg : expert_segs)
        out.augmented.originals.push_back({render_segment(seg, out.camera), blank});
      out.augmented.positives = std::move(aug.positives);
      out.augmented.negatives = std::move(aug.negatives);
    });

    clock.run("train", [&] {
      std::vector<RasterPair> train_pos = out.augmented.originals;
      train_pos.insert(train_pos.end(), out.augmented.positives.begin(),
                       out.augmented.positives.end());
      const TrainResult tr = train(train_pos, out.augmented.negatives, cfg.train);
      // Round through float32 so in-process results match a params.bin
      // round trip and staged runs agree bit for bit.
      out.params = to_float32(tr.params);

      for (const auto& p : train_pos) {
        out.reference.embeddings.push_back(
            round_embedding(encode(p.start_view, p.end_view, out.params)));
        out.reference.labels.push_back(QualityLabel::Positive);
      }
      for (const auto& p : out.augmented.negatives) {
        out.reference.embeddings.push_back(
            round_embedding(encode(p.start_view, p.end_view, out.params)));
        out.reference.labels.push_back(QualityLabel::Negative);
      }
    });

    clock.run("classify", [&] {
      const ClassifyResult cls =
          classify_segments(mixed_segs, out.params, out.reference, out.camera, cfg.vote, cfg.threads);
      scores = cls.scores;
      pred = cls.labels;
      out.segment_embeddings = cls.embeddings;
      if (cfg.pipeline.selection_level == SelectionLevel::Demonstration) {
        for (const auto& idx : demo_seg_idx) {
          if (idx.empty()) continue;
          double mean = 0.0;
          for (std::size_t i : idx) mean += scores[i];
          mean /= static_cast<double>(idx.size());
          const QualityLabel demo_label =
              mean >= cfg.vote.delta_c ? QualityLabel::Positive : QualityLabel::Negative;
          for (std::size_t i : idx) pred[i] = demo_label;
        }
      }
    });
  }
  out.segment_labels = pred;

  // Optimization and per-segment emission.
  std::vector<Disposition> dispo(mixed_segs.size());
  for (std::size_t i = 0; i < mixed_segs.size(); ++i) {
    if (!classify)
      dispo[i] = cfg.pipeline.trajectory_optimization ? Disposition::Optimize : Disposition::Keep;
    else if (pred[i] == QualityLabel::Positive)
      dispo[i] = Disposition::Keep;
    else
      dispo[i] = cfg.pipeline.trajectory_optimization ? Disposition::Optimize : Disposition::Discard;
  }

  std::vector<std::optional<OptimizedSegment>> optimized(mixed_segs.size());
  clock.run("optimize", [&] {
    std::vector<Segment> to_opt;
    std::vector<std::size_t> opt_idx;
    for (std::size_t i = 0; i < mixed_segs.size(); ++i) {
      if (dispo[i] != Disposition::Optimize) continue;
      to_opt.push_back(mixed_segs[i]);
      opt_idx.push_back(i);
    }
    auto opts = optimize_negatives(to_opt, cfg.optimize, kind);
    for (std::size_t k = 0; k < opts.size(); ++k) optimized[opt_idx[k]] = std::move(opts[k]);
  });

  std::vector<std::vector<Step>> emitted(mixed_segs.size());
  for (std::size_t i = 0; i < mixed_segs.size(); ++i) {
    switch (dispo[i]) {
      case Disposition::Keep:
        emitted[i] = mixed_segs[i].steps;
        break;
      case Disposition::Discard:
        break;
      case Disposition::Optimize: {
        const OptimizedSegment& opt = *optimized[i];
        if (cfg.pipeline.action_relabeling) {
          emitted[i] = opt.relabeled;
        } else {
          for (int t : opt.retained) emitted[i].push_back(mixed_segs[i].steps[t - 1]);
        }
        break;
      }
    }
  }

  // Reassembly in input order; demos whose segments were all discarded drop out.
  clock.run("reassemble", [&] {
    out.curated.role = in.mixed.role;
    for (std::size_t d = 0; d < in.mixed.demos.size(); ++d) {
      Demonstration demo = in.mixed.demos[d];
      demo.steps.clear();
      for (std::size_t i : demo_seg_idx[d])
        demo.steps.insert(demo.steps.end(), emitted[i].begin(), emitted[i].end());
      if (!demo.steps.empty()) out.curated.demos.push_back(std::move(demo));
    }
  });

  // Report.
  rep.input_demos = static_cast<int>(in.mixed.demos.size());
  rep.input_steps = in.mixed.total_steps();
  rep.emitted_demos = static_cast<int>(out.curated.demos.size());
  rep.emitted_steps = out.curated.total_steps();
  rep.segment_count = static_cast<int>(mixed_segs.size());
  rep.utilization = rep.input_steps > 0
                        ? static_cast<double>(rep.emitted_steps) / static_cast<double>(rep.input_steps)
                        : 0.0;

  double reduction_sum = 0.0;
  int reduction_count = 0;
  int tp = 0, fp = 0, tn = 0, fn = 0;
  bool any_truth = false;
  for (std::size_t i = 0; i < mixed_segs.size(); ++i) {
    SegmentRecord r;
    r.demo_id = mixed_segs[i].demo_id;
    r.start = mixed_segs[i].start;
    r.end = mixed_segs[i].end;
    r.classified = classify;
    r.score = scores[i];
    r.predicted = pred[i];
    r.optimized = dispo[i] == Disposition::Optimize;
    r.discarded = dispo[i] == Disposition::Discard;
    r.original_path_length = path_length(mixed_segs[i]);
    if (r.optimized) {
      r.retained_count = static_cast<int>(optimized[i]->retained.size());
      r.retained_path_length = path_length(mixed_segs[i], optimized[i]->retained);
      if (r.original_path_length > 0.0) {
        reduction_sum += 1.0 - r.retained_path_length / r.original_path_length;
        ++reduction_count;
      }
    } else {
      r.retained_count = dispo[i] == Disposition::Discard ? 0 : mixed_segs[i].length();
      r.retained_path_length = dispo[i] == Disposition::Discard ? 0.0 : r.original_path_length;
    }
    if (in.truth) {
      r.truth_corrupted = span_truth(*in.truth, r.demo_id, r.start, r.end);
      if (r.truth_corrupted && classify) {
        any_truth = true;
        const bool actually_clean = !*r.truth_corrupted;
        const bool predicted_clean = pred[i] == QualityLabel::Positive;
        if (predicted_clean && actually_clean) ++tp;
        else if (predicted_clean && !actually_clean) ++fp;
        else if (!predicted_clean && !actually_clean) ++tn;
        else ++fn;
      }
    }
    if (classify) {
      if (pred[i] == QualityLabel::Positive) ++rep.positive_segments;
      else ++rep.negative_segments;
    }
    if (r.optimized) ++rep.optimized_segments;
    if (r.discarded) ++rep.discarded_segments;
    rep.segments.push_back(std::move(r));
  }
  rep.mean_path_reduction = reduction_count > 0 ? reduction_sum / reduction_count : 0.0;
  if (any_truth) rep.metrics = compute_metrics(tp, fp, tn, fn);
  return out;
}

namespace {

void write_raster_file(const std::string& path, const std::vector<RasterPair>& pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open raster file for writing: " + path);
  for (const auto& p : pairs) {
    out.write(reinterpret_cast<const char*>(p.start_view.pixels.data()),
              static_cast<std::streamsize>(p.start_view.pixels.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(p.end_view.pixels.data()),
              static_cast<std::streamsize>(p.end_view.pixels.size() * sizeof(float)));
  }
  if (!out) throw DataError("failed writing raster file: " + path);
}

std::vector<RasterPair> read_raster_file(const std::string& path, std::size_t count, int width,
                                         int height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open raster file: " + path);
  const std::size_t px = static_cast<std::size_t>(width) * height;
  std::vector<RasterPair> pairs(count);
  for (auto& p : pairs) {
    p.start_view = blank_raster(width, height);
    p.end_view = blank_raster(width, height);
    if (!in.read(reinterpret_cast<char*>(p.start_view.pixels.data()),
                 static_cast<std::streamsize>(px * sizeof(float))) ||
        !in.read(reinterpret_cast<char*>(p.end_view.pixels.data()),
                 static_cast<std::streamsize>(px * sizeof(float))))
      throw DataError(path + ": truncated raster data");
  }
  char extra;
  if (in.read(&extra, 1)) throw DataError(path + ": trailing bytes after raster data");
  return pairs;
}

}  // namespace

void save_augment_dir(const AugmentArtifacts& art, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  json index;
  index["width"] = art.width;
  index["height"] = art.height;
  index["originals"] = art.originals.size();
  index["positives"] = art.positives.size();
  index["negatives"] = art.negatives.size();
  std::ofstream out(base / "index.json", std::ios::trunc);
  if (!out) throw DataError("cannot open augment index for writing: " + (base / "index.json").string());
  out << index.dump(2) << "\n";
  write_raster_file((base / "originals.f32").string(), art.originals);
  write_raster_file((base / "positives.f32").string(), art.positives);
  write_raster_file((base / "negatives.f32").string(), art.negatives);
}

AugmentArtifacts load_augment_dir(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream in(base / "index.json");
  if (!in) throw DataError("cannot open augment index: " + (base / "index.json").string());
  json index;
  try {
    index = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError((base / "index.json").string() + ": invalid JSON: " + e.what());
  }
  AugmentArtifacts art;
  try {
    art.width = index.at("width").get<int>();
    art.height = index.at("height").get<int>();
    art.originals = read_raster_file((base / "originals.f32").string(),
                                     index.at("originals").get<std::size_t>(), art.width, art.height);
    art.positives = read_raster_file((base / "positives.f32").string(),
                                     index.at("positives").get<std::size_t>(), art.width, art.height);
    art.negatives = read_raster_file((base / "negatives.f32").string(),
                                     index.at("negatives").get<std::size_t>(), art.width, art.height);
  } catch (const json::exception& e) {
    throw DataError((base / "index.json").string() + ": malformed index: " + e.what());
  }
  return art;
}

void save_labels(const std::vector<SegmentLabelRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open labels file for writing: " + path);
  std::string buf;
  for (const auto& r : records) {
    buf.clear();
    buf += "{\"demo_id\":";
    jsonout::append_escaped(buf, r.demo_id);
    buf += ",\"start\":" + std::to_string(r.start);
    buf += ",\"end\":" + std::to_string(r.end);
    buf += ",\"score\":";
    jsonout::append_double(buf, r.score);
    buf += ",\"label\":\"";
    buf += r.label == QualityLabel::Positive ? "positive" : "negative";
    buf += "\"}\n";
    out << buf;
  }
  if (!out) throw DataError("failed writing labels file: " + path);
}

std::vector<SegmentLabelRecord> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path);
  std::vector<SegmentLabelRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": invalid JSON: " + e.what());
    }
    SegmentLabelRecord r;
    try {
      r.demo_id = j.at("demo_id").get<std::string>();
      r.start = j.at("start").get<int>();
      r.end = j.at("end").get<int>();
      r.score = j.at("score").get<double>();
      const std::string label = j.at("label").get<std::string>();
      if (label != "positive" && label != "negative")
        throw DataError(where + ": label: expected positive or negative");
      r.label = label == "positive" ? QualityLabel::Positive : QualityLabel::Negative;
    } catch (const json::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_segments_index(const std::vector<Segment>& segs, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open segments file for writing: " + path);
  std::string buf;
  for (const auto& s : segs) {
    buf.clear();
    buf += "{\"demo_id\":";
    jsonout::append_escaped(buf, s.demo_id);
    buf += ",\"start\":" + std::to_string(s.start);
    buf += ",\"end\":" + std::to_string(s.end);
    buf += "}\n";
    out << buf;
  }
  if (!out) throw DataError("failed writing segments file: " + path);
}

void save_optimized(const std::vector<OptimizedRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open optimized file for writing: " + path);
  std::string buf;
  for (const auto& r : records) {
    buf.clear();
    buf += "{\"demo_id\":";
    jsonout::append_escaped(buf, r.demo_id);
    buf += ",\"start\":" + std::to_string(r.start);
    buf += ",\"end\":" + std::to_string(r.end);
    buf += ",\"retained\":[";
    for (std::size_t i = 0; i < r.retained.size(); ++i) {
      if (i) buf += ',';
      buf += std::to_string(r.retained[i]);
    }
    buf += "],\"steps\":[";
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      if (i) buf += ',';
      jsonout::append_step(buf, r.steps[i]);
    }
    buf += "]}\n";
    out << buf;
  }
  if (!out) throw DataError("failed writing optimized file: " + path);
}

CurateOutputs curate_to_dir(const CurateInputs& in, const CurationConfig& cfg,
                            const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path base(out_dir);
  CurateOutputs out = curate(in, cfg);

  save_config_file(cfg, (base / "resolved_config.json").string());

  std::vector<Segment> mixed_segs;
  for (const auto& demo : in.mixed.demos)
    for (auto& seg : segment_demo(demo, cfg.segmentation)) mixed_segs.push_back(std::move(seg));
  save_segments_index(mixed_segs, (base / "segments_mixed.jsonl").string());
  save_segments_index(segment_dataset(in.expert, cfg.segmentation),
                      (base / "segments_expert.jsonl").string());

  if (out.classifier_ran) {
    save_augment_dir(out.augmented, (base / "aug").string());
    save_params(out.params, (base / "params.bin").string());
    save_embedding_set(out.reference, (base / "ref.bin").string());
    {
      // The fixed classification viewpoint, recorded so a rerun can
      // reproduce the labels without the expert dataset.
      std::string buf = "{\"position\":";
      jsonout::append_vec3(buf, out.camera.position);
      buf += ",\"look_at\":";
      jsonout::append_vec3(buf, out.camera.look_at);
      buf += ",\"up\":";
      jsonout::append_vec3(buf, out.camera.up);
      buf += ",\"focal\":";
      jsonout::append_double(buf, out.camera.focal);
      buf += ",\"width\":" + std::to_string(out.camera.width);
      buf += ",\"height\":" + std::to_string(out.camera.height) + "}\n";
      std::ofstream cam_out(base / "camera.json", std::ios::trunc);
      if (!cam_out) throw DataError("cannot open camera file for writing in " + out_dir);
      cam_out << buf;
    }
    std::vector<SegmentLabelRecord> labels;
    for (std::size_t i = 0; i < mixed_segs.size(); ++i) {
      labels.push_back({mixed_segs[i].demo_id, mixed_segs[i].start, mixed_segs[i].end,
                        out.report.segments[i].score, out.segment_labels[i]});
    }
    save_labels(labels, (base / "labels.jsonl").string());
  }

  std::vector<OptimizedRecord> opt_records;
  for (std::size_t i = 0; i < out.report.segments.size(); ++i) {
    const SegmentRecord& r = out.report.segments[i];
    if (!r.optimized) continue;
    OptimizedRecord rec;
    rec.demo_id = r.demo_id;
    rec.start = r.start;
    rec.end = r.end;
    // Reconstruct the emitted segment steps from the curated dataset is
    // ambiguous, so re-run the optimizer on the one segment; it is cheap
    // and bit-deterministic.
    const Segment& seg = mixed_segs[i];
    const ActionKind kind = in.mixed.demos[0].action_kind;
    auto opts = optimize_negatives({seg}, cfg.optimize, kind);
    rec.retained = opts[0].retained;
    if (cfg.pipeline.action_relabeling) {
      rec.steps = opts[0].relabeled;
    } else {
      for (int t : rec.retained) rec.steps.push_back(seg.steps[t - 1]);
    }
    opt_records.push_back(std::move(rec));
  }
  save_optimized(opt_records, (base / "optimized.jsonl").string());

  save_dataset(out.curated, (base / "curated.jsonl").string());
  save_report(out.report, (base / "report.json").string());
  write_embedding_projection(out.segment_embeddings, out.segment_labels,
                             (base / "embeddings_pca.csv").string());
  return out;
}

}  // namespace segcurate
