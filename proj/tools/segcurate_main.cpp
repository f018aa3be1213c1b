#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "segcurate/config.hpp"
#include "segcurate/pipeline.hpp"

namespace {

using namespace segcurate;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  CurationConfig make_config() const {
    CurationConfig cfg = config_path.empty() ? default_config() : load_config_file(config_path);
    if (seed) apply_seed(cfg, *seed);
    if (threads) cfg.threads = *threads;
    cfg.augment.threads = cfg.threads;
    validate_config(cfg);
    return cfg;
  }
};

void add_global_opts(CLI::App* sub, GlobalOpts& g) {
  sub->add_option("--config", g.config_path, "JSON config file; missing keys keep defaults");
  sub->add_option("--seed", g.seed, "override the top level seed (re-derives stage seeds)");
  sub->add_option("--threads", g.threads, "worker threads for augment and classify");
}

std::vector<Segment> mixed_segments(const Dataset& ds, const CurationConfig& cfg) {
  return segment_dataset(ds, cfg.segmentation);
}

ActionKind uniform_kind(const Dataset& ds) {
  const ActionKind kind = ds.demos.at(0).action_kind;
  for (const auto& d : ds.demos)
    if (d.action_kind != kind)
      throw DataError("demos with differing action kinds in one run are not supported");
  return kind;
}

void run_synth(const GlobalOpts& g, const std::string& out, const std::string& truth_out,
               const std::string& expert_out, int expert_count) {
  const CurationConfig cfg = g.make_config();
  if (expert_count < 0 || expert_count > cfg.synth.n_expert)
    throw ConfigError("--expert-count must lie in [0, synth.n_expert]");
  if (expert_count > 0 && expert_out.empty())
    throw ConfigError("--expert-count requires --expert-out");

  SynthResult res = generate(cfg.synth);
  if (!expert_out.empty()) {
    if (expert_count == 0) throw ConfigError("--expert-out requires --expert-count >= 1");
    Dataset ref;
    ref.role = DatasetRole::ExpertReference;
    ref.demos.assign(res.dataset.demos.begin(), res.dataset.demos.begin() + expert_count);
    res.dataset.demos.erase(res.dataset.demos.begin(), res.dataset.demos.begin() + expert_count);
    save_dataset(ref, expert_out);
  }
  save_dataset(res.dataset, out);
  if (!truth_out.empty()) save_truth(res.truth, truth_out);
  std::cout << "wrote " << res.dataset.demos.size() << " demos to " << out << "\n";
}

void run_segment(const GlobalOpts& g, const std::string& in, const std::string& out) {
  const CurationConfig cfg = g.make_config();
  const Dataset ds = load_dataset(in);
  const auto segs = mixed_segments(ds, cfg);
  save_segments_index(segs, out);
  std::cout << "wrote " << segs.size() << " segments to " << out << "\n";
}

AugmentArtifacts build_augment_artifacts(const Dataset& expert, const CurationConfig& cfg) {
  const auto segs = segment_dataset(expert, cfg.segmentation);
  AugmentArtifacts art;
  art.width = cfg.augment.width;
  art.height = cfg.augment.height;
  const AugmentResult aug = augment_expert(segs, cfg.augment);
  const Camera cam = canonical_camera(segs, cfg.augment);
  const TrajRaster blank = blank_raster(cfg.augment.width, cfg.augment.height);
  for (const auto& seg : segs) art.originals.push_back({render_segment(seg, cam), blank});
  art.positives = aug.positives;
  art.negatives = aug.negatives;
  return art;
}

void run_augment(const GlobalOpts& g, const std::string& expert_path, const std::string& out_dir) {
  const CurationConfig cfg = g.make_config();
  const Dataset expert = load_dataset(expert_path, DatasetRole::ExpertReference);
  if (expert.demos.empty()) throw DataError("expert reference dataset is empty");
  const AugmentArtifacts art = build_augment_artifacts(expert, cfg);
  save_augment_dir(art, out_dir);
  std::cout << "wrote " << art.originals.size() << " originals, " << art.positives.size()
            << " positives, " << art.negatives.size() << " negatives to " << out_dir << "\n";
}

void run_train(const GlobalOpts& g, const std::string& aug_dir, const std::string& params_out,
               const std::string& ref_out) {
  const CurationConfig cfg = g.make_config();
  const AugmentArtifacts art = load_augment_dir(aug_dir);
  std::vector<RasterPair> train_pos = art.originals;
  train_pos.insert(train_pos.end(), art.positives.begin(), art.positives.end());
  const TrainResult tr = train(train_pos, art.negatives, cfg.train);
  const EncoderParams params = to_float32(tr.params);
  save_params(params, params_out);

  LabeledEmbeddingSet ref;
  auto add = [&](const std::vector<RasterPair>& pairs, QualityLabel label) {
    for (const auto& p : pairs) {
      Embedding e = encode(p.start_view, p.end_view, params);
      e.z = e.z.cast<float>().cast<double>();
      ref.embeddings.push_back(std::move(e));
      ref.labels.push_back(label);
    }
  };
  add(train_pos, QualityLabel::Positive);
  add(art.negatives, QualityLabel::Negative);
  save_embedding_set(ref, ref_out);

  std::cout << "trained " << cfg.train.epochs << " epochs";
  if (!tr.epoch_loss.empty()) std::cout << ", final loss " << tr.epoch_loss.back();
  std::cout << "; wrote " << params_out << " and " << ref_out << "\n";
}

void run_classify(const GlobalOpts& g, const std::string& in, const std::string& expert_path,
                  const std::string& params_path, const std::string& ref_path,
                  const std::string& out) {
  const CurationConfig cfg = g.make_config();
  const Dataset mixed = load_dataset(in);
  if (mixed.demos.empty()) throw DataError("mixed dataset is empty");
  const Dataset expert = load_dataset(expert_path, DatasetRole::ExpertReference);
  if (expert.demos.empty()) throw DataError("expert reference dataset is empty");
  const EncoderParams params = load_params(params_path);
  const LabeledEmbeddingSet ref = load_embedding_set(ref_path);

  const Camera cam = canonical_camera(segment_dataset(expert, cfg.segmentation), cfg.augment);
  std::vector<Segment> segs;
  std::vector<std::vector<std::size_t>> by_demo(mixed.demos.size());
  for (std::size_t d = 0; d < mixed.demos.size(); ++d) {
    for (auto& seg : segment_demo(mixed.demos[d], cfg.segmentation)) {
      by_demo[d].push_back(segs.size());
      segs.push_back(std::move(seg));
    }
  }
  const ClassifyResult cls = classify_segments(segs, params, ref, cam, cfg.vote, cfg.threads);
  std::vector<QualityLabel> labels = cls.labels;
  if (cfg.pipeline.selection_level == SelectionLevel::Demonstration) {
    for (const auto& idx : by_demo) {
      if (idx.empty()) continue;
      double mean = 0.0;
      for (std::size_t i : idx) mean += cls.scores[i];
      mean /= static_cast<double>(idx.size());
      const QualityLabel demo_label =
          mean >= cfg.vote.delta_c ? QualityLabel::Positive : QualityLabel::Negative;
      for (std::size_t i : idx) labels[i] = demo_label;
    }
  }

  std::vector<SegmentLabelRecord> records;
  int positives = 0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    records.push_back({segs[i].demo_id, segs[i].start, segs[i].end, cls.scores[i], labels[i]});
    positives += labels[i] == QualityLabel::Positive ? 1 : 0;
  }
  save_labels(records, out);
  std::cout << "classified " << segs.size() << " segments (" << positives << " positive) to " << out
            << "\n";
}

void run_optimize(const GlobalOpts& g, const std::string& in, const std::string& labels_path,
                  const std::string& out) {
  const CurationConfig cfg = g.make_config();
  const Dataset mixed = load_dataset(in);
  if (mixed.demos.empty()) throw DataError("mixed dataset is empty");
  const ActionKind kind = uniform_kind(mixed);
  const auto segs = mixed_segments(mixed, cfg);

  std::vector<Segment> targets;
  if (labels_path.empty()) {
    targets = segs;
  } else {
    const auto records = load_labels(labels_path);
    for (const auto& r : records) {
      if (r.label != QualityLabel::Negative) continue;
      bool found = false;
      for (const auto& seg : segs) {
        if (seg.demo_id == r.demo_id && seg.start == r.start && seg.end == r.end) {
          targets.push_back(seg);
          found = true;
          break;
        }
      }
      if (!found)
        throw DataError(labels_path + ": label references unknown segment " + r.demo_id + " [" +
                        std::to_string(r.start) + ", " + std::to_string(r.end) + "]");
    }
  }

  const auto opts = optimize_negatives(targets, cfg.optimize, kind);
  std::vector<OptimizedRecord> records;
  for (const auto& o : opts) {
    OptimizedRecord rec;
    rec.demo_id = o.original.demo_id;
    rec.start = o.original.start;
    rec.end = o.original.end;
    rec.retained = o.retained;
    if (cfg.pipeline.action_relabeling) {
      rec.steps = o.relabeled;
    } else {
      for (int t : o.retained) rec.steps.push_back(o.original.steps[t - 1]);
    }
    records.push_back(std::move(rec));
  }
  save_optimized(records, out);
  std::cout << "optimized " << records.size() << " segments to " << out << "\n";
}

void run_curate(const GlobalOpts& g, const std::string& in, const std::string& expert_path,
                const std::string& truth_path, const std::string& out_dir) {
  const CurationConfig cfg = g.make_config();
  CurateInputs inputs;
  inputs.mixed = load_dataset(in);
  inputs.expert = load_dataset(expert_path, DatasetRole::ExpertReference);
  if (!truth_path.empty()) inputs.truth = load_truth(truth_path);

  const CurateOutputs out = curate_to_dir(inputs, cfg, out_dir);
  const CurationReport& rep = out.report;
  std::cout << "curated " << rep.input_demos << " demos / " << rep.segment_count << " segments; "
            << "emitted " << rep.emitted_demos << " demos, utilization " << rep.utilization;
  if (rep.metrics) std::cout << ", clean-class F1 " << rep.metrics->f1;
  std::cout << "; artifacts in " << out_dir << "\n";
}

void run_report(const std::string& report_path, const std::string& ref_path,
                const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) throw DataError("cannot open report file: " + report_path);
  nlohmann::json rep;
  try {
    rep = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(report_path + ": invalid JSON: " + e.what());
  }
  const LabeledEmbeddingSet ref = load_embedding_set(ref_path);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path base(out_dir);
  std::ofstream out(base / "report.json", std::ios::trunc);
  if (!out) throw DataError("cannot open report for writing in " + out_dir);
  out << rep.dump(2) << "\n";
  write_embedding_projection(ref.embeddings, ref.labels, (base / "embeddings_pca.csv").string());
  std::cout << "exported report and embedding projection to " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch curation for mixed-quality robot demonstration datasets"};
  app.require_subcommand(1);

  GlobalOpts g_synth, g_segment, g_augment, g_train, g_classify, g_optimize, g_curate;

  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  add_global_opts(synth, g_synth);
  std::string synth_out, synth_truth, synth_expert_out;
  int synth_expert_count = 0;
  synth->add_option("--out", synth_out, "output dataset (JSONL)")->required();
  synth->add_option("--truth", synth_truth, "ground truth output (JSON)");
  synth->add_option("--expert-out", synth_expert_out,
                    "split the first expert demos into a reference dataset");
  synth->add_option("--expert-count", synth_expert_count, "how many demos to split off");
  synth->callback([&] { run_synth(g_synth, synth_out, synth_truth, synth_expert_out, synth_expert_count); });

  auto* segment = app.add_subcommand("segment", "split demos at heuristic keyframes");
  add_global_opts(segment, g_segment);
  std::string segment_in, segment_out;
  segment->add_option("--in", segment_in, "input dataset (JSONL)")->required();
  segment->add_option("--out", segment_out, "segment index output (JSONL)")->required();
  segment->callback([&] { run_segment(g_segment, segment_in, segment_out); });

  auto* augment = app.add_subcommand("augment", "generate contrastive raster pairs from expert demos");
  add_global_opts(augment, g_augment);
  std::string augment_expert_path, augment_out_dir;
  augment->add_option("--expert", augment_expert_path, "expert reference dataset (JSONL)")->required();
  augment->add_option("--out-dir", augment_out_dir, "artifact directory")->required();
  augment->callback([&] { run_augment(g_augment, augment_expert_path, augment_out_dir); });

  auto* train_repr = app.add_subcommand("train-repr", "train the segment encoder");
  add_global_opts(train_repr, g_train);
  std::string train_aug_dir, train_params_out, train_ref_out;
  train_repr->add_option("--aug-dir", train_aug_dir, "augment artifact directory")->required();
  train_repr->add_option("--params-out", train_params_out, "encoder parameters output")->required();
  train_repr->add_option("--ref-out", train_ref_out, "reference embedding set output")->required();
  train_repr->callback([&] { run_train(g_train, train_aug_dir, train_params_out, train_ref_out); });

  auto* classify = app.add_subcommand("classify", "label segments by voting against the reference set");
  add_global_opts(classify, g_classify);
  std::string classify_in, classify_expert, classify_params, classify_ref, classify_out;
  classify->add_option("--in", classify_in, "mixed dataset (JSONL)")->required();
  classify->add_option("--expert", classify_expert, "expert reference dataset (JSONL)")->required();
  classify->add_option("--params", classify_params, "encoder parameters")->required();
  classify->add_option("--ref", classify_ref, "reference embedding set")->required();
  classify->add_option("--out", classify_out, "labels output (JSONL)")->required();
  classify->callback([&] {
    run_classify(g_classify, classify_in, classify_expert, classify_params, classify_ref, classify_out);
  });

  auto* optimize = app.add_subcommand("optimize", "retain waypoints and relabel actions");
  add_global_opts(optimize, g_optimize);
  std::string optimize_in, optimize_labels, optimize_out;
  optimize->add_option("--in", optimize_in, "dataset (JSONL)")->required();
  optimize->add_option("--labels", optimize_labels, "labels file; only negatives are optimized");
  optimize->add_option("--out", optimize_out, "optimized segments output (JSONL)")->required();
  optimize->callback([&] { run_optimize(g_optimize, optimize_in, optimize_labels, optimize_out); });

  auto* curate = app.add_subcommand("curate", "run the full curation pipeline");
  add_global_opts(curate, g_curate);
  std::string curate_in, curate_expert, curate_truth, curate_out_dir;
  curate->add_option("--in", curate_in, "mixed dataset (JSONL)")->required();
  curate->add_option("--expert", curate_expert, "expert reference dataset (JSONL)")->required();
  curate->add_option("--truth", curate_truth, "ground truth for classification metrics");
  curate->add_option("--out-dir", curate_out_dir, "artifact directory")->required();
  curate->callback([&] { run_curate(g_curate, curate_in, curate_expert, curate_truth, curate_out_dir); });

  auto* report = app.add_subcommand("report", "re-export a report with an embedding projection");
  std::string report_in, report_ref, report_out_dir;
  report->add_option("--report", report_in, "report JSON")->required();
  report->add_option("--ref", report_ref, "reference embedding set")->required();
  report->add_option("--out-dir", report_out_dir, "output directory")->required();
  report->callback([&] { run_report(report_in, report_ref, report_out_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const segcurate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const segcurate::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
