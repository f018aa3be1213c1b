#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "segcurate/config.hpp"
#include "segcurate/pipeline.hpp"
#include "segcurate/report.hpp"
#include "segcurate/rng.hpp"

#include "helpers.hpp"

using namespace segcurate;
using namespace segcurate::testing;
using nlohmann::json;

namespace {

// Small but complete configuration so the full pipeline finishes in a couple
// of seconds per run.
CurationConfig fast_cfg(std::uint64_t seed) {
  CurationConfig cfg = default_config();
  apply_seed(cfg, seed);
  cfg.threads = 2;
  cfg.augment.width = 24;
  cfg.augment.height = 24;
  cfg.augment.focal = 30.0;
  cfg.augment.n_positive = 16;
  cfg.augment.n_negative = 16;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 16;
  cfg.train.hidden = {32};
  cfg.train.embed_dim = 16;
  cfg.vote.k = 8;
  cfg.synth.n_expert = 5;
  cfg.synth.n_suboptimal = 2;
  cfg.synth.subtasks = 2;
  cfg.synth.hz = 10.0;
  cfg.synth.subtask_duration = 1.2;
  cfg.synth.noise.corrupt_prob = 1.0;
  return cfg;
}

// First n_ref generated demos become the expert reference, the rest are the
// data to curate. Truth stays whole; lookups go by demo id.
CurateInputs make_inputs(const CurationConfig& cfg, int n_ref) {
  SynthResult r = generate(cfg.synth);
  REQUIRE(static_cast<int>(r.dataset.demos.size()) > n_ref);
  CurateInputs in;
  in.expert.role = DatasetRole::ExpertReference;
  for (std::size_t i = 0; i < r.dataset.demos.size(); ++i) {
    if (static_cast<int>(i) < n_ref)
      in.expert.demos.push_back(r.dataset.demos[i]);
    else
      in.mixed.demos.push_back(r.dataset.demos[i]);
  }
  in.truth = std::move(r.truth);
  return in;
}

bool steps_equal(const std::vector<Step>& a, const std::vector<Step>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].obs.ee_pose.position != b[i].obs.ee_pose.position) return false;
    if (a[i].obs.ee_pose.orientation.coeffs() != b[i].obs.ee_pose.orientation.coeffs())
      return false;
    if (a[i].obs.gripper != b[i].obs.gripper) return false;
    if (a[i].obs.proprio != b[i].obs.proprio) return false;
    if (a[i].act.target.position != b[i].act.target.position) return false;
    if (a[i].act.target.orientation.coeffs() != b[i].act.target.orientation.coeffs()) return false;
    if (a[i].act.gripper_cmd != b[i].act.gripper_cmd) return false;
  }
  return true;
}

json report_without_timings(const CurationReport& rep) {
  json j = rep.to_json();
  j.erase("timings_ms");
  return j;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults match the documented values") {
  const CurationConfig d = default_config();
  CHECK(d.schema_version == 1);
  CHECK(d.seed == 1);
  CHECK(d.threads == 1);
  CHECK(d.train.embed_dim == 256);
  CHECK(d.train.learning_rate == 0.005);
  CHECK(d.train.epochs == 20);
  CHECK(d.train.batch_size == 64);
  CHECK(d.train.temperature == 0.1);
  CHECK(d.vote.k == 64);
  CHECK(d.vote.delta_c == 0.5);
  CHECK(d.augment.n_positive == 500);
  CHECK(d.augment.n_negative == 500);
  CHECK(d.optimize.delta_theta_deg == 75.0);
  CHECK(d.segmentation.velocity_eps == 0.005);
  CHECK(d.segmentation.debounce_window == 5);
  CHECK(d.segmentation.min_segment_len == 4);
  CHECK(d.pipeline.selection_level == SelectionLevel::Segment);
  CHECK(d.pipeline.trajectory_optimization);
  CHECK(d.pipeline.action_relabeling);
}

TEST_CASE("apply_seed derives the stage seeds") {
  CurationConfig cfg = default_config();
  apply_seed(cfg, 42);
  CHECK(cfg.seed == 42);
  CHECK(cfg.augment.seed == derive_seed(42, 1));
  CHECK(cfg.train.seed == derive_seed(42, 2));
  CHECK(cfg.synth.seed == derive_seed(42, 3));
}

TEST_CASE("json round trip preserves every field") {
  CurationConfig cfg = default_config();
  apply_seed(cfg, 99);
  cfg.threads = 3;
  cfg.segmentation.velocity_eps = 0.01;
  cfg.segmentation.min_segment_len = 6;
  cfg.augment.width = 32;
  cfg.augment.height = 48;
  cfg.augment.focal = 55.0;
  cfg.augment.n_positive = 12;
  cfg.augment.n_negative = 7;
  cfg.augment.jitter_sigma = 0.03;
  cfg.train.hidden = {64, 32};
  cfg.train.embed_dim = 32;
  cfg.vote.k = 5;
  cfg.vote.delta_c = 0.6;
  cfg.optimize.delta_theta_deg = 60.0;
  cfg.pipeline.selection_level = SelectionLevel::Demonstration;
  cfg.pipeline.trajectory_optimization = true;
  cfg.pipeline.action_relabeling = false;
  cfg.synth.n_expert = 3;
  cfg.synth.noise.pause_prob = 0.9;

  const json j = config_to_json(cfg);
  const CurationConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.train.hidden == std::vector<int>{64, 32});
  CHECK(back.pipeline.selection_level == SelectionLevel::Demonstration);
  CHECK(back.augment.seed == cfg.augment.seed);
}

TEST_CASE("top level seed re-derives stage seeds unless pinned") {
  json j;
  j["seed"] = 7;
  CurationConfig cfg = config_from_json(j);
  CHECK(cfg.augment.seed == derive_seed(7, 1));
  CHECK(cfg.train.seed == derive_seed(7, 2));

  j["augment"] = {{"seed", 1234}};
  cfg = config_from_json(j);
  CHECK(cfg.augment.seed == 1234);
  CHECK(cfg.train.seed == derive_seed(7, 2));
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(config_from_json(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"vote", {{"kk", 3}}}}),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"synth", {{"noise", {{"pauses", 1}}}}}}), ConfigError);
}

TEST_CASE("type errors are rejected") {
  CHECK_THROWS_AS(config_from_json(json{{"threads", true}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"train", {{"hidden", {1.5}}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"vote", {{"delta_c", "half"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"synth", {{"workspace_min", {1.0, 2.0}}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"pipeline", {{"selection_level", 2}}}}), ConfigError);
}

TEST_CASE("unsupported schema version is rejected") {
  CHECK_THROWS_AS(config_from_json(json{{"schema_version", 2}}), ConfigError);
  CurationConfig cfg = default_config();
  cfg.schema_version = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("relabeling requires optimization") {
  CurationConfig cfg = default_config();
  cfg.pipeline.trajectory_optimization = false;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("action_relabeling"), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"pipeline", {{"trajectory_optimization", false}}}}),
                  ConfigError);
  cfg.pipeline.action_relabeling = false;
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("selection level strings") {
  for (SelectionLevel lvl :
       {SelectionLevel::None, SelectionLevel::Demonstration, SelectionLevel::Segment})
    CHECK(selection_level_from_string(selection_level_to_string(lvl)) == lvl);
  CHECK_THROWS_AS(selection_level_from_string("both"), ConfigError);
}

TEST_CASE("config file save and load") {
  TempDir tmp("config_file");
  CurationConfig cfg = default_config();
  apply_seed(cfg, 17);
  cfg.vote.k = 9;
  const std::string path = tmp.file("cfg.json");
  save_config_file(cfg, path);
  const CurationConfig back = load_config_file(path);
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK_THROWS_AS(load_config_file(tmp.file("missing.json")), ConfigError);

  std::ofstream bad(tmp.file("bad.json"));
  bad << "{ not json";
  bad.close();
  CHECK_THROWS_AS(load_config_file(tmp.file("bad.json")), ConfigError);
}

}  // TEST_SUITE("config")

TEST_SUITE("report") {

TEST_CASE("metrics from confusion counts") {
  const ClassificationMetrics m = compute_metrics(3, 1, 4, 2);
  CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.accuracy == doctest::Approx(0.7).epsilon(1e-12));

  const ClassificationMetrics zero = compute_metrics(0, 0, 0, 0);
  CHECK(zero.precision == 0.0);
  CHECK(zero.recall == 0.0);
  CHECK(zero.f1 == 0.0);
  CHECK(zero.accuracy == 0.0);
}

TEST_CASE("report json shape") {
  CurationReport rep;
  rep.input_demos = 2;
  rep.input_steps = 50;
  rep.emitted_demos = 2;
  rep.emitted_steps = 50;
  rep.segment_count = 1;
  rep.utilization = 1.0;
  SegmentRecord r;
  r.demo_id = "demo_a";
  r.start = 1;
  r.end = 25;
  r.classified = false;
  rep.segments.push_back(r);
  rep.timings_ms = {{"segment", 1.5}};

  const json j = rep.to_json();
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("counts").at("input_steps") == 50);
  CHECK(j.at("utilization") == 1.0);
  CHECK(!j.contains("classification"));
  CHECK(j.at("segments").size() == 1);
  // Unclassified segments carry no score or label.
  CHECK(!j.at("segments")[0].contains("score"));
  CHECK(!j.at("segments")[0].contains("label"));
  CHECK(j.at("timings_ms").at("segment") == 1.5);

  rep.metrics = compute_metrics(1, 0, 1, 0);
  rep.segments[0].classified = true;
  rep.segments[0].score = 0.9;
  const json j2 = rep.to_json();
  CHECK(j2.at("classification").at("f1") == 1.0);
  CHECK(j2.at("segments")[0].at("score") == 0.9);
  CHECK(j2.at("segments")[0].at("label") == "positive");
}

TEST_CASE("embedding projection separates well separated clusters") {
  TempDir tmp("proj_sep");
  Rng rng(7);
  std::vector<Embedding> embs;
  std::vector<QualityLabel> labels;
  for (int i = 0; i < 20; ++i) {
    const bool pos = i % 2 == 0;
    Embedding e;
    e.z = Eigen::VectorXd::Zero(6);
    e.z(0) = (pos ? 5.0 : -5.0) + 0.1 * rng.normal();
    for (int d = 1; d < 6; ++d) e.z(d) = 0.1 * rng.normal();
    embs.push_back(std::move(e));
    labels.push_back(pos ? QualityLabel::Positive : QualityLabel::Negative);
  }
  const std::string path = tmp.file("proj.csv");
  write_embedding_projection(embs, labels, path);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "pc1,pc2,label");
  std::vector<double> pos_pc1, neg_pc1;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string pc1, pc2, label;
    REQUIRE(std::getline(ss, pc1, ','));
    REQUIRE(std::getline(ss, pc2, ','));
    REQUIRE(std::getline(ss, label));
    (label == "positive" ? pos_pc1 : neg_pc1).push_back(std::stod(pc1));
  }
  REQUIRE(pos_pc1.size() == 10);
  REQUIRE(neg_pc1.size() == 10);
  const auto [pos_min, pos_max] = std::minmax_element(pos_pc1.begin(), pos_pc1.end());
  const auto [neg_min, neg_max] = std::minmax_element(neg_pc1.begin(), neg_pc1.end());
  const bool separated = *pos_min > *neg_max || *neg_min > *pos_max;
  CHECK(separated);
}

TEST_CASE("embedding projection edge cases") {
  TempDir tmp("proj_edge");
  Embedding one;
  one.z = Eigen::VectorXd::Ones(4);

  const std::string single = tmp.file("one.csv");
  write_embedding_projection({one}, {QualityLabel::Positive}, single);
  std::ifstream in(single);
  std::string header, row, extra;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row));
  CHECK(row == "0,0,positive");
  CHECK(!std::getline(in, extra));

  const std::string empty = tmp.file("none.csv");
  write_embedding_projection({}, {}, empty);
  std::ifstream in2(empty);
  REQUIRE(std::getline(in2, header));
  CHECK(header == "pc1,pc2,label");
  CHECK(!std::getline(in2, extra));

  CHECK_THROWS_AS(write_embedding_projection({one}, {}, tmp.file("bad.csv")), DataError);
}

TEST_CASE("report file is valid json") {
  TempDir tmp("report_file");
  CurationReport rep;
  rep.segment_count = 0;
  const std::string path = tmp.file("report.json");
  save_report(rep, path);
  std::ifstream in(path);
  const json j = json::parse(in);
  CHECK(j.at("counts").at("segments") == 0);
}

}  // TEST_SUITE("report")

TEST_SUITE("pipeline") {

TEST_CASE("relabeling keeps every input step") {
  const CurationConfig cfg = fast_cfg(11);
  const CurateInputs in = make_inputs(cfg, 3);
  const CurateOutputs out = curate(in, cfg);

  CHECK(out.classifier_ran);
  CHECK(out.report.utilization == 1.0);
  CHECK(out.report.emitted_steps == out.report.input_steps);
  CHECK(out.curated.demos.size() == in.mixed.demos.size());

  // Observations are untouched; only actions may be rewritten.
  for (std::size_t d = 0; d < in.mixed.demos.size(); ++d) {
    const auto& orig = in.mixed.demos[d];
    const auto& cur = out.curated.demos[d];
    REQUIRE(cur.id == orig.id);
    REQUIRE(cur.steps.size() == orig.steps.size());
    for (std::size_t t = 0; t < orig.steps.size(); ++t) {
      CHECK(cur.steps[t].obs.ee_pose.position == orig.steps[t].obs.ee_pose.position);
      CHECK(cur.steps[t].obs.gripper == orig.steps[t].obs.gripper);
    }
  }

  // Report bookkeeping is internally consistent.
  CHECK(out.report.segment_count == static_cast<int>(out.report.segments.size()));
  CHECK(out.report.positive_segments + out.report.negative_segments == out.report.segment_count);
  CHECK(out.segment_embeddings.size() == out.report.segments.size());
  CHECK(out.segment_labels.size() == out.report.segments.size());
  CHECK(out.report.metrics.has_value());
}

TEST_CASE("all switches off is the identity") {
  CurationConfig cfg = fast_cfg(12);
  cfg.pipeline.selection_level = SelectionLevel::None;
  cfg.pipeline.trajectory_optimization = false;
  cfg.pipeline.action_relabeling = false;
  const CurateInputs in = make_inputs(cfg, 3);
  const CurateOutputs out = curate(in, cfg);

  CHECK(!out.classifier_ran);
  REQUIRE(out.curated.demos.size() == in.mixed.demos.size());
  for (std::size_t d = 0; d < in.mixed.demos.size(); ++d) {
    CHECK(out.curated.demos[d].id == in.mixed.demos[d].id);
    CHECK(steps_equal(out.curated.demos[d].steps, in.mixed.demos[d].steps));
  }
  CHECK(out.report.utilization == 1.0);
  CHECK(out.report.positive_segments == 0);
  CHECK(out.report.negative_segments == 0);
  // Segment records exist but carry no labels.
  for (const auto& s : out.report.segments) CHECK(!s.classified);
}

TEST_CASE("optimize plus relabel leaves clean straight demos unchanged") {
  CurationConfig cfg = fast_cfg(13);
  cfg.pipeline.selection_level = SelectionLevel::None;
  const CurateInputs full = make_inputs(cfg, 3);
  CurateInputs in;
  in.expert = full.expert;
  // Only the expert tail demos: straight minimum jerk segments throughout.
  for (const auto& d : full.mixed.demos)
    if (d.source_quality == SourceQuality::Expert) in.mixed.demos.push_back(d);
  REQUIRE(in.mixed.demos.size() == 2);

  const CurateOutputs out = curate(in, cfg);
  REQUIRE(out.curated.demos.size() == in.mixed.demos.size());
  for (std::size_t d = 0; d < in.mixed.demos.size(); ++d)
    CHECK(steps_equal(out.curated.demos[d].steps, in.mixed.demos[d].steps));
  CHECK(out.report.utilization == 1.0);
  for (const auto& s : out.report.segments) {
    CHECK(s.optimized);
    CHECK(s.retained_count == s.end - s.start + 1);
  }
}

TEST_CASE("without relabeling corrupted data loses steps") {
  CurationConfig cfg = fast_cfg(14);
  cfg.pipeline.selection_level = SelectionLevel::None;
  cfg.pipeline.action_relabeling = false;
  cfg.synth.noise.detour_prob = 1.0;
  const CurateInputs full = make_inputs(cfg, 3);
  CurateInputs in;
  in.expert = full.expert;
  for (const auto& d : full.mixed.demos)
    if (d.source_quality == SourceQuality::Suboptimal) in.mixed.demos.push_back(d);
  REQUIRE(!in.mixed.demos.empty());

  const CurateOutputs out = curate(in, cfg);
  CHECK(out.report.emitted_steps < out.report.input_steps);
  CHECK(out.report.utilization < 1.0);
  CHECK(out.report.mean_path_reduction > 0.0);
}

TEST_CASE("demonstration level selection labels whole demos") {
  CurationConfig cfg = fast_cfg(15);
  cfg.pipeline.selection_level = SelectionLevel::Demonstration;
  const CurateInputs in = make_inputs(cfg, 3);
  const CurateOutputs out = curate(in, cfg);

  std::set<std::string> pos_demos, neg_demos;
  for (const auto& s : out.report.segments) {
    REQUIRE(s.classified);
    (s.predicted == QualityLabel::Positive ? pos_demos : neg_demos).insert(s.demo_id);
  }
  // No demo may appear with both labels.
  for (const auto& id : pos_demos) CHECK(neg_demos.count(id) == 0);
}

TEST_CASE("curate is deterministic across thread counts") {
  CurationConfig a = fast_cfg(16);
  a.threads = 1;
  a.augment.threads = 1;
  CurationConfig b = fast_cfg(16);
  b.threads = 4;
  b.augment.threads = 4;
  const CurateInputs in = make_inputs(a, 3);

  const CurateOutputs out_a = curate(in, a);
  const CurateOutputs out_b = curate(in, b);

  CHECK(report_without_timings(out_a.report) == report_without_timings(out_b.report));
  REQUIRE(out_a.curated.demos.size() == out_b.curated.demos.size());
  for (std::size_t d = 0; d < out_a.curated.demos.size(); ++d)
    CHECK(steps_equal(out_a.curated.demos[d].steps, out_b.curated.demos[d].steps));
  REQUIRE(out_a.segment_labels.size() == out_b.segment_labels.size());
  for (std::size_t i = 0; i < out_a.segment_labels.size(); ++i)
    CHECK(out_a.segment_labels[i] == out_b.segment_labels[i]);
}

TEST_CASE("expert reference dataset is validated") {
  const CurationConfig cfg = fast_cfg(17);
  CurateInputs in = make_inputs(cfg, 3);
  in.expert.role = DatasetRole::Mixed;
  CHECK_THROWS_AS(curate(in, cfg), DataError);

  CurateInputs empty = make_inputs(cfg, 3);
  empty.expert.demos.clear();
  CHECK_THROWS_AS(curate(empty, cfg), DataError);
}

TEST_CASE("curate_to_dir writes the stage artifacts") {
  TempDir tmp("curate_dir");
  const CurationConfig cfg = fast_cfg(18);
  const CurateInputs in = make_inputs(cfg, 3);
  const std::string dir = tmp.file("run");
  const CurateOutputs out = curate_to_dir(in, cfg, dir);

  namespace fs = std::filesystem;
  const fs::path base(dir);
  for (const char* name : {"resolved_config.json", "segments_mixed.jsonl", "segments_expert.jsonl",
                           "params.bin", "ref.bin", "camera.json", "labels.jsonl",
                           "optimized.jsonl", "curated.jsonl", "report.json",
                           "embeddings_pca.csv"})
    CHECK(fs::exists(base / name));
  CHECK(fs::exists(base / "aug" / "index.json"));

  const CurationConfig resolved = load_config_file((base / "resolved_config.json").string());
  CHECK(config_to_json(resolved) == config_to_json(cfg));

  const auto labels = load_labels((base / "labels.jsonl").string());
  CHECK(labels.size() == out.report.segments.size());

  const Dataset curated = load_dataset((base / "curated.jsonl").string());
  REQUIRE(curated.demos.size() == out.curated.demos.size());
  for (std::size_t d = 0; d < curated.demos.size(); ++d)
    CHECK(steps_equal(curated.demos[d].steps, out.curated.demos[d].steps));

  std::ifstream cam_in((base / "camera.json").string());
  const json cam = json::parse(cam_in);
  CHECK(cam.at("position").size() == 3);
  CHECK(cam.at("width") == cfg.augment.width);

  const AugmentArtifacts art = load_augment_dir((base / "aug").string());
  CHECK(art.originals.size() == out.augmented.originals.size());
  CHECK(art.positives.size() == out.augmented.positives.size());
  CHECK(art.negatives.size() == out.augmented.negatives.size());
  REQUIRE(!art.positives.empty());
  CHECK(art.positives[0].start_view.pixels == out.augmented.positives[0].start_view.pixels);
}

TEST_CASE("augment directory round trip and corruption") {
  TempDir tmp("aug_dir");
  Rng rng(5);
  AugmentArtifacts art;
  art.width = 4;
  art.height = 3;
  auto random_pair = [&] {
    RasterPair p;
    p.start_view = blank_raster(4, 3);
    p.end_view = blank_raster(4, 3);
    for (auto& v : p.start_view.pixels) v = static_cast<float>(rng.uniform01());
    for (auto& v : p.end_view.pixels) v = static_cast<float>(rng.uniform01());
    return p;
  };
  for (int i = 0; i < 3; ++i) art.originals.push_back(random_pair());
  for (int i = 0; i < 5; ++i) art.positives.push_back(random_pair());
  for (int i = 0; i < 4; ++i) art.negatives.push_back(random_pair());

  const std::string dir = tmp.file("aug");
  save_augment_dir(art, dir);
  const AugmentArtifacts back = load_augment_dir(dir);
  CHECK(back.width == 4);
  CHECK(back.height == 3);
  REQUIRE(back.positives.size() == 5);
  for (std::size_t i = 0; i < art.positives.size(); ++i) {
    CHECK(back.positives[i].start_view.pixels == art.positives[i].start_view.pixels);
    CHECK(back.positives[i].end_view.pixels == art.positives[i].end_view.pixels);
  }

  // Truncated raster payloads and trailing bytes are both rejected.
  namespace fs = std::filesystem;
  fs::resize_file(fs::path(dir) / "negatives.f32", 10);
  CHECK_THROWS_AS(load_augment_dir(dir), DataError);
  save_augment_dir(art, dir);
  std::ofstream extra(fs::path(dir) / "positives.f32", std::ios::binary | std::ios::app);
  extra << 'x';
  extra.close();
  CHECK_THROWS_AS(load_augment_dir(dir), DataError);

  CHECK_THROWS_AS(load_augment_dir(tmp.file("missing")), DataError);
}

TEST_CASE("label records round trip") {
  TempDir tmp("labels_io");
  std::vector<SegmentLabelRecord> recs;
  recs.push_back({"demo_a", 1, 12, 0.875, QualityLabel::Positive});
  recs.push_back({"demo_b", 13, 25, 0.125, QualityLabel::Negative});
  const std::string path = tmp.file("labels.jsonl");
  save_labels(recs, path);
  const auto back = load_labels(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].demo_id == "demo_a");
  CHECK(back[0].score == 0.875);
  CHECK(back[0].label == QualityLabel::Positive);
  CHECK(back[1].end == 25);
  CHECK(back[1].label == QualityLabel::Negative);

  std::ofstream bad(tmp.file("bad.jsonl"));
  bad << R"({"demo_id":"x","start":1,"end":2,"score":0.5,"label":"maybe"})" << "\n";
  bad.close();
  CHECK_THROWS_AS(load_labels(tmp.file("bad.jsonl")), DataError);
  CHECK_THROWS_AS(load_labels(tmp.file("absent.jsonl")), DataError);
}

}  // TEST_SUITE("pipeline")
