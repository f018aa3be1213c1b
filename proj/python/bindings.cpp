#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "segcurate/config.hpp"
#include "segcurate/optimize.hpp"
#include "segcurate/pipeline.hpp"
#include "segcurate/repr.hpp"
#include "segcurate/segmentation.hpp"
#include "segcurate/select.hpp"
#include "segcurate/synth.hpp"

namespace py = pybind11;
using namespace segcurate;

namespace {

std::vector<QualityLabel> to_labels(const std::vector<int>& raw) {
  std::vector<QualityLabel> out;
  out.reserve(raw.size());
  for (int v : raw) {
    if (v != 0 && v != 1) throw py::value_error("labels must be 0 (negative) or 1 (positive)");
    out.push_back(v == 1 ? QualityLabel::Positive : QualityLabel::Negative);
  }
  return out;
}

std::vector<Vec3> to_points(const Eigen::MatrixXd& m) {
  if (m.cols() != 3) throw py::value_error("positions must have shape (n, 3)");
  std::vector<Vec3> pts(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) pts[static_cast<std::size_t>(i)] = m.row(i);
  return pts;
}

// Minimal demo over positions and gripper readings; actions target the next
// observation so the struct passes validation.
Demonstration demo_from_arrays(const Eigen::MatrixXd& positions,
                               const std::vector<double>& grippers, double dt) {
  const std::vector<Vec3> pts = to_points(positions);
  if (grippers.size() != pts.size())
    throw py::value_error("positions and grippers must have the same length");
  Demonstration demo;
  demo.id = "arrays";
  demo.dt = dt;
  demo.steps.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Step& s = demo.steps[i];
    s.obs.ee_pose.position = pts[i];
    s.obs.gripper = grippers[i];
    const std::size_t next = i + 1 < pts.size() ? i + 1 : i;
    s.act.target.position = pts[next];
    s.act.gripper_cmd = grippers[next];
  }
  validate_demo(demo, "arrays");
  return demo;
}

SegmentationConfig seg_config(double velocity_eps, double gripper_toggle_threshold,
                              int debounce_window, int min_segment_len) {
  SegmentationConfig cfg;
  cfg.velocity_eps = velocity_eps;
  cfg.gripper_toggle_threshold = gripper_toggle_threshold;
  cfg.debounce_window = debounce_window;
  cfg.min_segment_len = min_segment_len;
  validate_segmentation_config(cfg);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_segcurate, m) {
  m.doc() =
      "Batch curation of robot demonstrations: keyframe segmentation, "
      "contrastively learned segment quality voting, and greedy trajectory "
      "optimization with action relabeling.";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");

  m.def(
      "default_config", []() { return config_to_json(default_config()).dump(2); },
      "Resolved default configuration as a JSON string.");

  m.def(
      "greedy_retention",
      [](const Eigen::MatrixXd& positions, double delta_theta_deg, double zero_vec_eps) {
        OptimizeConfig cfg;
        cfg.delta_theta_deg = delta_theta_deg;
        cfg.zero_vec_eps = zero_vec_eps;
        validate_optimize_config(cfg);
        return greedy_optimize(to_points(positions), cfg);
      },
      py::arg("positions"), py::arg("delta_theta_deg") = 75.0, py::arg("zero_vec_eps") = 1e-9,
      "Greedy waypoint retention over an (n, 3) polyline. Returns sorted "
      "1-based indices; the first and last point are always retained.");

  m.def(
      "relabel_targets",
      [](const Eigen::MatrixXd& targets, std::vector<int> retained) {
        Segment seg;
        seg.demo_id = "arrays";
        seg.start = 1;
        seg.end = static_cast<int>(targets.rows());
        seg.steps.resize(static_cast<std::size_t>(targets.rows()));
        for (Eigen::Index i = 0; i < targets.rows(); ++i) {
          seg.steps[static_cast<std::size_t>(i)].obs.ee_pose.position = targets.row(i);
          seg.steps[static_cast<std::size_t>(i)].act.target.position = targets.row(i);
        }
        const OptimizedSegment opt = relabel(seg, std::move(retained));
        Eigen::MatrixXd out(targets.rows(), 3);
        for (Eigen::Index i = 0; i < targets.rows(); ++i)
          out.row(i) = opt.relabeled[static_cast<std::size_t>(i)].act.target.position;
        return out;
      },
      py::arg("targets"), py::arg("retained"),
      "Action relabeling over (n, 3) absolute position targets given sorted "
      "1-based retained indices. Every row keeps a label; row t becomes the "
      "target of the first step whose successor is retained.");

  m.def(
      "supcon_loss",
      [](const Eigen::MatrixXd& Z, const std::vector<int>& labels, double temperature) {
        const SupConResult r = supcon_loss(Z, to_labels(labels), temperature);
        return py::make_tuple(r.loss, r.grads);
      },
      py::arg("Z"), py::arg("labels"), py::arg("temperature") = 0.1,
      "Supervised contrastive loss over embedding rows with 0/1 labels. "
      "Returns (loss, gradients) where gradients has one row per embedding.");

  m.def(
      "vote_score",
      [](const Eigen::VectorXd& query, const Eigen::MatrixXd& refs,
         const std::vector<int>& labels, int k, double delta_c) {
        if (static_cast<std::size_t>(refs.rows()) != labels.size())
          throw py::value_error("one label per reference row required");
        LabeledEmbeddingSet set;
        set.labels = to_labels(labels);
        set.embeddings.resize(static_cast<std::size_t>(refs.rows()));
        for (Eigen::Index i = 0; i < refs.rows(); ++i)
          set.embeddings[static_cast<std::size_t>(i)].z = refs.row(i);
        VoteConfig cfg;
        cfg.k = k;
        cfg.delta_c = delta_c;
        validate_vote_config(cfg);
        Embedding q;
        q.z = query;
        const VoteOutcome o = vote(q, set, cfg);
        return py::make_tuple(o.score, o.label == QualityLabel::Positive ? 1 : 0);
      },
      py::arg("query"), py::arg("reference"), py::arg("labels"), py::arg("k") = 64,
      py::arg("delta_c") = 0.5,
      "Distance weighted k nearest neighbor vote. Neighbors vote with weight "
      "exp(-distance); returns (positive share, 0/1 label).");

  m.def(
      "keyframes",
      [](const Eigen::MatrixXd& positions, const std::vector<double>& grippers, double dt,
         double velocity_eps, double gripper_toggle_threshold, int debounce_window,
         int min_segment_len) {
        return find_keyframes(
            demo_from_arrays(positions, grippers, dt),
            seg_config(velocity_eps, gripper_toggle_threshold, debounce_window, min_segment_len));
      },
      py::arg("positions"), py::arg("grippers"), py::arg("dt") = 0.05,
      py::arg("velocity_eps") = 0.005, py::arg("gripper_toggle_threshold") = 0.5,
      py::arg("debounce_window") = 5, py::arg("min_segment_len") = 4,
      "Heuristic keyframes (sorted 1-based indices, endpoints included) from "
      "gripper toggles and debounced low speed run midpoints.");

  m.def(
      "segment_spans",
      [](const Eigen::MatrixXd& positions, const std::vector<double>& grippers, double dt,
         double velocity_eps, double gripper_toggle_threshold, int debounce_window,
         int min_segment_len) {
        const std::vector<Segment> segs = segment_demo(
            demo_from_arrays(positions, grippers, dt),
            seg_config(velocity_eps, gripper_toggle_threshold, debounce_window, min_segment_len));
        std::vector<std::pair<int, int>> spans;
        spans.reserve(segs.size());
        for (const auto& s : segs) spans.emplace_back(s.start, s.end);
        return spans;
      },
      py::arg("positions"), py::arg("grippers"), py::arg("dt") = 0.05,
      py::arg("velocity_eps") = 0.005, py::arg("gripper_toggle_threshold") = 0.5,
      py::arg("debounce_window") = 5, py::arg("min_segment_len") = 4,
      "Contiguous (start, end) segment spans tiling the demo, 1-based inclusive.");

  m.def(
      "synth_dataset",
      [](const std::string& config_path, const std::string& out_path,
         const std::string& truth_path, const std::string& expert_out, int expert_count) {
        const CurationConfig cfg = load_config_file(config_path);
        SynthResult res = generate(cfg.synth);
        if (expert_count > 0) {
          if (expert_count > static_cast<int>(res.dataset.demos.size()))
            throw DataError("synth: expert_count exceeds generated demo count");
          if (expert_out.empty())
            throw ConfigError("synth: expert_count requires expert_out");
          Dataset expert;
          expert.role = DatasetRole::ExpertReference;
          expert.demos.assign(res.dataset.demos.begin(), res.dataset.demos.begin() + expert_count);
          res.dataset.demos.erase(res.dataset.demos.begin(),
                                  res.dataset.demos.begin() + expert_count);
          save_dataset(expert, expert_out);
        }
        save_dataset(res.dataset, out_path);
        if (!truth_path.empty()) save_truth(res.truth, truth_path);
      },
      py::arg("config_path"), py::arg("out_path"), py::arg("truth_path") = std::string(),
      py::arg("expert_out") = std::string(), py::arg("expert_count") = 0,
      "Generates the synthetic mixed quality dataset described by the config "
      "file. The first expert_count demos (always expert grade) can be split "
      "into a separate reference dataset.");

  m.def(
      "curate",
      [](const std::string& config_path, const std::string& mixed_path,
         const std::string& expert_path, const std::string& out_dir,
         const std::string& truth_path) {
        const CurationConfig cfg = load_config_file(config_path);
        CurateInputs in;
        in.mixed = load_dataset(mixed_path, DatasetRole::Mixed);
        in.expert = load_dataset(expert_path, DatasetRole::ExpertReference);
        if (!truth_path.empty()) in.truth = load_truth(truth_path);
        const CurateOutputs out = curate_to_dir(in, cfg, out_dir);
        return out.report.to_json().dump();
      },
      py::arg("config_path"), py::arg("mixed_path"), py::arg("expert_path"), py::arg("out_dir"),
      py::arg("truth_path") = std::string(),
      "Full curation pass over dataset files; writes stage artifacts into "
      "out_dir and returns the curation report as a JSON string.");
}
