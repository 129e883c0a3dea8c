/* Copyright 2026 The WeakCube Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// weakcube: synthesize scenes, build pseudo labels, fit cubes, evaluate.
//
// Exit codes: 0 success (possibly with warnings), 2 usage or bad config,
// 3 I/O failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "weakcube/json_io.hpp"
#include "weakcube/weakcube.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace weakcube;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// Bad flags or configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  const auto bytes = weakcube::detail::read_file(path);
  return {bytes.begin(), bytes.end()};
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  weakcube::detail::write_file(path, j.dump(2) + "\n");
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

int worker_count() {
  if (const char* env = std::getenv("WEAKCUBE_THREADS")) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::logic_error&) {
    }
    throw UsageError("WEAKCUBE_THREADS must be a positive integer");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs task(i) for i in [0, n) on the worker pool. Each task owns its
// output files, so the result does not depend on scheduling.
template <typename Task>
void parallel_for(std::size_t n, Task task) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::string> list_scene_names(const fs::path& root, const char* marker) {
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / marker)) {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string scene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04zu", i);
  return buf;
}

Scene load_scene(const fs::path& dir, bool with_images) {
  Scene s = json_io::scene_from_json(read_json(dir / "scene.json"));
  if (with_images) {
    s.depth = read_pfm(dir / "depth.pfm");
    if (fs::exists(dir / "ground_mask.pgm")) s.ground_mask = read_pgm(dir / "ground_mask.pgm");
  }
  return s;
}

// One manifest per output directory. Everything except wall_clock is a pure
// function of the flags and inputs.
void write_manifest(const fs::path& out_dir, const std::string& command, json config, json seeds,
                    json inputs, json outputs, int warnings,
                    std::chrono::steady_clock::time_point start) {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json m = {{"command", command},
            {"version", kVersion},
            {"config", std::move(config)},
            {"seeds", std::move(seeds)},
            {"inputs", std::move(inputs)},
            {"outputs", std::move(outputs)},
            {"warnings", warnings},
            {"wall_clock", {{"seconds", seconds}}}};
  write_json(out_dir / "manifest.json", m);
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string config;
  std::string out;
  int count = 1;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  if (a.count < 1) throw UsageError("--count must be at least 1");
  SynthConfig cfg = default_synth_config();
  if (!a.config.empty()) cfg = json_io::synth_config_from_json(read_json(a.config));
  const fs::path out(a.out);
  make_dirs(out);

  json seeds = json::array();
  for (int i = 0; i < a.count; ++i) seeds.push_back(a.seed + static_cast<std::uint64_t>(i));
  parallel_for(static_cast<std::size_t>(a.count), [&](std::size_t i) {
    const Scene scene = generate_scene(cfg, a.seed + i);
    const fs::path dir = out / scene_name(i);
    make_dirs(dir);
    write_json(dir / "scene.json", json_io::scene_to_json(scene));
    write_pfm(dir / "depth.pfm", scene.depth);
    write_pgm(dir / "ground_mask.pgm", scene.ground_mask);
  });
  write_json(out / "priors.json", json_io::priors_to_json(cfg.classes));
  write_manifest(out, "synth", json_io::to_json(cfg), {{"base", a.seed}, {"scenes", seeds}},
                 {{"config", a.config}}, {{"scenes", a.count}, {"priors", "priors.json"}}, 0,
                 start);
  std::cout << "wrote " << a.count << " scenes to " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// pseudo-gt

struct PseudoArgs {
  std::string scenes;
  std::string out;
  bool no_mask = false;
  RansacConfig ransac;
};

int cmd_pseudo_gt(const PseudoArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const RansacConfig& rc = a.ransac;
  if (rc.iters < 1 || !(rc.inlier_tol > 0.0) || !(rc.min_inlier_frac >= 0.0) ||
      !(rc.min_mask_frac >= 0.0)) {
    throw UsageError("RANSAC flags out of range");
  }
  const fs::path root(a.scenes);
  const auto names = list_scene_names(root, "scene.json");
  if (names.empty()) throw IoError("no scenes found in " + root.string());
  const fs::path out(a.out);
  make_dirs(out);

  std::vector<std::string> problems(names.size());
  parallel_for(names.size(), [&](std::size_t i) {
    const fs::path dir = out / names[i];
    make_dirs(dir);
    json result;
    try {
      const Scene scene = load_scene(root / names[i], true);
      RansacConfig cfg = rc;
      cfg.seed = rc.seed + i;
      const auto boxes = labeled_boxes(scene);
      const PseudoGT p = make_pseudo_gt(scene.depth, a.no_mask ? nullptr : &scene.ground_mask,
                                        scene.geometry.camera, boxes, cfg);
      result = json_io::to_json(p);
      const auto missing = std::count_if(p.per_box_depth.begin(), p.per_box_depth.end(),
                                         [](double d) { return std::isnan(d); });
      if (missing > 0) problems[i] = std::to_string(missing) + " boxes without valid depth";
    } catch (const Error& e) {
      result = {{"status", "failed"}, {"error", e.what()}};
      problems[i] = std::string("failed: ") + e.what();
    }
    write_json(dir / "pseudo_gt.json", result);
  });

  int warnings = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (problems[i].empty()) continue;
    ++warnings;
    warn(names[i] + ": " + problems[i]);
  }
  json seeds = json::array();
  for (std::size_t i = 0; i < names.size(); ++i) seeds.push_back(rc.seed + i);
  json config = {{"iters", rc.iters},
                 {"inlier_tol", rc.inlier_tol},
                 {"min_inlier_frac", rc.min_inlier_frac},
                 {"min_mask_frac", rc.min_mask_frac},
                 {"use_mask", !a.no_mask}};
  write_manifest(out, "pseudo-gt", config, {{"base", rc.seed}, {"scenes", seeds}},
                 {{"scenes", a.scenes}}, {{"scenes", names}}, warnings, start);
  std::cout << "pseudo labels for " << names.size() << " scenes, " << warnings << " warnings\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string scenes;
  std::string pseudo;
  std::string priors;
  std::string out;
  std::string ablate;
  LossWeights weights;
  int max_iters = 500;
  int restarts = 0;
  std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  FitConfig fc;
  fc.weights = a.weights;
  if (a.ablate == "giou") fc.weights.giou = 0.0;
  if (a.ablate == "z") fc.weights.z = 0.0;
  if (a.ablate == "dim") fc.weights.dim = 0.0;
  if (a.ablate == "normal") fc.weights.normal = 0.0;
  if (a.ablate == "pose") fc.weights.pose = 0.0;
  fc.max_iters = a.max_iters;
  fc.restarts = a.restarts;
  fc.seed = a.seed;
  try {
    fc.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const PriorTable priors = json_io::priors_from_json(read_json(a.priors));
  const fs::path scene_root(a.scenes);
  const fs::path pseudo_root(a.pseudo);
  const auto names = list_scene_names(scene_root, "scene.json");
  if (names.empty()) throw IoError("no scenes found in " + scene_root.string());
  for (const auto& n : names) {
    if (!fs::exists(pseudo_root / n / "pseudo_gt.json")) {
      throw IoError("missing " + (pseudo_root / n / "pseudo_gt.json").string());
    }
  }
  const fs::path out(a.out);
  make_dirs(out);

  struct Outcome {
    std::vector<double> history;
    std::string problem;
    bool fitted = false;
  };
  std::vector<Outcome> outcomes(names.size());
  parallel_for(names.size(), [&](std::size_t i) {
    const Scene scene = load_scene(scene_root / names[i], false);
    const json pj = read_json(pseudo_root / names[i] / "pseudo_gt.json");
    const fs::path dir = out / names[i];
    make_dirs(dir);
    Outcome& o = outcomes[i];
    if (json_io::detail::get_or<std::string>(pj, "status", "ok") != "ok") {
      o.problem = "pseudo labels failed, scene skipped";
      write_json(dir / "fit.json", {{"status", "skipped"}, {"reason", o.problem},
                                    {"cubes", json::array()}});
      return;
    }
    const PseudoGT full = json_io::pseudo_gt_from_json(pj);
    const auto all_boxes = labeled_boxes(scene);
    if (full.per_box_depth.size() != all_boxes.size()) {
      throw UsageError(names[i] + ": pseudo depth count differs from the scene's boxes");
    }
    // Boxes without a pseudo depth cannot be fitted.
    std::vector<LabeledBox> boxes;
    std::vector<int> object_index;
    PseudoGT pseudo;
    pseudo.ground = full.ground;
    for (std::size_t k = 0; k < all_boxes.size(); ++k) {
      if (std::isnan(full.per_box_depth[k])) continue;
      boxes.push_back(all_boxes[k]);
      object_index.push_back(static_cast<int>(k));
      pseudo.per_box_depth.push_back(full.per_box_depth[k]);
    }
    if (boxes.size() != all_boxes.size()) {
      o.problem = std::to_string(all_boxes.size() - boxes.size()) + " boxes skipped";
    }
    const FitResult r = fit_scene(boxes, pseudo, scene.geometry.camera, priors, fc);
    json fj = json_io::fit_to_json(r, boxes, scene.geometry.camera, fc.weights);
    for (std::size_t k = 0; k < boxes.size(); ++k) fj["cubes"][k]["object"] = object_index[k];
    fj["status"] = "ok";
    write_json(dir / "fit.json", fj);
    o.history = r.loss_history;
    o.fitted = true;
  });

  std::string csv = "scene,iteration,loss\n";
  int warnings = 0;
  double initial = 0.0;
  double final_loss = 0.0;
  int fitted = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (!o.problem.empty()) {
      ++warnings;
      warn(names[i] + ": " + o.problem);
    }
    if (!o.fitted) continue;
    ++fitted;
    initial += o.history.front();
    final_loss += o.history.back();
    for (std::size_t k = 0; k < o.history.size(); ++k) {
      csv += names[i] + "," + std::to_string(k) + "," + fmt6(o.history[k]) + "\n";
    }
  }
  weakcube::detail::write_file(out / "loss_curve.csv", csv);

  json config = {{"weights", json_io::to_json(fc.weights)},
                 {"ablate", a.ablate.empty() ? json(nullptr) : json(a.ablate)},
                 {"max_iters", fc.max_iters},
                 {"tol", fc.tol},
                 {"restarts", fc.restarts},
                 {"step", {{"pixels", fc.step_pixels}, {"log", fc.step_log},
                           {"rotation", fc.step_rotation}, {"mu", fc.step_mu}}},
                 {"armijo_c", fc.armijo_c},
                 {"shrink", fc.shrink}};
  write_manifest(out, "fit", config, {{"restarts", fc.seed}},
                 {{"scenes", a.scenes}, {"pseudo", a.pseudo}, {"priors", a.priors}},
                 {{"scenes", names}, {"loss_curve", "loss_curve.csv"}}, warnings, start);
  if (fitted > 0) {
    std::cout << "fitted " << fitted << " scenes, mean loss " << fmt6(initial / fitted) << " -> "
              << fmt6(final_loss / fitted) << "\n";
  } else {
    std::cout << "no scenes fitted\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string fits;
  std::string scenes;
  std::string out;
  std::string priors;
  bool gt_as_detections = false;
};

std::string report_table(const APReport& rep) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %6s %6s\n", "class", "AP@0.25", "AP@0.50",
                "AP", "gt", "det");
  os << line;
  const auto at = [&](const std::vector<double>& v, double tau) {
    for (std::size_t k = 0; k < rep.thresholds.size(); ++k) {
      if (std::abs(rep.thresholds[k] - tau) < 1e-12) return fmt6(v[k]);
    }
    return std::string("-");
  };
  for (const auto& [name, c] : rep.per_class) {
    std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %6d %6d\n", name.c_str(),
                  at(c.ap_per_tau, 0.25).c_str(), at(c.ap_per_tau, 0.5).c_str(),
                  fmt6(c.ap).c_str(), c.num_gt, c.num_det);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s\n", "mean", at(rep.mean_ap_per_tau, 0.25).c_str(),
                at(rep.mean_ap_per_tau, 0.5).c_str(), fmt6(rep.mean_ap).c_str());
  os << line;
  return os.str();
}

std::string report_csv(const APReport& rep) {
  std::string csv = "class";
  for (double t : rep.thresholds) csv += ",ap@" + fmt6(t);
  csv += ",ap\n";
  for (const auto& [name, c] : rep.per_class) {
    csv += name;
    for (double v : c.ap_per_tau) csv += "," + fmt6(v);
    csv += "," + fmt6(c.ap) + "\n";
  }
  csv += "mean";
  for (double v : rep.mean_ap_per_tau) csv += "," + fmt6(v);
  csv += "," + fmt6(rep.mean_ap) + "\n";
  return csv;
}

int cmd_eval(const EvalArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const EvalConfig cfg;
  const fs::path scene_root(a.scenes);
  const fs::path fit_root(a.fits);
  const auto names = list_scene_names(scene_root, "scene.json");
  if (names.empty()) throw IoError("no scenes found in " + scene_root.string());
  const auto fit_names = a.gt_as_detections ? std::vector<std::string>{}
                                            : list_scene_names(fit_root, "fit.json");
  int warnings = 0;
  if (!a.gt_as_detections && fit_names.empty()) {
    warn("no fits found in " + fit_root.string() + "; every AP is 0");
    ++warnings;
  } else if (!a.gt_as_detections && fit_names != names) {
    const std::set<std::string> s(names.begin(), names.end());
    const std::set<std::string> f(fit_names.begin(), fit_names.end());
    std::string which;
    for (const auto& n : s) {
      if (!f.count(n)) which += " " + n + "(no fit)";
    }
    for (const auto& n : f) {
      if (!s.count(n)) which += " " + n + "(no scene)";
    }
    throw UsageError("scene and fit directories do not pair up:" + which);
  }
  std::optional<PriorTable> priors;
  if (!a.priors.empty()) priors = json_io::priors_from_json(read_json(a.priors));

  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
  RecoveryStats stats;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Scene scene = load_scene(scene_root / names[i], false);
    const int image = static_cast<int>(i);
    append_ground_truth(scene, image, cfg, gts);
    if (a.gt_as_detections) {
      for (const auto& o : scene.objects) dets.push_back({o.box, o.category, 1.0, image});
      continue;
    }
    if (fit_names.empty()) continue;
    const json fj = read_json(fit_root / names[i] / "fit.json");
    for (const auto& c : json_io::detail::get<json>(fj, "cubes")) {
      const Cube cube = json_io::cube_from_json(json_io::detail::get<json>(c, "cube"));
      const auto category = json_io::detail::get<std::string>(c, "category");
      const int object = json_io::detail::get<int>(c, "object");
      if (object < 0 || object >= static_cast<int>(scene.objects.size()) ||
          scene.objects[object].category != category) {
        throw UsageError(names[i] + ": fitted cube does not match the scene's objects");
      }
      dets.push_back({cube_to_oriented_box(cube, scene.geometry.camera), category,
                      json_io::detail::get<double>(c, "score"), image});
      stats.add_pair(scene, static_cast<std::size_t>(object), cube,
                     priors ? &*priors : nullptr, cfg);
    }
  }
  const APReport rep = ap3d(dets, gts, cfg);
  json report = json_io::report_to_json(rep);
  report["images"] = names.size();
  if (!a.gt_as_detections) {
    json rec = {{"evaluated", stats.evaluated},
                {"mean_iou3d", json_io::round6(stats.mean_iou())},
                {"matched_at_0.25", stats.matched},
                {"up_axis_within_5deg", json_io::round6(stats.up_ok_fraction())}};
    if (priors) rec["mean_dimension_zscore"] = json_io::round6(stats.mean_zscore());
    report["recovery"] = rec;
  }
  const fs::path out(a.out);
  make_dirs(out);
  write_json(out / "report.json", report);
  weakcube::detail::write_file(out / "report.csv", report_csv(rep));
  json config = {{"thresholds", cfg.thresholds},
                 {"max_occlusion", cfg.max_occlusion},
                 {"max_truncation", cfg.max_truncation},
                 {"min_height_fraction", cfg.min_height_fraction},
                 {"gt_as_detections", a.gt_as_detections}};
  write_manifest(out, "eval", config, json::object(),
                 {{"fits", a.fits}, {"scenes", a.scenes}, {"priors", a.priors}},
                 {{"report", "report.json"}, {"csv", "report.csv"}}, warnings, start);
  std::cout << report_table(rep);
  if (!a.gt_as_detections && stats.evaluated > 0) {
    std::cout << "mean IoU3D " << fmt6(stats.mean_iou()) << " over " << stats.evaluated
              << " objects; up axis within 5 deg on " << stats.matched_up_ok << "/"
              << stats.matched << " matched\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised 3D cube fitting toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic scenes");
  s->add_option("--config", synth.config, "Synth config JSON (defaults if omitted)");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--count", synth.count, "Number of scenes");
  s->add_option("--seed", synth.seed, "Base seed; scene i uses seed + i");

  PseudoArgs pseudo;
  auto* p = app.add_subcommand("pseudo-gt", "Estimate ground and per-box pseudo depth");
  p->add_option("--scenes", pseudo.scenes, "Scene directory")->required();
  p->add_option("--out", pseudo.out, "Output directory")->required();
  p->add_flag("--no-mask", pseudo.no_mask, "Ignore ground masks");
  p->add_option("--ransac-iters", pseudo.ransac.iters, "RANSAC iterations");
  p->add_option("--inlier-tol", pseudo.ransac.inlier_tol, "Inlier distance (m)");
  p->add_option("--min-inlier-frac", pseudo.ransac.min_inlier_frac,
                "Inlier fraction needed to trust the plane");
  p->add_option("--min-mask-frac", pseudo.ransac.min_mask_frac,
                "Mask coverage needed to run RANSAC");
  p->add_option("--seed", pseudo.ransac.seed, "Base RANSAC seed; scene i uses seed + i");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit cubes to every scene");
  f->add_option("--scenes", fit.scenes, "Scene directory")->required();
  f->add_option("--pseudo", fit.pseudo, "Pseudo label directory")->required();
  f->add_option("--priors", fit.priors, "Class prior JSON")->required();
  f->add_option("--out", fit.out, "Output directory")->required();
  f->add_option("--lambda-giou", fit.weights.giou);
  f->add_option("--lambda-z", fit.weights.z);
  f->add_option("--lambda-dim", fit.weights.dim);
  f->add_option("--lambda-normal", fit.weights.normal);
  f->add_option("--lambda-pose", fit.weights.pose);
  f->add_option("--ablate", fit.ablate, "Zero one loss weight")
      ->check(CLI::IsMember({"giou", "z", "dim", "normal", "pose"}));
  f->add_option("--max-iters", fit.max_iters);
  f->add_option("--restarts", fit.restarts, "Extra random-yaw starts per scene");
  f->add_option("--seed", fit.seed, "Seed for restart yaws");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score fitted cubes with AP3D");
  e->add_option("--fits", ev.fits, "Fit directory");
  e->add_option("--scenes", ev.scenes, "Scene directory")->required();
  e->add_option("--out", ev.out, "Report directory")->required();
  e->add_option("--priors", ev.priors, "Class prior JSON, enables the z-score summary");
  e->add_flag("--gt-as-detections", ev.gt_as_detections,
              "Score the ground truth against itself");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*p) return cmd_pseudo_gt(pseudo);
    if (*f) return cmd_fit(fit);
    if (*e) {
      if (ev.fits.empty() && !ev.gt_as_detections) {
        throw UsageError("--fits is required unless --gt-as-detections is given");
      }
      return cmd_eval(ev);
    }
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitIo;
  } catch (const Error& err) {
    // Malformed inputs, infeasible configurations and failed preconditions.
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
