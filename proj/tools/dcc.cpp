// dcc: train, evaluate, and inspect the deep co-attention comparator.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcc/config.hpp"
#include "dcc/datasynth.hpp"
#include "dcc/errors.hpp"
#include "dcc/evaluation.hpp"
#include "dcc/glimpse.hpp"
#include "dcc/gradsuite.hpp"
#include "dcc/image.hpp"
#include "dcc/model.hpp"
#include "dcc/training.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_file;
  dcc::RunConfig cfg;
  bool seed_set = false;
};

// Registers --config plus per-key override flags shared by the compute
// commands. Flag values win over file values, which win over defaults.
void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_file, "key = value config file");
  cmd->add_option("--fusion", o.cfg.fusion, "dcc | spp | gp");
  cmd->add_option("--classes", o.cfg.classes, "episode classes");
  cmd->add_option("--input-side", o.cfg.input_side, "input image side");
  cmd->add_option("--glimpse-k", o.cfg.glimpse_k, "glimpse window side K");
  cmd->add_option("--kernel", o.cfg.glimpse_kernel, "cauchy | gaussian");
  cmd->add_flag("--eq7-division", o.cfg.eq7_division,
                "strict stride placement (divide by delta)");
  cmd->add_option("--hidden", o.cfg.hidden, "comparator hidden size");
  cmd->add_option("--glimpses", o.cfg.glimpses, "glimpses G (2G steps)");
  cmd->add_option("--dropout", o.cfg.dropout, "dropout rate");
  cmd->add_option("--batch", o.cfg.batch, "episodes per step");
  cmd->add_option("--lr", o.cfg.base_lr, "base learning rate");
  cmd->add_option("--decay", o.cfg.decay, "per-epoch LR decay");
  cmd->add_option("--clip", o.cfg.clip, "gradient clip threshold");
  cmd->add_option("--clip-mode", o.cfg.clip_mode, "sum | global");
  cmd->add_option("--epochs", o.cfg.epochs, "training epochs");
  cmd->add_option("--steps-per-epoch", o.cfg.steps_per_epoch,
                  "0: dataset size / batch");
  cmd->add_option("--early-stop-acc", o.cfg.early_stop_acc,
                  "stop once running accuracy exceeds this (0 disables)");
  cmd->add_option("--checkpoint-every", o.cfg.checkpoint_every,
                  "checkpoint period in steps (0: final only)");
  cmd->add_option("--trials", o.cfg.trials, "evaluation trials");
  cmd->add_option("--ids", o.cfg.ids, "synthetic identities");
  cmd->add_option("--views", o.cfg.views, "synthetic views per identity");
  auto* seed =
      cmd->add_option("--seed", o.cfg.seed, "RNG seed (default: DCC_SEED)");
  seed->each([&o](const std::string&) { o.seed_set = true; });
}

// File first, then replay the flag overrides CLI11 already parsed into cfg.
// CLI11 wrote flag values directly into cfg, so snapshot them, load the
// file over defaults, and re-apply the snapshot keys that were passed.
dcc::RunConfig merge_config(const CLI::App* cmd, const CommonOpts& o) {
  dcc::RunConfig merged = o.cfg;
  if (!o.config_file.empty()) {
    dcc::RunConfig from_file;
    from_file.load_file(o.config_file);
    // start from the file, then overlay every flag the user actually set
    dcc::RunConfig overlay = from_file;
    auto passed = [&](const std::string& flag) {
      return cmd->count(flag) > 0;
    };
    if (passed("--fusion")) overlay.fusion = o.cfg.fusion;
    if (passed("--classes")) overlay.classes = o.cfg.classes;
    if (passed("--input-side")) overlay.input_side = o.cfg.input_side;
    if (passed("--glimpse-k")) overlay.glimpse_k = o.cfg.glimpse_k;
    if (passed("--kernel")) overlay.glimpse_kernel = o.cfg.glimpse_kernel;
    if (passed("--eq7-division")) overlay.eq7_division = o.cfg.eq7_division;
    if (passed("--hidden")) overlay.hidden = o.cfg.hidden;
    if (passed("--glimpses")) overlay.glimpses = o.cfg.glimpses;
    if (passed("--dropout")) overlay.dropout = o.cfg.dropout;
    if (passed("--batch")) overlay.batch = o.cfg.batch;
    if (passed("--lr")) overlay.base_lr = o.cfg.base_lr;
    if (passed("--decay")) overlay.decay = o.cfg.decay;
    if (passed("--clip")) overlay.clip = o.cfg.clip;
    if (passed("--clip-mode")) overlay.clip_mode = o.cfg.clip_mode;
    if (passed("--epochs")) overlay.epochs = o.cfg.epochs;
    if (passed("--steps-per-epoch"))
      overlay.steps_per_epoch = o.cfg.steps_per_epoch;
    if (passed("--early-stop-acc"))
      overlay.early_stop_acc = o.cfg.early_stop_acc;
    if (passed("--checkpoint-every"))
      overlay.checkpoint_every = o.cfg.checkpoint_every;
    if (passed("--trials")) overlay.trials = o.cfg.trials;
    if (passed("--ids")) overlay.ids = o.cfg.ids;
    if (passed("--views")) overlay.views = o.cfg.views;
    if (passed("--seed")) overlay.seed = o.cfg.seed;
    merged = overlay;
  }
  if (!o.seed_set && merged.seed == 0) merged.seed = dcc::default_seed();
  merged.validate();
  return merged;
}

dcc::Dataset load_or_synth(const std::string& data_dir, bool synthetic,
                           const dcc::RunConfig& cfg) {
  if (synthetic || data_dir.empty())
    return dcc::synth_dataset(cfg.seed, cfg.ids, cfg.views, cfg.input_side);
  int warnings = 0;
  dcc::Dataset d = dcc::load_directory(data_dir, cfg.input_side, &warnings);
  if (warnings > 0)
    std::cerr << "warning: skipped " << warnings << " unparseable files\n";
  return d;
}

// Split by camera parity: even cameras are probes, odd are gallery.
void split_dataset(const dcc::Dataset& all, dcc::Dataset& probes,
                   dcc::Dataset& gallery) {
  probes.side = gallery.side = all.side;
  for (const auto& item : all.items)
    (item.camera % 2 == 0 ? probes : gallery).items.push_back(item);
}

void draw_window(dcc::Image& img, const dcc::GlimpseParams& p,
                 const dcc::GlimpseConfig& cfg) {
  auto [cx0, cx1] = dcc::window_cells(p, p.A, cfg, /*x_axis=*/true);
  auto [cy0, cy1] = dcc::window_cells(p, p.B, cfg, /*x_axis=*/false);
  double sx = static_cast<double>(img.width) / p.A;
  double sy = static_cast<double>(img.height) / p.B;
  int x0 = static_cast<int>(cx0 * sx);
  int x1 = std::min(img.width - 1, static_cast<int>((cx1 + 1) * sx) - 1);
  int y0 = static_cast<int>(cy0 * sy);
  int y1 = std::min(img.height - 1, static_cast<int>((cy1 + 1) * sy) - 1);
  auto mark = [&](int y, int x) {
    img.at(y, x, 0) = 1.0;
    img.at(y, x, 1) = 0.0;
    img.at(y, x, 2) = 0.0;
  };
  for (int x = x0; x <= x1; ++x) {
    mark(y0, x);
    mark(y1, x);
  }
  for (int y = y0; y <= y1; ++y) {
    mark(y, x0);
    mark(y, x1);
  }
}

int cmd_train(const CLI::App* cmd, const CommonOpts& o,
              const std::string& data_dir, bool synthetic,
              const std::string& out_dir) {
  dcc::RunConfig cfg = merge_config(cmd, o);
  dcc::Dataset data = load_or_synth(data_dir, synthetic, cfg);
  std::filesystem::create_directories(out_dir);
  dcc::DccModel model(cfg.model_config(), cfg.seed);
  dcc::TrainResult res =
      dcc::train(model, data, cfg.train_config(),
                 out_dir + "/checkpoint.dcc", out_dir + "/metrics.csv");
  std::cout << "trained " << res.steps << " steps, final loss "
            << res.final_loss << ", running accuracy " << res.final_acc
            << "\ncheckpoint: " << res.checkpoint_path << "\n";
  return 0;
}

int cmd_eval(const CLI::App* cmd, const CommonOpts& o,
             const std::string& ckpt_path, const std::string& data_dir,
             bool synthetic, const std::string& json_path) {
  dcc::RunConfig cfg = merge_config(cmd, o);
  dcc::Checkpoint ckpt = dcc::load_checkpoint(ckpt_path);
  dcc::DccModel model = dcc::model_from_checkpoint(ckpt);
  dcc::Dataset all = load_or_synth(data_dir, synthetic, cfg);
  dcc::Dataset probes, gallery;
  split_dataset(all, probes, gallery);
  auto scorer = [&](const dcc::DatasetItem& a, const dcc::DatasetItem& b) {
    return model.pair_score(dcc::image_to_tensor(a.image),
                            dcc::image_to_tensor(b.image));
  };
  dcc::EvalResult r =
      dcc::evaluate(scorer, probes, gallery, cfg.trials, cfg.seed);
  std::cout << dcc::format_report(r);
  if (!json_path.empty()) dcc::write_result_json(r, json_path);
  return 0;
}

int cmd_gradcheck(double epsilon, const std::string& only, bool corrupt) {
  auto reports = dcc::run_gradient_suite(epsilon, only, corrupt);
  if (reports.empty()) {
    std::cerr << "error: no gradient block matches '" << only << "'\n";
    return kExitUsage;
  }
  for (const auto& r : reports)
    std::printf("%-24s max rel err %.3e  (tol %.0e)  %s\n", r.name.c_str(),
                r.max_rel_error, r.tolerance, r.pass ? "ok" : "FAIL");
  return dcc::all_pass(reports) ? 0 : kExitRuntime;
}

int cmd_glimpse_viz(const CLI::App* cmd, const CommonOpts& o,
                    const std::string& ckpt_path, const std::string& img_a,
                    const std::string& img_b, const std::string& out_dir) {
  dcc::RunConfig cfg = merge_config(cmd, o);
  dcc::Checkpoint ckpt = dcc::load_checkpoint(ckpt_path);
  dcc::DccModel model = dcc::model_from_checkpoint(ckpt);
  if (model.config().fusion != dcc::Fusion::Dcc)
    throw dcc::ConfigError("glimpse-viz requires a dcc-fusion checkpoint");
  int side = model.config().encoder.input_side;
  dcc::Image a, b;
  if (img_a.empty() || img_b.empty()) {
    // no pair given: render two views of one synthetic identity
    dcc::Dataset d = dcc::synth_dataset(cfg.seed, /*ids=*/1, /*views=*/2, side);
    a = d.items[0].image;
    b = d.items[1].image;
  } else {
    a = dcc::resize_nearest(dcc::load_image(img_a), side);
    b = dcc::resize_nearest(dcc::load_image(img_b), side);
  }
  std::vector<dcc::GlimpseParams> trajectory;
  double s = model.pair_score(dcc::image_to_tensor(a), dcc::image_to_tensor(b),
                              &trajectory);
  std::filesystem::create_directories(out_dir);
  const dcc::GlimpseConfig& gcfg = model.config().comparator.glimpse;
  std::ofstream sidecar(out_dir + "/trajectory.txt");
  sidecar << "# step stream g_x g_y delta gamma\n";
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const char* stream = (t % 2 == 0) ? "a" : "b";
    dcc::Image frame = (t % 2 == 0) ? a : b;
    draw_window(frame, trajectory[t], gcfg);
    char name[32];
    std::snprintf(name, sizeof(name), "step_%02zu_%s.png", t, stream);
    dcc::save_png(frame, out_dir + "/" + name);
    sidecar << t << " " << stream << " " << trajectory[t].g_x << " "
            << trajectory[t].g_y << " " << trajectory[t].delta << " "
            << trajectory[t].gamma << "\n";
  }
  std::cout << "similarity " << s << "; wrote " << trajectory.size()
            << " overlays to " << out_dir << "\n";
  return 0;
}

int cmd_synth_data(const CLI::App* cmd, const CommonOpts& o,
                   const std::string& out_dir) {
  dcc::RunConfig cfg = merge_config(cmd, o);
  dcc::Dataset d =
      dcc::synth_dataset(cfg.seed, cfg.ids, cfg.views, cfg.input_side);
  dcc::export_dataset(d, out_dir);
  std::cout << "wrote " << d.items.size() << " images for "
            << d.num_identities() << " identities to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep co-attention comparator for pairwise similarity"};
  app.require_subcommand(1);

  CommonOpts train_o, eval_o, viz_o, synth_o;
  std::string data_dir, out_dir = "run";
  bool synthetic = false;
  auto* train = app.add_subcommand("train", "train a model");
  add_common(train, train_o);
  train->add_option("--data", data_dir, "dataset directory");
  train->add_flag("--synthetic", synthetic, "train on generated data");
  train->add_option("--out", out_dir, "output directory");

  std::string eval_ckpt, eval_data, eval_json;
  bool eval_synth = false;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, eval_o);
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "dataset directory");
  eval->add_flag("--synthetic", eval_synth, "evaluate on generated data");
  eval->add_option("--json", eval_json, "also write the result as JSON");

  double gc_eps = 1e-5;
  std::string gc_only;
  bool gc_corrupt = false;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--epsilon", gc_eps, "finite-difference step");
  gradcheck->add_option("--perturb-weight,--only", gc_only,
                        "restrict to blocks whose name contains this");
  gradcheck->add_flag("--corrupt", gc_corrupt,
                      "negative control: corrupt one analytic gradient");

  std::string viz_ckpt, viz_a, viz_b, viz_out = "glimpses";
  auto* viz = app.add_subcommand("glimpse-viz", "per-step window overlays");
  add_common(viz, viz_o);
  viz->add_option("--checkpoint", viz_ckpt, "checkpoint file")->required();
  viz->add_option("--image-a", viz_a, "first image (ppm/png)");
  viz->add_option("--image-b", viz_b, "second image (ppm/png)");
  viz->add_option("--out", viz_out, "output directory");

  std::string synth_out = "data";
  auto* synth = app.add_subcommand("synth-data", "generate a dataset");
  add_common(synth, synth_o);
  synth->add_option("--out", synth_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (train->parsed())
      return cmd_train(train, train_o, data_dir, synthetic, out_dir);
    if (eval->parsed())
      return cmd_eval(eval, eval_o, eval_ckpt, eval_data, eval_synth,
                      eval_json);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_eps, gc_only, gc_corrupt);
    if (viz->parsed())
      return cmd_glimpse_viz(viz, viz_o, viz_ckpt, viz_a, viz_b, viz_out);
    if (synth->parsed()) return cmd_synth_data(synth, synth_o, synth_out);
  } catch (const dcc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dcc::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dcc::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
