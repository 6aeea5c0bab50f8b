#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "hit/attribution/saliency.hpp"
#include "hit/error.hpp"
#include "hit/eval/ablation.hpp"
#include "hit/eval/curves.hpp"
#include "hit/eval/predictor.hpp"
#include "hit/eval/sanity.hpp"
#include "hit/io/plot.hpp"
#include "hit/io/text_output.hpp"
#include "hit/model/checkpoint.hpp"
#include "hit/parallel.hpp"
#include "hit/parse.hpp"
#include "hit/train/config_file.hpp"
#include "hit/train/trainer.hpp"

namespace hit::cli {

namespace fs = std::filesystem;

namespace {

train::RunConfig load_run_config(const Common& c) {
  train::RunConfig cfg = c.config.empty() ? train::RunConfig{} : train::load_config(c.config);
  if (c.seed) cfg.eval.seed = *c.seed;
  if (c.max_images) {
    if (*c.max_images < 0) throw ConfigError("--max-images must be non-negative");
    cfg.eval.max_images = *c.max_images;
  }
  return cfg;
}

void echo_config(const train::RunConfig& cfg) {
  for (const auto& [key, value] : train::config_echo(cfg)) std::printf("config %s = %s\n", key.c_str(), value.c_str());
}

model::Checkpoint load_model(const Common& c, const train::RunConfig& cfg) {
  model::Checkpoint ck = model::load_checkpoint(c.checkpoint);
  // A config that customizes the architecture has to describe this checkpoint.
  if (!c.config.empty() && cfg.model != model::HitConfig{} && cfg.model != ck.config)
    throw ConfigError("checkpoint " + c.checkpoint + " does not match the [model] section of " + c.config);
  return ck;
}

train::Dataset test_set(const Common& c, const train::RunConfig& cfg, const model::HitConfig& arch) {
  train::Dataset d;
  if (!c.data_dir.empty()) {
    d = train::load_image_dir(c.data_dir);
    if (d.size() > 0 && d.samples.front().image.height != arch.image_size)
      throw ConfigError("images in " + c.data_dir + " do not match the model input size " +
                        std::to_string(arch.image_size));
  } else {
    d = train::load_test_set(cfg.data, arch.image_size);
  }
  for (const auto& s : d.samples)
    if (s.label >= arch.num_classes)
      throw ConfigError("test data has label " + std::to_string(s.label) + " but the model has " +
                        std::to_string(arch.num_classes) + " classes");
  if (cfg.eval.max_images > 0) d = d.head(static_cast<std::size_t>(cfg.eval.max_images));
  if (d.size() == 0) throw ConfigError("test set is empty");
  return d;
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> steps(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
  return x;
}

}  // namespace

int run_train(const TrainArgs& args) {
  train::RunConfig cfg = args.common.config.empty() ? train::RunConfig{} : train::load_config(args.common.config);
  if (args.common.seed) cfg.train.seed = *args.common.seed;
  if (args.epochs) {
    cfg.train.epochs = *args.epochs;
    cfg.train.warmup_epochs = std::min(cfg.train.warmup_epochs, cfg.train.epochs);
  }
  cfg.train.validate();
  echo_config(cfg);

  const fs::path dir = out_dir(args.common);
  auto split = train::load_split(cfg.data, cfg.model.image_size);
  if (split.train.num_classes != cfg.model.num_classes)
    throw ConfigError("training data has " + std::to_string(split.train.num_classes) + " classes but model.num_classes is " +
                      std::to_string(cfg.model.num_classes));

  auto initial = model::HitModel<float>::initialized(cfg.model, cfg.train.seed);
  auto result = train::train(std::move(initial), cfg.train, split.train, &split.test,
                             [](const model::HitModel<float>&, const train::EpochLog& log) {
                               std::printf("epoch %d train_loss %s eval_acc %s\n", log.epoch,
                                           format_double(log.train_loss).c_str(),
                                           format_double(log.eval_acc).c_str());
                               std::fflush(stdout);
                             });

  std::ostringstream csv;
  csv << "epoch,train_loss,eval_acc\n";
  for (const auto& e : result.log)
    csv << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.eval_acc) << '\n';
  write_file_atomic(dir / "train_log.csv", csv.str());
  write_file_atomic(dir / "config.cfg", train::dump_config(cfg));

  std::vector<std::pair<std::string, std::string>> meta;
  for (const auto& [key, value] : train::config_echo(cfg))
    if (key.rfind("model.", 0) != 0) meta.emplace_back(key, value);
  meta.emplace_back("epochs_completed", std::to_string(result.epochs_completed));
  meta.emplace_back("diverged", result.diverged ? "true" : "false");
  if (!result.log.empty()) meta.emplace_back("final_eval_acc", format_double(result.log.back().eval_acc));
  model::save_checkpoint(dir / "model.hitc", result.model, meta);

  if (args.common.plot && !result.log.empty()) {
    PlotSeries loss{"train_loss", {}, {}}, acc{"eval_acc", {}, {}};
    for (const auto& e : result.log) {
      loss.x.push_back(e.epoch);
      loss.y.push_back(e.train_loss);
      if (e.eval_acc >= 0.0) {
        acc.x.push_back(e.epoch);
        acc.y.push_back(e.eval_acc);
      }
    }
    write_line_plot(dir / "train_loss.ppm", {loss});
    if (!acc.x.empty()) write_line_plot(dir / "eval_acc.ppm", {acc});
  }

  std::printf("checkpoint %s\n", (dir / "model.hitc").string().c_str());
  if (result.diverged) {
    std::fprintf(stderr, "hit: error: training diverged after %d epochs; kept the last good checkpoint\n",
                 result.epochs_completed);
    return 2;
  }
  return 0;
}

int run_eval(const Common& args) {
  const auto cfg = load_run_config(args);
  const auto ck = load_model(args, cfg);
  const auto data = test_set(args, cfg, ck.config);
  const double acc = train::evaluate_top1(ck.model, data);
  std::printf("samples %zu\ntop1 %s\n", data.size(), format_double(acc).c_str());
  return 0;
}

int run_explain(const ExplainArgs& args) {
  const auto cfg = load_run_config(args.common);
  const auto ck = load_model(args.common, cfg);
  const auto& arch = ck.config;

  Image image;
  std::size_t index = 0;
  if (args.index) {
    const auto data = test_set(args.common, cfg, arch);
    if (*args.index < 0 || static_cast<std::size_t>(*args.index) >= data.size())
      throw IndexError("--index " + std::to_string(*args.index) + " outside the test set of " +
                       std::to_string(data.size()));
    index = static_cast<std::size_t>(*args.index);
    image = data.samples[index].image;
  } else {
    image = read_image(args.image);
  }
  if (image.height != arch.image_size || image.width != arch.image_size)
    throw ConfigError("image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                      " but the model expects " + std::to_string(arch.image_size) + "x" +
                      std::to_string(arch.image_size));

  const auto forward = model::forward_with_ledger(ck.model, image);
  const auto logits = forward.logits.data();
  const int predicted = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  const int cls = args.class_index.value_or(predicted);
  if (cls < 0 || cls >= arch.num_classes)
    throw IndexError("--class " + std::to_string(cls) + " outside [0, " + std::to_string(arch.num_classes) + ")");

  const auto method = eval::saliency_method(args.method, cfg.eval.gradcam_layer, cfg.eval.seed);
  const auto map = method(ck.model, image, cls, index);

  const fs::path dir = out_dir(args.common);
  write_file_atomic(dir / "saliency.csv", attribution::saliency_csv(map, args.method));
  attribution::write_saliency_pgm(
      dir / "saliency.pgm",
      args.upscale ? attribution::upscale_nearest(map, static_cast<std::size_t>(arch.patch_size)) : map);

  std::printf("method %s\nclass %d\npredicted %d\nlogit %s\nmap_sum %s\n", args.method.c_str(), cls, predicted,
              format_double(logits[static_cast<std::size_t>(cls)]).c_str(), format_double(map.sum()).c_str());
  return 0;
}

int run_faithfulness(const FaithfulnessArgs& args) {
  const auto cfg = load_run_config(args.common);
  echo_config(cfg);
  const auto ck = load_model(args.common, cfg);
  const auto data = test_set(args.common, cfg, ck.config);
  const auto images = data.images();
  const auto predicted = train::predict(ck.model, images);

  std::vector<std::string> methods = args.method == "all"
                                         ? std::vector<std::string>{"ledger", "rollout", "gradcam", "random"}
                                         : std::vector<std::string>{args.method};
  std::vector<eval::CurveMode> modes;
  if (args.mode != "deletion") modes.push_back(eval::CurveMode::kInsertion);
  if (args.mode != "insertion") modes.push_back(eval::CurveMode::kDeletion);
  std::vector<eval::Corruption> corruptions;
  if (args.corruption != "blur") corruptions.push_back(eval::Corruption::kZero);
  if (args.corruption != "zero") corruptions.push_back(eval::Corruption::kBlur);

  const fs::path dir = out_dir(args.common);
  const eval::HitPredictor predictor(ck.model);
  const eval::CurveOptions options{cfg.eval.blur_sigma, cfg.eval.blur_kernel};
  std::ostringstream summary;
  summary << "mode,corruption,method,auc,nauc,nauc_degenerate\n";
  // mode x corruption -> one plot series per method
  std::vector<std::vector<PlotSeries>> plots(modes.size() * corruptions.size());

  for (const auto& name : methods) {
    const auto fn = eval::saliency_method(name, cfg.eval.gradcam_layer, cfg.eval.seed);
    std::vector<eval::SaliencyMap> maps(images.size());
    parallel_for(images.size(), [&](std::size_t i) { maps[i] = fn(ck.model, images[i], predicted[i], i); });
    for (std::size_t mi = 0; mi < modes.size(); ++mi)
      for (std::size_t ci = 0; ci < corruptions.size(); ++ci) {
        const auto rec = eval::evaluate_curves(predictor, images, maps, modes[mi], corruptions[ci], name, options);
        const std::string stem = eval::to_string(modes[mi]) + "_" + eval::to_string(corruptions[ci]) + "_" + name;
        write_file_atomic(dir / ("curve_" + stem + ".csv"), eval::curve_csv(rec));
        summary << eval::to_string(modes[mi]) << ',' << eval::to_string(corruptions[ci]) << ',' << name << ','
                << format_double(rec.auc) << ',' << format_double(rec.nauc.value) << ','
                << (rec.nauc.degenerate ? "true" : "false") << '\n';
        std::printf("%-9s %-5s %-8s auc %.4f nauc %.4f%s\n", eval::to_string(modes[mi]).c_str(),
                    eval::to_string(corruptions[ci]).c_str(), name.c_str(), rec.auc, rec.nauc.value,
                    rec.nauc.degenerate ? " (flat)" : "");
        plots[mi * corruptions.size() + ci].push_back({name, rec.mean.fractions, rec.mean.probs});
      }
  }
  write_file_atomic(dir / "faithfulness.csv", summary.str());
  if (args.common.plot)
    for (std::size_t mi = 0; mi < modes.size(); ++mi)
      for (std::size_t ci = 0; ci < corruptions.size(); ++ci)
        write_line_plot(dir / ("curve_" + eval::to_string(modes[mi]) + "_" + eval::to_string(corruptions[ci]) + ".ppm"),
                        plots[mi * corruptions.size() + ci]);
  return 0;
}

int run_sanity(const SanityArgs& args) {
  const auto cfg = load_run_config(args.common);
  echo_config(cfg);
  const auto ck = load_model(args.common, cfg);
  const auto data = test_set(args.common, cfg, ck.config);
  const auto images = data.images();
  const auto report = eval::cascading_randomization(
      ck.model, images, eval::saliency_method(args.method, cfg.eval.gradcam_layer, cfg.eval.seed), cfg.eval.seed);

  const fs::path dir = out_dir(args.common);
  write_file_atomic(dir / ("sanity_" + args.method + ".csv"), eval::sanity_csv(report));
  for (const auto& s : report.stages)
    std::printf("stage %-8s spearman_abs %.4f pearson_abs %.4f\n", s.name.c_str(), s.spearman_abs, s.pearson_abs);
  if (args.common.plot) {
    PlotSeries sp{"spearman_abs", steps(report.stages.size()), {}}, pe{"pearson_abs", steps(report.stages.size()), {}};
    for (const auto& s : report.stages) {
      sp.y.push_back(s.spearman_abs);
      pe.y.push_back(s.pearson_abs);
    }
    write_line_plot(dir / ("sanity_" + args.method + ".ppm"), {sp, pe});
  }
  return 0;
}

int run_layers(const LayersArgs& args) {
  const auto cfg = load_run_config(args.common);
  echo_config(cfg);
  const auto ck = load_model(args.common, cfg);
  const auto data = test_set(args.common, cfg, ck.config);
  const auto images = data.images();

  const auto profile = eval::mean_layer_profile(ck.model, images);
  const auto order = eval::contribution_order(profile);
  const fs::path dir = out_dir(args.common);
  write_file_atomic(dir / "layer_profile.csv", eval::layer_profile_csv(profile));
  for (std::size_t l = 0; l < profile.signed_contribution.size(); ++l)
    std::printf("layer %zu signed %.6f absolute %.6f\n", l, profile.signed_contribution[l],
                profile.absolute_contribution[l]);

  std::vector<eval::AblationMode> modes;
  if (args.mode == "all")
    modes = {eval::AblationMode::kExcluding, eval::AblationMode::kExclusive, eval::AblationMode::kCumulativeRemoved,
             eval::AblationMode::kCumulativeInserted};
  else
    modes = {eval::parse_ablation_mode(args.mode)};

  std::vector<PlotSeries> cumulative;
  for (auto mode : modes) {
    const auto rows = eval::layer_ablation(ck.model, data, mode, order);
    write_file_atomic(dir / ("ablation_" + eval::to_string(mode) + ".csv"), eval::ablation_csv(rows));
    for (const auto& r : rows) std::printf("%-20s %-16s accuracy %.4f\n", eval::to_string(mode).c_str(), r.setting.c_str(), r.accuracy);
    if (mode == eval::AblationMode::kCumulativeRemoved || mode == eval::AblationMode::kCumulativeInserted) {
      PlotSeries s{eval::to_string(mode), steps(rows.size()), {}};
      for (const auto& r : rows) s.y.push_back(r.accuracy);
      cumulative.push_back(std::move(s));
    }
  }
  if (args.common.plot) {
    PlotSeries abs{"absolute", steps(profile.absolute_contribution.size()), profile.absolute_contribution};
    write_line_plot(dir / "layer_profile.ppm", {abs});
    if (!cumulative.empty()) write_line_plot(dir / "ablation_cumulative.ppm", cumulative);
  }
  return 0;
}

}  // namespace hit::cli
