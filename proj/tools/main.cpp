#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "commands.hpp"

namespace {

void add_common(CLI::App* sub, hit::cli::Common& c, bool needs_checkpoint) {
  sub->add_option("--config", c.config, "Config file ([model], [train], [data], [eval])");
  if (needs_checkpoint) {
    sub->add_option("--checkpoint", c.checkpoint, "Model checkpoint")->required();
    sub->add_option("--data-dir", c.data_dir, "Image directory used as the test set");
  }
  sub->add_option("--seed", c.seed, "Override the seed of this command");
}

void add_outputs(CLI::App* sub, hit::cli::Common& c) {
  sub->add_option("--out", c.out, "Output directory")->required();
  sub->add_flag("--plot", c.plot, "Also write line plots (PPM)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hit::cli;
  CLI::App app{"Attribution-by-design vision transformer toolkit"};
  app.require_subcommand(1);
  app.fallthrough(false);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_common(t, train.common, false);
  add_outputs(t, train.common);
  t->add_option("--epochs", train.epochs, "Override train.epochs");

  Common eval;
  auto* e = app.add_subcommand("eval", "Top-1 accuracy on the test set");
  add_common(e, eval, true);

  ExplainArgs explain;
  auto* x = app.add_subcommand("explain", "Saliency map for one image");
  add_common(x, explain.common, true);
  add_outputs(x, explain.common);
  auto* image_opt = x->add_option("--image", explain.image, "Input image (.ppm or .png)");
  auto* index_opt = x->add_option("--index", explain.index, "Test-set sample to explain instead of --image");
  image_opt->excludes(index_opt);
  x->add_option("--class", explain.class_index, "Class to explain (default: predicted)");
  x->add_option("--method", explain.method, "Saliency method")
      ->check(CLI::IsMember({"ledger", "rollout", "gradcam", "random"}));
  x->add_flag("--upscale", explain.upscale, "Enlarge the map to input resolution");

  FaithfulnessArgs faith;
  auto* f = app.add_subcommand("faithfulness", "Insertion/deletion curves");
  add_common(f, faith.common, true);
  add_outputs(f, faith.common);
  f->add_option("--method", faith.method, "Saliency method or 'all'")
      ->check(CLI::IsMember({"ledger", "rollout", "gradcam", "random", "all"}));
  f->add_option("--mode", faith.mode, "insertion, deletion or both")
      ->check(CLI::IsMember({"insertion", "deletion", "both"}));
  f->add_option("--corruption", faith.corruption, "zero, blur or both")->check(CLI::IsMember({"zero", "blur", "both"}));
  f->add_option("--max-images", faith.common.max_images, "Limit the number of test images");

  SanityArgs sanity;
  auto* s = app.add_subcommand("sanity", "Cascading parameter randomization");
  add_common(s, sanity.common, true);
  add_outputs(s, sanity.common);
  s->add_option("--method", sanity.method, "Saliency method")
      ->check(CLI::IsMember({"ledger", "rollout", "gradcam", "random"}));
  s->add_option("--max-images", sanity.common.max_images, "Limit the number of test images");

  LayersArgs layers;
  auto* l = app.add_subcommand("layers", "Layer contributions and layer ablations");
  add_common(l, layers.common, true);
  add_outputs(l, layers.common);
  l->add_option("--mode", layers.mode, "Ablation mode or 'all'")
      ->check(CLI::IsMember({"excluding-layer", "exclusive-layer", "cumulative-removed", "cumulative-inserted", "all"}));
  l->add_option("--max-images", layers.common.max_images, "Limit the number of images profiled");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "hit: " << err.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*t) return run_train(train);
    if (*e) return run_eval(eval);
    if (*x) {
      if (explain.image.empty() && !explain.index) {
        std::cerr << "hit: explain needs --image or --index\n\n" << x->help();
        return 1;
      }
      return run_explain(explain);
    }
    if (*f) return run_faithfulness(faith);
    if (*s) return run_sanity(sanity);
    if (*l) return run_layers(layers);
  } catch (const std::exception& err) {
    std::cerr << "hit: error: " << err.what() << '\n';
    return 2;
  }
  return 1;
}
