#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace viris;
  CLI::App app{"viris: visible-light iris quality, recognition and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".", manifest;
  int jobs = 1;
  app.add_option("--config", config_path, "JSON config file (created with defaults when missing); falls back to $VIRIS_CONFIG");
  app.add_option("--out-dir", out_dir, "Directory for reports and artifacts");
  app.add_option("--manifest", manifest, "Sample manifest (JSON)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));

  std::string image, seg, session, templates, scores, pred, gt;
  auto* quality = app.add_subcommand("quality", "ISO quality report for one image");
  quality->add_option("image", image, "Eye image (PNG)")->required();
  quality->add_option("--seg", seg, "Segmentation JSON; classical localization when omitted");
  auto* gate = app.add_subcommand("gate", "Replay a capture session through the acquisition gate");
  gate->add_option("session", session, "Session JSON")->required();
  auto* segment = app.add_subcommand("segment", "Segment every manifest sample");
  auto* normalize = app.add_subcommand("normalize", "Unwrap every manifest sample to a normalized strip");
  auto* encode = app.add_subcommand("encode", "Encode every manifest sample to a template");
  auto* match = app.add_subcommand("match", "All-vs-all template matching");
  match->add_option("templates", templates, "Directory of .virt templates")->required();
  auto* eval = app.add_subcommand("eval", "Verification report from a score CSV");
  eval->add_option("scores", scores, "scores.csv from match")->required();
  auto* seg_eval = app.add_subcommand("seg-eval", "Segmentation metrics against ground-truth masks");
  seg_eval->add_option("pred", pred, "Directory of predicted masks")->required();
  seg_eval->add_option("gt", gt, "Directory of ground-truth masks")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kError;
  }

  try {
    cli::Context ctx;
    ctx.out_dir = out_dir;
    ctx.jobs = jobs;
    if (!manifest.empty()) ctx.manifest = manifest;
    if (auto path = resolve_config_path(config_path.empty() ? std::nullopt : std::optional(config_path)))
      ctx.config = load_or_create_config(*path);

    if (*quality) return cli::cmd_quality(ctx, image, seg.empty() ? std::nullopt : std::optional<std::filesystem::path>(seg));
    if (*gate) return cli::cmd_gate(ctx, session);
    if (*segment) return cli::cmd_segment(ctx);
    if (*normalize) return cli::cmd_normalize(ctx);
    if (*encode) return cli::cmd_encode(ctx);
    if (*match) return cli::cmd_match(ctx, templates);
    if (*eval) return cli::cmd_eval(ctx, scores);
    if (*seg_eval) return cli::cmd_seg_eval(ctx, pred, gt);
  } catch (const std::exception& e) {
    std::cerr << "viris: " << e.what() << "\n";
    return cli::kError;
  }
  return cli::kError;
}
