#include <CLI11.hpp>
#include <iostream>

#include "adq/app/commands.h"

int main(int argc, char** argv) {
  using namespace adq::app;
  CLI::App app{"Audio ad quality: features, labels, models and evaluation"};
  app.require_subcommand(1);
  int status = kExitOk;

  ExtractConfig ex;
  auto* extract = app.add_subcommand("extract", "Hand-crafted features for every WAV file");
  extract->add_option("audio", ex.audio, "WAV file or directory")->required();
  extract->add_option("-o,--out", ex.out, "Feature CSV")->required();
  extract->add_option("-j,--workers", ex.workers, "Parallel files")->capture_default_str();
  extract->callback([&] { status = run_guarded([&] { return cmd_extract(ex, std::cerr); }, std::cerr); });

  SpectrogramConfig sp;
  auto* spec = app.add_subcommand("spectrogram", "Log-CQT spectrogram per WAV file");
  spec->add_option("audio", sp.audio, "WAV file or directory")->required();
  spec->add_option("-o,--out-dir", sp.out_dir, "Output directory")->required();
  spec->add_option("-j,--workers", sp.workers, "Parallel files")->capture_default_str();
  spec->callback([&] { status = run_guarded([&] { return cmd_spectrogram(sp, std::cerr); }, std::cerr); });

  LabelConfig lb;
  auto* label = app.add_subcommand("label", "Quality labels from an engagement log");
  label->add_option("log", lb.log, "Event log CSV")->required();
  label->add_option("-o,--out", lb.out, "Label CSV")->required();
  label->add_option("--metric", lb.metric, "LCR or R-LCR")->capture_default_str();
  label->add_option("--top", lb.top_pct, "Percent labeled good")->capture_default_str();
  label->add_option("--bottom", lb.bottom_pct, "Percent labeled bad")->capture_default_str();
  label->add_option("--dwell", lb.dwell_seconds, "Long-click dwell threshold, seconds")->capture_default_str();
  label->add_option("--stats", lb.stats_out, "Also write per-ad statistics");
  label->callback([&] { status = run_guarded([&] { return cmd_label(lb, std::cerr); }, std::cerr); });

  TrainConfig tr;
  auto* train = app.add_subcommand("train", "Fit a model on labeled ads");
  train->add_option("-m,--method", tr.method, "LR, L1-LR, MLP or CNN")->capture_default_str();
  train->add_option("-f,--features", tr.features, "Feature CSV");
  train->add_option("-s,--spectrograms", tr.spectrograms, "Spectrogram directory");
  train->add_option("-l,--labels", tr.labels, "Label CSV")->required();
  train->add_option("-o,--out", tr.out, "Model file")->required();
  train->add_option("--lambda", tr.lambda, "L1 weight; chosen by inner CV when absent");
  train->add_option("--seed", tr.seed)->capture_default_str();
  train->add_option("--epochs", tr.epochs, "Default 200 (MLP) or 14 (CNN)");
  train->add_option("--batch", tr.batch, "Default 50 (MLP) or 64 (CNN)");
  train->add_option("--profile", tr.profile, "CNN width: desk, paper or micro")->capture_default_str();
  train->add_option("-j,--workers", tr.workers, "CNN gradient threads")->capture_default_str();
  train->callback([&] { status = run_guarded([&] { return cmd_train(tr, std::cerr); }, std::cerr); });

  EvaluateConfig ev;
  auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  evaluate->add_option("-m,--method", ev.methods, "LR, L1-LR, MLP, CNN, oracle, coin-flip")->capture_default_str();
  evaluate->add_option("-f,--features", ev.features, "Feature CSV");
  evaluate->add_option("-s,--spectrograms", ev.spectrograms, "Spectrogram directory");
  evaluate->add_option("-l,--labels", ev.labels, "Label CSV")->required();
  evaluate->add_option("-o,--out-dir", ev.out_dir, "Report directory")->required();
  evaluate->add_option("-k,--folds", ev.folds)->capture_default_str();
  evaluate->add_option("--seed", ev.seed)->capture_default_str();
  evaluate->add_option("--lambda", ev.lambda, "Fixed L1 weight");
  evaluate->add_option("--epochs", ev.epochs);
  evaluate->add_option("--batch", ev.batch);
  evaluate->add_option("--profile", ev.profile)->capture_default_str();
  evaluate->add_option("-j,--workers", ev.workers, "Folds evaluated concurrently")->capture_default_str();
  evaluate->callback([&] { status = run_guarded([&] { return cmd_evaluate(ev, std::cerr); }, std::cerr); });

  ScoreConfig sc;
  auto* score = app.add_subcommand("score", "Good-class probability per ad");
  score->add_option("model", sc.model, "Model file")->required();
  score->add_option("input", sc.input, "WAV file or directory, feature CSV, or spectrogram directory")->required();
  score->add_option("-o,--out", sc.out, "Score CSV")->required();
  score->add_option("-j,--workers", sc.workers)->capture_default_str();
  score->callback([&] { status = run_guarded([&] { return cmd_score(sc, std::cerr); }, std::cerr); });

  ReportConfig rp;
  auto* report = app.add_subcommand("report", "Feature ledger and selected coefficients");
  report->add_option("--model", rp.model, "Model file");
  report->add_option("-f,--features", rp.features, "Feature CSV");
  report->add_option("-o,--out-dir", rp.out_dir, "Report directory")->required();
  report->callback([&] { status = run_guarded([&] { return cmd_report(rp, std::cerr); }, std::cerr); });

  SynthConfig sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic two-class corpus");
  synth->add_option("-o,--out-dir", sy.out_dir)->required();
  synth->add_option("--ads", sy.ads)->capture_default_str();
  synth->add_option("--seconds", sy.seconds)->capture_default_str();
  synth->add_option("--seed", sy.seed)->capture_default_str();
  synth->callback([&] { status = run_guarded([&] { return cmd_synth(sy, std::cerr); }, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  return status;
}
