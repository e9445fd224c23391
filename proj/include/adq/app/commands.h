#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace adq::app {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitPartial = 1, kExitConfig = 2, kExitData = 3 };

struct ExtractConfig {
  fs::path audio;  ///< a WAV file or a directory of them
  fs::path out;    ///< feature CSV; the sidecar goes next to it
  int workers = 1;
};

struct SpectrogramConfig {
  fs::path audio;
  fs::path out_dir;
  int workers = 1;
};

struct LabelConfig {
  fs::path log;
  fs::path out;
  std::string metric = "LCR";
  double top_pct = 30.0;
  double bottom_pct = 30.0;
  double dwell_seconds = 5.0;
  fs::path stats_out;  ///< optional per-ad statistics CSV
};

struct TrainConfig {
  std::string method = "L1-LR";
  fs::path features;
  fs::path spectrograms;
  fs::path labels;
  fs::path out;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  std::optional<int> epochs;  ///< MLP 200, CNN 14
  std::optional<int> batch;   ///< MLP 50, CNN 64
  std::string profile = "desk";
  int workers = 1;
};

struct EvaluateConfig {
  std::vector<std::string> methods = {"L1-LR"};
  fs::path features;
  fs::path spectrograms;
  fs::path labels;
  fs::path out_dir;
  int folds = 10;
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  std::optional<int> epochs;
  std::optional<int> batch;
  std::string profile = "desk";
  int workers = 1;
};

struct ScoreConfig {
  fs::path model;
  fs::path input;  ///< WAV file or directory, feature CSV, or spectrogram directory
  fs::path out;
  int workers = 1;
};

struct ReportConfig {
  fs::path model;     ///< optional; linear models add a coefficient CSV
  fs::path features;  ///< optional; sets the row count in the ledger
  fs::path out_dir;
};

struct SynthConfig {
  fs::path out_dir;
  int ads = 200;
  double seconds = 12.0;
  std::uint64_t seed = 0;
};

int cmd_extract(const ExtractConfig& cfg, std::ostream& log);
int cmd_spectrogram(const SpectrogramConfig& cfg, std::ostream& log);
int cmd_label(const LabelConfig& cfg, std::ostream& log);
int cmd_train(const TrainConfig& cfg, std::ostream& log);
int cmd_evaluate(const EvaluateConfig& cfg, std::ostream& log);
int cmd_score(const ScoreConfig& cfg, std::ostream& log);
int cmd_report(const ReportConfig& cfg, std::ostream& log);
int cmd_synth(const SynthConfig& cfg, std::ostream& log);

/// Runs a command, mapping ParameterError to kExitConfig and other library errors to kExitData.
int run_guarded(const std::function<int()>& command, std::ostream& err);

/// WAV files under a path (the path itself if it is a file), sorted.
std::vector<fs::path> list_wavs(const fs::path& path);

/// Calls fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace adq::app
