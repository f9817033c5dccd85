#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "avf/model.hpp"
#include "avf/trainer.hpp"

namespace avf {

/// Parsed architecture string: "x+y" (fusion) or "single:n".
struct ArchChoice {
  ArchKind kind = ArchKind::kFusion;
  int n_separate = 2;
  int n_joint = 2;

  std::string name() const;
};

ArchChoice parse_arch(std::string_view text);

enum class InputSelection { kAudio, kVideo, kBoth };

/// Experiment configuration read from "key = value" text.
struct RunConfig {
  ArchChoice arch;
  int width = 128;
  InputSelection modality = InputSelection::kBoth;
  std::string noise = "clean";  // label only, echoed into results
  int n_classes = 51;
  int video_upsample = 4;
  TrainConfig train;
  std::string train_manifest;
  std::string val_manifest;
  std::string out_dir;

  /// Throws ConfigError if a path needed by `train` is missing or the
  /// architecture and modality selection disagree.
  void require_runnable() const;
};

/// One "key = value" per line; '#' starts a comment. Unknown keys and
/// malformed values are errors naming the line and key.
RunConfig parse_config(std::string_view text);
RunConfig read_config(const std::string& path);

/// Canonical text of every key, parseable by parse_config.
std::string to_text(const RunConfig& cfg);

std::string_view to_string(InputSelection s);

}  // namespace avf
