#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avf/features.hpp"
#include "avf/model.hpp"

namespace avf {

/// One labeled utterance.
struct Item {
  std::string utterance_id;
  std::string speaker_id;
  std::size_t label = 0;
  std::optional<FeatureSequence> audio;
  std::optional<FeatureSequence> video;

  Inputs inputs() const { return Inputs{audio ? &*audio : nullptr, video ? &*video : nullptr}; }
};

struct Dataset {
  std::vector<Item> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

/// Manifest line: utterance-id, speaker-id, label, audio path or "-", video
/// path or "-", separated by tabs.
struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::size_t label = 0;
  std::string audio_path = "-";
  std::string video_path = "-";
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Loads every feature file named in a manifest. Relative paths resolve
/// against the manifest's directory. Audio paths are AVF1 files; video paths
/// are AVF1 files, or AVU8 ROI files which are normalized and upsampled by
/// `video_upsample`.
Dataset load_dataset(const std::filesystem::path& manifest, int video_upsample = 4);

}  // namespace avf
