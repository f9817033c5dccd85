#include "avf/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "avf/error.hpp"
#include "avf/video.hpp"

namespace avf {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 5) throw FormatError(where + ": expected 5 tab-separated fields, got " + std::to_string(f.size()));
    ManifestEntry e;
    e.utterance_id = f[0];
    e.speaker_id = f[1];
    const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), e.label);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) throw FormatError(where + ": bad label \"" + f[2] + "\"");
    e.audio_path = f[3];
    e.video_path = f[4];
    if (e.audio_path.empty() || e.video_path.empty()) throw FormatError(where + ": empty path field (use \"-\")");
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& e : entries) {
    out << e.utterance_id << '\t' << e.speaker_id << '\t' << e.label << '\t' << e.audio_path << '\t' << e.video_path
        << '\n';
  }
  if (!out) throw Error("manifest write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& manifest, int video_upsample) {
  const auto base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  Dataset d;
  for (const auto& e : read_manifest(manifest)) {
    Item item;
    item.utterance_id = e.utterance_id;
    item.speaker_id = e.speaker_id;
    item.label = e.label;
    if (e.audio_path != "-") item.audio = read_avf1(resolve(e.audio_path), Modality::kAudio);
    if (e.video_path != "-") {
      const auto path = resolve(e.video_path);
      item.video = path.extension() == ".avu8" ? upsample_repeat(load_roi_sequence(path), video_upsample)
                                               : read_avf1(path, Modality::kVideo);
    }
    d.items.push_back(std::move(item));
  }
  return d;
}

}  // namespace avf
