#include "avf/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "avf/error.hpp"

namespace avf {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string ArchChoice::name() const {
  if (kind == ArchKind::kSingle) return "single:" + std::to_string(n_joint);
  return std::to_string(n_separate) + "+" + std::to_string(n_joint);
}

ArchChoice parse_arch(std::string_view text) {
  text = trim(text);
  ArchChoice a;
  if (text.starts_with("single:")) {
    a.kind = ArchKind::kSingle;
    a.n_separate = 0;
    if (!parse_number(text.substr(7), a.n_joint) || a.n_joint < 1) {
      throw ConfigError("architecture \"" + std::string(text) + "\": expected single:n with n >= 1");
    }
    return a;
  }
  const auto plus = text.find('+');
  if (plus == std::string_view::npos || !parse_number(text.substr(0, plus), a.n_separate) ||
      !parse_number(text.substr(plus + 1), a.n_joint) || a.n_separate < 0 || a.n_joint < 1) {
    throw ConfigError("architecture \"" + std::string(text) + "\": expected x+y (x >= 0, y >= 1) or single:n");
  }
  a.kind = ArchKind::kFusion;
  return a;
}

std::string_view to_string(InputSelection s) {
  switch (s) {
    case InputSelection::kAudio: return "audio";
    case InputSelection::kVideo: return "video";
    case InputSelection::kBoth: return "av";
  }
  return "av";
}

void RunConfig::require_runnable() const {
  if (train_manifest.empty()) throw ConfigError("missing required path: train");
  if (val_manifest.empty()) throw ConfigError("missing required path: val");
  if (out_dir.empty()) throw ConfigError("missing required path: out");
  if (arch.kind == ArchKind::kFusion && modality != InputSelection::kBoth) {
    throw ConfigError("fusion architecture " + arch.name() + " needs modality = av");
  }
  if (arch.kind == ArchKind::kSingle && modality == InputSelection::kBoth) {
    throw ConfigError("single-modality architecture needs modality = audio or video");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected \"key = value\"");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    auto bad = [&](const char* expected) {
      return ConfigError(where + ", key \"" + key + "\": invalid value \"" + std::string(value) + "\" (expected " +
                         expected + ")");
    };
    auto positive_int = [&](int& dst) {
      if (!parse_number(value, dst) || dst < 1) throw bad("a positive integer");
    };
    auto real = [&](double& dst) {
      if (!parse_number(value, dst)) throw bad("a number");
    };
    auto count = [&](std::size_t& dst) {
      if (!parse_number(value, dst)) throw bad("a non-negative integer");
    };

    if (key == "arch") {
      try {
        cfg.arch = parse_arch(value);
      } catch (const ConfigError&) {
        throw bad("x+y or single:n");
      }
    } else if (key == "width") {
      positive_int(cfg.width);
    } else if (key == "modality") {
      if (value == "audio") cfg.modality = InputSelection::kAudio;
      else if (value == "video") cfg.modality = InputSelection::kVideo;
      else if (value == "av" || value == "both") cfg.modality = InputSelection::kBoth;
      else throw bad("audio, video or av");
    } else if (key == "noise") {
      if (value.empty()) throw bad("a noise label");
      cfg.noise = value;
    } else if (key == "classes") {
      positive_int(cfg.n_classes);
    } else if (key == "video_upsample") {
      positive_int(cfg.video_upsample);
    } else if (key == "lr") {
      real(cfg.train.learn_rate);
    } else if (key == "momentum") {
      real(cfg.train.momentum);
    } else if (key == "batch_size") {
      count(cfg.train.batch_size);
    } else if (key == "dropout") {
      real(cfg.train.dropout_p);
    } else if (key == "max_epochs") {
      count(cfg.train.max_epochs);
    } else if (key == "patience") {
      count(cfg.train.patience);
    } else if (key == "seed") {
      if (!parse_number(value, cfg.train.seed)) throw bad("a non-negative integer");
    } else if (key == "train") {
      cfg.train_manifest = value;
    } else if (key == "val") {
      cfg.val_manifest = value;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
  try {
    cfg.train.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "arch = " << cfg.arch.name() << "\n"
      << "width = " << cfg.width << "\n"
      << "modality = " << to_string(cfg.modality) << "\n"
      << "noise = " << cfg.noise << "\n"
      << "classes = " << cfg.n_classes << "\n"
      << "video_upsample = " << cfg.video_upsample << "\n"
      << "lr = " << format_double(cfg.train.learn_rate) << "\n"
      << "momentum = " << format_double(cfg.train.momentum) << "\n"
      << "batch_size = " << cfg.train.batch_size << "\n"
      << "dropout = " << format_double(cfg.train.dropout_p) << "\n"
      << "max_epochs = " << cfg.train.max_epochs << "\n"
      << "patience = " << cfg.train.patience << "\n"
      << "seed = " << cfg.train.seed << "\n";
  if (!cfg.train_manifest.empty()) out << "train = " << cfg.train_manifest << "\n";
  if (!cfg.val_manifest.empty()) out << "val = " << cfg.val_manifest << "\n";
  if (!cfg.out_dir.empty()) out << "out = " << cfg.out_dir << "\n";
  return out.str();
}

}  // namespace avf
