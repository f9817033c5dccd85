#include "avf/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "avf/audio.hpp"
#include "avf/config.hpp"
#include "avf/dataset.hpp"
#include "avf/error.hpp"
#include "avf/model.hpp"
#include "avf/saliency.hpp"
#include "avf/stats.hpp"
#include "avf/synthdata.hpp"
#include "avf/trainer.hpp"
#include "avf/video.hpp"

namespace avf::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kInitStream = 0x494e'4954;  // "INIT"

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

Model build_for(const RunConfig& cfg, const Dataset& train_set, Rng& rng) {
  const Item& first = train_set.items.front();
  auto dim_of = [&](const std::optional<FeatureSequence>& seq, const char* name) {
    if (!seq) throw Error(std::string("training items lack ") + name + " features required by the configuration");
    return static_cast<int>(seq->dim());
  };
  if (cfg.arch.kind == ArchKind::kFusion) {
    return build_fusion(cfg.arch.n_separate, cfg.arch.n_joint, cfg.width, dim_of(first.audio, "audio"),
                        dim_of(first.video, "video"), cfg.n_classes, rng);
  }
  if (cfg.modality == InputSelection::kAudio) {
    return build_single(cfg.arch.n_joint, cfg.width, dim_of(first.audio, "audio"), cfg.n_classes, rng,
                        Modality::kAudio);
  }
  return build_single(cfg.arch.n_joint, cfg.width, dim_of(first.video, "video"), cfg.n_classes, rng,
                      Modality::kVideo);
}

int run_train(const std::string& config_path, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = read_config(config_path);
  cfg.require_runnable();
  const Dataset train_set = load_dataset(cfg.train_manifest, cfg.video_upsample);
  const Dataset val_set = load_dataset(cfg.val_manifest, cfg.video_upsample);
  if (train_set.empty()) throw Error("training manifest " + cfg.train_manifest + " is empty");

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text(dir / "config.txt", to_text(cfg));

  Rng init = Rng::keyed({cfg.train.seed, kInitStream});
  Model model = build_for(cfg, train_set, init);
  const TrainResult result = train(std::move(model), train_set, val_set, cfg.train, [&](const EpochRecord& r) {
    err << "epoch " << r.epoch << " loss " << fmt6(r.train_loss) << " val_acc " << fmt6(r.val_accuracy) << "\n";
  });
  write_checkpoint(dir / "model.avnn", result.model);
  write_history(dir / "history.txt", result.history);

  const std::string line = "arch=" + cfg.arch.name() + " width=" + std::to_string(cfg.width) +
                           " modality=" + std::string(to_string(cfg.modality)) + " noise=" + cfg.noise +
                           " epochs=" + std::to_string(result.history.size()) +
                           " best_epoch=" + std::to_string(result.best_epoch) +
                           " val_accuracy=" + fmt17(result.best_val_accuracy) + "\n";
  write_text(dir / "result.txt", line);
  out << line;
  return kExitOk;
}

}  // namespace

bool parse_snr(const std::string& text, double& snr_db) {
  if (text == "clean") return false;
  std::string num = text;
  if (num.size() > 2 && (num.ends_with("dB") || num.ends_with("db"))) num.resize(num.size() - 2);
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), snr_db);
  if (ec != std::errc() || ptr != num.data() + num.size() || num.empty()) {
    throw DomainError("invalid noise level \"" + text + "\" (use clean, 5dB, 0dB, -5dB or a number)");
  }
  return true;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audiovisual LSTM fusion: features, training, evaluation and saliency", "avfuse"};
  app.require_subcommand(1);

  // prep-audio
  std::string wav_in, feat_out;
  double win_ms = 20.0, shift_ms = 10.0;
  std::size_t bands = kAudioBands;
  auto* prep_audio = app.add_subcommand("prep-audio", "WAV -> AVF1 log-mel features");
  prep_audio->add_option("input", wav_in, "mono 16-bit PCM WAV")->required();
  prep_audio->add_option("output", feat_out, "AVF1 output")->required();
  prep_audio->add_option("--win-ms", win_ms, "window length in ms");
  prep_audio->add_option("--shift-ms", shift_ms, "window shift in ms");
  prep_audio->add_option("--bands", bands, "number of mel bands");

  // mix-noise
  std::string clean_in, noise_in, mix_out, snr_text;
  std::uint64_t mix_seed = 0;
  auto* mix = app.add_subcommand("mix-noise", "superimpose noise at a target SNR");
  mix->add_option("clean", clean_in)->required();
  mix->add_option("noise", noise_in)->required();
  mix->add_option("output", mix_out)->required();
  mix->add_option("--snr", snr_text, "clean, 5dB, 0dB, -5dB or a number of dB")->required();
  mix->add_option("--seed", mix_seed, "seed for the noise offset");

  // prep-video
  std::string video_in, video_out, pca_path;
  int upsample = 4;
  std::uint32_t fps = 25;
  auto* prep_video = app.add_subcommand(
      "prep-video", "directory of raw 80x40 frames -> AVU8, or AVU8 -> normalized, upsampled AVF1 features");
  prep_video->add_option("input", video_in, "frame directory or AVU8 file")->required();
  prep_video->add_option("output", video_out)->required();
  prep_video->add_option("--upsample", upsample, "temporal repetition factor");
  prep_video->add_option("--fps", fps, "frame rate recorded for raw frame directories");
  prep_video->add_option("--pca", pca_path, "AVP1 basis applied after upsampling");

  // pca
  std::string pca_manifest, pca_out;
  std::size_t pca_k = 0;
  auto* pca = app.add_subcommand("pca", "fit a PCA basis on the video features of a (training) manifest");
  pca->add_option("--manifest", pca_manifest)->required();
  pca->add_option("-k", pca_k, "retained dimension")->required();
  pca->add_option("-o,--out", pca_out, "AVP1 output")->required();
  pca->add_option("--upsample", upsample, "upsampling for AVU8 entries");

  // synth
  synth::SynthConfig scfg;
  std::string synth_out;
  SplitSpec split;
  auto* syn = app.add_subcommand("synth", "generate a synthetic two-modality dataset");
  syn->add_option("--out", synth_out)->required();
  syn->add_option("--classes", scfg.n_classes);
  syn->add_option("--samples", scfg.samples_per_class, "samples per class");
  syn->add_option("--min-len", scfg.min_len);
  syn->add_option("--max-len", scfg.max_len);
  syn->add_option("--dim-a", scfg.dim_a);
  syn->add_option("--dim-b", scfg.dim_b);
  syn->add_option("--sigma-a", scfg.sigma_a);
  syn->add_option("--sigma-b", scfg.sigma_b);
  syn->add_option("--seed", scfg.seed);
  syn->add_option("--val", split.val_per_word, "validation items per class (0 with --test 0 skips splitting)");
  syn->add_option("--test", split.test_per_word, "test items per class");

  // train
  std::string config_path;
  auto* tr = app.add_subcommand("train", "train a network from a config file");
  tr->add_option("--config", config_path)->required();

  // eval
  std::string ckpt, manifest;
  auto* ev = app.add_subcommand("eval", "word accuracy of a checkpoint on a manifest");
  ev->add_option("--checkpoint", ckpt)->required();
  ev->add_option("--manifest", manifest)->required();
  ev->add_option("--upsample", upsample);

  // saliency
  std::string score = "logit", report_out;
  auto* sal = app.add_subcommand("saliency", "per-modality input-gradient saliency report");
  sal->add_option("--checkpoint", ckpt)->required();
  sal->add_option("--manifest", manifest)->required();
  sal->add_option("--score", score, "logit or probability")->check(CLI::IsMember({"logit", "probability"}));
  sal->add_option("--out", report_out, "write the report here instead of stdout");
  sal->add_option("--upsample", upsample);

  // ttest
  std::string pairs_path;
  double alpha = 0.05;
  auto* tt = app.add_subcommand("ttest", "one-tailed paired t-test, H1: mean(first - second) > 0");
  tt->add_option("pairs", pairs_path, "two whitespace-separated columns")->required();
  tt->add_option("--alpha", alpha);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*prep_audio) {
      Waveform w = read_wav(wav_in);
      MelConfig mel;
      mel.n_bands = bands;
      write_avf1(feat_out, audio_features(w, win_ms, shift_ms, mel));
    } else if (*mix) {
      const Waveform clean = read_wav(clean_in);
      double snr = 0.0;
      if (parse_snr(snr_text, snr)) {
        const Waveform noisy = mix_at_snr(clean, read_wav(noise_in), snr, mix_seed);
        write_wav(mix_out, noisy);
        out << "snr_db " << fmt6(measured_snr(clean, noisy)) << "\n";
      } else {
        write_wav(mix_out, clean);
        out << "snr_db inf\n";
      }
    } else if (*prep_video) {
      if (fs::is_directory(video_in)) {
        write_avu8(video_out, roi_from_raw_frames(video_in, fps));
      } else {
        FeatureSequence seq = upsample_repeat(load_roi_sequence(video_in), upsample);
        if (!pca_path.empty()) seq = pca_transform(read_pca(pca_path), seq);
        write_avf1(video_out, seq);
      }
    } else if (*pca) {
      const Dataset d = load_dataset(pca_manifest, upsample);
      std::vector<double> rows;
      std::size_t dim = 0, n = 0;
      for (const Item& item : d.items) {
        if (!item.video) continue;
        if (dim == 0) dim = item.video->dim();
        if (item.video->dim() != dim) throw ShapeError("video features of differing dimension in " + pca_manifest);
        rows.insert(rows.end(), item.video->frames.data().begin(), item.video->frames.data().end());
        n += item.video->n_frames();
      }
      if (n == 0) throw Error("no video features in " + pca_manifest);
      const PcaBasis basis = pca_fit(Tensor({n, dim}, std::move(rows)), pca_k);
      write_pca(pca_out, basis);
      out << "pca frames " << n << " dim " << dim << " k " << basis.k() << "\n";
    } else if (*syn) {
      const Dataset d = synth::generate(scfg);
      const fs::path dir(synth_out);
      synth::write_dataset(d, dir, "manifest.txt");
      if (split.val_per_word + split.test_per_word > 0) {
        split.seed = scfg.seed;
        const Split s = split_per_word(d, split);
        // Re-use the already written feature files.
        auto entries_of = [](const Dataset& part) {
          std::vector<ManifestEntry> e;
          for (const Item& item : part.items) {
            e.push_back({item.utterance_id, item.speaker_id, item.label, item.utterance_id + ".a.avf",
                         item.utterance_id + ".v.avf"});
          }
          return e;
        };
        write_manifest(dir / "train.txt", entries_of(s.train));
        write_manifest(dir / "val.txt", entries_of(s.val));
        write_manifest(dir / "test.txt", entries_of(s.test));
      }
      out << "synth items " << d.size() << " -> " << (dir / "manifest.txt").string() << "\n";
    } else if (*tr) {
      return run_train(config_path, out, err);
    } else if (*ev) {
      const Model model = read_checkpoint(ckpt);
      const Dataset d = load_dataset(manifest, upsample);
      const std::size_t correct = count_correct(model, d);
      out << "accuracy " << fmt17(evaluate(model, d)) << " correct " << correct << " total " << d.size() << "\n";
    } else if (*sal) {
      const Model model = read_checkpoint(ckpt);
      const Dataset d = load_dataset(manifest, upsample);
      const SaliencyReport report =
          speaker_saliency(model, d, score == "probability" ? ScoreMode::kProbability : ScoreMode::kLogit);
      if (report_out.empty()) {
        write_report(out, report);
      } else {
        write_report(report_out, report);
      }
    } else if (*tt) {
      std::ifstream in(pairs_path);
      if (!in) throw Error("cannot open " + pairs_path);
      std::vector<double> a, b;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double x, y;
        std::string rest;
        if (!(ls >> x >> y) || (ls >> rest)) {
          throw FormatError(pairs_path + ":" + std::to_string(line_no) + ": expected two numbers");
        }
        a.push_back(x);
        b.push_back(y);
      }
      const stats::TTestResult r = stats::paired_t_one_tailed(a, b, alpha);
      out << "t=" << fmt6(r.t) << " df=" << r.df << " p=" << fmt6(r.p) << " "
          << (r.significant ? "significant" : "not significant") << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  if (args.empty()) {
    err << "usage: avfuse <prep-audio|mix-noise|prep-video|pca|synth|train|eval|saliency|ttest> [options]\n"
        << "run 'avfuse --help' for details\n";
    return kExitUsage;
  }
  return dispatch(args, out, err);
}

}  // namespace avf::cli
