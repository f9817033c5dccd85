#include "avf/saliency.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "avf/error.hpp"
#include "avf/stats.hpp"

namespace avf {

namespace {

struct ScoredTape {
  Tape tape;
  InputVars inputs;
  Var score;
};

void score_on_tape(ScoredTape& st, const Model& model, const Inputs& in, std::size_t c, ScoreMode mode) {
  if (c >= model.spec.n_classes) {
    throw DomainError("class " + std::to_string(c) + " out of range for " + std::to_string(model.spec.n_classes) +
                      " classes");
  }
  const ModelVars params = bind(st.tape, model);
  st.inputs = bind_inputs(st.tape, model, in);
  const Var logits = forward_on_tape(st.tape, model, params, st.inputs, ForwardOptions{Mode::kEval, 0.0, nullptr});
  st.score = mode == ScoreMode::kLogit ? st.tape.pick(logits, c) : st.tape.pick(st.tape.softmax(logits), c);
}

Tensor abs_gradient_map(const Tape& tape, const std::vector<Var>& frames) {
  if (frames.empty()) return Tensor();
  const std::size_t d = tape.value(frames.front()).size();
  Tensor map({frames.size(), d});
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const Tensor& g = tape.grad(frames[t]);
    for (std::size_t i = 0; i < d; ++i) map.at(t, i) = std::abs(g[i]);
  }
  return map;
}

}  // namespace

double class_score(const Model& model, const Inputs& in, std::size_t c, ScoreMode mode) {
  ScoredTape st;
  score_on_tape(st, model, in, c, mode);
  return st.tape.value(st.score).item();
}

SaliencyMaps saliency_maps(const Model& model, const Inputs& in, std::size_t c, ScoreMode mode) {
  ScoredTape st;
  score_on_tape(st, model, in, c, mode);
  st.tape.backward(st.score);
  return SaliencyMaps{abs_gradient_map(st.tape, st.inputs.audio), abs_gradient_map(st.tape, st.inputs.video)};
}

double modality_saliency(const Tensor& map) {
  if (map.rank() != 2 || map.dim(0) == 0) throw DomainError("modality_saliency: empty saliency map");
  double total = 0.0;
  for (double v : map.data()) total += v;
  return total / static_cast<double>(map.dim(0));
}

SaliencyReport speaker_saliency(const Model& model, const Dataset& eval_set, ScoreMode mode) {
  if (eval_set.empty()) throw DomainError("speaker_saliency: empty evaluation set");
  SaliencyReport report;
  report.sequences.resize(eval_set.size());
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(eval_set.size());
#pragma omp parallel for schedule(dynamic, 2)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const Item& item = eval_set.items[static_cast<std::size_t>(i)];
      const SaliencyMaps maps = saliency_maps(model, item.inputs(), item.label, mode);
      SequenceSaliency& s = report.sequences[static_cast<std::size_t>(i)];
      s.utterance_id = item.utterance_id;
      s.audio = maps.audio.size() ? modality_saliency(maps.audio) : 0.0;
      s.video = maps.video.size() ? modality_saliency(maps.video) : 0.0;
    } catch (...) {
#pragma omp critical
      error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  std::vector<double> a, v;
  for (const auto& s : report.sequences) {
    a.push_back(s.audio);
    v.push_back(s.video);
  }
  report.audio = {stats::mean(a), stats::sample_sd(a)};
  report.video = {stats::mean(v), stats::sample_sd(v)};
  return report;
}

void write_report(std::ostream& out, const SaliencyReport& report) {
  char buf[256];
  for (const auto& s : report.sequences) {
    std::snprintf(buf, sizeof buf, " %.6g %.6g\n", s.audio, s.video);
    out << s.utterance_id << buf;
  }
  std::snprintf(buf, sizeof buf, "mean %.6g %.6g %.6g %.6g\n", report.audio.mean, report.audio.sd, report.video.mean,
                report.video.sd);
  out << buf;
}

void write_report(const std::filesystem::path& path, const SaliencyReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_report(out, report);
}

}  // namespace avf
