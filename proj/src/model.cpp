#include "avf/model.hpp"

#include <fstream>

#include "avf/binary_io.hpp"
#include "avf/error.hpp"

namespace avf {

namespace {

void append(std::vector<Tensor*>& out, DenseParams& p) {
  out.push_back(&p.W);
  out.push_back(&p.b);
}

std::vector<DenseParams> dense_stack(std::size_t count, std::size_t in, std::size_t width, Rng& rng) {
  std::vector<DenseParams> stack;
  for (std::size_t i = 0; i < count; ++i) {
    stack.push_back(init_dense(i == 0 ? in : width, width, rng));
  }
  return stack;
}

/// Allocates zero parameters with the shapes implied by `spec`.
Model shaped_model(const ArchSpec& spec) {
  Model m;
  m.spec = spec;
  const std::size_t w = spec.width;
  auto zeros = [&](std::size_t count, std::size_t in) {
    std::vector<DenseParams> stack;
    for (std::size_t i = 0; i < count; ++i) stack.push_back({Tensor({w, i == 0 ? in : w}), Tensor({w})});
    return stack;
  };
  if (spec.kind == ArchKind::kFusion) {
    m.audio_branch = zeros(spec.n_separate, spec.in_dim_audio);
    m.video_branch = zeros(spec.n_separate, spec.in_dim_video);
  }
  m.joint_dense = zeros(spec.n_joint - 1, spec.joint_input_dim());
  const std::size_t lstm_in = spec.n_joint > 1 ? w : spec.joint_input_dim();
  for (auto& g : m.lstm.gates) g = {Tensor({w, lstm_in}), Tensor({w, w}), Tensor({w})};
  m.output = {Tensor({spec.n_classes, w}), Tensor({spec.n_classes})};
  return m;
}

void validate(const ArchSpec& spec) {
  if (spec.kind != ArchKind::kSingle && spec.kind != ArchKind::kFusion) throw DomainError("unknown architecture kind");
  if (spec.n_joint < 1) throw DomainError("architecture needs at least one joint layer (the LSTM)");
  if (spec.width < 1 || spec.n_classes < 1) throw DomainError("width and class count must be positive");
  if (spec.kind == ArchKind::kSingle) {
    if (spec.n_separate != 0) throw DomainError("single-modality network cannot have separate layers");
    if ((spec.in_dim_audio > 0) == (spec.in_dim_video > 0)) {
      throw DomainError("single-modality network needs exactly one non-zero input dimension");
    }
  } else if (spec.in_dim_audio < 1 || spec.in_dim_video < 1) {
    throw DomainError("fusion network needs positive input dimensions for both modalities");
  }
}

Var run_branch(Tape& tape, Var x, const std::vector<DenseVars>& stack, const ForwardOptions& opts) {
  for (const auto& layer : stack) {
    x = dropout(tape, dense_tanh(tape, x, layer), opts.dropout_p, opts.mode, *opts.rng);
  }
  return x;
}

}  // namespace

std::size_t ArchSpec::joint_input_dim() const {
  if (kind == ArchKind::kSingle) return in_dim_audio + in_dim_video;
  if (n_separate > 0) return 2 * std::size_t{width};
  return std::size_t{in_dim_audio} + in_dim_video;
}

std::string ArchSpec::name() const {
  if (kind == ArchKind::kSingle) return "single:" + std::to_string(n_joint);
  return std::to_string(n_separate) + "+" + std::to_string(n_joint);
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out;
  for (auto& p : audio_branch) append(out, p);
  for (auto& p : video_branch) append(out, p);
  for (auto& p : joint_dense) append(out, p);
  for (auto& g : lstm.gates) {
    out.push_back(&g.W);
    out.push_back(&g.U);
    out.push_back(&g.b);
  }
  append(out, output);
  return out;
}

std::vector<const Tensor*> Model::parameters() const {
  auto mutable_ptrs = const_cast<Model*>(this)->parameters();
  return {mutable_ptrs.begin(), mutable_ptrs.end()};
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : parameters()) n += t->size();
  return n;
}

Model build_single(int n_layers, int width, int in_dim, int n_classes, Rng& rng, Modality modality) {
  if (n_layers < 1) throw DomainError("build_single: need at least one layer, got " + std::to_string(n_layers));
  if (width < 1 || in_dim < 1 || n_classes < 1) throw DomainError("build_single: sizes must be positive");
  ArchSpec spec;
  spec.kind = ArchKind::kSingle;
  spec.n_separate = 0;
  spec.n_joint = static_cast<std::uint32_t>(n_layers);
  spec.width = static_cast<std::uint32_t>(width);
  (modality == Modality::kAudio ? spec.in_dim_audio : spec.in_dim_video) = static_cast<std::uint32_t>(in_dim);
  spec.n_classes = static_cast<std::uint32_t>(n_classes);

  Model m;
  m.spec = spec;
  m.joint_dense = dense_stack(spec.n_joint - 1, spec.joint_input_dim(), spec.width, rng);
  m.lstm = init_lstm(spec.n_joint > 1 ? spec.width : spec.joint_input_dim(), spec.width, rng);
  m.output = init_dense(spec.width, spec.n_classes, rng);
  return m;
}

Model build_fusion(int n_separate, int n_joint, int width, int in_dim_audio, int in_dim_video, int n_classes,
                   Rng& rng) {
  if (n_separate < 0 || n_joint < 1) {
    throw DomainError("build_fusion: need x >= 0 and y >= 1, got " + std::to_string(n_separate) + "+" +
                      std::to_string(n_joint));
  }
  if (width < 1 || in_dim_audio < 1 || in_dim_video < 1 || n_classes < 1) {
    throw DomainError("build_fusion: sizes must be positive");
  }
  ArchSpec spec;
  spec.kind = ArchKind::kFusion;
  spec.n_separate = static_cast<std::uint32_t>(n_separate);
  spec.n_joint = static_cast<std::uint32_t>(n_joint);
  spec.width = static_cast<std::uint32_t>(width);
  spec.in_dim_audio = static_cast<std::uint32_t>(in_dim_audio);
  spec.in_dim_video = static_cast<std::uint32_t>(in_dim_video);
  spec.n_classes = static_cast<std::uint32_t>(n_classes);

  Model m;
  m.spec = spec;
  m.audio_branch = dense_stack(spec.n_separate, spec.in_dim_audio, spec.width, rng);
  m.video_branch = dense_stack(spec.n_separate, spec.in_dim_video, spec.width, rng);
  m.joint_dense = dense_stack(spec.n_joint - 1, spec.joint_input_dim(), spec.width, rng);
  m.lstm = init_lstm(spec.n_joint > 1 ? spec.width : spec.joint_input_dim(), spec.width, rng);
  m.output = init_dense(spec.width, spec.n_classes, rng);
  return m;
}

std::vector<Var> ModelVars::leaves() const {
  std::vector<Var> out;
  auto add = [&](const DenseVars& d) {
    out.push_back(d.W);
    out.push_back(d.b);
  };
  for (const auto& d : audio_branch) add(d);
  for (const auto& d : video_branch) add(d);
  for (const auto& d : joint_dense) add(d);
  for (std::size_t g = 0; g < 4; ++g) {
    out.push_back(lstm.W[g]);
    out.push_back(lstm.U[g]);
    out.push_back(lstm.b[g]);
  }
  add(output);
  return out;
}

ModelVars bind(Tape& tape, const Model& model) {
  ModelVars v;
  for (const auto& p : model.audio_branch) v.audio_branch.push_back(bind(tape, p));
  for (const auto& p : model.video_branch) v.video_branch.push_back(bind(tape, p));
  for (const auto& p : model.joint_dense) v.joint_dense.push_back(bind(tape, p));
  v.lstm = bind(tape, model.lstm);
  v.output = bind(tape, model.output);
  return v;
}

InputVars bind_inputs(Tape& tape, const Model& model, const Inputs& in) {
  const ArchSpec& s = model.spec;
  if (s.uses_audio() && in.audio == nullptr) throw DomainError("model " + s.name() + " requires audio input");
  if (s.uses_video() && in.video == nullptr) throw DomainError("model " + s.name() + " requires video input");
  const FeatureSequence* a = s.uses_audio() ? in.audio : nullptr;
  const FeatureSequence* v = s.uses_video() ? in.video : nullptr;
  if (a && a->dim() != s.in_dim_audio) {
    throw ShapeError("audio features have dim " + std::to_string(a->dim()) + ", model expects " +
                     std::to_string(s.in_dim_audio));
  }
  if (v && v->dim() != s.in_dim_video) {
    throw ShapeError("video features have dim " + std::to_string(v->dim()) + ", model expects " +
                     std::to_string(s.in_dim_video));
  }
  if (a && v && a->n_frames() != v->n_frames()) {
    throw ShapeError("modality length mismatch: audio " + std::to_string(a->n_frames()) + " frames, video " +
                     std::to_string(v->n_frames()));
  }
  const std::size_t T = a ? a->n_frames() : v->n_frames();
  if (T == 0) throw DomainError("input sequence has no frames");

  InputVars vars;
  auto bind_seq = [&](const FeatureSequence& seq, std::vector<Var>& dst) {
    dst.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
      auto f = seq.frame(t);
      dst.push_back(tape.leaf(Tensor::vector(std::vector<double>(f.begin(), f.end()))));
    }
  };
  if (a) bind_seq(*a, vars.audio);
  if (v) bind_seq(*v, vars.video);
  return vars;
}

Var forward_on_tape(Tape& tape, const Model& model, const ModelVars& params, const InputVars& inputs,
                    const ForwardOptions& opts) {
  const bool stochastic = opts.mode == Mode::kTrain && opts.dropout_p > 0.0;
  if (stochastic && opts.rng == nullptr) throw DomainError("train-mode forward with dropout needs an rng");
  Rng unused;
  ForwardOptions o = opts;
  if (o.rng == nullptr) o.rng = &unused;

  const bool fusion = model.spec.kind == ArchKind::kFusion;
  const std::size_t T = inputs.audio.empty() ? inputs.video.size() : inputs.audio.size();
  if (T == 0) throw DomainError("input sequence has no frames");

  LstmState state = lstm_zero_state(tape, model.spec.width);
  for (std::size_t t = 0; t < T; ++t) {
    Var joint;
    if (fusion) {
      const Var a = run_branch(tape, inputs.audio[t], params.audio_branch, o);
      const Var v = run_branch(tape, inputs.video[t], params.video_branch, o);
      joint = tape.concat(a, v);
    } else {
      joint = inputs.audio.empty() ? inputs.video[t] : inputs.audio[t];
    }
    joint = run_branch(tape, joint, params.joint_dense, o);
    state = lstm_step(tape, joint, state, params.lstm);
  }
  return dense_linear(tape, state.h, params.output);
}

Tensor forward_last_frame(const Model& model, const Inputs& in, const ForwardOptions& opts) {
  Tape tape;
  const ModelVars params = bind(tape, model);
  const InputVars inputs = bind_inputs(tape, model, in);
  return tape.value(forward_on_tape(tape, model, params, inputs, opts));
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DomainError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t predict(const Model& model, const Inputs& in) {
  const Tensor logits = forward_last_frame(model, in, ForwardOptions{Mode::kEval, 0.0, nullptr});
  return argmax(logits.data());
}

void write_checkpoint(std::ostream& out, const Model& model) {
  const ArchSpec& s = model.spec;
  io::write_magic(out, "AVNN");
  io::write_u32(out, kCheckpointVersion);
  for (std::uint32_t v : {static_cast<std::uint32_t>(s.kind), s.n_separate, s.n_joint, s.width, s.in_dim_audio,
                          s.in_dim_video, s.n_classes}) {
    io::write_u32(out, v);
  }
  for (const Tensor* t : model.parameters()) {
    for (double x : t->data()) io::write_f64(out, x);
  }
  if (!out) throw Error("AVNN: write failed");
}

void write_checkpoint(const std::filesystem::path& path, const Model& model) {
  auto out = io::open_output(path);
  write_checkpoint(out, model);
}

Model read_checkpoint(std::istream& in) {
  const std::string what = "AVNN";
  io::expect_magic(in, "AVNN", what);
  const std::uint32_t version = io::read_u32(in, what);
  if (version != kCheckpointVersion) throw FormatError("AVNN: unsupported version " + std::to_string(version));
  ArchSpec s;
  const std::uint32_t kind = io::read_u32(in, what);
  if (kind > 1) throw FormatError("AVNN: invalid architecture kind " + std::to_string(kind));
  s.kind = static_cast<ArchKind>(kind);
  s.n_separate = io::read_u32(in, what);
  s.n_joint = io::read_u32(in, what);
  s.width = io::read_u32(in, what);
  s.in_dim_audio = io::read_u32(in, what);
  s.in_dim_video = io::read_u32(in, what);
  s.n_classes = io::read_u32(in, what);
  try {
    validate(s);
  } catch (const DomainError& e) {
    throw FormatError(std::string("AVNN: ") + e.what());
  }
  Model m = shaped_model(s);
  for (Tensor* t : m.parameters()) {
    for (double& x : t->data()) x = io::read_f64(in, what);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("AVNN: trailing bytes after parameters");
  return m;
}

Model read_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  try {
    return read_checkpoint(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace avf
