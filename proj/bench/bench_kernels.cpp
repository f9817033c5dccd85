// Serial reference vs OpenMP kernels. Prints wall time per variant and
// checks that both produce bit-identical output.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#include "avf/kernels.hpp"
#include "avf/model.hpp"
#include "avf/rng.hpp"
#include "avf/synthdata.hpp"
#include "avf/trainer.hpp"

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
}

std::vector<double> random_vec(std::size_t n, avf::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

}  // namespace

int main() {
  using namespace avf;
  std::printf("OpenMP threads: %d\n", kernels::max_threads());
  Rng rng(7);
  bool ok = true;

  {
    const std::size_t m = 256, k = 512, n = 256;
    const auto a = random_vec(m * k, rng), b = random_vec(k * n, rng);
    std::vector<double> c1(m * n), c2(m * n);
    const double ts = time_ms([&] { kernels::serial::gemm_nn(m, k, n, a.data(), b.data(), c1.data(), false); }, 5);
    const double tp = time_ms([&] { kernels::parallel::gemm_nn(m, k, n, a.data(), b.data(), c2.data(), false); }, 5);
    const bool same = std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0;
    ok &= same;
    report("gemm_nn 256x512x256", ts, tp, same);
  }
  {
    const std::size_t rows = 2000, cols = 400;
    const auto x = random_vec(rows * cols, rng);
    std::vector<double> mean(cols, 0.0), c1(cols * cols), c2(cols * cols);
    const double ts = time_ms([&] { kernels::serial::covariance(rows, cols, x.data(), mean.data(), c1.data()); }, 2);
    const double tp = time_ms([&] { kernels::parallel::covariance(rows, cols, x.data(), mean.data(), c2.data()); }, 2);
    const bool same = std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0;
    ok &= same;
    report("covariance 2000x400", ts, tp, same);
  }
  {
    synth::SynthConfig cfg;
    cfg.samples_per_class = 2;
    cfg.sigma_a = 0.5;
    const Dataset data = synth::generate(cfg);
    Rng init(1);
    const Model model = build_fusion(1, 1, 32, 27, 32, 51, init);
    TrainConfig tc;
    std::vector<std::size_t> idx(64);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    BatchGradient g1, g2;
    const double ts = time_ms([&] { g1 = batch_gradient(model, data, idx, tc, 0, Execution::kSerial); }, 3);
    const double tp = time_ms([&] { g2 = batch_gradient(model, data, idx, tc, 0, Execution::kParallel); }, 3);
    bool same = g1.loss == g2.loss;
    for (std::size_t p = 0; p < g1.grads.size(); ++p) same &= g1.grads[p] == g2.grads[p];
    ok &= same;
    report("minibatch gradient (64)", ts, tp, same);
  }
  return ok ? 0 : 1;
}
