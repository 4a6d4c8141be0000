// Wall-clock comparison of the OpenMP kernels against their serial reference
// twins: bigness scans, exact set-cover search and the fat-node sweep.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "creature/bigness.hpp"
#include "creature/cover.hpp"
#include "creature/trees.hpp"

using namespace creature;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double timed(F&& f) {
  auto t0 = Clock::now();
  f();
  return seconds(t0, Clock::now());
}

void bench_bigness() {
  // log_c|.|/c over |C| = 14, c = 3: ~2^14 subsets x partitions
  SetNorm norm = norm_logc_div_c(3);
  BignessSpec spec = BignessSpec::strong(3);
  BignessResult rs, rp;
  double ts = timed([&] { rs = check_bigness_serial(14, norm, spec, 16); });
  double tp = timed([&] { rp = check_bigness(14, norm, spec, 16); });
  std::printf("bigness       |C|=14 c=3   serial %8.3fs   parallel %8.3fs   %s\n", ts,
              tp, rs.holds == rp.holds ? "agree" : "DISAGREE");
}

void bench_cover() {
  SlalomInstance inst{{4, 4, 3}, {2, 2, 1}};
  CoverResult a, b;
  double ts = timed([&] { a = min_cover_exact_serial(inst, 1u << 20); });
  double tp = timed([&] { b = min_cover_exact(inst, 1u << 20); });
  std::printf("cover         f=4,4,3      serial %8.3fs   parallel %8.3fs   %s (%u)\n",
              ts, tp, a.count == b.count ? "agree" : "DISAGREE", a.count);
}

void bench_fat_nodes() {
  std::mt19937_64 rng(7);
  unsigned depth = 22;
  std::vector<std::uint32_t> leaves;
  for (std::uint32_t v = 0; v < (1u << depth); ++v)
    if (rng() % 4) leaves.push_back(v);
  FiniteTree T = FiniteTree::from_leaves(depth, std::move(leaves));
  unsigned k = 12;
  Rat eps(1, 4);
  std::vector<std::uint32_t> fs, fp;
  double ts = timed([&] { fs = fat_nodes_at_serial(T, eps, k); });
  double tp = timed([&] { fp = fat_nodes(T, eps, k).fat; });
  std::printf("fat nodes     depth=22     serial %8.3fs   parallel %8.3fs   %s\n", ts,
              tp, fs == fp ? "agree" : "DISAGREE");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bench_bigness();
  bench_cover();
  bench_fat_nodes();
  return 0;
}
