// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <random>

#include <benchmark/benchmark.h>

#include "dar/embedding.hpp"
#include "dar/index.hpp"
#include "dar/reference_backends.hpp"
#include "dar/session.hpp"

namespace {

std::vector<float> unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  double ss = 0;
  for (auto& x : v) {
    x = g(rng);
    ss += x * x;
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / std::sqrt(ss));
  return out;
}

dar::EmbeddingIndex make_index(std::size_t n, std::uint32_t dim) {
  std::mt19937_64 rng(7);
  std::vector<dar::CorpusEntry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries.push_back({i, "img/" + std::to_string(i), dar::Embedding(unit_vector(rng, dim))});
  }
  return dar::build_index(dim, std::move(entries));
}

const dar::EmbeddingIndex& big_index() {
  static const auto ix = make_index(100000, 512);
  return ix;
}

void BM_TopK(benchmark::State& state) {
  const auto& ix = big_index();
  std::mt19937_64 rng(11);
  const dar::Embedding q(unit_vector(rng, 512));
  for (auto _ : state) benchmark::DoNotOptimize(ix.top_k(q, static_cast<std::size_t>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ix.size()));
}
BENCHMARK(BM_TopK)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RankOf(benchmark::State& state) {
  const auto& ix = big_index();
  std::mt19937_64 rng(12);
  const dar::Embedding q(unit_vector(rng, 512));
  for (auto _ : state) benchmark::DoNotOptimize(ix.rank_of(q, 4242));
}
BENCHMARK(BM_RankOf)->Unit(benchmark::kMillisecond);

void BM_Fuse(benchmark::State& state) {
  std::mt19937_64 rng(13);
  const auto dim = static_cast<std::size_t>(state.range(0));
  const dar::Embedding t(unit_vector(rng, dim));
  const std::vector<dar::Embedding> imgs = {dar::Embedding(unit_vector(rng, dim)),
                                            dar::Embedding(unit_vector(rng, dim)),
                                            dar::Embedding(unit_vector(rng, dim))};
  const auto w = dar::FusionWeights::make(0.5, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dar::fuse(t, imgs, w));
}
BENCHMARK(BM_Fuse)->Arg(512)->Arg(1024);

void BM_HashEncoder(benchmark::State& state) {
  const dar::HashEncoder enc(512);
  const std::string text =
      "a brown dog catching a frisbee in a park near a wooden bench in the afternoon on a sunny day";
  for (auto _ : state) benchmark::DoNotOptimize(enc.encode_text(text));
}
BENCHMARK(BM_HashEncoder);

void BM_SessionTurn(benchmark::State& state) {
  const auto backends = dar::make_reference_backends(512, 0.1);
  auto ix = std::make_shared<const dar::EmbeddingIndex>(make_index(5000, 512));
  dar::SessionConfig cfg;
  cfg.T = 1000000;
  auto s = dar::Session::create("bench", "a dog in a park", cfg, ix, backends);
  for (auto _ : state) benchmark::DoNotOptimize(s.submit_turn("what color?", "brown"));
}
BENCHMARK(BM_SessionTurn)->Unit(benchmark::kMillisecond);

void BM_SaveLoad(benchmark::State& state) {
  const auto& ix = big_index();
  const auto path = std::filesystem::temp_directory_path() / "dar_bench.idx";
  for (auto _ : state) {
    dar::save_index(ix, path);
    benchmark::DoNotOptimize(dar::load_index(path));
  }
  std::filesystem::remove(path);
}
BENCHMARK(BM_SaveLoad)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
