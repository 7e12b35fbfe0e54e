// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// dar: corpus indexing, benchmark evaluation, interactive sessions and the
// HTTP service. Exit status: 0 ok, 1 runtime error, 2 usage error.

#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "dar/errors.hpp"

int main(int argc, char** argv) {
  using namespace dar::cli;

  CLI::App app{"Interactive text-to-image retrieval with generated visual context"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dar 0.1.0");

  IndexBuildArgs ib;
  auto* index = app.add_subcommand("index", "Corpus index files");
  index->require_subcommand(1);
  auto* build = index->add_subcommand("build", "Build an index from captions or embeddings");
  build->add_option("input", ib.input,
                    "Captions (.txt, one per line) or records (.json/.jsonl with id, uri, "
                    "caption or embedding)")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("out", ib.out, "Output index file")->required();
  build->add_option("--config", ib.config, "Config file selecting backends and dim")
      ->check(CLI::ExistingFile);
  build->add_option("--assets", ib.assets, "Write caption-derived image artifacts here");
  build->add_option("--dim", ib.dim, "Embedding dimension (overrides config)")
      ->check(CLI::PositiveNumber);
  build->add_option("--sigma", ib.sigma, "Reference image encoder noise (overrides config)")
      ->check(CLI::NonNegativeNumber);

  std::string serve_config;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("config", serve_config, "Config file (default: $DAR_CONFIG)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Benchmark evaluation");
  eval->require_subcommand(1);
  auto* run = eval->add_subcommand("run", "Replay a dialogue dataset and report Hits@k curves");
  run->add_option("dataset", ev.dataset, "Dialogue dataset JSON")->required()->check(CLI::ExistingFile);
  run->add_option("index", ev.index, "Corpus index file")->required()->check(CLI::ExistingFile);
  run->add_option("config", ev.config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--variant", ev.variants, "dar and/or concat (default: both)")
      ->check(CLI::IsMember({"dar", "concat"}));
  run->add_option("--k", ev.k, "Hit threshold (default: config hit_k)")->check(CLI::PositiveNumber);
  run->add_option("--out", ev.out, "Write the JSON report here instead of stdout");
  run->add_option("--csv", ev.csv, "Also write the CSV curves here");
  run->add_option("--transcripts", ev.transcripts, "Write per-dialogue transcripts here");
  run->add_flag("--timing", ev.timing, "Include wall-clock timings in the JSON report");
  run->add_flag("--strict", ev.strict, "Exclude failed dialogues instead of counting misses");

  std::string repl_index, repl_config;
  auto* session = app.add_subcommand("session", "Interactive sessions");
  session->require_subcommand(1);
  auto* repl = session->add_subcommand("repl", "Terminal retrieval session");
  repl->add_option("index", repl_index, "Corpus index file")->required()->check(CLI::ExistingFile);
  repl->add_option("config", repl_config, "Config file")->required()->check(CLI::ExistingFile);

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Print a saved run report");
  report_cmd->add_option("run", rp.run, "Run report JSON")->required()->check(CLI::ExistingFile);
  report_cmd->add_flag("--csv", rp.csv, "Print CSV curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*build) return index_build(ib);
    if (*serve_cmd) return serve(serve_config);
    if (*run) return eval_run(ev);
    if (*repl) return session_repl(repl_index, repl_config);
    if (*report_cmd) return report(rp);
  } catch (const dar::Error& e) {
    std::cerr << "dar: error: "
              << nlohmann::json{{"code", dar::to_string(e.code())},
                                {"message", e.message()},
                                {"detail", e.detail()}}
                     .dump()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "dar: error: "
              << nlohmann::json{{"code", "Internal"}, {"message", e.what()}, {"detail", ""}}.dump()
              << '\n';
    return 1;
  }
  return 2;
}
