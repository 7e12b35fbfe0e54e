// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dar::cli {

struct IndexBuildArgs {
  std::string input;
  std::string out;
  std::string config;
  std::string assets;
  std::optional<std::uint32_t> dim;
  std::optional<double> sigma;
};

struct EvalArgs {
  std::string dataset;
  std::string index;
  std::string config;
  std::vector<std::string> variants;
  std::optional<unsigned> k;
  std::string out;
  std::string csv;
  std::string transcripts;
  bool timing = false;
  bool strict = false;
};

struct ReportArgs {
  std::string run;
  bool csv = false;
};

int index_build(const IndexBuildArgs& a);
int serve(const std::string& config);
int eval_run(const EvalArgs& a);
int session_repl(const std::string& index, const std::string& config);
int report(const ReportArgs& a);

}  // namespace dar::cli
