// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/templates.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "dar/errors.hpp"

namespace dar {

namespace detail {
std::string_view builtin_template(std::string_view name);
}

namespace {

bool is_name_start(char c) { return c >= 'A' && c <= 'Z'; }
bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9') || c == '_'; }

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read template", p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void DialogueContext::validate(unsigned max_turns) const {
  if (initial_description.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "initial description is empty");
  }
  if (turns.size() > max_turns) {
    throw Error(ErrorCode::InvalidArgument, "dialogue has more turns than allowed");
  }
}

std::string render_template(std::string_view tmpl, const TemplateValues& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  for (std::size_t i = 0; i < tmpl.size();) {
    const char c = tmpl[i];
    if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
      out.push_back(c);
      i += 2;
      continue;
    }
    if (c == '{' && i + 1 < tmpl.size() && is_name_start(tmpl[i + 1])) {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_name_char(tmpl[j])) ++j;
      if (j < tmpl.size() && tmpl[j] == '}') {
        const std::string_view name = tmpl.substr(i + 1, j - i - 1);
        auto it = values.find(name);
        if (it == values.end()) {
          throw Error(ErrorCode::InvalidArgument, "unknown template placeholder",
                      std::string(name));
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates t = [] {
    PromptTemplates p;
    p.r1 = std::string(detail::builtin_template("r1"));
    p.r2 = std::string(detail::builtin_template("r2"));
    p.questioner = std::string(detail::builtin_template("questioner"));
    p.r2_directives = split_lines(detail::builtin_template("r2_directives"));
    return p;
  }();
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "template directory not found", dir.string());
  }
  PromptTemplates p = builtin();
  auto maybe = [&](const char* file, std::string& slot) {
    const auto path = dir / file;
    if (std::filesystem::exists(path)) slot = read_file(path);
  };
  maybe("r1.txt", p.r1);
  maybe("r2.txt", p.r2);
  maybe("questioner.txt", p.questioner);
  if (std::filesystem::exists(dir / "r2_directives.txt")) {
    p.r2_directives = split_lines(read_file(dir / "r2_directives.txt"));
  }
  return p;
}

std::string PromptTemplates::directive(unsigned k) const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "variation index is 1-based");
  if (k <= r2_directives.size()) return r2_directives[k - 1];
  return "[Variation " + std::to_string(k) +
         "] Describe another plausible interpretation of the scene with new modifiers.";
}

std::string single_line(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::string render_turns(const std::vector<QaTurn>& turns) {
  if (turns.empty()) return std::string(kNoTurnsText);
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += "Turn " + std::to_string(i + 1) + "\n";
    out += "Q: " + single_line(turns[i].question) + "\n";
    out += "A: " + single_line(turns[i].answer);
  }
  return out;
}

}  // namespace dar
