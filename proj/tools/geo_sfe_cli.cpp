/*
 * Copyright 2026 The geo-sfe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// geo-sfe command line tool. Everything goes through the C library API in
// geo_sfe.h; this file only handles files, flags and report formatting.
//
// Exit codes: 0 success (and passing check), 1 failing check, 2 missing
// file, 3 parse failure, 4 provider failure, 5 missing sentence mapping.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "geo_sfe.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitFileNotFound = 2;
constexpr int kExitParseFailure = 3;
constexpr int kExitProviderFailure = 4;
constexpr int kExitNoMapping = 5;

struct CliError {
  int exit_code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitFileNotFound, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitFileNotFound, "cannot write " + path};
  out << content;
}

int exit_code_for(geosfe_status status) {
  switch (status) {
    case GEOSFE_OK: return 0;
    case GEOSFE_ERR_PARSE: return kExitParseFailure;
    case GEOSFE_ERR_PROVIDER: return kExitProviderFailure;
    case GEOSFE_ERR_MAPPING: return kExitNoMapping;
    default: return kExitParseFailure;
  }
}

struct EngineHandle {
  geosfe_engine* ptr = nullptr;
  ~EngineHandle() { geosfe_engine_destroy(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { geosfe_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct CommonFlags {
  std::string config_path;
  std::string stats_path;
  std::string arch_weights;
  std::string provider;
  std::string format;
  int jobs = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "JSON config file (default: $GEO_SFE_CONFIG)");
  cmd->add_option("--stats", flags.stats_path, "corpus stats JSON");
  cmd->add_option("--arch-weights", flags.arch_weights,
                  "architecture mix, e.g. STS=0.4,IR=0.3,ISG=0.3");
  cmd->add_option("--provider", flags.provider, "lexical|external");
  cmd->add_option("--format", flags.format, "json|text");
  cmd->add_option("--jobs", flags.jobs, "parallel file workers");
}

json parse_arch_weights(const std::string& spec) {
  json alpha = {{"STS", 0.0}, {"IR", 0.0}, {"ISG", 0.0}};
  std::stringstream ss(spec);
  std::string item;
  double sum = 0.0;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw CliError{kExitParseFailure, "bad --arch-weights entry: " + item};
    }
    const std::string key = item.substr(0, eq);
    const double value = std::stod(item.substr(eq + 1));
    if (!alpha.contains(key)) {
      throw CliError{kExitParseFailure, "unknown architecture: " + key};
    }
    alpha[key] = value;
    sum += value;
  }
  // A partial spec like "STS=1" is normalized against the named entries.
  if (sum <= 0.0) throw CliError{kExitParseFailure, "arch weights sum to 0"};
  for (auto& [k, v] : alpha.items()) v = v.get<double>() / sum;
  return alpha;
}

EngineHandle make_engine(const CommonFlags& flags) {
  json config = json::object();
  std::string config_path = flags.config_path;
  if (config_path.empty()) {
    if (const char* env = std::getenv("GEO_SFE_CONFIG")) config_path = env;
  }
  if (!config_path.empty()) {
    try {
      config = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
      throw CliError{kExitParseFailure,
                     "config " + config_path + ": " + e.what()};
    }
  }
  if (!flags.arch_weights.empty()) {
    config["alpha"] = parse_arch_weights(flags.arch_weights);
  }
  if (!flags.provider.empty()) config["provider"]["kind"] = flags.provider;
  if (!flags.format.empty()) config["format"] = flags.format;
  if (flags.jobs > 0) config["jobs"] = flags.jobs;

  EngineHandle engine;
  const geosfe_status status =
      geosfe_engine_create(config.dump().c_str(), &engine.ptr);
  if (status != GEOSFE_OK) {
    throw CliError{kExitParseFailure, "engine rejected configuration"};
  }
  if (!flags.stats_path.empty()) {
    const std::string stats = read_file(flags.stats_path);
    if (geosfe_load_stats(engine.ptr, stats.c_str()) != GEOSFE_OK) {
      throw CliError{kExitParseFailure,
                     std::string("stats: ") + geosfe_last_error(engine.ptr)};
    }
  }
  return engine;
}

bool text_format(const CommonFlags& flags) { return flags.format == "text"; }

std::vector<fs::path> corpus_files(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw CliError{kExitFileNotFound, "not a directory: " + dir};
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".md") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw CliError{kExitFileNotFound, "no .md files in " + dir};
  return files;
}

struct LoadedCorpus {
  std::vector<std::string> ids;
  std::vector<std::string> bodies;
  std::vector<const char*> id_ptrs;
  std::vector<const char*> body_ptrs;
};

LoadedCorpus load_corpus(const std::string& dir) {
  LoadedCorpus corpus;
  for (const auto& path : corpus_files(dir)) {
    corpus.ids.push_back(path.stem().string());
    corpus.bodies.push_back(read_file(path.string()));
  }
  for (size_t i = 0; i < corpus.ids.size(); ++i) {
    corpus.id_ptrs.push_back(corpus.ids[i].c_str());
    corpus.body_ptrs.push_back(corpus.bodies[i].c_str());
  }
  return corpus;
}

void fail_with(geosfe_engine* engine, geosfe_status status) {
  throw CliError{exit_code_for(status), geosfe_last_error(engine)};
}

// ---- subcommands ---------------------------------------------------------

int run_extract(const CommonFlags& flags, const std::string& input) {
  EngineHandle engine = make_engine(flags);
  const std::string markdown = read_file(input);
  OwnedString report;
  const geosfe_status status =
      geosfe_extract(engine.ptr, markdown.c_str(), &report.ptr);
  if (status != GEOSFE_OK) fail_with(engine.ptr, status);
  if (text_format(flags)) {
    const json j = json::parse(report.str());
    std::cout << "feature            raw\n";
    for (auto& [key, value] : j.at("raw").items()) {
      std::cout << key;
      for (size_t pad = key.size(); pad < 19; ++pad) std::cout << ' ';
      std::cout << value.get<double>() << "\n";
    }
  } else {
    std::cout << report.str() << "\n";
  }
  return 0;
}

int run_optimize(const CommonFlags& flags, const std::string& input,
                 const std::string& output) {
  EngineHandle engine = make_engine(flags);
  const std::string markdown = read_file(input);
  OwnedString out_md, log_jsonl, summary;
  const geosfe_status status =
      geosfe_optimize(engine.ptr, markdown.c_str(), &out_md.ptr, &log_jsonl.ptr,
                      &summary.ptr);
  if (status != GEOSFE_OK) fail_with(engine.ptr, status);

  write_file(output, out_md.str());
  write_file(output + ".log.jsonl", log_jsonl.str());
  const json summary_json = json::parse(summary.str());
  write_file(output + ".mapping.json", summary_json.at("mapping").dump());
  std::cout << summary.str() << "\n";
  return 0;
}

int run_check(const CommonFlags& flags, const std::string& original,
              const std::string& transformed, const std::string& mapping_path) {
  EngineHandle engine = make_engine(flags);
  const std::string original_md = read_file(original);
  const std::string transformed_md = read_file(transformed);

  std::string mapping;
  std::string path = mapping_path;
  if (path.empty()) {
    // Default to the sidecar written by `optimize`.
    const std::string sidecar = transformed + ".mapping.json";
    if (fs::exists(sidecar)) path = sidecar;
  }
  if (!path.empty()) mapping = read_file(path);

  OwnedString verdict;
  const geosfe_status status =
      geosfe_check(engine.ptr, original_md.c_str(), transformed_md.c_str(),
                   mapping.empty() ? nullptr : mapping.c_str(), &verdict.ptr);
  if (status != GEOSFE_OK) fail_with(engine.ptr, status);

  const json j = json::parse(verdict.str());
  if (text_format(flags)) {
    std::cout << "sentence_min_sim      " << j.at("sentence_min_sim") << "\n"
              << "paragraph_chain_mean  " << j.at("paragraph_chain_mean") << "\n"
              << "js_divergence         " << j.at("js_divergence") << "\n"
              << "overall               "
              << (j.at("overall").get<bool>() ? "pass" : "fail") << "\n";
  } else {
    std::cout << verdict.str() << "\n";
  }
  return j.at("overall").get<bool>() ? 0 : kExitCheckFailed;
}

void print_evaluate_text(const json& report) {
  std::cout << "paradigm  corpus_cr  corpus_vs  citation_depth  first_position\n";
  for (const auto& name : {"STS", "IR", "ISG"}) {
    const auto& p = report.at("paradigms").at(name);
    std::cout << name << (std::string(name).size() == 2 ? "        " : "       ")
              << p.at("corpus_cr").get<double>() << "      "
              << p.at("corpus_vs").get<double>() << "      "
              << p.at("citation_depth").get<double>() << "           "
              << p.at("first_position").get<double>() << "\n";
  }
  std::cout << "note: " << report.at("note").get<std::string>() << "\n";
}

json evaluate_dir(geosfe_engine* engine, const std::string& dir,
                  const std::string& queries_json) {
  LoadedCorpus corpus = load_corpus(dir);
  OwnedString report;
  const geosfe_status status = geosfe_evaluate(
      engine, corpus.id_ptrs.data(), corpus.body_ptrs.data(),
      corpus.body_ptrs.size(), queries_json.c_str(), &report.ptr);
  if (status != GEOSFE_OK) fail_with(engine, status);
  return json::parse(report.str());
}

int run_evaluate(const CommonFlags& flags, const std::string& corpus_dir,
                 const std::string& queries_path,
                 const std::vector<std::string>& compare) {
  EngineHandle engine = make_engine(flags);
  const std::string queries = read_file(queries_path);

  if (!compare.empty()) {
    const json base = evaluate_dir(engine.ptr, compare[0], queries);
    const json opt = evaluate_dir(engine.ptr, compare[1], queries);
    json delta = json::object();
    for (const auto& name : {"STS", "IR", "ISG"}) {
      const double b_vs = base.at("paradigms").at(name).at("corpus_vs");
      const double o_vs = opt.at("paradigms").at(name).at("corpus_vs");
      const double b_cr = base.at("paradigms").at(name).at("corpus_cr");
      const double o_cr = opt.at("paradigms").at(name).at("corpus_cr");
      delta[name] = {
          {"vs_baseline", b_vs},
          {"vs_optimized", o_vs},
          {"vs_delta_pct", b_vs > 0.0 ? 100.0 * (o_vs - b_vs) / b_vs : 0.0},
          {"cr_baseline", b_cr},
          {"cr_optimized", o_cr},
          {"cr_delta_pct", b_cr > 0.0 ? 100.0 * (o_cr - b_cr) / b_cr : 0.0},
      };
    }
    json out = {{"baseline", base},
                {"optimized", opt},
                {"delta", delta},
                {"note",
                 "simulated engines only; deltas are not live "
                 "generative-engine measurements"}};
    if (text_format(flags)) {
      std::cout << "paradigm  vs_base  vs_opt  vs_delta%  cr_base  cr_opt  cr_delta%\n";
      for (const auto& name : {"STS", "IR", "ISG"}) {
        const auto& d = delta.at(name);
        std::cout << name << "  " << d.at("vs_baseline").get<double>() << "  "
                  << d.at("vs_optimized").get<double>() << "  "
                  << d.at("vs_delta_pct").get<double>() << "  "
                  << d.at("cr_baseline").get<double>() << "  "
                  << d.at("cr_optimized").get<double>() << "  "
                  << d.at("cr_delta_pct").get<double>() << "\n";
      }
      std::cout << "note: simulated engines only; deltas are not live "
                   "generative-engine measurements\n";
    } else {
      std::cout << out.dump(2) << "\n";
    }
    return 0;
  }

  const json report = evaluate_dir(engine.ptr, corpus_dir, queries);
  if (text_format(flags)) {
    print_evaluate_text(report);
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

int run_ablate(const CommonFlags& flags, const std::string& corpus_dir,
               const std::string& queries_path) {
  EngineHandle engine = make_engine(flags);
  const std::string queries = read_file(queries_path);
  LoadedCorpus corpus = load_corpus(corpus_dir);
  OwnedString report;
  const geosfe_status status = geosfe_ablate(
      engine.ptr, corpus.id_ptrs.data(), corpus.body_ptrs.data(),
      corpus.body_ptrs.size(), queries.c_str(), &report.ptr);
  if (status != GEOSFE_OK) fail_with(engine.ptr, status);

  const json j = json::parse(report.str());
  if (text_format(flags)) {
    std::cout << "configuration  cr        vs\n";
    for (const auto& row : j.at("rows")) {
      std::cout << row.at("config").get<std::string>() << "  "
                << row.at("cr").get<double>() << "  "
                << row.at("vs").get<double>() << "\n";
    }
    const auto& c = j.at("contribution");
    auto show = [](const json& v) {
      return v.is_null() ? std::string("null") : std::to_string(v.get<double>());
    };
    std::cout << "contribution macro=" << show(c.at("macro"))
              << " meso=" << show(c.at("meso"))
              << " micro=" << show(c.at("micro")) << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int run_stats(const CommonFlags& flags, const std::string& corpus_dir,
              const std::string& output) {
  EngineHandle engine = make_engine(flags);
  LoadedCorpus corpus = load_corpus(corpus_dir);
  OwnedString stats;
  const geosfe_status status = geosfe_compute_stats(
      engine.ptr, corpus.id_ptrs.data(), corpus.body_ptrs.data(),
      corpus.body_ptrs.size(), &stats.ptr);
  if (status != GEOSFE_OK) fail_with(engine.ptr, status);
  if (output.empty()) {
    std::cout << stats.str() << "\n";
  } else {
    write_file(output, stats.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geo-sfe: structural feature engineering for generative "
               "engine visibility"};
  app.require_subcommand(1);

  CommonFlags flags;

  std::string input, output, original, transformed, mapping_path;
  std::string corpus_dir, queries_path, stats_out;
  std::vector<std::string> compare;

  auto* extract = app.add_subcommand("extract", "compute structural features");
  extract->add_option("input", input, "markdown file")->required();
  add_common_flags(extract, flags);

  auto* optimize = app.add_subcommand("optimize", "rewrite document structure");
  optimize->add_option("input", input, "markdown file")->required();
  optimize->add_option("-o,--output", output, "output markdown path")->required();
  add_common_flags(optimize, flags);

  auto* check = app.add_subcommand("check", "verify semantic preservation");
  check->add_option("original", original, "original markdown")->required();
  check->add_option("transformed", transformed, "transformed markdown")->required();
  check->add_option("--mapping", mapping_path, "sentence mapping JSON");
  add_common_flags(check, flags);

  auto* evaluate = app.add_subcommand("evaluate", "simulate engine citations");
  evaluate->add_option("corpus", corpus_dir, "corpus directory of .md files");
  evaluate->add_option("queries", queries_path, "queries JSON file")->required();
  evaluate->add_option("--compare", compare,
                       "baseline_dir optimized_dir delta report")
      ->expected(2);
  add_common_flags(evaluate, flags);

  auto* ablate = app.add_subcommand("ablate", "per-level contribution table");
  ablate->add_option("corpus", corpus_dir, "corpus directory")->required();
  ablate->add_option("queries", queries_path, "queries JSON file")->required();
  add_common_flags(ablate, flags);

  auto* stats = app.add_subcommand("stats", "compute corpus feature stats");
  stats->add_option("corpus", corpus_dir, "corpus directory")->required();
  stats->add_option("-o,--output", stats_out, "stats JSON output path");
  add_common_flags(stats, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) return run_extract(flags, input);
    if (optimize->parsed()) return run_optimize(flags, input, output);
    if (check->parsed()) return run_check(flags, original, transformed, mapping_path);
    if (evaluate->parsed()) {
      if (compare.empty() && corpus_dir.empty()) {
        std::cerr << "error: corpus directory or --compare required\n";
        return kExitFileNotFound;
      }
      return run_evaluate(flags, corpus_dir, queries_path, compare);
    }
    if (ablate->parsed()) return run_ablate(flags, corpus_dir, queries_path);
    if (stats->parsed()) return run_stats(flags, corpus_dir, stats_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseFailure;
  }
  return 0;
}
