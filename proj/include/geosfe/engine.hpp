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

#ifndef GEOSFE_ENGINE_HPP
#define GEOSFE_ENGINE_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "geosfe/citation.hpp"
#include "geosfe/optimizer.hpp"
#include "geosfe/simulator.hpp"

namespace geosfe {

struct RunConfig {
  AlphaMix alpha;
  OptimizationConfig optimizer;
  ProfileSet profiles = default_profiles();
  std::string provider_kind = "lexical";  // lexical | external
  ExternalProviderConfig external;
  std::string report_format = "json";  // json | text
  int jobs = 1;

  static RunConfig from_json(const nlohmann::json& j);
};

// One configured pipeline: config + optional corpus stats + provider.
// This is the object behind the C API handle; the CLI goes through it too.
class Engine {
 public:
  Engine() = default;
  explicit Engine(RunConfig config);
  static Engine from_config_json(const std::string& config_json);

  void load_stats_json(const std::string& stats_json);
  bool has_stats() const { return stats_.has_value(); }

  nlohmann::json extract(const std::string& markdown) const;

  struct OptimizeOutput {
    std::string markdown;
    std::string log_jsonl;
    nlohmann::json summary;
  };
  OptimizeOutput optimize(const std::string& markdown) const;

  // mapping == nullptr falls back to the identity mapping when sentence
  // counts agree, otherwise throws MappingIncomplete.
  nlohmann::json check(const std::string& original_md,
                       const std::string& transformed_md,
                       const nlohmann::json* mapping) const;

  using NamedDoc = std::pair<std::string, std::string>;  // id, markdown
  nlohmann::json evaluate(const std::vector<NamedDoc>& corpus,
                          const std::string& queries_json) const;
  nlohmann::json ablate_corpus(const std::vector<NamedDoc>& corpus,
                               const std::string& queries_json) const;
  nlohmann::json stats_from_corpus(const std::vector<NamedDoc>& corpus) const;

  const RunConfig& config() const { return config_; }
  RunConfig& config() { return config_; }

 private:
  std::shared_ptr<const SimilarityProvider> make_provider() const;
  Optimizer make_optimizer(bool skip_macro, bool skip_meso,
                           bool skip_micro) const;
  std::vector<DocumentTree> parse_corpus(const std::vector<NamedDoc>& corpus) const;

  RunConfig config_;
  std::optional<CorpusStats> stats_;
};

}  // namespace geosfe

#endif  // GEOSFE_ENGINE_HPP
