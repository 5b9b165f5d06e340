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

#ifndef GEOSFE_OPTIMIZER_HPP
#define GEOSFE_OPTIMIZER_HPP

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geosfe/citation.hpp"
#include "geosfe/document.hpp"
#include "geosfe/features.hpp"
#include "geosfe/similarity.hpp"

namespace geosfe {

struct OptimizationConfig {
  PreservationThresholds thresholds;
  // Normalized-space L2 gap per level that makes the level fire.
  double theta_macro = 0.1;
  double theta_meso = 0.1;
  double theta_micro = 0.1;
  // Paragraph length tolerance around the target, in words.
  double paragraph_sigma = 50.0;
  double split_coherence_gate = 0.7;
  double merge_gate = 0.65;
  double crossref_gate = 0.7;
  double rebalance_gate = 0.7;
  double convert_w_parseability = 0.5;
  double convert_w_density = 0.3;
  double convert_w_disruption = 0.2;
  double importance_w_tfidf = 0.5;
  double importance_w_centrality = 0.3;
  double importance_w_position = 0.2;
  double emphasis_weight_bold = 1.8;
  double emphasis_weight_italic = 1.3;
  double emphasis_weight_underline = 1.0;
  double centrality_edge_gate = 0.15;
  double reading_ease_floor = 30.0;
  int long_sentence_words = 40;
  int max_passes = 20;  // edit budget per level
  // Ablation switches.
  bool skip_macro = false;
  bool skip_meso = false;
  bool skip_micro = false;
  // Emphasis keyword terms; derived from the document when empty.
  std::vector<std::string> keywords;
};

enum class FinalMode { Full, Partial, Minimal, Identity };
const char* final_mode_name(FinalMode mode);

struct TransformEntry {
  std::string level;      // macro | meso | micro
  std::string edit_kind;
  std::string location;
  std::string before_digest;
  std::string after_digest;
  PreservationVerdict verdict;
  bool applied = false;
  std::string note;

  nlohmann::json to_json() const;
};

struct TransformLog {
  std::vector<TransformEntry> entries;
  FinalMode final_mode = FinalMode::Identity;
  SentenceMapping mapping;

  std::string to_jsonl() const;  // one edit per line
};

struct OptimizeResult {
  DocumentTree tree;
  TransformLog log;
  double probability_before = 0.0;
  double probability_after = 0.0;
  PreservationVerdict final_verdict;

  nlohmann::json summary_json() const;
};

class Optimizer {
 public:
  Optimizer(OptimizationConfig config, TargetProfile targets, ProfileSet profiles,
            std::shared_ptr<const SimilarityProvider> provider,
            const CorpusStats* stats = nullptr, int topic_count = 16);

  // Full macro -> meso -> micro pipeline with per-edit semantic gating and
  // probability-maximizing state selection.
  OptimizeResult optimize(const DocumentTree& input) const;

  // Single-level passes for direct use; gating and rollback behave as in
  // the full pipeline with the input as the semantic reference.
  DocumentTree optimize_macro(const DocumentTree& tree) const;
  DocumentTree optimize_meso(const DocumentTree& tree) const;
  DocumentTree optimize_micro(const DocumentTree& tree) const;

  const TargetProfile& targets() const { return targets_; }
  const OptimizationConfig& config() const { return config_; }

  // Normalized-space L2 distance to the target over a level's dims.
  double level_gap(const FeatureVector& raw, const std::string& level) const;

 private:
  friend struct OptimizerRun;

  FeatureVector normalized(const FeatureVector& raw) const;
  double mixed_probability(const FeatureVector& raw) const;

  OptimizationConfig config_;
  TargetProfile targets_;
  ProfileSet profiles_;
  std::shared_ptr<const SimilarityProvider> provider_;
  const CorpusStats* stats_;
  TopicModel topics_;
  FeatureExtractor extractor_;
};

// Provenance helpers: sentence source ids against an enumeration of the
// given tree, and the mapping read back from an edited tree.
void seed_provenance(DocumentTree& tree);
SentenceMapping collect_mapping(const DocumentTree& tree);

}  // namespace geosfe

#endif  // GEOSFE_OPTIMIZER_HPP
