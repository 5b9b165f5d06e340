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

#ifndef GEOSFE_FEATURES_HPP
#define GEOSFE_FEATURES_HPP

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geosfe/document.hpp"
#include "geosfe/similarity.hpp"

namespace geosfe {

inline constexpr size_t kFeatureCount = 15;

// Canonical dimension order. Every weight/target vector indexes this order.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "d_h", "balance_score", "R",   "T_c", "L_d", "R_d", "V_p", "H_c",
    "F_d", "F_s",           "D",   "E_d", "E_p", "K_p", "R_e"};

enum FeatureDim : size_t {
  kDimHeadingDepth = 0,
  kDimBalance = 1,
  kDimRegularity = 2,
  kDimTransitionCoherence = 3,
  kDimLinkDensity = 4,
  kDimReferenceDistribution = 5,
  kDimParagraphCv = 6,
  kDimChunkEntropy = 7,
  kDimFormatDiversity = 8,
  kDimFormatSmoothness = 9,
  kDimInfoDensity = 10,
  kDimEmphasisDensity = 11,
  kDimEmphasisPlacement = 12,
  kDimKeywordPlacement = 13,
  kDimReadingEase = 14,
};

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  // Per-level section fractions b_h (index 0 = level 1); auxiliary data
  // behind balance_score, not part of the canonical 15.
  std::vector<double> level_fractions;

  double operator[](size_t dim) const { return values[dim]; }
  double& operator[](size_t dim) { return values[dim]; }

  nlohmann::json to_json() const;
  static FeatureVector from_json(const nlohmann::json& j);
};

struct CorpusStats {
  std::array<double, kFeatureCount> means{};
  std::array<double, kFeatureCount> stds{};
  int corpus_size = 0;
  // Reference lemma document frequencies, feeding IDF weights and the
  // fallback keyword derivation.
  IdfTable reference;

  bool constant(size_t dim) const { return stds[dim] == 0.0; }

  nlohmann::json to_json() const;
  static CorpusStats from_json(const nlohmann::json& j);
};

class FeatureExtractor {
 public:
  explicit FeatureExtractor(const CorpusStats* stats = nullptr,
                            int topic_count = 16)
      : stats_(stats), topics_(topic_count) {}

  // Raw features are stats-independent: section similarity uses the plain
  // lemma-frequency cosine so extraction is reproducible with or without a
  // reference corpus.
  FeatureVector extract_all(const DocumentTree& tree,
                            const std::vector<std::string>& keywords = {}) const;
  void extract_macro(const DocumentTree& tree, FeatureVector& out) const;
  void extract_meso(const DocumentTree& tree, FeatureVector& out) const;
  void extract_micro(const DocumentTree& tree,
                     const std::vector<std::string>& keyword_lemmas,
                     FeatureVector& out) const;

  FeatureVector normalize(const FeatureVector& raw) const;

  // Top-k document terms by TF-IDF against the reference table (plain TF
  // when none is configured). Returned as lemmas.
  std::vector<std::string> derive_keywords(const DocumentTree& tree,
                                           size_t top_k = 10) const;

  const TopicModel& topics() const { return topics_; }
  const CorpusStats* stats() const { return stats_; }

 private:
  const CorpusStats* stats_;
  TopicModel topics_;
  LexicalProvider section_sim_;
};

CorpusStats compute_stats(const std::vector<FeatureVector>& corpus);

// Lemma document frequencies over a corpus, for CorpusStats.reference.
IdfTable build_reference(const std::vector<DocumentTree>& corpus);

FeatureVector normalize(const FeatureVector& raw, const CorpusStats& stats);

// Position weight of a token: 2.0 sentence initial, 1.5 inside a
// section-boundary sentence, 1.0 otherwise.
double position_weight(bool sentence_initial, PositionClass sentence_class);

}  // namespace geosfe

#endif  // GEOSFE_FEATURES_HPP
