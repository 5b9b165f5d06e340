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

#ifndef GEOSFE_SIMULATOR_HPP
#define GEOSFE_SIMULATOR_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geosfe/citation.hpp"
#include "geosfe/document.hpp"
#include "geosfe/features.hpp"
#include "geosfe/similarity.hpp"

namespace geosfe {

struct Query {
  std::string id;
  std::string text;
  std::vector<std::string> sub_queries;  // generated when absent
};

std::vector<Query> queries_from_json(const nlohmann::json& j);

// Deterministic noun-phrase style decomposition: maximal runs of content
// tokens in the query.
std::vector<std::string> decompose_query(const std::string& text);

struct SimSentence {
  std::string text;
  std::vector<std::string> citations;  // source_ids, sorted
};

struct SimResponse {
  std::string query_id;
  std::string engine;
  std::vector<SimSentence> sentences;

  nlohmann::json to_json() const;
};

struct SourceVis {
  double coverage = 0.0;
  double position = 0.0;
  double influence = 0.0;
  double vis = 0.0;
  double citation_rate = 0.0;
};

struct VisReport {
  std::map<std::string, SourceVis> per_source;
  double corpus_cr = 0.0;
  double corpus_vs = 0.0;
  double citation_depth = 0.0;
  double first_position = 0.0;

  nlohmann::json to_json() const;
};

// Response assembly limits.
inline constexpr size_t kMaxResponseSentences = 12;
inline constexpr size_t kTopDocuments = 3;
inline constexpr size_t kTopChunks = 6;
inline constexpr int kRefinementRounds = 3;

// Deterministic stand-in for the three engine paradigms. Retrieval blends
// query relevance with the architecture's structural citation score; every
// formula is plain lexical arithmetic so runs are reproducible.
class EngineSimulator {
 public:
  EngineSimulator(std::vector<DocumentTree> corpus, ProfileSet profiles);

  std::vector<SimResponse> simulate(const std::vector<Query>& queries,
                                    Architecture paradigm) const;
  VisReport score(const std::vector<SimResponse>& responses,
                  const std::vector<Query>& queries) const;

  const std::vector<DocumentTree>& corpus() const { return corpus_; }

 private:
  struct Unit {
    std::string text;
    size_t section_index;
    size_t block_index;
  };
  struct DocInfo {
    std::string source_id;
    std::string full_text;
    std::vector<Unit> units;       // citable sentences / items
    std::vector<std::string> chunks;  // block-level texts
    std::array<double, 3> boost{};    // STS, IR, ISG
  };

  double relevance(const Query& q, const DocInfo& doc) const;
  std::vector<size_t> rank_documents(const Query& q, Architecture arch,
                                     const std::vector<double>& extra) const;
  SimResponse assemble(const Query& q, Architecture arch,
                       const std::vector<size_t>& doc_ranking) const;

  std::vector<DocumentTree> corpus_;
  ProfileSet profiles_;
  std::vector<DocInfo> docs_;
  LexicalProvider sim_;
};

struct AblationRow {
  std::string config;
  double cr = 0.0;
  double vs = 0.0;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // baseline, full, w/o macro, w/o meso, w/o micro
  std::optional<double> contribution_macro;
  std::optional<double> contribution_meso;
  std::optional<double> contribution_micro;

  nlohmann::json to_json() const;
};

// Mean CR/VS across the three paradigms for one corpus.
AblationRow evaluate_corpus_mean(const std::vector<DocumentTree>& corpus,
                                 const std::vector<Query>& queries,
                                 const ProfileSet& profiles);

using CorpusOptimizer = std::function<std::vector<DocumentTree>(
    bool skip_macro, bool skip_meso, bool skip_micro)>;

AblationReport ablate(const std::vector<DocumentTree>& baseline,
                      const std::vector<Query>& queries,
                      const ProfileSet& profiles,
                      const CorpusOptimizer& optimize_corpus);

}  // namespace geosfe

#endif  // GEOSFE_SIMULATOR_HPP
