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

#ifndef GEOSFE_SIMILARITY_HPP
#define GEOSFE_SIMILARITY_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "geosfe/document.hpp"

namespace geosfe {

// Inverse document frequencies from a reference corpus. Terms absent from
// the table (or an empty table) weigh 1.0, so similarity degrades to a plain
// term-frequency cosine without reference data.
struct IdfTable {
  std::map<std::string, int> doc_freq;
  int corpus_size = 0;

  double idf(const std::string& term) const;
  bool empty() const { return doc_freq.empty(); }
};

class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  // Symmetric, sim(a, a) == 1, markup stripped before comparison.
  virtual double sentence_sim(std::string_view a, std::string_view b) const = 0;
  virtual std::string kind() const = 0;
};

// TF-IDF weighted bag-of-lemmas cosine. Deterministic; results cached by
// text so repeated comparisons during optimization stay cheap.
class LexicalProvider : public SimilarityProvider {
 public:
  LexicalProvider() = default;
  explicit LexicalProvider(IdfTable idf) : idf_(std::move(idf)) {}

  double sentence_sim(std::string_view a, std::string_view b) const override;
  std::string kind() const override { return "lexical_default"; }

 private:
  struct WeightedVec {
    std::map<std::string, double> weights;
    double norm = 0.0;
  };
  std::shared_ptr<const WeightedVec> vec_for(std::string_view text) const;

  IdfTable idf_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::shared_ptr<const WeightedVec>> cache_;
};

struct ExternalProviderConfig {
  std::string endpoint;  // e.g. http://localhost:8080/embed
  std::string model;
  int timeout_ms = 2000;
  int max_retries = 3;
  bool fallback_to_lexical = true;
};

// HTTP embedding provider: POST {"texts":[...]} -> {"vectors":[[...]]}.
// Failures retry with bounded backoff; when fallback is enabled the lexical
// provider answers instead and a diagnostic is recorded.
class ExternalEmbeddingProvider : public SimilarityProvider {
 public:
  explicit ExternalEmbeddingProvider(ExternalProviderConfig config,
                                     IdfTable fallback_idf = {});
  ~ExternalEmbeddingProvider() override;

  double sentence_sim(std::string_view a, std::string_view b) const override;
  std::string kind() const override { return "external_embedding"; }

  std::vector<Diagnostic> drain_diagnostics() const;

 private:
  std::vector<double> embed(const std::string& text) const;

  ExternalProviderConfig config_;
  LexicalProvider fallback_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
  mutable std::vector<Diagnostic> diagnostics_;
};

// Deterministic stand-in for a topic model: content lemmas hash into a fixed
// number of buckets; distributions carry add-1/topic_count smoothing.
class TopicModel {
 public:
  explicit TopicModel(int topic_count = 16) : topic_count_(topic_count) {}

  int topic_count() const { return topic_count_; }
  std::vector<double> distribution(std::string_view text) const;
  // Shannon entropy of the distribution normalized to [0, 1].
  double normalized_entropy(const std::vector<double>& dist) const;

 private:
  int topic_count_;
};

// Jensen-Shannon divergence, log base 2, range [0, 1].
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

double paragraph_chain_coherence(const std::vector<std::string>& paragraphs,
                                 const SimilarityProvider& provider);

double doc_topic_divergence(const DocumentTree& a, const DocumentTree& b,
                            const TopicModel& topics);

struct PreservationThresholds {
  double tau_sent = 0.95;
  double tau_para = 0.70;
  double epsilon_js = 0.15;
};

struct PreservationVerdict {
  double sentence_min_sim = 1.0;
  double paragraph_chain_mean = 1.0;
  double js_div = 0.0;
  bool sentence_pass = false;
  bool paragraph_pass = false;
  bool document_pass = false;
  bool overall = false;
};

// mapping[i] lists the original sentence indices behind transformed
// sentence i. Split sentences map many-to-one, merges one-to-many;
// similarity is computed over the concatenations of each group.
using SentenceMapping = std::vector<std::vector<int>>;

SentenceMapping identity_mapping(size_t sentence_count);

PreservationVerdict check_preservation(const DocumentTree& original,
                                       const DocumentTree& transformed,
                                       const SentenceMapping& mapping,
                                       const SimilarityProvider& provider,
                                       const TopicModel& topics,
                                       const PreservationThresholds& thresholds = {});

// Paragraph plain texts in document order.
std::vector<std::string> paragraph_texts(const DocumentTree& tree);

}  // namespace geosfe

#endif  // GEOSFE_SIMILARITY_HPP
