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

#include "geosfe/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "geosfe/text.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace geosfe {

namespace {

double cosine(const std::map<std::string, double>& a, double na,
              const std::map<std::string, double>& b, double nb) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  double dot = 0.0;
  for (const auto& [term, w] : small) {
    auto it = large.find(term);
    if (it != large.end()) dot += w * it->second;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

double vec_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty() || a.size() != b.size()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double IdfTable::idf(const std::string& term) const {
  if (doc_freq.empty()) return 1.0;
  auto it = doc_freq.find(term);
  const int df = it == doc_freq.end() ? 0 : it->second;
  return std::log((corpus_size + 1.0) / (df + 1.0)) + 1.0;
}

std::shared_ptr<const LexicalProvider::WeightedVec> LexicalProvider::vec_for(
    std::string_view text) const {
  const std::string key(text);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto vec = std::make_shared<WeightedVec>();
  for (auto& [term, count] : lemma_counts(text)) {
    const double w = count * idf_.idf(term);
    vec->weights[term] = w;
    vec->norm += w * w;
  }
  vec->norm = std::sqrt(vec->norm);
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(key, std::move(vec));
  return it->second;
}

double LexicalProvider::sentence_sim(std::string_view a, std::string_view b) const {
  auto va = vec_for(a);
  auto vb = vec_for(b);
  return cosine(va->weights, va->norm, vb->weights, vb->norm);
}

ExternalEmbeddingProvider::ExternalEmbeddingProvider(ExternalProviderConfig config,
                                                     IdfTable fallback_idf)
    : config_(std::move(config)), fallback_(std::move(fallback_idf)) {}

ExternalEmbeddingProvider::~ExternalEmbeddingProvider() = default;

std::vector<double> ExternalEmbeddingProvider::embed(const std::string& text) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(text);
    if (it != cache_.end()) return it->second;
  }

  // Split "http://host:port/path" into client root and path.
  std::string root = config_.endpoint;
  std::string path = "/";
  const size_t scheme = root.find("://");
  if (scheme != std::string::npos) {
    const size_t slash = root.find('/', scheme + 3);
    if (slash != std::string::npos) {
      path = root.substr(slash);
      root = root.substr(0, slash);
    }
  }

  nlohmann::json body;
  body["texts"] = {text};
  if (!config_.model.empty()) body["model"] = config_.model;

  std::string last_error = "unreachable";
  for (int attempt = 0; attempt < std::max(1, config_.max_retries); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    httplib::Client client(root);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(0, config_.timeout_ms * 1000);
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
      last_error = "no response from " + config_.endpoint;
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    try {
      auto parsed = nlohmann::json::parse(res->body);
      auto vectors = parsed.at("vectors");
      if (!vectors.is_array() || vectors.empty()) {
        last_error = "malformed vectors payload";
        continue;
      }
      std::vector<double> vec = vectors[0].get<std::vector<double>>();
      std::lock_guard<std::mutex> lock(mu_);
      cache_[text] = vec;
      return vec;
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::ProviderUnavailable, last_error);
}

double ExternalEmbeddingProvider::sentence_sim(std::string_view a,
                                               std::string_view b) const {
  const std::string sa = strip_markup(a);
  const std::string sb = strip_markup(b);
  if (sa == sb) return 1.0;
  try {
    return vec_cosine(embed(sa), embed(sb));
  } catch (const Error& e) {
    if (!config_.fallback_to_lexical) throw;
    {
      std::lock_guard<std::mutex> lock(mu_);
      diagnostics_.push_back({"provider_fallback",
                              std::string("external provider failed: ") + e.what(),
                              config_.endpoint});
    }
    return fallback_.sentence_sim(a, b);
  }
}

std::vector<Diagnostic> ExternalEmbeddingProvider::drain_diagnostics() const {
  std::lock_guard<std::mutex> lock(mu_);
  auto out = diagnostics_;
  diagnostics_.clear();
  return out;
}

std::vector<double> TopicModel::distribution(std::string_view text) const {
  std::vector<double> counts(static_cast<size_t>(topic_count_), 0.0);
  double total = 0.0;
  for (const auto& [term, count] : content_lemma_counts(text)) {
    counts[fnv1a64(term) % static_cast<std::uint64_t>(topic_count_)] += count;
    total += count;
  }
  const double smoothing = 1.0 / topic_count_;
  std::vector<double> dist(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    dist[i] = (counts[i] + smoothing) / (total + 1.0);
  }
  return dist;
}

double TopicModel::normalized_entropy(const std::vector<double>& dist) const {
  double h = 0.0;
  for (double p : dist) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return topic_count_ > 1 ? h / std::log(static_cast<double>(topic_count_)) : 0.0;
}

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  const size_t n = std::max(p.size(), q.size());
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double pi = i < p.size() ? p[i] : 0.0;
    const double qi = i < q.size() ? q[i] : 0.0;
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0 && mi > 0.0) acc += 0.5 * pi * std::log(pi / mi);
    if (qi > 0.0 && mi > 0.0) acc += 0.5 * qi * std::log(qi / mi);
  }
  return std::max(0.0, acc / std::log(2.0));
}

double paragraph_chain_coherence(const std::vector<std::string>& paragraphs,
                                 const SimilarityProvider& provider) {
  if (paragraphs.size() < 2) return 1.0;
  double sum = 0.0;
  for (size_t i = 0; i + 1 < paragraphs.size(); ++i) {
    sum += provider.sentence_sim(paragraphs[i], paragraphs[i + 1]);
  }
  return sum / static_cast<double>(paragraphs.size() - 1);
}

double doc_topic_divergence(const DocumentTree& a, const DocumentTree& b,
                            const TopicModel& topics) {
  return js_divergence(topics.distribution(document_text_with_headings(a)),
                       topics.distribution(document_text_with_headings(b)));
}

std::vector<std::string> paragraph_texts(const DocumentTree& tree) {
  std::vector<std::string> out;
  for (const Block* b : all_blocks(tree)) {
    if (b->kind == BlockKind::Paragraph) out.push_back(b->plain_text());
  }
  return out;
}

SentenceMapping identity_mapping(size_t sentence_count) {
  SentenceMapping mapping(sentence_count);
  for (size_t i = 0; i < sentence_count; ++i) mapping[i] = {static_cast<int>(i)};
  return mapping;
}

PreservationVerdict check_preservation(const DocumentTree& original,
                                       const DocumentTree& transformed,
                                       const SentenceMapping& mapping,
                                       const SimilarityProvider& provider,
                                       const TopicModel& topics,
                                       const PreservationThresholds& thresholds) {
  const auto original_sentences = all_sentences(original);
  const auto transformed_sentences = all_sentences(transformed);
  if (mapping.size() != transformed_sentences.size()) {
    throw Error(ErrorCode::MappingIncomplete,
                "mapping covers " + std::to_string(mapping.size()) +
                    " of " + std::to_string(transformed_sentences.size()) +
                    " transformed sentences");
  }

  PreservationVerdict verdict;

  // Group transformed sentences sharing the same source set; splits are
  // checked as a concatenation against their common source.
  std::map<std::vector<int>, std::vector<size_t>> groups;
  std::vector<std::vector<int>> group_order;
  for (size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i].empty()) {
      throw Error(ErrorCode::MappingIncomplete,
                  "transformed sentence " + std::to_string(i) +
                      " has no source provenance");
    }
    std::vector<int> key = mapping[i];
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    for (int id : key) {
      if (id < 0 || static_cast<size_t>(id) >= original_sentences.size()) {
        throw Error(ErrorCode::MappingIncomplete,
                    "mapping references unknown source sentence " +
                        std::to_string(id));
      }
    }
    auto [it, inserted] = groups.emplace(key, std::vector<size_t>{});
    if (inserted) group_order.push_back(key);
    it->second.push_back(i);
  }

  double min_sim = 1.0;
  for (const auto& key : group_order) {
    const auto& members = groups[key];
    std::string transformed_text;
    for (size_t idx : members) {
      if (!transformed_text.empty()) transformed_text.push_back(' ');
      transformed_text += transformed_sentences[idx].sentence->text;
    }
    std::string source_text;
    for (int id : key) {
      if (!source_text.empty()) source_text.push_back(' ');
      source_text += original_sentences[static_cast<size_t>(id)].sentence->text;
    }
    min_sim = std::min(min_sim,
                       provider.sentence_sim(source_text, transformed_text));
  }
  verdict.sentence_min_sim = min_sim;
  verdict.paragraph_chain_mean =
      paragraph_chain_coherence(paragraph_texts(transformed), provider);
  verdict.js_div = doc_topic_divergence(original, transformed, topics);

  verdict.sentence_pass = verdict.sentence_min_sim > thresholds.tau_sent;
  verdict.paragraph_pass = verdict.paragraph_chain_mean > thresholds.tau_para;
  verdict.document_pass = verdict.js_div < thresholds.epsilon_js;
  verdict.overall =
      verdict.sentence_pass && verdict.paragraph_pass && verdict.document_pass;
  return verdict;
}

}  // namespace geosfe
