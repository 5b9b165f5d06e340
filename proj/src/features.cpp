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

#include "geosfe/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "geosfe/text.hpp"

namespace geosfe {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd population_stats(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

int count_internal_links(const Section& sec) {
  int links = 0;
  for (const auto& b : sec.blocks) {
    if (b.kind != BlockKind::Paragraph) continue;
    for (const auto& s : b.sentences) {
      for (const auto& span : s.spans) {
        if (span.is_internal_link) ++links;
      }
    }
  }
  return links;
}

bool prose_family(BlockKind kind) {
  return kind == BlockKind::Paragraph || kind == BlockKind::Quote;
}

}  // namespace

double position_weight(bool sentence_initial, PositionClass sentence_class) {
  if (sentence_initial) return 2.0;
  if (sentence_class == PositionClass::SectionBoundary) return 1.5;
  return 1.0;
}

nlohmann::json FeatureVector::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (size_t i = 0; i < kFeatureCount; ++i) j[kFeatureNames[i]] = values[i];
  return j;
}

FeatureVector FeatureVector::from_json(const nlohmann::json& j) {
  FeatureVector v;
  for (size_t i = 0; i < kFeatureCount; ++i) {
    if (!j.contains(kFeatureNames[i])) {
      throw Error(ErrorCode::StatsMismatch,
                  std::string("missing feature key ") + kFeatureNames[i]);
    }
    v.values[i] = j.at(kFeatureNames[i]).get<double>();
  }
  return v;
}

nlohmann::json CorpusStats::to_json() const {
  nlohmann::json j;
  j["means"] = means;
  j["stds"] = stds;
  j["n"] = corpus_size;
  if (!reference.doc_freq.empty()) {
    j["doc_freq"] = reference.doc_freq;
    j["doc_freq_n"] = reference.corpus_size;
  }
  return j;
}

CorpusStats CorpusStats::from_json(const nlohmann::json& j) {
  CorpusStats s;
  const auto& means = j.at("means");
  const auto& stds = j.at("stds");
  if (means.size() != kFeatureCount || stds.size() != kFeatureCount) {
    throw Error(ErrorCode::StatsMismatch,
                "stats must carry exactly " + std::to_string(kFeatureCount) +
                    " dimensions");
  }
  for (size_t i = 0; i < kFeatureCount; ++i) {
    s.means[i] = means[i].get<double>();
    s.stds[i] = stds[i].get<double>();
  }
  s.corpus_size = j.at("n").get<int>();
  if (j.contains("doc_freq")) {
    s.reference.doc_freq =
        j.at("doc_freq").get<std::map<std::string, int>>();
    s.reference.corpus_size = j.value("doc_freq_n", s.corpus_size);
  }
  return s;
}

void FeatureExtractor::extract_macro(const DocumentTree& tree,
                                     FeatureVector& out) const {
  const auto sections = all_sections(tree);
  if (sections.empty()) {
    out[kDimHeadingDepth] = 0.0;
    out[kDimBalance] = 0.0;
    out[kDimRegularity] = 1.0;
    out[kDimTransitionCoherence] = 0.0;
    out[kDimLinkDensity] = 0.0;
    out[kDimReferenceDistribution] = 0.0;
    out.level_fractions.clear();
    return;
  }

  const int depth = heading_depth(tree);
  out[kDimHeadingDepth] = static_cast<double>(depth);

  std::vector<double> fractions(static_cast<size_t>(depth), 0.0);
  for (const Section* sec : sections) {
    fractions[static_cast<size_t>(sec->level - 1)] += 1.0;
  }
  for (double& f : fractions) f /= static_cast<double>(sections.size());
  out.level_fractions = fractions;

  // Balance against the 0.3 per-level target, non-root levels only.
  if (depth >= 2) {
    double worst = 0.0;
    for (int level = 2; level <= depth; ++level) {
      worst = std::max(worst,
                       std::fabs(fractions[static_cast<size_t>(level - 1)] - 0.3));
    }
    out[kDimBalance] = 1.0 - worst;
  } else {
    out[kDimBalance] = 0.0;
  }

  // Structural regularity from section word counts.
  std::vector<double> section_words;
  section_words.reserve(sections.size());
  for (const Section* sec : sections) {
    double words = 0.0;
    for (const auto& b : sec->blocks) words += b.word_count;
    section_words.push_back(words);
  }
  if (sections.size() <= 1) {
    out[kDimRegularity] = 1.0;
  } else {
    const MeanStd ms = population_stats(section_words);
    out[kDimRegularity] =
        ms.mean == 0.0 ? 1.0 : std::clamp(1.0 - ms.std / ms.mean, 0.0, 1.0);
  }

  // Transition coherence across adjacent sections in document order.
  if (sections.size() < 2) {
    out[kDimTransitionCoherence] = 0.0;
  } else {
    double sum = 0.0;
    for (size_t i = 0; i + 1 < sections.size(); ++i) {
      sum += section_sim_.sentence_sim(sections[i]->own_text(),
                                       sections[i + 1]->own_text());
    }
    out[kDimTransitionCoherence] = sum / static_cast<double>(sections.size() - 1);
  }

  const auto blocks = all_blocks(tree);
  std::vector<double> per_section_links;
  double total_links = 0.0;
  for (const Section* sec : sections) {
    const int links = count_internal_links(*sec);
    per_section_links.push_back(static_cast<double>(links));
    total_links += links;
  }
  out[kDimLinkDensity] =
      blocks.empty() ? 0.0 : total_links / static_cast<double>(blocks.size());

  if (total_links == 0.0 || sections.size() <= 1) {
    out[kDimReferenceDistribution] = 1.0;
  } else {
    const MeanStd ms = population_stats(per_section_links);
    const double cv = ms.mean == 0.0 ? 0.0 : ms.std / ms.mean;
    out[kDimReferenceDistribution] = 1.0 / (1.0 + cv);
  }
}

void FeatureExtractor::extract_meso(const DocumentTree& tree,
                                    FeatureVector& out) const {
  const auto blocks = all_blocks(tree);

  std::vector<double> paragraph_words;
  std::vector<const Block*> paragraphs;
  for (const Block* b : blocks) {
    if (b->kind == BlockKind::Paragraph) {
      paragraphs.push_back(b);
      paragraph_words.push_back(static_cast<double>(b->word_count));
    }
  }

  if (paragraph_words.size() < 2) {
    out[kDimParagraphCv] = 0.0;
  } else {
    const MeanStd ms = population_stats(paragraph_words);
    out[kDimParagraphCv] = ms.mean == 0.0 ? 0.0 : ms.std / ms.mean;
  }

  if (paragraphs.empty()) {
    out[kDimChunkEntropy] = 0.0;
  } else {
    double sum = 0.0;
    for (const Block* p : paragraphs) {
      sum += topics_.normalized_entropy(topics_.distribution(p->plain_text()));
    }
    out[kDimChunkEntropy] = sum / static_cast<double>(paragraphs.size());
  }

  if (blocks.empty()) {
    out[kDimFormatDiversity] = 0.0;
  } else {
    double structured = 0.0;
    for (const Block* b : blocks) {
      if (b->kind != BlockKind::Paragraph) structured += 1.0;
    }
    out[kDimFormatDiversity] = structured / static_cast<double>(blocks.size());
  }

  if (blocks.size() < 2) {
    out[kDimFormatSmoothness] = 1.0;
  } else {
    double same = 0.0;
    for (size_t i = 0; i + 1 < blocks.size(); ++i) {
      if (prose_family(blocks[i]->kind) == prose_family(blocks[i + 1]->kind))
        same += 1.0;
    }
    out[kDimFormatSmoothness] = same / static_cast<double>(blocks.size() - 1);
  }

  // Information density: distinct content lemmas plus numeric token count
  // over total tokens.
  const auto tokens = tokenize(document_text(tree));
  if (tokens.empty()) {
    out[kDimInfoDensity] = 0.0;
  } else {
    std::set<std::string> lemmas;
    double numeric = 0.0;
    for (const auto& tok : tokens) {
      if (is_numeric_token(tok)) {
        numeric += 1.0;
      } else if (!is_stopword(tok)) {
        lemmas.insert(lemma(tok));
      }
    }
    out[kDimInfoDensity] = (static_cast<double>(lemmas.size()) + numeric) /
                           static_cast<double>(tokens.size());
  }
}

void FeatureExtractor::extract_micro(const DocumentTree& tree,
                                     const std::vector<std::string>& keyword_lemmas,
                                     FeatureVector& out) const {
  std::set<std::string> keywords(keyword_lemmas.begin(), keyword_lemmas.end());

  double total_tokens = 0.0;
  double emphasized_tokens = 0.0;
  double emphasis_weighted = 0.0;
  double keyword_weighted = 0.0;
  double keyword_occurrences = 0.0;

  double words = 0.0;
  double sentence_count = 0.0;
  double syllables = 0.0;

  for (const Section* sec : all_sections(tree)) {
    for (const auto& b : sec->blocks) {
      if (b.kind != BlockKind::Paragraph) {
        total_tokens += static_cast<double>(tokenize(b.plain_text()).size());
        continue;
      }
      for (const auto& sentence : b.sentences) {
        sentence_count += 1.0;
        bool first_in_sentence = true;
        for (const auto& span : sentence.spans) {
          const bool emphasized = span.emphasis != Emphasis::None;
          for (const auto& tok : tokenize(span.text)) {
            const double weight =
                position_weight(first_in_sentence, sentence.position_class);
            first_in_sentence = false;
            total_tokens += 1.0;
            words += 1.0;
            syllables += syllable_count(tok);
            if (emphasized) {
              emphasized_tokens += 1.0;
              emphasis_weighted += weight;
            }
            if (keywords.count(lemma(tok)) > 0) {
              keyword_occurrences += 1.0;
              keyword_weighted += weight;
            }
          }
        }
      }
    }
  }

  out[kDimEmphasisDensity] =
      total_tokens == 0.0 ? 0.0 : emphasized_tokens / total_tokens;
  out[kDimEmphasisPlacement] =
      total_tokens == 0.0 ? 0.0 : emphasis_weighted / total_tokens;
  out[kDimKeywordPlacement] =
      keyword_occurrences == 0.0 ? 0.0 : keyword_weighted / keyword_occurrences;

  if (sentence_count == 0.0 || words == 0.0) {
    out[kDimReadingEase] = 0.0;
  } else {
    out[kDimReadingEase] = 206.835 - 1.015 * (words / sentence_count) -
                           84.6 * (syllables / words);
  }
}

FeatureVector FeatureExtractor::extract_all(
    const DocumentTree& tree, const std::vector<std::string>& keywords) const {
  FeatureVector out;
  extract_macro(tree, out);
  extract_meso(tree, out);
  std::vector<std::string> kw;
  kw.reserve(keywords.size());
  for (const auto& k : keywords) {
    for (const auto& tok : tokenize(k)) kw.push_back(lemma(tok));
  }
  if (kw.empty()) kw = derive_keywords(tree);
  extract_micro(tree, kw, out);
  return out;
}

std::vector<std::string> FeatureExtractor::derive_keywords(
    const DocumentTree& tree, size_t top_k) const {
  const IdfTable* ref = stats_ ? &stats_->reference : nullptr;
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [term, count] : content_lemma_counts(document_text(tree))) {
    const double idf = ref ? ref->idf(term) : 1.0;
    scored.emplace_back(count * idf, term);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (size_t i = 0; i < scored.size() && i < top_k; ++i) {
    out.push_back(scored[i].second);
  }
  return out;
}

FeatureVector FeatureExtractor::normalize(const FeatureVector& raw) const {
  if (!stats_) {
    throw Error(ErrorCode::StatsMismatch, "no corpus stats configured");
  }
  return geosfe::normalize(raw, *stats_);
}

FeatureVector normalize(const FeatureVector& raw, const CorpusStats& stats) {
  FeatureVector out;
  for (size_t i = 0; i < kFeatureCount; ++i) {
    out.values[i] = stats.constant(i)
                        ? 0.0
                        : (raw.values[i] - stats.means[i]) / stats.stds[i];
  }
  return out;
}

CorpusStats compute_stats(const std::vector<FeatureVector>& corpus) {
  if (corpus.size() < 2) {
    throw Error(ErrorCode::InsufficientCorpus,
                "corpus stats require at least 2 documents");
  }
  CorpusStats stats;
  stats.corpus_size = static_cast<int>(corpus.size());
  for (size_t dim = 0; dim < kFeatureCount; ++dim) {
    std::vector<double> xs;
    xs.reserve(corpus.size());
    for (const auto& v : corpus) xs.push_back(v.values[dim]);
    const MeanStd ms = population_stats(xs);
    stats.means[dim] = ms.mean;
    stats.stds[dim] = ms.std;
  }
  return stats;
}

IdfTable build_reference(const std::vector<DocumentTree>& corpus) {
  IdfTable table;
  table.corpus_size = static_cast<int>(corpus.size());
  for (const auto& doc : corpus) {
    std::set<std::string> present;
    for (const auto& tok : tokenize(document_text(doc))) {
      present.insert(lemma(tok));
    }
    for (const auto& term : present) table.doc_freq[term] += 1;
  }
  return table;
}

}  // namespace geosfe
