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

#include "geosfe/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "geosfe/text.hpp"

namespace geosfe {

namespace {

size_t arch_index(Architecture a) {
  switch (a) {
    case Architecture::STS: return 0;
    case Architecture::IR: return 1;
    case Architecture::ISG: return 2;
  }
  return 0;
}

}  // namespace

std::vector<Query> queries_from_json(const nlohmann::json& j) {
  std::vector<Query> out;
  for (const auto& item : j) {
    Query q;
    q.id = item.at("id").is_string() ? item.at("id").get<std::string>()
                                     : item.at("id").dump();
    q.text = item.at("text").get<std::string>();
    if (q.text.empty()) {
      throw Error(ErrorCode::EmptyQuerySet, "query " + q.id + " has empty text");
    }
    if (item.contains("sub_queries")) {
      q.sub_queries = item.at("sub_queries").get<std::vector<std::string>>();
    }
    if (q.sub_queries.empty()) q.sub_queries = decompose_query(q.text);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<std::string> decompose_query(const std::string& text) {
  std::vector<std::string> chunks;
  std::string cur;
  for (const auto& tok : tokenize(text)) {
    if (is_stopword(tok)) {
      if (!cur.empty()) chunks.push_back(cur);
      cur.clear();
    } else {
      if (!cur.empty()) cur.push_back(' ');
      cur += tok;
    }
  }
  if (!cur.empty()) chunks.push_back(cur);
  return chunks;
}

nlohmann::json SimResponse::to_json() const {
  nlohmann::json sents = nlohmann::json::array();
  for (const auto& s : sentences) {
    sents.push_back({{"text", s.text}, {"citations", s.citations}});
  }
  return {{"query_id", query_id}, {"engine", engine}, {"sentences", sents}};
}

nlohmann::json VisReport::to_json() const {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [id, v] : per_source) {
    per[id] = {{"coverage", v.coverage},
               {"position", v.position},
               {"influence", v.influence},
               {"vis", v.vis},
               {"citation_rate", v.citation_rate}};
  }
  return {{"per_source", per},
          {"corpus_cr", corpus_cr},
          {"corpus_vs", corpus_vs},
          {"citation_depth", citation_depth},
          {"first_position", first_position}};
}

EngineSimulator::EngineSimulator(std::vector<DocumentTree> corpus,
                                 ProfileSet profiles)
    : corpus_(std::move(corpus)),
      profiles_(std::move(profiles)),
      sim_(build_reference(corpus_)) {
  if (corpus_.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "simulator needs a non-empty corpus");
  }

  FeatureExtractor raw_extractor;
  std::vector<FeatureVector> raw;
  raw.reserve(corpus_.size());
  for (const auto& doc : corpus_) raw.push_back(raw_extractor.extract_all(doc));

  std::vector<FeatureVector> normalized(raw.size());
  if (corpus_.size() >= 2) {
    const CorpusStats stats = compute_stats(raw);
    for (size_t i = 0; i < raw.size(); ++i) normalized[i] = normalize(raw[i], stats);
  }

  for (size_t i = 0; i < corpus_.size(); ++i) {
    DocInfo info;
    info.source_id = corpus_[i].source_id.empty()
                         ? "doc" + std::to_string(i)
                         : corpus_[i].source_id;
    info.full_text = document_text(corpus_[i]);
    const auto sections = all_sections(corpus_[i]);
    for (size_t si = 0; si < sections.size(); ++si) {
      const Section* sec = sections[si];
      for (size_t bi = 0; bi < sec->blocks.size(); ++bi) {
        const Block& b = sec->blocks[bi];
        if (b.kind == BlockKind::Paragraph) {
          for (const auto& sent : b.sentences) {
            info.units.push_back({sent.text, si, bi});
          }
        } else if (b.kind == BlockKind::List) {
          for (const auto& item : b.items) {
            info.units.push_back({strip_markup(item), si, bi});
          }
        } else if (b.kind == BlockKind::Quote) {
          info.units.push_back({b.plain_text(), si, bi});
        }
        const std::string chunk = b.plain_text();
        if (!chunk.empty()) info.chunks.push_back(chunk);
      }
    }
    info.boost[0] = predict(normalized[i], profiles_.sts);
    info.boost[1] = predict(normalized[i], profiles_.ir);
    info.boost[2] = predict(normalized[i], profiles_.isg);
    docs_.push_back(std::move(info));
  }
}

double EngineSimulator::relevance(const Query& q, const DocInfo& doc) const {
  const double full = sim_.sentence_sim(q.text, doc.full_text);
  double best_sub = 0.0;
  for (const auto& sub : q.sub_queries) {
    best_sub = std::max(best_sub, sim_.sentence_sim(sub, doc.full_text));
  }
  return q.sub_queries.empty() ? full : 0.5 * full + 0.5 * best_sub;
}

std::vector<size_t> EngineSimulator::rank_documents(
    const Query& q, Architecture arch, const std::vector<double>& extra) const {
  std::vector<std::pair<double, size_t>> scored;
  for (size_t i = 0; i < docs_.size(); ++i) {
    double s = relevance(q, docs_[i]) * docs_[i].boost[arch_index(arch)];
    if (!extra.empty()) s += extra[i];
    scored.emplace_back(s, i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  std::vector<size_t> order;
  for (const auto& [s, i] : scored) order.push_back(i);
  return order;
}

SimResponse EngineSimulator::assemble(const Query& q, Architecture arch,
                                      const std::vector<size_t>& doc_ranking) const {
  SimResponse response;
  response.query_id = q.id;
  response.engine = architecture_name(arch);
  const size_t take_docs = std::min(kTopDocuments, doc_ranking.size());
  const size_t per_doc = kMaxResponseSentences / kTopDocuments;
  for (size_t r = 0; r < take_docs; ++r) {
    const DocInfo& doc = docs_[doc_ranking[r]];
    std::vector<std::pair<double, size_t>> unit_scores;
    for (size_t u = 0; u < doc.units.size(); ++u) {
      unit_scores.emplace_back(sim_.sentence_sim(q.text, doc.units[u].text), u);
    }
    std::stable_sort(unit_scores.begin(), unit_scores.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (size_t k = 0; k < unit_scores.size() && k < per_doc; ++k) {
      if (response.sentences.size() >= kMaxResponseSentences) break;
      response.sentences.push_back(
          {doc.units[unit_scores[k].second].text, {doc.source_id}});
    }
  }
  return response;
}

std::vector<SimResponse> EngineSimulator::simulate(
    const std::vector<Query>& queries, Architecture paradigm) const {
  if (queries.empty()) {
    throw Error(ErrorCode::EmptyQuerySet, "simulate needs at least one query");
  }
  std::vector<SimResponse> responses;
  responses.reserve(queries.size());

  for (const auto& q : queries) {
    Query query = q;
    if (query.sub_queries.empty()) query.sub_queries = decompose_query(query.text);

    switch (paradigm) {
      case Architecture::STS: {
        responses.push_back(assemble(query, paradigm, rank_documents(query, paradigm, {})));
        break;
      }
      case Architecture::IR: {
        // Multi-round retrieval: terms harvested from the cited sections'
        // outbound internal links accumulate relevance for linked content.
        std::vector<double> accumulated(docs_.size(), 0.0);
        Query round_query = query;
        std::vector<size_t> ranking;
        for (int round = 0; round < kRefinementRounds; ++round) {
          std::vector<std::pair<double, size_t>> scored;
          for (size_t i = 0; i < docs_.size(); ++i) {
            const double s = relevance(round_query, docs_[i]) *
                             docs_[i].boost[arch_index(paradigm)];
            accumulated[i] += s;
            scored.emplace_back(accumulated[i], i);
          }
          std::stable_sort(scored.begin(), scored.end(),
                           [](const auto& a, const auto& b) {
                             return a.first > b.first;
                           });
          ranking.clear();
          for (const auto& [s, i] : scored) ranking.push_back(i);

          if (round + 1 == kRefinementRounds) break;
          // Harvest terms from the top documents' linked sections.
          std::set<std::string> harvested;
          for (size_t r = 0; r < std::min(kTopDocuments, ranking.size()); ++r) {
            const DocumentTree& doc = corpus_[ranking[r]];
            const auto sections = all_sections(doc);
            std::map<std::string, const Section*> by_anchor;
            for (const Section* sec : sections) by_anchor[sec->anchor] = sec;
            for (const Section* sec : sections) {
              for (const auto& b : sec->blocks) {
                if (b.kind != BlockKind::Paragraph) continue;
                for (const auto& sent : b.sentences) {
                  for (const auto& span : sent.spans) {
                    if (!span.is_internal_link) continue;
                    auto it = by_anchor.find(span.link_target);
                    if (it == by_anchor.end()) continue;
                    for (const auto& tok : tokenize(it->second->heading)) {
                      harvested.insert(tok);
                    }
                    int picked = 0;
                    for (const auto& [term, cnt] :
                         content_lemma_counts(it->second->own_text())) {
                      if (picked++ >= 3) break;
                      harvested.insert(term);
                    }
                  }
                }
              }
            }
          }
          round_query = query;
          std::string extended = query.text;
          for (const auto& term : harvested) {
            extended.push_back(' ');
            extended += term;
          }
          round_query.text = extended;
          round_query.sub_queries = decompose_query(extended);
        }
        responses.push_back(assemble(query, paradigm, ranking));
        break;
      }
      case Architecture::ISG: {
        // Chunk-level ranking rewarding chunks that stand on their own.
        struct ChunkRef {
          double score;
          size_t doc_idx;
          size_t chunk_idx;
        };
        std::vector<ChunkRef> chunks;
        for (size_t i = 0; i < docs_.size(); ++i) {
          const DocInfo& doc = docs_[i];
          for (size_t c = 0; c < doc.chunks.size(); ++c) {
            std::string rest;
            for (size_t o = 0; o < doc.chunks.size(); ++o) {
              if (o == c) continue;
              if (!rest.empty()) rest.push_back(' ');
              rest += doc.chunks[o];
            }
            const double independence =
                2.0 - sim_.sentence_sim(doc.chunks[c], rest);
            const double s = sim_.sentence_sim(query.text, doc.chunks[c]) *
                             independence * doc.boost[arch_index(paradigm)];
            chunks.push_back({s, i, c});
          }
        }
        std::stable_sort(chunks.begin(), chunks.end(),
                         [](const ChunkRef& a, const ChunkRef& b) {
                           return a.score > b.score;
                         });
        SimResponse response;
        response.query_id = query.id;
        response.engine = architecture_name(paradigm);
        for (size_t k = 0; k < chunks.size() && k < kTopChunks; ++k) {
          const DocInfo& doc = docs_[chunks[k].doc_idx];
          const std::string& chunk_text = doc.chunks[chunks[k].chunk_idx];
          // The chunk's most query-similar sentence represents it.
          std::string best_text = chunk_text;
          double best = -1.0;
          for (const auto& sent : sentence_split(chunk_text)) {
            const double s = sim_.sentence_sim(query.text, sent.text);
            if (s > best) {
              best = s;
              best_text = sent.text;
            }
          }
          response.sentences.push_back({best_text, {doc.source_id}});
          if (response.sentences.size() >= kMaxResponseSentences) break;
        }
        responses.push_back(std::move(response));
        break;
      }
    }
  }
  return responses;
}

VisReport EngineSimulator::score(const std::vector<SimResponse>& responses,
                                 const std::vector<Query>& queries) const {
  VisReport report;
  const double nresp = static_cast<double>(responses.size());
  const double nqueries = static_cast<double>(queries.size());

  for (const auto& doc : docs_) {
    SourceVis v;
    double cited_queries = 0.0;
    for (const auto& r : responses) {
      const double len = static_cast<double>(r.sentences.size());
      if (len == 0.0) continue;
      double citing = 0.0;
      double citing_words = 0.0;
      double total_words = 0.0;
      int first = -1;
      for (size_t i = 0; i < r.sentences.size(); ++i) {
        const double words =
            static_cast<double>(tokenize(r.sentences[i].text).size());
        total_words += words;
        const bool cites =
            std::find(r.sentences[i].citations.begin(),
                      r.sentences[i].citations.end(),
                      doc.source_id) != r.sentences[i].citations.end();
        if (cites) {
          citing += 1.0;
          citing_words += words;
          if (first < 0) first = static_cast<int>(i);
        }
      }
      if (first >= 0) {
        cited_queries += 1.0;
        v.coverage += citing / len;
        v.position += 1.0 - static_cast<double>(first) / len;
        if (total_words > 0.0) v.influence += citing_words / total_words;
      }
    }
    if (nresp > 0.0) {
      v.coverage /= nresp;
      v.position /= nresp;
      v.influence /= nresp;
    }
    v.vis = 0.4 * v.coverage + 0.3 * v.position + 0.3 * v.influence;
    v.citation_rate = nqueries > 0.0 ? cited_queries / nqueries : 0.0;
    report.per_source[doc.source_id] = v;
  }

  double cr_sum = 0.0, vs_sum = 0.0;
  for (const auto& [id, v] : report.per_source) {
    cr_sum += v.citation_rate;
    vs_sum += v.vis;
  }
  const double nsources = static_cast<double>(report.per_source.size());
  report.corpus_cr = nsources > 0.0 ? cr_sum / nsources : 0.0;
  report.corpus_vs = nsources > 0.0 ? vs_sum / nsources : 0.0;

  double depth_sum = 0.0, first_sum = 0.0, cited_responses = 0.0;
  for (const auto& r : responses) {
    double citations = 0.0;
    int first = -1;
    for (size_t i = 0; i < r.sentences.size(); ++i) {
      citations += static_cast<double>(r.sentences[i].citations.size());
      if (first < 0 && !r.sentences[i].citations.empty()) {
        first = static_cast<int>(i);
      }
    }
    if (first >= 0) {
      cited_responses += 1.0;
      depth_sum += citations;
      first_sum += first;
    }
  }
  report.citation_depth = cited_responses > 0.0 ? depth_sum / cited_responses : 0.0;
  report.first_position = cited_responses > 0.0 ? first_sum / cited_responses : 0.0;
  return report;
}

nlohmann::json AblationReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"config", r.config}, {"cr", r.cr}, {"vs", r.vs}});
  }
  auto contrib = [](const std::optional<double>& c) {
    return c ? nlohmann::json(*c) : nlohmann::json(nullptr);
  };
  return {{"rows", rows_json},
          {"contribution", {{"macro", contrib(contribution_macro)},
                            {"meso", contrib(contribution_meso)},
                            {"micro", contrib(contribution_micro)}}}};
}

AblationRow evaluate_corpus_mean(const std::vector<DocumentTree>& corpus,
                                 const std::vector<Query>& queries,
                                 const ProfileSet& profiles) {
  EngineSimulator simulator(corpus, profiles);
  AblationRow row;
  for (Architecture a : {Architecture::STS, Architecture::IR, Architecture::ISG}) {
    const auto responses = simulator.simulate(queries, a);
    const VisReport report = simulator.score(responses, queries);
    row.cr += report.corpus_cr;
    row.vs += report.corpus_vs;
  }
  row.cr /= 3.0;
  row.vs /= 3.0;
  return row;
}

AblationReport ablate(const std::vector<DocumentTree>& baseline,
                      const std::vector<Query>& queries,
                      const ProfileSet& profiles,
                      const CorpusOptimizer& optimize_corpus) {
  AblationReport report;

  auto eval = [&](const std::string& name,
                  const std::vector<DocumentTree>& corpus) {
    AblationRow row = evaluate_corpus_mean(corpus, queries, profiles);
    row.config = name;
    report.rows.push_back(row);
    return row;
  };

  const AblationRow base = eval("baseline", baseline);
  const AblationRow full = eval("full", optimize_corpus(false, false, false));
  const AblationRow wo_macro = eval("w/o macro", optimize_corpus(true, false, false));
  const AblationRow wo_meso = eval("w/o meso", optimize_corpus(false, true, false));
  const AblationRow wo_micro = eval("w/o micro", optimize_corpus(false, false, true));

  const double denom = full.vs - base.vs;
  if (std::fabs(denom) > 1e-12) {
    report.contribution_macro = (full.vs - wo_macro.vs) / denom;
    report.contribution_meso = (full.vs - wo_meso.vs) / denom;
    report.contribution_micro = (full.vs - wo_micro.vs) / denom;
  }
  return report;
}

}  // namespace geosfe
