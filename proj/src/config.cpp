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

#include "geosfe/engine.hpp"

#include <algorithm>
#include <atomic>
#include <future>

#include "geosfe/text.hpp"

namespace geosfe {

namespace {

void apply_optimizer_json(const nlohmann::json& j, OptimizationConfig& cfg) {
  cfg.theta_macro = j.value("theta_macro", cfg.theta_macro);
  cfg.theta_meso = j.value("theta_meso", cfg.theta_meso);
  cfg.theta_micro = j.value("theta_micro", cfg.theta_micro);
  cfg.paragraph_sigma = j.value("paragraph_sigma", cfg.paragraph_sigma);
  cfg.split_coherence_gate = j.value("split_coherence_gate", cfg.split_coherence_gate);
  cfg.merge_gate = j.value("merge_gate", cfg.merge_gate);
  cfg.crossref_gate = j.value("crossref_gate", cfg.crossref_gate);
  cfg.rebalance_gate = j.value("rebalance_gate", cfg.rebalance_gate);
  cfg.max_passes = j.value("max_passes", cfg.max_passes);
  cfg.reading_ease_floor = j.value("reading_ease_floor", cfg.reading_ease_floor);
  cfg.long_sentence_words = j.value("long_sentence_words", cfg.long_sentence_words);
  cfg.centrality_edge_gate = j.value("centrality_edge_gate", cfg.centrality_edge_gate);
  if (j.contains("keywords")) {
    cfg.keywords = j.at("keywords").get<std::vector<std::string>>();
  }
  cfg.skip_macro = j.value("skip_macro", cfg.skip_macro);
  cfg.skip_meso = j.value("skip_meso", cfg.skip_meso);
  cfg.skip_micro = j.value("skip_micro", cfg.skip_micro);
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    cfg.alpha.sts = a.value("STS", 0.0);
    cfg.alpha.ir = a.value("IR", 0.0);
    cfg.alpha.isg = a.value("ISG", 0.0);
    cfg.alpha.validate();
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    cfg.optimizer.thresholds.tau_sent =
        t.value("tau_sent", cfg.optimizer.thresholds.tau_sent);
    cfg.optimizer.thresholds.tau_para =
        t.value("tau_para", cfg.optimizer.thresholds.tau_para);
    cfg.optimizer.thresholds.epsilon_js =
        t.value("epsilon_js", cfg.optimizer.thresholds.epsilon_js);
  }
  if (j.contains("optimizer")) apply_optimizer_json(j.at("optimizer"), cfg.optimizer);
  if (j.contains("profiles")) {
    for (const auto& pj : j.at("profiles")) {
      ArchitectureProfile p = ArchitectureProfile::from_json(pj);
      switch (p.id) {
        case Architecture::STS: cfg.profiles.sts = p; break;
        case Architecture::IR: cfg.profiles.ir = p; break;
        case Architecture::ISG: cfg.profiles.isg = p; break;
      }
    }
  }
  if (j.contains("provider")) {
    const auto& p = j.at("provider");
    cfg.provider_kind = p.value("kind", std::string("lexical"));
    if (cfg.provider_kind != "lexical" && cfg.provider_kind != "external") {
      throw Error(ErrorCode::BadConfig,
                  "provider.kind must be lexical or external");
    }
    cfg.external.endpoint = p.value("endpoint", std::string());
    cfg.external.model = p.value("model", std::string());
    cfg.external.timeout_ms = p.value("timeout_ms", cfg.external.timeout_ms);
    cfg.external.max_retries = p.value("max_retries", cfg.external.max_retries);
    cfg.external.fallback_to_lexical =
        p.value("fallback", cfg.external.fallback_to_lexical);
    if (cfg.provider_kind == "external" && cfg.external.endpoint.empty()) {
      throw Error(ErrorCode::BadConfig, "external provider needs an endpoint");
    }
  }
  cfg.report_format = j.value("format", cfg.report_format);
  if (cfg.report_format != "json" && cfg.report_format != "text") {
    throw Error(ErrorCode::BadConfig, "format must be json or text");
  }
  cfg.jobs = j.value("jobs", cfg.jobs);
  if (cfg.jobs < 1) throw Error(ErrorCode::BadConfig, "jobs must be >= 1");
  return cfg;
}

Engine::Engine(RunConfig config) : config_(std::move(config)) {}

Engine Engine::from_config_json(const std::string& config_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("config parse: ") + e.what());
  }
  return Engine(RunConfig::from_json(j));
}

void Engine::load_stats_json(const std::string& stats_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(stats_json);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("stats parse: ") + e.what());
  }
  stats_ = CorpusStats::from_json(j);
}

std::shared_ptr<const SimilarityProvider> Engine::make_provider() const {
  IdfTable idf;
  if (stats_) idf = stats_->reference;
  if (config_.provider_kind == "external") {
    return std::make_shared<ExternalEmbeddingProvider>(config_.external, idf);
  }
  return std::make_shared<LexicalProvider>(idf);
}

Optimizer Engine::make_optimizer(bool skip_macro, bool skip_meso,
                                 bool skip_micro) const {
  OptimizationConfig cfg = config_.optimizer;
  cfg.skip_macro = cfg.skip_macro || skip_macro;
  cfg.skip_meso = cfg.skip_meso || skip_meso;
  cfg.skip_micro = cfg.skip_micro || skip_micro;
  const TargetProfile targets = compute_targets(config_.alpha, config_.profiles);
  return Optimizer(cfg, targets, config_.profiles, make_provider(),
                   stats_ ? &*stats_ : nullptr);
}

nlohmann::json Engine::extract(const std::string& markdown) const {
  const ParseResult parsed = parse(markdown);
  const FeatureExtractor extractor(stats_ ? &*stats_ : nullptr);
  const FeatureVector raw =
      extractor.extract_all(parsed.tree, config_.optimizer.keywords);

  nlohmann::json out;
  out["raw"] = raw.to_json();
  if (stats_) out["normalized"] = extractor.normalize(raw).to_json();
  nlohmann::json diags = nlohmann::json::array();
  for (const auto& d : parsed.diagnostics) {
    diags.push_back({{"code", d.code}, {"message", d.message}, {"location", d.location}});
  }
  out["diagnostics"] = diags;
  return out;
}

Engine::OptimizeOutput Engine::optimize(const std::string& markdown) const {
  const ParseResult parsed = parse(markdown);
  const Optimizer optimizer = make_optimizer(false, false, false);
  OptimizeResult result = optimizer.optimize(parsed.tree);

  OptimizeOutput out;
  out.markdown = serialize(result.tree);
  out.log_jsonl = result.log.to_jsonl();
  out.summary = result.summary_json();
  return out;
}

nlohmann::json Engine::check(const std::string& original_md,
                             const std::string& transformed_md,
                             const nlohmann::json* mapping_json) const {
  ParseResult original = parse(original_md);
  ParseResult transformed = parse(transformed_md);
  seed_provenance(original.tree);

  const size_t transformed_count = all_sentences(transformed.tree).size();
  SentenceMapping mapping;
  if (mapping_json != nullptr && !mapping_json->is_null()) {
    mapping = mapping_json->get<SentenceMapping>();
  } else {
    const size_t original_count = all_sentences(original.tree).size();
    if (original_count != transformed_count) {
      throw Error(ErrorCode::MappingIncomplete,
                  "no mapping given and sentence counts differ (" +
                      std::to_string(original_count) + " vs " +
                      std::to_string(transformed_count) + ")");
    }
    mapping = identity_mapping(transformed_count);
  }

  const auto provider = make_provider();
  const TopicModel topics;
  const PreservationVerdict verdict =
      check_preservation(original.tree, transformed.tree, mapping, *provider,
                         topics, config_.optimizer.thresholds);
  nlohmann::json j;
  j["sentence_min_sim"] = verdict.sentence_min_sim;
  j["paragraph_chain_mean"] = verdict.paragraph_chain_mean;
  j["js_divergence"] = verdict.js_div;
  nlohmann::json passed = nlohmann::json::array();
  if (verdict.sentence_pass) passed.push_back("sentence");
  if (verdict.paragraph_pass) passed.push_back("paragraph");
  if (verdict.document_pass) passed.push_back("document");
  j["passed_levels"] = passed;
  j["overall"] = verdict.overall;
  return j;
}

std::vector<DocumentTree> Engine::parse_corpus(
    const std::vector<NamedDoc>& corpus) const {
  std::vector<DocumentTree> docs(corpus.size());
  const int jobs = std::max(1, config_.jobs);
  if (jobs == 1 || corpus.size() < 2) {
    for (size_t i = 0; i < corpus.size(); ++i) {
      docs[i] = parse(corpus[i].second).tree;
      docs[i].source_id = corpus[i].first;
    }
    return docs;
  }
  // File-level parallelism with deterministic placement by index.
  std::vector<std::future<void>> futures;
  std::atomic<size_t> next{0};
  for (int w = 0; w < jobs; ++w) {
    futures.push_back(std::async(std::launch::async, [&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= corpus.size()) return;
        docs[i] = parse(corpus[i].second).tree;
        docs[i].source_id = corpus[i].first;
      }
    }));
  }
  for (auto& f : futures) f.get();
  return docs;
}

nlohmann::json Engine::evaluate(const std::vector<NamedDoc>& corpus,
                                const std::string& queries_json) const {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no corpus documents");
  const auto queries = queries_from_json(nlohmann::json::parse(queries_json));
  if (queries.empty()) throw Error(ErrorCode::EmptyQuerySet, "no queries");

  const auto docs = parse_corpus(corpus);
  EngineSimulator simulator(docs, config_.profiles);

  nlohmann::json out;
  for (Architecture a : {Architecture::STS, Architecture::IR, Architecture::ISG}) {
    const auto responses = simulator.simulate(queries, a);
    const VisReport report = simulator.score(responses, queries);
    nlohmann::json entry = report.to_json();
    nlohmann::json resp = nlohmann::json::array();
    for (const auto& r : responses) resp.push_back(r.to_json());
    entry["responses"] = resp;
    out["paradigms"][architecture_name(a)] = entry;
  }
  out["note"] = "simulated engines only; scores are not live generative-engine "
                "measurements";
  return out;
}

nlohmann::json Engine::ablate_corpus(const std::vector<NamedDoc>& corpus,
                                     const std::string& queries_json) const {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no corpus documents");
  const auto queries = queries_from_json(nlohmann::json::parse(queries_json));
  if (queries.empty()) throw Error(ErrorCode::EmptyQuerySet, "no queries");

  const auto baseline = parse_corpus(corpus);

  // Stats for the optimizer come from the baseline corpus itself.
  Engine scoped = *this;
  if (!scoped.stats_) {
    FeatureExtractor extractor;
    std::vector<FeatureVector> raw;
    for (const auto& doc : baseline) raw.push_back(extractor.extract_all(doc));
    if (raw.size() >= 2) {
      CorpusStats stats = compute_stats(raw);
      stats.reference = build_reference(baseline);
      scoped.stats_ = stats;
    }
  }

  const CorpusOptimizer runner = [&](bool skip_macro, bool skip_meso,
                                     bool skip_micro) {
    const Optimizer optimizer =
        scoped.make_optimizer(skip_macro, skip_meso, skip_micro);
    std::vector<DocumentTree> out;
    out.reserve(baseline.size());
    for (const auto& doc : baseline) {
      OptimizeResult r = optimizer.optimize(doc);
      r.tree.source_id = doc.source_id;
      out.push_back(std::move(r.tree));
    }
    return out;
  };

  const AblationReport report =
      ablate(baseline, queries, config_.profiles, runner);
  return report.to_json();
}

nlohmann::json Engine::stats_from_corpus(const std::vector<NamedDoc>& corpus) const {
  const auto docs = parse_corpus(corpus);
  FeatureExtractor extractor;
  std::vector<FeatureVector> raw;
  raw.reserve(docs.size());
  for (const auto& doc : docs) raw.push_back(extractor.extract_all(doc));
  CorpusStats stats = compute_stats(raw);
  stats.reference = build_reference(docs);
  return stats.to_json();
}

}  // namespace geosfe
