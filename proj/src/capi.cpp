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

#include "geo_sfe.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "geosfe/engine.hpp"

struct geosfe_engine {
  geosfe::Engine impl;
  std::string last_error;
};

namespace {

geosfe_status status_for(geosfe::ErrorCode code) {
  using geosfe::ErrorCode;
  switch (code) {
    case ErrorCode::MalformedInput:
    case ErrorCode::InputTooLarge:
      return GEOSFE_ERR_PARSE;
    case ErrorCode::StatsMismatch:
    case ErrorCode::InsufficientCorpus:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::BadAlpha:
    case ErrorCode::BadConfig:
      return GEOSFE_ERR_BAD_CONFIG;
    case ErrorCode::MappingIncomplete:
      return GEOSFE_ERR_MAPPING;
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptyQuerySet:
      return GEOSFE_ERR_EMPTY_INPUT;
    case ErrorCode::ProviderUnavailable:
      return GEOSFE_ERR_PROVIDER;
    case ErrorCode::IoError:
      return GEOSFE_ERR_INTERNAL;
  }
  return GEOSFE_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

template <typename Fn>
geosfe_status guarded(geosfe_engine* engine, Fn&& fn) {
  if (engine == nullptr) return GEOSFE_ERR_INVALID_ARG;
  engine->last_error.clear();
  try {
    return fn();
  } catch (const geosfe::Error& e) {
    engine->last_error = e.what();
    return status_for(e.code());
  } catch (const std::exception& e) {
    engine->last_error = e.what();
    return GEOSFE_ERR_INTERNAL;
  }
}

std::vector<geosfe::Engine::NamedDoc> collect_docs(const char* const* ids,
                                                   const char* const* docs,
                                                   size_t n) {
  std::vector<geosfe::Engine::NamedDoc> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    out.emplace_back(ids && ids[i] ? ids[i] : "doc" + std::to_string(i),
                     docs[i] ? docs[i] : "");
  }
  return out;
}

}  // namespace

extern "C" {

geosfe_status geosfe_engine_create(const char* config_json, geosfe_engine** out) {
  if (out == nullptr) return GEOSFE_ERR_INVALID_ARG;
  *out = nullptr;
  try {
    auto* engine = new geosfe_engine();
    if (config_json != nullptr && config_json[0] != '\0') {
      engine->impl = geosfe::Engine::from_config_json(config_json);
    }
    *out = engine;
    return GEOSFE_OK;
  } catch (const geosfe::Error& e) {
    return status_for(e.code());
  } catch (const std::exception&) {
    return GEOSFE_ERR_INTERNAL;
  }
}

void geosfe_engine_destroy(geosfe_engine* engine) { delete engine; }

const char* geosfe_last_error(const geosfe_engine* engine) {
  return engine == nullptr ? "" : engine->last_error.c_str();
}

const char* geosfe_version(void) { return "0.1.0"; }

void geosfe_string_free(char* s) { std::free(s); }

geosfe_status geosfe_load_stats(geosfe_engine* engine, const char* stats_json) {
  return guarded(engine, [&]() {
    if (stats_json == nullptr) {
      engine->last_error = "stats_json is null";
      return GEOSFE_ERR_INVALID_ARG;
    }
    engine->impl.load_stats_json(stats_json);
    return GEOSFE_OK;
  });
}

geosfe_status geosfe_extract(geosfe_engine* engine, const char* markdown,
                             char** report_json) {
  return guarded(engine, [&]() {
    if (markdown == nullptr || report_json == nullptr) {
      engine->last_error = "null argument";
      return GEOSFE_ERR_INVALID_ARG;
    }
    *report_json = dup_string(engine->impl.extract(markdown).dump(2));
    return GEOSFE_OK;
  });
}

geosfe_status geosfe_optimize(geosfe_engine* engine, const char* markdown,
                              char** markdown_out, char** log_jsonl,
                              char** summary_json) {
  return guarded(engine, [&]() {
    if (markdown == nullptr || markdown_out == nullptr || log_jsonl == nullptr ||
        summary_json == nullptr) {
      engine->last_error = "null argument";
      return GEOSFE_ERR_INVALID_ARG;
    }
    auto out = engine->impl.optimize(markdown);
    *markdown_out = dup_string(out.markdown);
    *log_jsonl = dup_string(out.log_jsonl);
    *summary_json = dup_string(out.summary.dump(2));
    return GEOSFE_OK;
  });
}

geosfe_status geosfe_check(geosfe_engine* engine, const char* original_md,
                           const char* transformed_md, const char* mapping_json,
                           char** verdict_json) {
  return guarded(engine, [&]() {
    if (original_md == nullptr || transformed_md == nullptr ||
        verdict_json == nullptr) {
      engine->last_error = "null argument";
      return GEOSFE_ERR_INVALID_ARG;
    }
    nlohmann::json mapping;
    const nlohmann::json* mapping_ptr = nullptr;
    if (mapping_json != nullptr && mapping_json[0] != '\0') {
      mapping = nlohmann::json::parse(mapping_json);
      mapping_ptr = &mapping;
    }
    *verdict_json = dup_string(
        engine->impl.check(original_md, transformed_md, mapping_ptr).dump(2));
    return GEOSFE_OK;
  });
}

geosfe_status geosfe_evaluate(geosfe_engine* engine, const char* const* ids,
                              const char* const* docs, size_t n,
                              const char* queries_json, char** report_json) {
  return guarded(engine, [&]() {
    if (docs == nullptr || queries_json == nullptr || report_json == nullptr) {
      engine->last_error = "null argument";
      return GEOSFE_ERR_INVALID_ARG;
    }
    *report_json = dup_string(
        engine->impl.evaluate(collect_docs(ids, docs, n), queries_json).dump(2));
    return GEOSFE_OK;
  });
}

geosfe_status geosfe_ablate(geosfe_engine* engine, const char* const* ids,
                            const char* const* docs, size_t n,
                            const char* queries_json, char** report_json) {
  return guarded(engine, [&]() {
    if (docs == nullptr || queries_json == nullptr || report_json == nullptr) {
      engine->last_error = "null argument";
      return GEOSFE_ERR_INVALID_ARG;
    }
    *report_json = dup_string(
        engine->impl.ablate_corpus(collect_docs(ids, docs, n), queries_json)
            .dump(2));
    return GEOSFE_OK;
  });
}

geosfe_status geosfe_compute_stats(geosfe_engine* engine, const char* const* ids,
                                   const char* const* docs, size_t n,
                                   char** stats_json) {
  return guarded(engine, [&]() {
    if (docs == nullptr || stats_json == nullptr) {
      engine->last_error = "null argument";
      return GEOSFE_ERR_INVALID_ARG;
    }
    *stats_json = dup_string(
        engine->impl.stats_from_corpus(collect_docs(ids, docs, n)).dump(2));
    return GEOSFE_OK;
  });
}

}  // extern "C"
