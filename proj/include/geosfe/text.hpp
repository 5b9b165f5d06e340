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

#ifndef GEOSFE_TEXT_HPP
#define GEOSFE_TEXT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace geosfe {

// Single tokenizer shared by every density/ratio metric: markup stripped,
// lowercased, split on anything that is not alphanumeric. Bytes >= 0x80 are
// treated as word characters so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

// Strips **bold**, *italic*, <u>underline</u> markers and collapses
// [text](target) links to their visible text.
std::string strip_markup(std::string_view text);

// Light deterministic suffix stemmer. Not linguistically complete; the point
// is that inflected forms of the same content word collapse to one key.
std::string lemma(std::string_view token);

bool is_stopword(std::string_view token);
bool is_numeric_token(std::string_view token);

// Maximal vowel-group count, minimum one per token.
int syllable_count(std::string_view token);

// GitHub-style heading slug: lowercase, alnum kept, runs of anything else
// collapse to single dashes.
std::string slugify(std::string_view heading);

// FNV-1a 64-bit. Used wherever a stable cross-platform hash is needed
// (topic buckets, content digests); std::hash is implementation-defined.
std::uint64_t fnv1a64(std::string_view data);

// Sparse lemma count vector for cosine computations.
std::map<std::string, double> lemma_counts(std::string_view text);

// Character ranges of the tokens inside already-plain text, aligned 1:1
// with tokenize() output for markup-free input.
struct TokenRange {
  size_t begin;
  size_t end;
};
std::vector<TokenRange> token_ranges(std::string_view plain_text);

// Counts of content-word lemmas only (stopwords and pure numbers excluded).
std::map<std::string, double> content_lemma_counts(std::string_view text);

bool is_valid_utf8(std::string_view data);

}  // namespace geosfe

#endif  // GEOSFE_TEXT_HPP
