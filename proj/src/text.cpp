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

#include "geosfe/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace geosfe {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

const std::unordered_set<std::string>& stopword_set() {
  static const std::unordered_set<std::string> kStopwords = {
      "a",     "an",    "the",   "and",   "or",    "but",   "if",    "of",
      "to",    "in",    "on",    "at",    "by",    "for",   "with",  "from",
      "as",    "is",    "are",   "was",   "were",  "be",    "been",  "being",
      "it",    "its",   "this",  "that",  "these", "those", "we",    "you",
      "they",  "he",    "she",   "i",     "me",    "my",    "our",   "your",
      "their", "his",   "her",   "them",  "us",    "what",  "which", "who",
      "whom",  "when",  "where", "why",   "how",   "not",   "no",    "nor",
      "so",    "than",  "then",  "there", "here",  "all",   "each",  "both",
      "few",   "more",  "most",  "other", "some",  "such",  "only",  "own",
      "same",  "too",   "very",  "can",   "will",  "just",  "do",    "does",
      "did",   "have",  "has",   "had",   "about", "into",  "over",  "under",
      "again", "once",  "during","before","after", "above", "below", "up",
      "down",  "out",   "off",   "any"};
  return kStopwords;
}

}  // namespace

std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    if (text.compare(i, 2, "**") == 0) {
      i += 2;
      continue;
    }
    if (text.compare(i, 3, "<u>") == 0) {
      i += 3;
      continue;
    }
    if (text.compare(i, 4, "</u>") == 0) {
      i += 4;
      continue;
    }
    if (text[i] == '[') {
      // [visible](target) -> visible
      size_t close = text.find(']', i + 1);
      if (close != std::string_view::npos && close + 1 < n &&
          text[close + 1] == '(') {
        size_t paren = text.find(')', close + 2);
        if (paren != std::string_view::npos) {
          out.append(text.substr(i + 1, close - i - 1));
          i = paren + 1;
          continue;
        }
      }
    }
    if (text[i] == '*' || text[i] == '_') {
      ++i;
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  const std::string plain = strip_markup(text);
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : plain) {
    if (is_word_byte(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string lemma(std::string_view token) {
  std::string t(token);
  const size_t n = t.size();
  if (n > 3 && t.ends_with("ies")) {
    t.replace(n - 3, 3, "y");
  } else if (t.ends_with("ss")) {
    // keep
  } else if (n > 3 && t.ends_with("s")) {
    t.pop_back();
  }
  if (t.size() > 5 && t.ends_with("ing")) {
    t.resize(t.size() - 3);
  } else if (t.size() > 4 && t.ends_with("ed")) {
    t.resize(t.size() - 2);
  }
  return t;
}

bool is_stopword(std::string_view token) {
  return stopword_set().count(std::string(token)) > 0;
}

bool is_numeric_token(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

int syllable_count(std::string_view token) {
  static constexpr std::string_view kVowels = "aeiouy";
  int groups = 0;
  bool in_group = false;
  for (char c : token) {
    const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool vowel = kVowels.find(lc) != std::string_view::npos;
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }
  return groups > 0 ? groups : 1;
}

std::string slugify(std::string_view heading) {
  std::string slug;
  bool pending_dash = false;
  for (unsigned char c : strip_markup(heading)) {
    if (is_word_byte(c)) {
      if (pending_dash && !slug.empty()) slug.push_back('-');
      pending_dash = false;
      slug.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_dash = true;
    }
  }
  if (slug.empty()) slug = "section";
  return slug;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::vector<TokenRange> token_ranges(std::string_view plain_text) {
  std::vector<TokenRange> ranges;
  size_t start = 0;
  bool in_token = false;
  for (size_t i = 0; i < plain_text.size(); ++i) {
    const bool word = is_word_byte(static_cast<unsigned char>(plain_text[i]));
    if (word && !in_token) {
      start = i;
      in_token = true;
    } else if (!word && in_token) {
      ranges.push_back({start, i});
      in_token = false;
    }
  }
  if (in_token) ranges.push_back({start, plain_text.size()});
  return ranges;
}

std::map<std::string, double> lemma_counts(std::string_view text) {
  std::map<std::string, double> counts;
  for (const auto& tok : tokenize(text)) counts[lemma(tok)] += 1.0;
  return counts;
}

std::map<std::string, double> content_lemma_counts(std::string_view text) {
  std::map<std::string, double> counts;
  for (const auto& tok : tokenize(text)) {
    if (is_stopword(tok) || is_numeric_token(tok)) continue;
    counts[lemma(tok)] += 1.0;
  }
  return counts;
}

bool is_valid_utf8(std::string_view data) {
  size_t i = 0;
  const size_t n = data.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(data[i]);
    size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(data[i + k]) & 0xC0) != 0x80) return false;
    }
    i += len;
  }
  return true;
}

}  // namespace geosfe
