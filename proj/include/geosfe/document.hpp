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

#ifndef GEOSFE_DOCUMENT_HPP
#define GEOSFE_DOCUMENT_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geosfe {

enum class ErrorCode {
  MalformedInput,
  InputTooLarge,
  StatsMismatch,
  InsufficientCorpus,
  DimensionMismatch,
  BadAlpha,
  MappingIncomplete,
  EmptyCorpus,
  EmptyQuerySet,
  BadConfig,
  ProviderUnavailable,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

struct Diagnostic {
  std::string code;
  std::string message;
  std::string location;
};

enum class Emphasis { None, Bold, Italic, Underline };

struct InlineSpan {
  std::string text;  // visible text, markers excluded
  Emphasis emphasis = Emphasis::None;
  bool is_internal_link = false;
  std::string link_target;  // anchor slug, present iff is_internal_link
};

enum class PositionClass { SentenceInitial, SectionBoundary, Standard };

struct Sentence {
  std::string text;  // marker-free; spans partition it exactly
  std::vector<InlineSpan> spans;
  PositionClass position_class = PositionClass::Standard;
  // Provenance against an original document, maintained by the optimizer.
  // Empty outside an optimization run; never serialized.
  std::vector<int> source_ids;

  bool has_emphasis() const;
};

enum class BlockKind { Paragraph, List, Table, Code, Quote };

struct Block {
  BlockKind kind = BlockKind::Paragraph;
  std::vector<Sentence> sentences;            // paragraph only
  std::vector<std::string> items;             // list only
  bool ordered = false;                       // list only
  std::vector<std::vector<std::string>> rows; // table only, rows[0] = header
  std::string text;                           // code / quote payload
  std::string info;                           // code fence info string
  int word_count = 0;

  // Visible text of the block, markers stripped, for similarity work.
  std::string plain_text() const;
};

struct Section {
  std::string heading;
  int level = 1;
  std::string anchor;
  std::vector<Block> blocks;
  std::vector<Section> children;

  std::string own_text() const;  // this section's blocks only
};

struct DocumentTree {
  std::string title;
  std::vector<Section> sections;
  std::string source_id;

  bool empty() const { return sections.empty(); }
};

struct ParseOptions {
  size_t max_input_bytes = 10 * 1024 * 1024;
};

struct ParseResult {
  DocumentTree tree;
  std::vector<Diagnostic> diagnostics;
};

ParseResult parse(std::string_view markdown, const ParseOptions& options = {});
std::string serialize(const DocumentTree& tree);

std::vector<Sentence> sentence_split(std::string_view paragraph_text);

// Recomputes anchors, word counts and sentence position classes after a
// structural edit. parse() leaves trees already finalized.
void finalize_tree(DocumentTree& tree);

// Flattened views in document order.
std::vector<const Section*> all_sections(const DocumentTree& tree);
std::vector<Section*> all_sections(DocumentTree& tree);
std::vector<const Block*> all_blocks(const DocumentTree& tree);

struct SentenceRef {
  const Sentence* sentence;
  std::string location;  // e.g. "sec:intro/block:2/sent:0"
};
std::vector<SentenceRef> all_sentences(const DocumentTree& tree);

// Whole-document visible text (headings excluded), block texts joined
// with single spaces. This is the token universe for the feature metrics.
std::string document_text(const DocumentTree& tree);
// Heading + block text, used by the topic model so heading edits are
// visible to the document-level divergence check.
std::string document_text_with_headings(const DocumentTree& tree);

int heading_depth(const DocumentTree& tree);

std::string render_sentence_markdown(const Sentence& sentence);

// Spans restricted to the plain-text range [from, to); spans straddling a
// bound are cut, attributes preserved.
std::vector<InlineSpan> slice_spans(const std::vector<InlineSpan>& spans,
                                    size_t from, size_t to);

}  // namespace geosfe

#endif  // GEOSFE_DOCUMENT_HPP
