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

#include "geosfe/document.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_set>

#include "geosfe/text.hpp"

namespace geosfe {

namespace {

// Words that never terminate a sentence even when followed by a period.
// Stored dot-free and lowercase.
const std::unordered_set<std::string>& abbreviation_set() {
  static const std::unordered_set<std::string> kAbbrev = {
      "eg", "ie", "etc", "vs", "cf", "dr", "mr", "mrs", "ms", "prof",
      "fig", "eq", "al", "st", "no", "vol", "approx", "dept"};
  return kAbbrev;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return rstrip(s);
}

int heading_level_of(std::string_view line, std::string_view* text_out) {
  size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 6) return 0;
  if (hashes < line.size() && line[hashes] != ' ') return 0;
  std::string_view rest = line.substr(std::min(hashes + 1, line.size()));
  *text_out = strip(rest);
  return static_cast<int>(hashes);
}

bool is_list_item(std::string_view line, bool* ordered, std::string_view* item) {
  std::string_view s = strip(line);
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*' || s[0] == '+') && s[1] == ' ') {
    *ordered = false;
    *item = strip(s.substr(2));
    return true;
  }
  size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits])))
    ++digits;
  if (digits > 0 && digits + 1 < s.size() &&
      (s[digits] == '.' || s[digits] == ')') && s[digits + 1] == ' ') {
    *ordered = true;
    *item = strip(s.substr(digits + 2));
    return true;
  }
  return false;
}

bool is_table_row(std::string_view line) {
  std::string_view s = strip(line);
  return s.size() >= 2 && s.front() == '|';
}

bool is_table_separator(std::string_view line) {
  std::string_view s = strip(line);
  if (s.empty() || s.front() != '|') return false;
  bool saw_dash = false;
  for (char c : s) {
    if (c == '-') saw_dash = true;
    else if (c != '|' && c != ' ' && c != ':') return false;
  }
  return saw_dash;
}

std::vector<std::string> split_table_cells(std::string_view line) {
  std::string_view s = strip(line);
  if (!s.empty() && s.front() == '|') s.remove_prefix(1);
  if (!s.empty() && s.back() == '|') s.remove_suffix(1);
  std::vector<std::string> cells;
  std::string cur;
  for (char c : s) {
    if (c == '|') {
      cells.emplace_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(strip(cur));
  return cells;
}

// --- inline span parsing ------------------------------------------------

std::vector<InlineSpan> parse_spans(std::string_view raw) {
  std::vector<InlineSpan> spans;
  std::string plain;
  auto flush_plain = [&]() {
    if (!plain.empty()) {
      spans.push_back({plain, Emphasis::None, false, ""});
      plain.clear();
    }
  };
  size_t i = 0;
  const size_t n = raw.size();
  while (i < n) {
    if (raw.compare(i, 2, "**") == 0) {
      size_t close = raw.find("**", i + 2);
      if (close != std::string_view::npos && close > i + 2) {
        flush_plain();
        spans.push_back({std::string(raw.substr(i + 2, close - i - 2)),
                         Emphasis::Bold, false, ""});
        i = close + 2;
        continue;
      }
    }
    if (raw.compare(i, 3, "<u>") == 0) {
      size_t close = raw.find("</u>", i + 3);
      if (close != std::string_view::npos && close > i + 3) {
        flush_plain();
        spans.push_back({std::string(raw.substr(i + 3, close - i - 3)),
                         Emphasis::Underline, false, ""});
        i = close + 4;
        continue;
      }
    }
    if (raw[i] == '[') {
      size_t close = raw.find(']', i + 1);
      if (close != std::string_view::npos && close + 1 < n &&
          raw[close + 1] == '(') {
        size_t paren = raw.find(')', close + 2);
        if (paren != std::string_view::npos) {
          std::string_view target = raw.substr(close + 2, paren - close - 2);
          if (!target.empty() && target.front() == '#') {
            flush_plain();
            spans.push_back({std::string(raw.substr(i + 1, close - i - 1)),
                             Emphasis::None, true,
                             std::string(target.substr(1))});
            i = paren + 1;
            continue;
          }
        }
      }
    }
    if (raw[i] == '*') {
      size_t close = raw.find('*', i + 1);
      if (close != std::string_view::npos && close > i + 1 &&
          (close + 1 >= n || raw[close + 1] != '*')) {
        flush_plain();
        spans.push_back({std::string(raw.substr(i + 1, close - i - 1)),
                         Emphasis::Italic, false, ""});
        i = close + 1;
        continue;
      }
    }
    plain.push_back(raw[i]);
    ++i;
  }
  flush_plain();
  return spans;
}

std::string spans_plain_text(const std::vector<InlineSpan>& spans) {
  std::string out;
  for (const auto& s : spans) out += s.text;
  return out;
}

}  // namespace

std::vector<InlineSpan> slice_spans(const std::vector<InlineSpan>& spans,
                                    size_t from, size_t to) {
  std::vector<InlineSpan> out;
  size_t pos = 0;
  for (const auto& s : spans) {
    const size_t start = pos;
    const size_t end = pos + s.text.size();
    pos = end;
    if (end <= from || start >= to) continue;
    const size_t lo = std::max(start, from);
    const size_t hi = std::min(end, to);
    InlineSpan piece = s;
    piece.text = s.text.substr(lo - start, hi - lo);
    if (!piece.text.empty()) out.push_back(std::move(piece));
  }
  return out;
}

namespace {

// Sentence boundary offsets (end positions) in plain text.
std::vector<size_t> sentence_boundaries(std::string_view text) {
  std::vector<size_t> ends;
  const size_t n = text.size();
  for (size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // Trailing terminator run stays with the sentence (e.g. "?!" or "...").
    size_t j = i;
    while (j + 1 < n && (text[j + 1] == '.' || text[j + 1] == '!' ||
                         text[j + 1] == '?' || text[j + 1] == ')' ||
                         text[j + 1] == '"' || text[j + 1] == '\''))
      ++j;
    if (j + 1 >= n) {
      ends.push_back(n);
      break;
    }
    if (text[j + 1] != ' ' && text[j + 1] != '\t') {
      i = j;
      continue;
    }
    size_t k = j + 1;
    while (k < n && (text[k] == ' ' || text[k] == '\t')) ++k;
    if (k >= n) {
      ends.push_back(n);
      break;
    }
    const unsigned char next = static_cast<unsigned char>(text[k]);
    if (!(std::isupper(next) || std::isdigit(next))) {
      i = j;
      continue;
    }
    if (c == '.') {
      // Abbreviation guard: collect the word just before the period.
      size_t w = i;
      while (w > 0 && text[w - 1] != ' ' && text[w - 1] != '\t') --w;
      std::string word;
      for (size_t p = w; p < i; ++p) {
        const unsigned char ch = static_cast<unsigned char>(text[p]);
        if (std::isalpha(ch)) word.push_back(static_cast<char>(std::tolower(ch)));
      }
      if (abbreviation_set().count(word) > 0) {
        i = j;
        continue;
      }
    }
    ends.push_back(j + 1);
    i = j;
  }
  if (ends.empty() || ends.back() < n) {
    // Trailing text without a terminator is still a sentence.
    std::string_view tail = strip(text.substr(ends.empty() ? 0 : ends.back()));
    if (!tail.empty()) ends.push_back(n);
  }
  return ends;
}

std::vector<Sentence> split_spans_into_sentences(
    const std::vector<InlineSpan>& spans) {
  const std::string plain = spans_plain_text(spans);
  std::vector<Sentence> sentences;
  size_t start = 0;
  for (size_t end : sentence_boundaries(plain)) {
    size_t lo = start;
    while (lo < end && (plain[lo] == ' ' || plain[lo] == '\t')) ++lo;
    size_t hi = end;
    while (hi > lo && (plain[hi - 1] == ' ' || plain[hi - 1] == '\t')) --hi;
    if (hi > lo) {
      Sentence s;
      s.spans = slice_spans(spans, lo, hi);
      s.text = spans_plain_text(s.spans);
      sentences.push_back(std::move(s));
    }
    start = end;
  }
  return sentences;
}

int block_word_count(const Block& b) {
  return static_cast<int>(tokenize(b.plain_text()).size());
}

void render_block(const Block& b, std::string& out);

void render_section(const Section& sec, std::string& out) {
  if (!sec.heading.empty()) {
    out.append(static_cast<size_t>(sec.level), '#');
    out.push_back(' ');
    out += sec.heading;
    out += "\n\n";
  }
  for (const auto& b : sec.blocks) render_block(b, out);
  for (const auto& child : sec.children) render_section(child, out);
}

std::string render_span(const InlineSpan& s) {
  if (s.is_internal_link) return "[" + s.text + "](#" + s.link_target + ")";
  switch (s.emphasis) {
    case Emphasis::Bold: return "**" + s.text + "**";
    case Emphasis::Italic: return "*" + s.text + "*";
    case Emphasis::Underline: return "<u>" + s.text + "</u>";
    case Emphasis::None: break;
  }
  return s.text;
}

void render_block(const Block& b, std::string& out) {
  switch (b.kind) {
    case BlockKind::Paragraph: {
      std::string line;
      for (size_t i = 0; i < b.sentences.size(); ++i) {
        if (i > 0) line.push_back(' ');
        line += render_sentence_markdown(b.sentences[i]);
      }
      if (line.empty()) return;
      out += line;
      out += "\n\n";
      break;
    }
    case BlockKind::List: {
      for (size_t i = 0; i < b.items.size(); ++i) {
        if (b.ordered) {
          out += std::to_string(i + 1) + ". " + b.items[i] + "\n";
        } else {
          out += "- " + b.items[i] + "\n";
        }
      }
      out.push_back('\n');
      break;
    }
    case BlockKind::Table: {
      if (b.rows.empty()) return;
      auto render_row = [&](const std::vector<std::string>& row) {
        out.push_back('|');
        for (const auto& cell : row) {
          out.push_back(' ');
          out += cell;
          out += " |";
        }
        out.push_back('\n');
      };
      render_row(b.rows[0]);
      out.push_back('|');
      for (size_t i = 0; i < b.rows[0].size(); ++i) out += " --- |";
      out.push_back('\n');
      for (size_t i = 1; i < b.rows.size(); ++i) render_row(b.rows[i]);
      out.push_back('\n');
      break;
    }
    case BlockKind::Code: {
      out += "```" + b.info + "\n" + b.text;
      if (!b.text.empty() && b.text.back() != '\n') out.push_back('\n');
      out += "```\n\n";
      break;
    }
    case BlockKind::Quote: {
      out += "> " + b.text + "\n\n";
      break;
    }
  }
}

struct RawBlockAccum {
  std::vector<std::string> paragraph_lines;

  void flush_into(std::vector<Block>& blocks) {
    if (paragraph_lines.empty()) return;
    std::string joined;
    for (size_t i = 0; i < paragraph_lines.size(); ++i) {
      if (i > 0) joined.push_back(' ');
      joined += paragraph_lines[i];
    }
    paragraph_lines.clear();
    Block b;
    b.kind = BlockKind::Paragraph;
    b.sentences = split_spans_into_sentences(parse_spans(joined));
    if (!b.sentences.empty()) blocks.push_back(std::move(b));
  }
};

void assign_position_classes(Section& sec) {
  // Paragraph sentences of this section's own blocks, in order.
  std::vector<Sentence*> flat;
  std::vector<size_t> block_first;  // index into flat of each paragraph start
  for (auto& b : sec.blocks) {
    if (b.kind != BlockKind::Paragraph) continue;
    block_first.push_back(flat.size());
    for (auto& s : b.sentences) flat.push_back(&s);
  }
  if (flat.empty()) {
    for (auto& child : sec.children) assign_position_classes(child);
    return;
  }
  std::unordered_set<size_t> starts(block_first.begin(), block_first.end());
  for (size_t i = 0; i < flat.size(); ++i) {
    if (i == 0 || i + 1 == flat.size()) {
      flat[i]->position_class = PositionClass::SectionBoundary;
    } else if (starts.count(i) > 0) {
      flat[i]->position_class = PositionClass::SentenceInitial;
    } else {
      flat[i]->position_class = PositionClass::Standard;
    }
  }
  for (auto& child : sec.children) assign_position_classes(child);
}

void collect_sections(const Section& sec, std::vector<const Section*>& out) {
  out.push_back(&sec);
  for (const auto& c : sec.children) collect_sections(c, out);
}

void collect_sections_mut(Section& sec, std::vector<Section*>& out) {
  out.push_back(&sec);
  for (auto& c : sec.children) collect_sections_mut(c, out);
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::InputTooLarge: return "InputTooLarge";
    case ErrorCode::StatsMismatch: return "StatsMismatch";
    case ErrorCode::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadAlpha: return "BadAlpha";
    case ErrorCode::MappingIncomplete: return "MappingIncomplete";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyQuerySet: return "EmptyQuerySet";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool Sentence::has_emphasis() const {
  return std::any_of(spans.begin(), spans.end(), [](const InlineSpan& s) {
    return s.emphasis != Emphasis::None;
  });
}

std::string Block::plain_text() const {
  switch (kind) {
    case BlockKind::Paragraph: {
      std::string out;
      for (size_t i = 0; i < sentences.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += sentences[i].text;
      }
      return out;
    }
    case BlockKind::List: {
      std::string out;
      for (size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += strip_markup(items[i]);
      }
      return out;
    }
    case BlockKind::Table: {
      std::string out;
      for (const auto& row : rows) {
        for (const auto& cell : row) {
          if (!out.empty()) out.push_back(' ');
          out += strip_markup(cell);
        }
      }
      return out;
    }
    case BlockKind::Code:
    case BlockKind::Quote: {
      std::string out = text;
      std::replace(out.begin(), out.end(), '\n', ' ');
      return strip_markup(out);
    }
  }
  return "";
}

std::string Section::own_text() const {
  std::string out;
  for (const auto& b : blocks) {
    const std::string t = b.plain_text();
    if (t.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string render_sentence_markdown(const Sentence& sentence) {
  std::string out;
  for (const auto& s : sentence.spans) out += render_span(s);
  return out;
}

std::vector<Sentence> sentence_split(std::string_view paragraph_text) {
  return split_spans_into_sentences(parse_spans(std::string(paragraph_text)));
}

ParseResult parse(std::string_view markdown, const ParseOptions& options) {
  if (markdown.size() > options.max_input_bytes) {
    throw Error(ErrorCode::InputTooLarge,
                "input exceeds " + std::to_string(options.max_input_bytes) +
                    " bytes");
  }
  if (!is_valid_utf8(markdown)) {
    throw Error(ErrorCode::MalformedInput, "input is not valid UTF-8");
  }

  ParseResult result;

  // Section stack; index 0 is a virtual root holding top-level sections.
  Section root;
  root.level = 0;
  std::vector<Section*> stack = {&root};
  auto current_blocks = [&]() -> std::vector<Block>& {
    if (stack.size() == 1) {
      // Content before any heading: implicit untitled top-level section.
      root.children.push_back(Section{"", 1, "", {}, {}});
      stack.push_back(&root.children.back());
    }
    return stack.back()->blocks;
  };

  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : markdown) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    lines.push_back(cur);
  }

  RawBlockAccum accum;
  // Paragraph lines force the target section on arrival, so a non-empty
  // accumulator always has stack.size() > 1.
  auto flush_accum = [&]() {
    if (!accum.paragraph_lines.empty()) accum.flush_into(stack.back()->blocks);
  };

  size_t li = 0;
  const size_t nlines = lines.size();
  int line_no = 0;
  while (li < nlines) {
    const std::string& line = lines[li];
    line_no = static_cast<int>(li) + 1;
    std::string_view text_part;
    const int level = heading_level_of(rstrip(line), &text_part);

    if (level > 0) {
      flush_accum();
      while (stack.back()->level >= level) stack.pop_back();
      int effective = level;
      if (level > stack.back()->level + 1) {
        effective = stack.back()->level + 1;
        result.diagnostics.push_back(
            {"heading_level_skip",
             "heading level " + std::to_string(level) + " re-leveled to " +
                 std::to_string(effective),
             "line " + std::to_string(line_no)});
      }
      Section sec;
      sec.heading = std::string(text_part);
      sec.level = effective;
      stack.back()->children.push_back(std::move(sec));
      stack.push_back(&stack.back()->children.back());
      ++li;
      continue;
    }

    if (is_blank(line)) {
      flush_accum();
      ++li;
      continue;
    }

    // Fenced code block.
    if (strip(line).substr(0, 3) == "```") {
      flush_accum();
      Block b;
      b.kind = BlockKind::Code;
      b.info = std::string(strip(strip(line).substr(3)));
      ++li;
      std::string body;
      while (li < nlines && strip(lines[li]).substr(0, 3) != "```") {
        body += lines[li];
        body.push_back('\n');
        ++li;
      }
      if (li < nlines) ++li;  // closing fence
      b.text = body;
      current_blocks().push_back(std::move(b));
      continue;
    }

    // Block quote.
    if (!strip(line).empty() && strip(line).front() == '>') {
      flush_accum();
      Block b;
      b.kind = BlockKind::Quote;
      std::string body;
      while (li < nlines && !strip(lines[li]).empty() &&
             strip(lines[li]).front() == '>') {
        std::string_view content = strip(lines[li]);
        content.remove_prefix(1);
        content = strip(content);
        if (!body.empty()) body.push_back(' ');
        body += std::string(content);
        ++li;
      }
      b.text = body;
      current_blocks().push_back(std::move(b));
      continue;
    }

    // Table: needs a separator as its second row.
    if (is_table_row(line) && li + 1 < nlines && is_table_separator(lines[li + 1])) {
      flush_accum();
      Block b;
      b.kind = BlockKind::Table;
      b.rows.push_back(split_table_cells(line));
      li += 2;
      while (li < nlines && is_table_row(lines[li]) &&
             !is_table_separator(lines[li])) {
        b.rows.push_back(split_table_cells(lines[li]));
        ++li;
      }
      current_blocks().push_back(std::move(b));
      continue;
    }

    // List run.
    {
      bool ordered = false;
      std::string_view item;
      if (is_list_item(line, &ordered, &item)) {
        flush_accum();
        Block b;
        b.kind = BlockKind::List;
        b.ordered = ordered;
        b.items.emplace_back(item);
        ++li;
        bool o2 = false;
        while (li < nlines && is_list_item(lines[li], &o2, &item) &&
               o2 == ordered) {
          b.items.emplace_back(item);
          ++li;
        }
        current_blocks().push_back(std::move(b));
        continue;
      }
    }

    // Paragraph line.
    if (stack.size() == 1) current_blocks();  // force implicit section
    accum.paragraph_lines.emplace_back(strip(line));
    ++li;
  }
  flush_accum();

  result.tree.sections = std::move(root.children);
  finalize_tree(result.tree);
  return result;
}

void finalize_tree(DocumentTree& tree) {
  // Anchors: deterministic slugs, duplicates suffixed in document order.
  std::map<std::string, int> seen;
  for (Section* sec : all_sections(tree)) {
    std::string slug = slugify(sec->heading);
    int& count = seen[slug];
    sec->anchor = count == 0 ? slug : slug + "-" + std::to_string(count);
    ++count;
  }
  for (Section* sec : all_sections(tree)) {
    for (auto& b : sec->blocks) b.word_count = block_word_count(b);
  }
  for (auto& sec : tree.sections) assign_position_classes(sec);
  tree.title = "";
  for (const Section* sec : all_sections(tree)) {
    if (sec->level == 1 && !sec->heading.empty()) {
      tree.title = sec->heading;
      break;
    }
  }
}

std::string serialize(const DocumentTree& tree) {
  std::string out;
  for (const auto& sec : tree.sections) render_section(sec, out);
  // Exactly one trailing newline.
  while (out.size() >= 2 && out[out.size() - 1] == '\n' &&
         out[out.size() - 2] == '\n')
    out.pop_back();
  if (!out.empty() && out.back() != '\n') out.push_back('\n');
  return out;
}

std::vector<const Section*> all_sections(const DocumentTree& tree) {
  std::vector<const Section*> out;
  for (const auto& s : tree.sections) collect_sections(s, out);
  return out;
}

std::vector<Section*> all_sections(DocumentTree& tree) {
  std::vector<Section*> out;
  for (auto& s : tree.sections) collect_sections_mut(s, out);
  return out;
}

std::vector<const Block*> all_blocks(const DocumentTree& tree) {
  std::vector<const Block*> out;
  for (const Section* sec : all_sections(tree)) {
    for (const auto& b : sec->blocks) out.push_back(&b);
  }
  return out;
}

std::vector<SentenceRef> all_sentences(const DocumentTree& tree) {
  std::vector<SentenceRef> out;
  const auto sections = all_sections(tree);
  for (size_t si = 0; si < sections.size(); ++si) {
    const Section* sec = sections[si];
    for (size_t bi = 0; bi < sec->blocks.size(); ++bi) {
      const Block& b = sec->blocks[bi];
      if (b.kind != BlockKind::Paragraph) continue;
      for (size_t ki = 0; ki < b.sentences.size(); ++ki) {
        out.push_back({&b.sentences[ki],
                       "sec:" + sec->anchor + "/block:" + std::to_string(bi) +
                           "/sent:" + std::to_string(ki)});
      }
    }
  }
  return out;
}

std::string document_text(const DocumentTree& tree) {
  std::string out;
  for (const Block* b : all_blocks(tree)) {
    const std::string t = b->plain_text();
    if (t.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string document_text_with_headings(const DocumentTree& tree) {
  std::string out;
  for (const Section* sec : all_sections(tree)) {
    if (!sec->heading.empty()) {
      if (!out.empty()) out.push_back(' ');
      out += strip_markup(sec->heading);
    }
    const std::string t = sec->own_text();
    if (!t.empty()) {
      if (!out.empty()) out.push_back(' ');
      out += t;
    }
  }
  return out;
}

int heading_depth(const DocumentTree& tree) {
  int depth = 0;
  for (const Section* sec : all_sections(tree)) depth = std::max(depth, sec->level);
  return depth;
}

}  // namespace geosfe
