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

#include "geosfe/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "geosfe/text.hpp"

namespace geosfe {

namespace {

using SectionPath = std::vector<int>;

std::vector<Section>& children_of(DocumentTree& tree, const SectionPath& parent) {
  if (parent.empty()) return tree.sections;
  Section* sec = &tree.sections[static_cast<size_t>(parent[0])];
  for (size_t i = 1; i < parent.size(); ++i) {
    sec = &sec->children[static_cast<size_t>(parent[i])];
  }
  return sec->children;
}

Section& section_at(DocumentTree& tree, const SectionPath& path) {
  Section* sec = &tree.sections[static_cast<size_t>(path[0])];
  for (size_t i = 1; i < path.size(); ++i) {
    sec = &sec->children[static_cast<size_t>(path[i])];
  }
  return *sec;
}

struct SecInfo {
  SectionPath path;
  int level = 1;
  int order = 0;  // pre-order position
};

void enumerate_paths(const std::vector<Section>& sections, SectionPath prefix,
                     std::vector<SecInfo>& out) {
  for (size_t i = 0; i < sections.size(); ++i) {
    SectionPath p = prefix;
    p.push_back(static_cast<int>(i));
    out.push_back({p, sections[i].level, static_cast<int>(out.size())});
    enumerate_paths(sections[i].children, p, out);
  }
}

std::vector<SecInfo> enumerate_paths(const DocumentTree& tree) {
  std::vector<SecInfo> out;
  enumerate_paths(tree.sections, {}, out);
  return out;
}

std::string digest(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return std::string(buf);
}

std::string path_str(const SectionPath& path) {
  std::string out = "sec";
  for (int idx : path) out += ":" + std::to_string(idx);
  return out;
}

double section_words(const Section& sec) {
  double w = 0.0;
  for (const auto& b : sec.blocks) w += b.word_count;
  return w;
}

std::string capitalized(std::string word) {
  if (!word.empty()) {
    word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  }
  return word;
}

const std::set<std::string>& enumeration_cues() {
  static const std::set<std::string> kCues = {
      "first", "second", "third",  "fourth", "fifth",       "sixth",
      "next",  "then",   "finally","lastly", "additionally", "moreover",
      "furthermore", "also"};
  return kCues;
}

const std::set<std::string>& ordinal_cues() {
  static const std::set<std::string> kOrdinals = {
      "first", "second", "third", "fourth", "fifth",
      "sixth", "seventh", "eighth", "ninth", "tenth"};
  return kOrdinals;
}

const std::set<std::string>& connective_words() {
  static const std::set<std::string> kConnectives = {
      "however", "therefore", "thus",      "hence",     "consequently",
      "nevertheless", "nonetheless", "meanwhile", "accordingly", "instead",
      "otherwise"};
  return kConnectives;
}

const std::set<std::string>& coordinating_conjunctions() {
  static const std::set<std::string> kConj = {"and", "but", "or",
                                              "nor", "so",  "yet"};
  return kConj;
}

// Wraps the plain-text char range [lo, hi) of a sentence.
void wrap_range(Sentence& sentence, size_t lo, size_t hi, Emphasis emphasis,
                const std::string& link_target) {
  auto head = slice_spans(sentence.spans, 0, lo);
  auto mid = slice_spans(sentence.spans, lo, hi);
  auto tail = slice_spans(sentence.spans, hi, sentence.text.size());
  std::string mid_text;
  for (const auto& s : mid) mid_text += s.text;
  InlineSpan wrapped;
  wrapped.text = mid_text;
  if (link_target.empty()) {
    wrapped.emphasis = emphasis;
  } else {
    wrapped.is_internal_link = true;
    wrapped.link_target = link_target;
  }
  std::vector<InlineSpan> next = std::move(head);
  next.push_back(std::move(wrapped));
  for (auto& s : tail) next.push_back(std::move(s));
  sentence.spans = std::move(next);
}

// Top content terms of a text by TF-IDF against an optional reference.
std::vector<std::string> top_terms(std::string_view text, const IdfTable* ref,
                                   size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [term, count] : content_lemma_counts(text)) {
    scored.emplace_back(count * (ref ? ref->idf(term) : 1.0), term);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace

const char* final_mode_name(FinalMode mode) {
  switch (mode) {
    case FinalMode::Full: return "full";
    case FinalMode::Partial: return "partial";
    case FinalMode::Minimal: return "minimal";
    case FinalMode::Identity: return "identity";
  }
  return "identity";
}

nlohmann::json TransformEntry::to_json() const {
  nlohmann::json v;
  v["sentence_min_sim"] = verdict.sentence_min_sim;
  v["paragraph_chain_mean"] = verdict.paragraph_chain_mean;
  v["js_divergence"] = verdict.js_div;
  nlohmann::json passed = nlohmann::json::array();
  if (verdict.sentence_pass) passed.push_back("sentence");
  if (verdict.paragraph_pass) passed.push_back("paragraph");
  if (verdict.document_pass) passed.push_back("document");
  v["passed_levels"] = passed;
  v["overall"] = verdict.overall;

  nlohmann::json j;
  j["level"] = level;
  j["edit_kind"] = edit_kind;
  j["location"] = location;
  j["before_digest"] = before_digest;
  j["after_digest"] = after_digest;
  j["verdict"] = v;
  j["applied"] = applied;
  if (!note.empty()) j["note"] = note;
  return j;
}

std::string TransformLog::to_jsonl() const {
  std::string out;
  for (const auto& e : entries) {
    out += e.to_json().dump();
    out.push_back('\n');
  }
  return out;
}

nlohmann::json OptimizeResult::summary_json() const {
  nlohmann::json j;
  j["final_mode"] = final_mode_name(log.final_mode);
  j["p_before"] = probability_before;
  j["p_after"] = probability_after;
  j["verdict"] = {
      {"sentence_min_sim", final_verdict.sentence_min_sim},
      {"paragraph_chain_mean", final_verdict.paragraph_chain_mean},
      {"js_divergence", final_verdict.js_div},
      {"overall", final_verdict.overall},
  };
  j["edits_applied"] =
      std::count_if(log.entries.begin(), log.entries.end(),
                    [](const TransformEntry& e) { return e.applied; });
  j["edits_total"] = log.entries.size();
  j["mapping"] = log.mapping;
  return j;
}

void seed_provenance(DocumentTree& tree) {
  int next = 0;
  for (Section* sec : all_sections(tree)) {
    for (auto& b : sec->blocks) {
      if (b.kind != BlockKind::Paragraph) continue;
      for (auto& s : b.sentences) s.source_ids = {next++};
    }
  }
}

SentenceMapping collect_mapping(const DocumentTree& tree) {
  SentenceMapping mapping;
  for (const auto& ref : all_sentences(tree)) {
    mapping.push_back(ref.sentence->source_ids);
  }
  return mapping;
}

Optimizer::Optimizer(OptimizationConfig config, TargetProfile targets,
                     ProfileSet profiles,
                     std::shared_ptr<const SimilarityProvider> provider,
                     const CorpusStats* stats, int topic_count)
    : config_(std::move(config)),
      targets_(std::move(targets)),
      profiles_(std::move(profiles)),
      provider_(std::move(provider)),
      stats_(stats),
      topics_(topic_count),
      extractor_(stats, topic_count) {
  if (!provider_) provider_ = std::make_shared<LexicalProvider>();
}

FeatureVector Optimizer::normalized(const FeatureVector& raw) const {
  return stats_ ? geosfe::normalize(raw, *stats_) : raw;
}

double Optimizer::mixed_probability(const FeatureVector& raw) const {
  return predict_mixed(normalized(raw), targets_.alpha, profiles_);
}

double Optimizer::level_gap(const FeatureVector& raw, const std::string& level) const {
  std::vector<size_t> dims;
  if (level == "macro") dims = {kDimHeadingDepth, kDimBalance, kDimLinkDensity};
  else if (level == "meso") dims = {kDimParagraphCv, kDimFormatDiversity};
  else dims = {kDimEmphasisDensity};

  auto z = [&](double x, size_t dim) {
    if (stats_ && !stats_->constant(dim)) {
      return (x - stats_->means[dim]) / stats_->stds[dim];
    }
    return x;
  };
  double acc = 0.0;
  for (size_t dim : dims) {
    const double d = z(raw.values[dim], dim) - z(targets_.sf_base[dim], dim);
    acc += d * d;
  }
  return std::sqrt(acc);
}

namespace {

struct LevelCounters {
  bool attempted = false;
  int applied = 0;
  int failed = 0;
};

}  // namespace

// Shared per-run state for the three level passes.
struct OptimizerRun {
  const Optimizer& opt;
  const OptimizationConfig& cfg;
  DocumentTree original;
  DocumentTree current;
  PreservationVerdict baseline;
  TransformLog log;
  std::vector<std::string> keywords;
  LevelCounters macro, meso, micro;
  std::set<std::string> rejected;  // edit keys that failed their verdict

  OptimizerRun(const Optimizer& o, const DocumentTree& input)
      : opt(o), cfg(o.config_) {
    current = input;
    finalize_tree(current);
    seed_provenance(current);
    original = current;
    baseline = check_preservation(original, current, collect_mapping(current),
                                  *opt.provider_, opt.topics_,
                                  cfg.thresholds);
    keywords = cfg.keywords;
    if (keywords.empty()) keywords = opt.extractor_.derive_keywords(original);
    std::vector<std::string> lemmas;
    for (const auto& k : keywords) {
      for (const auto& tok : tokenize(k)) lemmas.push_back(lemma(tok));
    }
    keywords = std::move(lemmas);
  }

  LevelCounters& counters(const std::string& level) {
    if (level == "macro") return macro;
    if (level == "meso") return meso;
    return micro;
  }

  bool acceptable(const PreservationVerdict& v) const {
    return (v.document_pass || !baseline.document_pass) &&
           (v.paragraph_pass || !baseline.paragraph_pass) &&
           (v.sentence_pass || !baseline.sentence_pass);
  }

  int budget_left(const std::string& level) {
    return cfg.max_passes - counters(level).applied;
  }

  // Applies a mutation, checks preservation against the original, rolls
  // back and records a failing entry when the verdict is not acceptable.
  bool try_edit(const std::string& level, const std::string& kind,
                const std::string& location, const std::string& before_region,
                const std::function<void(DocumentTree&)>& mutate,
                std::string note = "") {
    LevelCounters& c = counters(level);
    c.attempted = true;
    DocumentTree backup = current;
    mutate(current);
    finalize_tree(current);
    const PreservationVerdict verdict = check_preservation(
        original, current, collect_mapping(current), *opt.provider_,
        opt.topics_, cfg.thresholds);
    const bool ok = acceptable(verdict);

    TransformEntry entry;
    entry.level = level;
    entry.edit_kind = kind;
    entry.location = location;
    entry.before_digest = digest(before_region);
    entry.after_digest = digest(serialize(current));
    entry.verdict = verdict;
    entry.applied = ok;
    entry.note = std::move(note);
    if (!ok) {
      if (entry.note.empty()) entry.note = "semantic check failed";
      current = std::move(backup);
      ++c.failed;
    } else {
      ++c.applied;
    }
    log.entries.push_back(std::move(entry));
    return ok;
  }

  void record_infeasible(const std::string& level, const std::string& note) {
    TransformEntry entry;
    entry.level = level;
    entry.edit_kind = "no_feasible_edit";
    entry.location = "-";
    entry.applied = false;
    entry.verdict = baseline;
    entry.note = note;
    log.entries.push_back(std::move(entry));
  }

  double sim(std::string_view a, std::string_view b) const {
    return opt.provider_->sentence_sim(a, b);
  }

  const IdfTable* reference() const {
    return opt.stats_ ? &opt.stats_->reference : nullptr;
  }

  // ---- macro level -------------------------------------------------------

  void macro_pass();
  void adjust_depth(int target_depth);
  bool merge_step();
  bool split_step();
  void rebalance_sections();
  void insert_links();

  // ---- meso level --------------------------------------------------------

  void meso_pass();
  bool split_long_paragraph();
  bool merge_short_paragraph();
  void convert_to_lists();

  // ---- micro level -------------------------------------------------------

  void micro_pass();
  int emphasize_sentence_keywords(Sentence& sentence);
  void readability_splits();
};

// --------------------------------------------------------------------------
// Macro: heading-depth adjustment, size rebalancing, cross-reference links.
// --------------------------------------------------------------------------

bool OptimizerRun::merge_step() {
  const int depth = heading_depth(current);
  const auto infos = enumerate_paths(current);

  // Sibling pairs at the deepest level, most similar first.
  struct Candidate {
    SectionPath parent;
    int i, j;
    double sim_value;
    int order;
  };
  std::vector<Candidate> pairs;
  std::vector<SectionPath> singles;
  std::set<SectionPath> seen_parents;
  for (const auto& info : infos) {
    if (info.level != depth) continue;
    SectionPath parent = info.path;
    parent.pop_back();
    if (seen_parents.count(parent) > 0) continue;
    seen_parents.insert(parent);
    auto& siblings = children_of(current, parent);
    std::vector<int> deep_idx;
    for (size_t i = 0; i < siblings.size(); ++i) {
      if (siblings[i].level == depth) deep_idx.push_back(static_cast<int>(i));
    }
    if (deep_idx.size() == 1 && !parent.empty()) {
      SectionPath single = parent;
      single.push_back(deep_idx[0]);
      singles.push_back(single);
    }
    for (size_t a = 0; a < deep_idx.size(); ++a) {
      for (size_t b = a + 1; b < deep_idx.size(); ++b) {
        auto& si = siblings[static_cast<size_t>(deep_idx[a])];
        auto& sj = siblings[static_cast<size_t>(deep_idx[b])];
        pairs.push_back({parent, deep_idx[a], deep_idx[b],
                         sim(si.own_text(), sj.own_text()),
                         static_cast<int>(pairs.size())});
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return a.sim_value > b.sim_value;
  });

  for (const auto& cand : pairs) {
    auto& siblings = children_of(current, cand.parent);
    const Section& sj = siblings[static_cast<size_t>(cand.j)];
    const std::string key = "merge|" + path_str(cand.parent) + "|" +
                            std::to_string(cand.i) + "|" + std::to_string(cand.j) +
                            "|" + digest(sj.own_text());
    if (rejected.count(key) > 0) continue;
    const std::string dropped = sj.heading;
    const std::string before = siblings[static_cast<size_t>(cand.i)].own_text();
    SectionPath parent = cand.parent;
    const int i = cand.i, j = cand.j;
    const bool ok = try_edit(
        "macro", "merge_sections", path_str(parent) + "/" + std::to_string(i),
        before,
        [parent, i, j](DocumentTree& t) {
          auto& ch = children_of(t, parent);
          auto& dst = ch[static_cast<size_t>(i)];
          auto& src = ch[static_cast<size_t>(j)];
          for (auto& b : src.blocks) dst.blocks.push_back(std::move(b));
          for (auto& c : src.children) dst.children.push_back(std::move(c));
          ch.erase(ch.begin() + j);
        },
        "dropped heading: " + dropped);
    if (ok) return true;
    rejected.insert(key);
  }

  // No sibling pair available: dissolve a lone deepest section into its parent.
  for (const auto& single : singles) {
    SectionPath parent = single;
    parent.pop_back();
    const int idx = single.back();
    Section& sec = section_at(current, single);
    const std::string key = "dissolve|" + path_str(single) + "|" +
                            digest(sec.own_text());
    if (rejected.count(key) > 0) continue;
    const std::string dropped = sec.heading;
    const bool ok = try_edit(
        "macro", "merge_into_parent", path_str(single), sec.own_text(),
        [parent, idx](DocumentTree& t) {
          Section& par = section_at(t, parent);
          Section& child = par.children[static_cast<size_t>(idx)];
          for (auto& b : child.blocks) par.blocks.push_back(std::move(b));
          par.children.erase(par.children.begin() + idx);
        },
        "dropped heading: " + dropped);
    if (ok) return true;
    rejected.insert(key);
  }
  return false;
}

bool OptimizerRun::split_step() {
  const int depth = heading_depth(current);
  if (depth == 0) return false;
  const auto infos = enumerate_paths(current);

  struct Candidate {
    SectionPath path;
    double diversity;
  };
  std::vector<Candidate> candidates;
  for (const auto& info : infos) {
    if (info.level != depth) continue;
    Section& sec = section_at(current, info.path);
    if (sec.blocks.size() < 2) continue;
    // Topic diversity: 1 - mean pairwise paragraph similarity.
    std::vector<std::string> paras;
    for (const auto& b : sec.blocks) {
      if (b.kind == BlockKind::Paragraph) paras.push_back(b.plain_text());
    }
    double diversity = 0.0;
    if (paras.size() >= 2) {
      double sum = 0.0;
      int count = 0;
      for (size_t a = 0; a < paras.size(); ++a) {
        for (size_t b = a + 1; b < paras.size(); ++b) {
          sum += sim(paras[a], paras[b]);
          ++count;
        }
      }
      diversity = 1.0 - sum / count;
    }
    candidates.push_back({info.path, diversity});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) {
                     return a.diversity > b.diversity;
                   });

  for (const auto& cand : candidates) {
    Section& sec = section_at(current, cand.path);
    const size_t nblocks = sec.blocks.size();
    // Strongest topic boundary: block boundary with the weakest cohesion
    // between the two halves.
    size_t best_k = 1;
    double best = 2.0;
    for (size_t k = 1; k < nblocks; ++k) {
      std::string left, right;
      for (size_t b = 0; b < k; ++b) {
        if (!left.empty()) left.push_back(' ');
        left += sec.blocks[b].plain_text();
      }
      for (size_t b = k; b < nblocks; ++b) {
        if (!right.empty()) right.push_back(' ');
        right += sec.blocks[b].plain_text();
      }
      const double cohesion = sim(left, right);
      if (cohesion < best) {
        best = cohesion;
        best_k = k;
      }
    }
    std::string moved_text;
    for (size_t b = best_k; b < nblocks; ++b) {
      if (!moved_text.empty()) moved_text.push_back(' ');
      moved_text += sec.blocks[b].plain_text();
    }
    const auto terms = top_terms(moved_text, reference(), 2);
    std::string heading;
    for (const auto& t : terms) {
      if (!heading.empty()) heading.push_back(' ');
      heading += capitalized(t);
    }
    if (heading.empty()) heading = "Details";

    const std::string key =
        "split|" + path_str(cand.path) + "|" + std::to_string(best_k) + "|" +
        digest(sec.own_text());
    if (rejected.count(key) > 0) continue;

    SectionPath path = cand.path;
    const size_t cut = best_k;
    const bool ok = try_edit(
        "macro", "split_section", path_str(path), sec.own_text(),
        [path, cut, heading](DocumentTree& t) {
          Section& s = section_at(t, path);
          Section child;
          child.heading = heading;
          child.level = s.level + 1;
          for (size_t b = cut; b < s.blocks.size(); ++b) {
            child.blocks.push_back(std::move(s.blocks[b]));
          }
          s.blocks.resize(cut);
          s.children.insert(s.children.begin(), std::move(child));
        },
        "generated heading: " + heading);
    if (ok) return true;
    rejected.insert(key);
  }
  return false;
}

void OptimizerRun::adjust_depth(int target_depth) {
  int guard = 4 * cfg.max_passes;
  while (budget_left("macro") > 0 && guard-- > 0) {
    const int depth = heading_depth(current);
    if (depth == target_depth || depth == 0) return;
    const bool ok = depth > target_depth ? merge_step() : split_step();
    if (!ok) {
      record_infeasible("macro", depth > target_depth
                                     ? "no mergeable section pair"
                                     : "no splittable section");
      return;
    }
  }
}

void OptimizerRun::rebalance_sections() {
  int guard = 4 * cfg.max_passes;
  while (budget_left("macro") > 0 && guard-- > 0) {
    const auto infos = enumerate_paths(current);
    std::set<SectionPath> seen_parents;

    struct Move {
      SectionPath parent;
      int from, to;
      bool from_back;  // move from's last block; else from's first block
      double gain;
      std::string key;
    };
    std::vector<Move> moves;

    for (const auto& info : infos) {
      SectionPath parent = info.path;
      parent.pop_back();
      if (seen_parents.count(parent) > 0) continue;
      seen_parents.insert(parent);
      auto& siblings = children_of(current, parent);
      if (siblings.size() < 2) continue;
      std::vector<double> words;
      for (const auto& s : siblings) words.push_back(section_words(s));
      const double mean =
          std::accumulate(words.begin(), words.end(), 0.0) / words.size();
      auto sq_dev = [&](const std::vector<double>& w) {
        double acc = 0.0;
        for (double x : w) acc += (x - mean) * (x - mean);
        return acc;
      };
      const double base_dev = sq_dev(words);

      for (size_t i = 0; i + 1 < siblings.size(); ++i) {
        Section& a = siblings[i];
        Section& b = siblings[i + 1];
        // a's last block to b, or b's first block to a.
        struct Option {
          bool a_to_b;
          const Block* block;
        };
        std::vector<Option> options;
        if (a.blocks.size() >= 2) options.push_back({true, &a.blocks.back()});
        if (b.blocks.size() >= 2) options.push_back({false, &b.blocks.front()});
        for (const auto& opt_move : options) {
          const double w = opt_move.block->word_count;
          std::vector<double> after = words;
          after[i] += opt_move.a_to_b ? -w : w;
          after[i + 1] += opt_move.a_to_b ? w : -w;
          const double gain = base_dev - sq_dev(after);
          if (gain <= 1e-9) continue;
          const Section& receiver = opt_move.a_to_b ? b : a;
          if (sim(opt_move.block->plain_text(), receiver.own_text()) <=
              cfg.rebalance_gate)
            continue;
          std::string key = "move|" + path_str(parent) + "|" +
                            std::to_string(i) + "|" +
                            (opt_move.a_to_b ? "fwd|" : "bwd|") +
                            digest(opt_move.block->plain_text());
          if (rejected.count(key) > 0) continue;
          moves.push_back({parent, static_cast<int>(i),
                           static_cast<int>(i + 1), opt_move.a_to_b, gain,
                           std::move(key)});
        }
      }
    }
    if (moves.empty()) return;
    std::stable_sort(moves.begin(), moves.end(),
                     [](const Move& x, const Move& y) { return x.gain > y.gain; });
    const Move chosen = moves.front();
    auto& siblings = children_of(current, chosen.parent);
    const Block& moving = chosen.from_back
                              ? siblings[static_cast<size_t>(chosen.from)].blocks.back()
                              : siblings[static_cast<size_t>(chosen.to)].blocks.front();
    const std::string before = moving.plain_text();
    const bool ok = try_edit(
        "macro", "move_block",
        path_str(chosen.parent) + "/" + std::to_string(chosen.from), before,
        [chosen](DocumentTree& t) {
          auto& ch = children_of(t, chosen.parent);
          Section& a = ch[static_cast<size_t>(chosen.from)];
          Section& b = ch[static_cast<size_t>(chosen.to)];
          if (chosen.from_back) {
            b.blocks.insert(b.blocks.begin(), std::move(a.blocks.back()));
            a.blocks.pop_back();
          } else {
            a.blocks.push_back(std::move(b.blocks.front()));
            b.blocks.erase(b.blocks.begin());
          }
        });
    if (!ok) rejected.insert(chosen.key);
  }
}

void OptimizerRun::insert_links() {
  int guard = 4 * cfg.max_passes;
  while (budget_left("macro") > 0 && guard-- > 0) {
    const auto infos = enumerate_paths(current);
    const size_t nsec = infos.size();
    if (nsec < 2) return;
    const size_t nblocks = all_blocks(current).size();
    if (nblocks == 0) return;

    // Current link count and section-level adjacency.
    std::map<std::string, size_t> anchor_to_idx;
    for (size_t s = 0; s < nsec; ++s) {
      anchor_to_idx[section_at(current, infos[s].path).anchor] = s;
    }
    std::vector<std::set<size_t>> adj(nsec);
    auto connect = [&](size_t a, size_t b) {
      adj[a].insert(b);
      adj[b].insert(a);
    };
    int links = 0;
    std::set<std::pair<size_t, size_t>> existing_links;
    for (size_t s = 0; s < nsec; ++s) {
      const Section& sec = section_at(current, infos[s].path);
      // structural edges: parent-child and adjacent siblings
      for (size_t t = s + 1; t < nsec; ++t) {
        const auto& pa = infos[s].path;
        const auto& pb = infos[t].path;
        const bool parent_child =
            pb.size() == pa.size() + 1 &&
            std::equal(pa.begin(), pa.end(), pb.begin());
        const bool adjacent_siblings =
            pa.size() == pb.size() &&
            std::equal(pa.begin(), pa.end() - 1, pb.begin()) &&
            std::abs(pa.back() - pb.back()) == 1;
        if (parent_child || adjacent_siblings) connect(s, t);
      }
      for (const auto& b : sec.blocks) {
        if (b.kind != BlockKind::Paragraph) continue;
        for (const auto& sent : b.sentences) {
          for (const auto& span : sent.spans) {
            if (!span.is_internal_link) continue;
            ++links;
            auto it = anchor_to_idx.find(span.link_target);
            if (it != anchor_to_idx.end()) {
              connect(s, it->second);
              existing_links.insert({s, it->second});
            }
          }
        }
      }
    }

    const double density_lo = opt.targets_.sf_min[kDimLinkDensity];
    const double density_hi = opt.targets_.sf_max[kDimLinkDensity];
    const double density = static_cast<double>(links) / nblocks;
    if (density >= density_lo - 1e-12) return;
    if (static_cast<double>(links + 1) / nblocks > density_hi + 1e-12) return;

    auto path_len = [&](size_t from, size_t to) {
      std::vector<int> dist(nsec, -1);
      std::deque<size_t> q{from};
      dist[from] = 0;
      while (!q.empty()) {
        const size_t u = q.front();
        q.pop_front();
        if (u == to) return dist[u];
        for (size_t v : adj[u]) {
          if (dist[v] < 0) {
            dist[v] = dist[u] + 1;
            q.push_back(v);
          }
        }
      }
      return 1 << 20;  // unreachable
    };

    struct Candidate {
      size_t from, to;
      double sim_value;
    };
    std::vector<Candidate> candidates;
    for (size_t a = 0; a < nsec; ++a) {
      for (size_t b = 0; b < nsec; ++b) {
        if (a == b || existing_links.count({a, b}) > 0) continue;
        const Section& sa = section_at(current, infos[a].path);
        const Section& sb = section_at(current, infos[b].path);
        const double s = sim(sa.own_text(), sb.own_text());
        if (s <= cfg.crossref_gate) continue;
        if (path_len(a, b) <= 2) continue;
        candidates.push_back({a, b, s});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& x, const auto& y) {
                       return x.sim_value > y.sim_value;
                     });

    bool inserted = false;
    for (const auto& cand : candidates) {
      const SectionPath from_path = infos[cand.from].path;
      Section& src = section_at(current, from_path);
      const Section& dst = section_at(current, infos[cand.to].path);
      // Anchor the link on the first plain occurrence of one of the
      // target's defining terms.
      std::set<std::string> terms;
      for (const auto& t : top_terms(dst.own_text(), reference(), 5)) terms.insert(t);
      for (const auto& tok : tokenize(dst.heading)) terms.insert(lemma(tok));

      bool placed = false;
      for (size_t bi = 0; bi < src.blocks.size() && !placed; ++bi) {
        Block& block = src.blocks[bi];
        if (block.kind != BlockKind::Paragraph) continue;
        for (size_t ki = 0; ki < block.sentences.size() && !placed; ++ki) {
          Sentence& sent = block.sentences[ki];
          const auto ranges = token_ranges(sent.text);
          const auto tokens = tokenize(sent.text);
          for (size_t ti = 0; ti < tokens.size() && ti < ranges.size(); ++ti) {
            if (terms.count(lemma(tokens[ti])) == 0) continue;
            const auto covering =
                slice_spans(sent.spans, ranges[ti].begin, ranges[ti].end);
            bool plain = true;
            for (const auto& sp : covering) {
              if (sp.emphasis != Emphasis::None || sp.is_internal_link)
                plain = false;
            }
            if (!plain) continue;
            const std::string key = "link|" + path_str(from_path) + "|" +
                                    std::to_string(bi) + "|" +
                                    std::to_string(ki) + "|" + dst.anchor;
            if (rejected.count(key) > 0) continue;
            const std::string anchor = dst.anchor;
            const size_t lo = ranges[ti].begin, hi = ranges[ti].end;
            const std::string before = sent.text;
            const bool ok = try_edit(
                "macro", "insert_link",
                path_str(from_path) + "/block:" + std::to_string(bi) +
                    "/sent:" + std::to_string(ki),
                before,
                [from_path, bi, ki, lo, hi, anchor](DocumentTree& t) {
                  Section& s = section_at(t, from_path);
                  wrap_range(s.blocks[bi].sentences[ki], lo, hi,
                             Emphasis::None, anchor);
                },
                "link to #" + anchor);
            if (ok) {
              placed = true;
              inserted = true;
              break;
            }
            rejected.insert(key);
          }
        }
      }
      if (inserted) break;
    }
    if (!inserted) {
      record_infeasible("macro", "no feasible cross-reference candidate");
      return;
    }
  }
}

void OptimizerRun::macro_pass() {
  const int target_depth = static_cast<int>(
      std::lround(opt.targets_.sf_base[kDimHeadingDepth]));
  adjust_depth(target_depth);
  rebalance_sections();
  insert_links();
}

// --------------------------------------------------------------------------
// Meso: paragraph length normalization and format diversification.
// --------------------------------------------------------------------------

bool OptimizerRun::split_long_paragraph() {
  const double limit = opt.targets_.paragraph_words + cfg.paragraph_sigma;
  const auto infos = enumerate_paths(current);
  for (const auto& info : infos) {
    Section& sec = section_at(current, info.path);
    for (size_t bi = 0; bi < sec.blocks.size(); ++bi) {
      Block& block = sec.blocks[bi];
      if (block.kind != BlockKind::Paragraph) continue;
      if (block.word_count <= limit) continue;
      const size_t s = block.sentences.size();
      if (s < 2) continue;

      // Lexical cohesion over adjacent boundaries with 2-sentence windows.
      std::vector<double> cohesion(s, 2.0);
      for (size_t k = 1; k < s; ++k) {
        std::string left, right;
        for (size_t x = (k >= 2 ? k - 2 : 0); x < k; ++x) {
          if (!left.empty()) left.push_back(' ');
          left += block.sentences[x].text;
        }
        for (size_t x = k; x < std::min(s, k + 2); ++x) {
          if (!right.empty()) right.push_back(' ');
          right += block.sentences[x].text;
        }
        cohesion[k] = sim(left, right);
      }
      // Deepest interior valley, else the weakest boundary.
      size_t cut = 0;
      double best = 2.0;
      for (size_t k = 2; k + 1 < s; ++k) {
        if (cohesion[k] < cohesion[k - 1] && cohesion[k] < cohesion[k + 1] &&
            cohesion[k] < best) {
          best = cohesion[k];
          cut = k;
        }
      }
      if (cut == 0) {
        for (size_t k = 1; k < s; ++k) {
          if (cohesion[k] < best) {
            best = cohesion[k];
            cut = k;
          }
        }
      }
      if (cut == 0) continue;

      const std::string key = "psplit|" + path_str(info.path) + "|" +
                              std::to_string(bi) + "|" + std::to_string(cut) +
                              "|" + digest(block.plain_text());
      if (rejected.count(key) > 0) continue;

      // The split must keep the paragraph chain coherent.
      DocumentTree probe = current;
      {
        Section& psec = section_at(probe, info.path);
        Block& pblock = psec.blocks[bi];
        Block tail;
        tail.kind = BlockKind::Paragraph;
        tail.sentences.assign(pblock.sentences.begin() + cut,
                              pblock.sentences.end());
        pblock.sentences.resize(cut);
        psec.blocks.insert(psec.blocks.begin() + bi + 1, std::move(tail));
        finalize_tree(probe);
      }
      if (paragraph_chain_coherence(paragraph_texts(probe), *opt.provider_) <=
          cfg.split_coherence_gate) {
        rejected.insert(key);
        continue;
      }

      const SectionPath path = info.path;
      const size_t block_idx = bi;
      const bool ok = try_edit(
          "meso", "split_paragraph",
          path_str(path) + "/block:" + std::to_string(bi), block.plain_text(),
          [path, block_idx, cut](DocumentTree& t) {
            Section& s2 = section_at(t, path);
            Block& b = s2.blocks[block_idx];
            Block tail;
            tail.kind = BlockKind::Paragraph;
            tail.sentences.assign(b.sentences.begin() + cut, b.sentences.end());
            b.sentences.resize(cut);
            s2.blocks.insert(s2.blocks.begin() + block_idx + 1, std::move(tail));
          });
      if (ok) return true;
      rejected.insert(key);
    }
  }
  return false;
}

bool OptimizerRun::merge_short_paragraph() {
  const double floor_words = opt.targets_.paragraph_words - cfg.paragraph_sigma;
  const double ceil_words = opt.targets_.paragraph_words + cfg.paragraph_sigma;
  const auto infos = enumerate_paths(current);
  for (const auto& info : infos) {
    Section& sec = section_at(current, info.path);
    for (size_t bi = 0; bi < sec.blocks.size(); ++bi) {
      Block& block = sec.blocks[bi];
      if (block.kind != BlockKind::Paragraph) continue;
      if (block.word_count >= floor_words) continue;

      struct Neighbor {
        size_t idx;
        double sim_value;
      };
      std::vector<Neighbor> neighbors;
      if (bi > 0 && sec.blocks[bi - 1].kind == BlockKind::Paragraph) {
        neighbors.push_back(
            {bi - 1, sim(block.plain_text(), sec.blocks[bi - 1].plain_text())});
      }
      if (bi + 1 < sec.blocks.size() &&
          sec.blocks[bi + 1].kind == BlockKind::Paragraph) {
        neighbors.push_back(
            {bi + 1, sim(block.plain_text(), sec.blocks[bi + 1].plain_text())});
      }
      std::stable_sort(neighbors.begin(), neighbors.end(),
                       [](const auto& a, const auto& b) {
                         return a.sim_value > b.sim_value;
                       });
      for (const auto& nb : neighbors) {
        if (nb.sim_value <= cfg.merge_gate) continue;
        if (block.word_count + sec.blocks[nb.idx].word_count > ceil_words)
          continue;
        const std::string key = "pmerge|" + path_str(info.path) + "|" +
                                std::to_string(std::min(bi, nb.idx)) + "|" +
                                digest(block.plain_text());
        if (rejected.count(key) > 0) continue;
        const SectionPath path = info.path;
        const size_t first = std::min(bi, nb.idx);
        const size_t second = std::max(bi, nb.idx);
        const bool ok = try_edit(
            "meso", "merge_paragraphs",
            path_str(path) + "/block:" + std::to_string(first),
            block.plain_text(),
            [path, first, second](DocumentTree& t) {
              Section& s2 = section_at(t, path);
              Block& dst = s2.blocks[first];
              Block& src = s2.blocks[second];
              for (auto& sent : src.sentences) {
                dst.sentences.push_back(std::move(sent));
              }
              s2.blocks.erase(s2.blocks.begin() + second);
            });
        if (ok) return true;
        rejected.insert(key);
      }
    }
  }
  return false;
}

void OptimizerRun::convert_to_lists() {
  int guard = 4 * cfg.max_passes;
  const double target = opt.targets_.sf_base[kDimFormatDiversity];
  const double cap = opt.targets_.sf_max[kDimFormatDiversity];
  while (budget_left("meso") > 0 && guard-- > 0) {
    const auto blocks = all_blocks(current);
    if (blocks.empty()) return;
    double structured = 0.0;
    for (const Block* b : blocks) {
      if (b->kind != BlockKind::Paragraph) structured += 1.0;
    }
    const double f_d = structured / blocks.size();
    if (f_d >= target) return;
    if ((structured + 1.0) / blocks.size() > cap + 1e-12) return;

    struct Candidate {
      SectionPath path;
      size_t block_idx;
      double score;
    };
    std::vector<Candidate> candidates;
    const auto infos = enumerate_paths(current);
    for (const auto& info : infos) {
      Section& sec = section_at(current, info.path);
      for (size_t bi = 0; bi < sec.blocks.size(); ++bi) {
        const Block& b = sec.blocks[bi];
        if (b.kind != BlockKind::Paragraph || b.sentences.size() < 2) continue;

        double cued = 0.0, connective = 0.0;
        std::map<std::string, int> first_tokens;
        std::vector<std::vector<std::string>> sentence_tokens;
        for (const auto& s : b.sentences) {
          sentence_tokens.push_back(tokenize(s.text));
          if (!sentence_tokens.back().empty()) {
            first_tokens[sentence_tokens.back().front()] += 1;
          }
        }
        for (size_t si = 0; si < b.sentences.size(); ++si) {
          const auto& toks = sentence_tokens[si];
          bool cue = false;
          if (!toks.empty()) {
            if (enumeration_cues().count(toks.front()) > 0) cue = true;
            if (first_tokens[toks.front()] >= 2) cue = true;
            if (connective_words().count(toks.front()) > 0) connective += 1.0;
          }
          if (b.sentences[si].text.find(';') != std::string::npos) cue = true;
          if (cue) cued += 1.0;
        }
        const double n = static_cast<double>(b.sentences.size());
        const double parseability = cued / n;
        const double disruption = connective / n;

        // Local information density of the candidate text.
        const auto toks = tokenize(b.plain_text());
        double density = 0.0;
        if (!toks.empty()) {
          std::set<std::string> lemmas;
          double numeric = 0.0;
          for (const auto& tk : toks) {
            if (is_numeric_token(tk)) numeric += 1.0;
            else if (!is_stopword(tk)) lemmas.insert(lemma(tk));
          }
          density = (lemmas.size() + numeric) / toks.size();
        }
        const double score = cfg.convert_w_parseability * parseability +
                             cfg.convert_w_density * density -
                             cfg.convert_w_disruption * disruption;
        candidates.push_back({info.path, bi, score});
      }
    }
    if (candidates.empty()) {
      record_infeasible("meso", "no convertible paragraph");
      return;
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });

    bool converted = false;
    for (const auto& cand : candidates) {
      Section& sec = section_at(current, cand.path);
      Block& b = sec.blocks[cand.block_idx];
      const std::string key = "convert|" + path_str(cand.path) + "|" +
                              std::to_string(cand.block_idx) + "|" +
                              digest(b.plain_text());
      if (rejected.count(key) > 0) continue;

      int ordinal_starts = 0;
      for (const auto& s : b.sentences) {
        const auto toks = tokenize(s.text);
        if (!toks.empty() && ordinal_cues().count(toks.front()) > 0)
          ++ordinal_starts;
      }
      const bool ordered = ordinal_starts >= 2;
      const SectionPath path = cand.path;
      const size_t block_idx = cand.block_idx;
      const bool ok = try_edit(
          "meso", "convert_to_list",
          path_str(path) + "/block:" + std::to_string(block_idx),
          b.plain_text(),
          [path, block_idx, ordered](DocumentTree& t) {
            Section& s2 = section_at(t, path);
            Block& pb = s2.blocks[block_idx];
            Block list;
            list.kind = BlockKind::List;
            list.ordered = ordered;
            for (const auto& sent : pb.sentences) {
              list.items.push_back(render_sentence_markdown(sent));
            }
            s2.blocks[block_idx] = std::move(list);
          });
      if (ok) {
        converted = true;
        break;
      }
      rejected.insert(key);
    }
    if (!converted) return;
  }
}

void OptimizerRun::meso_pass() {
  int guard = 4 * cfg.max_passes;
  while (budget_left("meso") > 0 && guard-- > 0) {
    if (!split_long_paragraph()) break;
  }
  guard = 4 * cfg.max_passes;
  while (budget_left("meso") > 0 && guard-- > 0) {
    if (!merge_short_paragraph()) break;
  }
  convert_to_lists();
}

// --------------------------------------------------------------------------
// Micro: keyword emphasis by sentence importance, readability splits.
// --------------------------------------------------------------------------

int OptimizerRun::emphasize_sentence_keywords(Sentence& sentence) {
  std::set<std::string> kw(keywords.begin(), keywords.end());
  const auto ranges = token_ranges(sentence.text);
  const auto tokens = tokenize(sentence.text);

  // Collect target ranges first; wrapping shifts span structure but not
  // the plain text, so ranges stay valid. Apply back-to-front.
  struct Target {
    size_t lo, hi;
    Emphasis marker;
  };
  std::vector<Target> targets;
  for (size_t ti = 0; ti < tokens.size() && ti < ranges.size(); ++ti) {
    if (kw.count(lemma(tokens[ti])) == 0) continue;
    const auto covering =
        slice_spans(sentence.spans, ranges[ti].begin, ranges[ti].end);
    bool plain = true;
    for (const auto& sp : covering) {
      if (sp.emphasis != Emphasis::None || sp.is_internal_link) plain = false;
    }
    if (!plain) continue;
    const double weight =
        position_weight(ti == 0, sentence.position_class);
    // Marker by attention weight: the heavier marker for strong positions.
    const Emphasis marker =
        weight >= 1.5 ? (cfg.emphasis_weight_bold >= cfg.emphasis_weight_italic
                             ? Emphasis::Bold
                             : Emphasis::Italic)
                      : Emphasis::Italic;
    targets.push_back({ranges[ti].begin, ranges[ti].end, marker});
  }
  for (auto it = targets.rbegin(); it != targets.rend(); ++it) {
    wrap_range(sentence, it->lo, it->hi, it->marker, "");
  }
  return static_cast<int>(targets.size());
}

void OptimizerRun::micro_pass() {
  struct SentenceInfo {
    SectionPath path;
    size_t block_idx, sent_idx;
    double score;
    int order;
  };
  std::vector<SentenceInfo> ranked;

  const auto infos = enumerate_paths(current);
  std::vector<std::string> texts;
  std::vector<SentenceInfo> sentences;
  for (const auto& info : infos) {
    Section& sec = section_at(current, info.path);
    // Section-relative positions for the position score.
    std::vector<std::pair<size_t, size_t>> locs;
    for (size_t bi = 0; bi < sec.blocks.size(); ++bi) {
      if (sec.blocks[bi].kind != BlockKind::Paragraph) continue;
      for (size_t ki = 0; ki < sec.blocks[bi].sentences.size(); ++ki) {
        locs.emplace_back(bi, ki);
      }
    }
    for (size_t li = 0; li < locs.size(); ++li) {
      const auto [bi, ki] = locs[li];
      SentenceInfo si;
      si.path = info.path;
      si.block_idx = bi;
      si.sent_idx = ki;
      si.order = static_cast<int>(sentences.size());
      const double m = static_cast<double>(locs.size());
      si.score = m <= 1.0 ? 1.0 : 1.0 - static_cast<double>(li) / (m - 1.0);
      sentences.push_back(si);
      texts.push_back(sec.blocks[bi].sentences[ki].text);
    }
  }
  const size_t n = sentences.size();
  if (n == 0) return;

  // TF-IDF mass of each sentence (document term frequency times reference
  // IDF), max-normalized.
  std::map<std::string, double> doc_tf;
  for (const auto& [term, count] : content_lemma_counts(document_text(current))) {
    doc_tf[term] = count;
  }
  std::vector<double> tfidf(n, 0.0);
  double tfidf_max = 0.0;
  for (size_t i = 0; i < n; ++i) {
    std::set<std::string> seen;
    for (const auto& tok : tokenize(texts[i])) {
      if (is_stopword(tok) || is_numeric_token(tok)) continue;
      const std::string lm = lemma(tok);
      if (!seen.insert(lm).second) continue;
      const double idf = reference() ? reference()->idf(lm) : 1.0;
      tfidf[i] += doc_tf[lm] * idf;
    }
    tfidf_max = std::max(tfidf_max, tfidf[i]);
  }

  // Degree centrality in the sentence similarity graph.
  std::vector<double> centrality(n, 0.0);
  if (n > 1) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        if (sim(texts[i], texts[j]) >= cfg.centrality_edge_gate) {
          centrality[i] += 1.0;
          centrality[j] += 1.0;
        }
      }
    }
    for (double& c : centrality) c /= static_cast<double>(n - 1);
  }

  for (size_t i = 0; i < n; ++i) {
    const double tf_norm = tfidf_max > 0.0 ? tfidf[i] / tfidf_max : 0.0;
    sentences[i].score = cfg.importance_w_tfidf * tf_norm +
                         cfg.importance_w_centrality * centrality[i] +
                         cfg.importance_w_position * sentences[i].score;
  }
  ranked = sentences;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const SentenceInfo& a, const SentenceInfo& b) {
                     return a.score > b.score;
                   });

  const double e_d_target = opt.targets_.sf_base[kDimEmphasisDensity];
  const double e_d_floor = opt.targets_.sf_min[kDimEmphasisDensity];
  const double e_d_cap = opt.targets_.sf_max[kDimEmphasisDensity];

  auto emphasis_state = [&]() {
    double total = 0.0, emphasized = 0.0;
    for (const Block* b : all_blocks(current)) {
      if (b->kind != BlockKind::Paragraph) {
        total += tokenize(b->plain_text()).size();
        continue;
      }
      for (const auto& s : b->sentences) {
        for (const auto& sp : s.spans) {
          const double cnt = tokenize(sp.text).size();
          total += cnt;
          if (sp.emphasis != Emphasis::None) emphasized += cnt;
        }
      }
    }
    return std::pair<double, double>(emphasized, total);
  };

  const int budget = static_cast<int>(
      std::floor(e_d_target * static_cast<double>(n)));

  int covered = 0;
  size_t cursor = 0;
  auto emphasize_next = [&](bool only_within_budget) -> bool {
    while (cursor < ranked.size()) {
      const SentenceInfo info = ranked[cursor++];
      Section& sec = section_at(current, info.path);
      Sentence& sentence = sec.blocks[info.block_idx].sentences[info.sent_idx];
      if (sentence.has_emphasis()) {
        ++covered;
        return true;
      }
      // Probe how many tokens the edit would emphasize.
      Sentence probe = sentence;
      const int added = emphasize_sentence_keywords(probe);
      if (added == 0) continue;  // no keyword to mark, no budget consumed
      auto [emphasized, total] = emphasis_state();
      double new_tokens = 0.0;
      {
        for (const auto& sp : probe.spans) {
          if (sp.emphasis != Emphasis::None) new_tokens += tokenize(sp.text).size();
        }
        for (const auto& sp : sentence.spans) {
          if (sp.emphasis != Emphasis::None) new_tokens -= tokenize(sp.text).size();
        }
      }
      if (total > 0.0 && (emphasized + new_tokens) / total > e_d_cap + 1e-12) {
        continue;
      }
      (void)only_within_budget;
      const SectionPath path = info.path;
      const size_t bi = info.block_idx, ki = info.sent_idx;
      const Sentence replacement = probe;
      const bool ok = try_edit(
          "micro", "emphasize",
          path_str(path) + "/block:" + std::to_string(bi) + "/sent:" +
              std::to_string(ki),
          sentence.text,
          [path, bi, ki, replacement](DocumentTree& t) {
            section_at(t, path).blocks[bi].sentences[ki] = replacement;
          },
          std::to_string(added) + " term(s) emphasized");
      if (ok) {
        ++covered;
        return true;
      }
    }
    return false;
  };

  // Budgeted pass, then a conformance top-up to the density floor.
  while (covered < budget && budget_left("micro") > 0) {
    if (!emphasize_next(true)) break;
  }
  int guard = 4 * cfg.max_passes;
  while (budget_left("micro") > 0 && guard-- > 0) {
    auto [emphasized, total] = emphasis_state();
    if (total == 0.0 || emphasized / total >= e_d_floor) break;
    if (!emphasize_next(false)) break;
  }

  readability_splits();
}

void OptimizerRun::readability_splits() {
  int guard = 4 * cfg.max_passes;
  while (budget_left("micro") > 0 && guard-- > 0) {
    FeatureVector raw = opt.extractor_.extract_all(current, keywords);
    if (raw[kDimReadingEase] >= cfg.reading_ease_floor) return;

    bool split_done = false;
    const auto infos = enumerate_paths(current);
    for (const auto& info : infos) {
      Section& sec = section_at(current, info.path);
      for (size_t bi = 0; bi < sec.blocks.size() && !split_done; ++bi) {
        Block& block = sec.blocks[bi];
        if (block.kind != BlockKind::Paragraph) continue;
        for (size_t ki = 0; ki < block.sentences.size() && !split_done; ++ki) {
          Sentence& sentence = block.sentences[ki];
          const auto tokens = tokenize(sentence.text);
          if (static_cast<int>(tokens.size()) <= cfg.long_sentence_words)
            continue;
          const auto ranges = token_ranges(sentence.text);

          struct Cut {
            size_t token_idx;
            bool after_comma;
          };
          std::vector<Cut> cuts;
          for (size_t ti = 3; ti + 3 < tokens.size() && ti < ranges.size(); ++ti) {
            if (coordinating_conjunctions().count(tokens[ti]) == 0) continue;
            const size_t begin = ranges[ti].begin;
            const bool comma =
                begin >= 2 && sentence.text[begin - 2] == ',';
            cuts.push_back({ti, comma});
          }
          if (cuts.empty()) continue;
          const double mid = static_cast<double>(tokens.size()) / 2.0;
          std::stable_sort(cuts.begin(), cuts.end(),
                           [mid](const Cut& a, const Cut& b) {
                             if (a.after_comma != b.after_comma)
                               return a.after_comma;
                             return std::fabs(a.token_idx - mid) <
                                    std::fabs(b.token_idx - mid);
                           });
          const Cut cut = cuts.front();
          const std::string key = "ssplit|" + path_str(info.path) + "|" +
                                  std::to_string(bi) + "|" + std::to_string(ki) +
                                  "|" + digest(sentence.text);
          if (rejected.count(key) > 0) continue;

          const size_t char_cut = ranges[cut.token_idx].begin;
          const SectionPath path = info.path;
          const size_t block_idx = bi, sent_idx = ki;
          const bool ok = try_edit(
              "micro", "split_sentence",
              path_str(path) + "/block:" + std::to_string(bi) + "/sent:" +
                  std::to_string(ki),
              sentence.text,
              [path, block_idx, sent_idx, char_cut](DocumentTree& t) {
                Block& b = section_at(t, path).blocks[block_idx];
                Sentence& s = b.sentences[sent_idx];
                // Left half: strip trailing comma/space, close with a period.
                size_t left_end = char_cut;
                while (left_end > 0 && (s.text[left_end - 1] == ' ' ||
                                        s.text[left_end - 1] == ','))
                  --left_end;
                Sentence left, right;
                left.spans = slice_spans(s.spans, 0, left_end);
                if (!left.spans.empty() &&
                    left.spans.back().emphasis == Emphasis::None &&
                    !left.spans.back().is_internal_link) {
                  left.spans.back().text += ".";
                } else {
                  left.spans.push_back({".", Emphasis::None, false, ""});
                }
                right.spans = slice_spans(s.spans, char_cut, s.text.size());
                if (!right.spans.empty() && !right.spans.front().text.empty()) {
                  right.spans.front().text[0] = static_cast<char>(std::toupper(
                      static_cast<unsigned char>(right.spans.front().text[0])));
                }
                left.text.clear();
                for (const auto& sp : left.spans) left.text += sp.text;
                right.text.clear();
                for (const auto& sp : right.spans) right.text += sp.text;
                left.source_ids = s.source_ids;
                right.source_ids = s.source_ids;
                b.sentences[sent_idx] = std::move(left);
                b.sentences.insert(b.sentences.begin() + sent_idx + 1,
                                   std::move(right));
              },
              "readability split");
          if (ok) {
            split_done = true;
          } else {
            rejected.insert(key);
          }
        }
      }
      if (split_done) break;
    }
    if (!split_done) return;
  }
}

// --------------------------------------------------------------------------
// Pipeline orchestration.
// --------------------------------------------------------------------------

OptimizeResult Optimizer::optimize(const DocumentTree& input) const {
  OptimizerRun run(*this, input);

  struct Candidate {
    DocumentTree tree;
    double probability;
    std::string level;  // level that produced it; empty for the input
  };
  std::vector<Candidate> states;
  {
    const FeatureVector raw = extractor_.extract_all(run.current, run.keywords);
    states.push_back({run.current, mixed_probability(raw), ""});
  }

  auto run_level = [&](const std::string& level, bool skip, double theta,
                       void (OptimizerRun::*pass)()) {
    if (skip) return;
    const FeatureVector raw = extractor_.extract_all(run.current, run.keywords);
    if (level_gap(raw, level) <= theta) return;
    const int before = run.counters(level).applied;
    (run.*pass)();
    if (run.counters(level).applied > before) {
      const FeatureVector after = extractor_.extract_all(run.current, run.keywords);
      states.push_back({run.current, mixed_probability(after), level});
    }
  };

  run_level("macro", config_.skip_macro, config_.theta_macro,
            &OptimizerRun::macro_pass);
  run_level("meso", config_.skip_meso, config_.theta_meso,
            &OptimizerRun::meso_pass);
  run_level("micro", config_.skip_micro, config_.theta_micro,
            &OptimizerRun::micro_pass);

  // The emitted tree is the most citable valid state; later states win ties
  // so conformance edits with neutral probability survive.
  size_t chosen = 0;
  for (size_t i = 1; i < states.size(); ++i) {
    if (states[i].probability >= states[chosen].probability) chosen = i;
  }

  OptimizeResult result;
  result.tree = states[chosen].tree;
  result.probability_before = states[0].probability;
  result.probability_after = states[chosen].probability;
  result.log = std::move(run.log);

  // Edits from levels beyond the chosen state are not part of the output.
  if (chosen + 1 < states.size()) {
    std::set<std::string> discarded_levels;
    for (size_t i = chosen + 1; i < states.size(); ++i) {
      discarded_levels.insert(states[i].level);
    }
    for (auto& e : result.log.entries) {
      if (e.applied && discarded_levels.count(e.level) > 0) {
        e.applied = false;
        e.note = "discarded: probability bound";
      }
    }
  }

  result.log.mapping = collect_mapping(result.tree);
  result.final_verdict = check_preservation(
      run.original, result.tree, result.log.mapping, *provider_, topics_,
      config_.thresholds);

  // Final mode per the fallback cascade.
  const bool identity = serialize(result.tree) == serialize(run.original);
  std::set<std::string> applied_levels;
  for (size_t i = 1; i <= chosen && i < states.size(); ++i) {
    applied_levels.insert(states[i].level);
  }
  auto failed = [&](const LevelCounters& c) {
    return c.attempted && c.applied == 0 && c.failed > 0;
  };
  if (identity) {
    result.log.final_mode = FinalMode::Identity;
  } else {
    const bool levels_clean = !failed(run.macro) && !failed(run.meso) &&
                              !failed(run.micro) && chosen + 1 == states.size();
    if (levels_clean) {
      result.log.final_mode = FinalMode::Full;
    } else if (applied_levels == std::set<std::string>{"micro"}) {
      result.log.final_mode = FinalMode::Minimal;
    } else {
      result.log.final_mode = FinalMode::Partial;
    }
  }
  return result;
}

DocumentTree Optimizer::optimize_macro(const DocumentTree& tree) const {
  OptimizerRun run(*this, tree);
  run.macro_pass();
  return run.current;
}

DocumentTree Optimizer::optimize_meso(const DocumentTree& tree) const {
  OptimizerRun run(*this, tree);
  run.meso_pass();
  return run.current;
}

DocumentTree Optimizer::optimize_micro(const DocumentTree& tree) const {
  OptimizerRun run(*this, tree);
  run.micro_pass();
  return run.current;
}

}  // namespace geosfe
