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

#include "geosfe/citation.hpp"

#include <algorithm>
#include <cmath>

namespace geosfe {

namespace {

constexpr double kUnboundedLo = -1e9;
constexpr double kUnboundedHi = 1e9;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

const char* architecture_name(Architecture a) {
  switch (a) {
    case Architecture::STS: return "STS";
    case Architecture::IR: return "IR";
    case Architecture::ISG: return "ISG";
  }
  return "STS";
}

Architecture architecture_from_name(const std::string& name) {
  if (name == "STS") return Architecture::STS;
  if (name == "IR") return Architecture::IR;
  if (name == "ISG") return Architecture::ISG;
  throw Error(ErrorCode::BadConfig, "unknown architecture: " + name);
}

const ArchitectureProfile& ProfileSet::get(Architecture a) const {
  switch (a) {
    case Architecture::STS: return sts;
    case Architecture::IR: return ir;
    case Architecture::ISG: return isg;
  }
  return sts;
}

void AlphaMix::validate() const {
  if (sts < 0.0 || ir < 0.0 || isg < 0.0) {
    throw Error(ErrorCode::BadAlpha, "architecture weights must be >= 0");
  }
  const double sum = sts + ir + isg;
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::BadAlpha,
                "architecture weights must sum to 1, got " + std::to_string(sum));
  }
}

double AlphaMix::get(Architecture a) const {
  switch (a) {
    case Architecture::STS: return sts;
    case Architecture::IR: return ir;
    case Architecture::ISG: return isg;
  }
  return sts;
}

nlohmann::json ArchitectureProfile::to_json() const {
  nlohmann::json j;
  j["id"] = architecture_name(id);
  j["weights"] = weights;
  j["bias"] = bias;
  j["deviation"] = deviation;
  return j;
}

ArchitectureProfile ArchitectureProfile::from_json(const nlohmann::json& j) {
  ArchitectureProfile p;
  p.id = architecture_from_name(j.at("id").get<std::string>());
  const auto& w = j.at("weights");
  if (w.size() != kFeatureCount) {
    throw Error(ErrorCode::DimensionMismatch,
                "profile weights must have " + std::to_string(kFeatureCount) +
                    " entries");
  }
  for (size_t i = 0; i < kFeatureCount; ++i) p.weights[i] = w[i].get<double>();
  p.bias = j.value("bias", 0.0);
  if (j.contains("deviation")) {
    const auto& d = j.at("deviation");
    if (d.size() != kFeatureCount) {
      throw Error(ErrorCode::DimensionMismatch, "profile deviation size");
    }
    for (size_t i = 0; i < kFeatureCount; ++i) p.deviation[i] = d[i].get<double>();
  }
  return p;
}

nlohmann::json TargetProfile::to_json() const {
  nlohmann::json j;
  j["sf_base"] = sf_base;
  j["sf_min"] = sf_min;
  j["sf_max"] = sf_max;
  j["constrained"] = constrained;
  j["alpha"] = {{"STS", alpha.sts}, {"IR", alpha.ir}, {"ISG", alpha.isg}};
  j["paragraph_words"] = paragraph_words;
  j["paragraph_words_min"] = paragraph_words_min;
  j["paragraph_words_max"] = paragraph_words_max;
  return j;
}

double predict(const FeatureVector& sf_normalized, const ArchitectureProfile& arch) {
  double z = arch.bias;
  for (size_t i = 0; i < kFeatureCount; ++i) {
    z += arch.weights[i] * sf_normalized.values[i];
  }
  return sigmoid(z);
}

double predict_mixed(const FeatureVector& sf_normalized, const AlphaMix& alpha,
                     const ProfileSet& profiles) {
  alpha.validate();
  return alpha.sts * predict(sf_normalized, profiles.sts) +
         alpha.ir * predict(sf_normalized, profiles.ir) +
         alpha.isg * predict(sf_normalized, profiles.isg);
}

ProfileSet default_profiles() {
  ProfileSet set;

  // Search-then-Synthesize: meta-structure clarity 0.45 -> balance_score,
  // upfront density 0.30 -> D, hierarchical depth 0.25 -> d_h.
  set.sts.id = Architecture::STS;
  set.sts.weights[kDimBalance] = 0.45;
  set.sts.weights[kDimInfoDensity] = 0.30;
  set.sts.weights[kDimHeadingDepth] = 0.25;
  set.sts.deviation[kDimHeadingDepth] = 0.5;

  // Iterative Refinement: cross-reference richness 0.41 split over link
  // density and link distribution, hierarchical breadth-depth 0.35 split
  // over depth and balance, query-triggering keywords 0.24 -> K_p.
  set.ir.id = Architecture::IR;
  set.ir.weights[kDimLinkDensity] = 0.28;
  set.ir.weights[kDimReferenceDistribution] = 0.13;
  set.ir.weights[kDimHeadingDepth] = 0.20;
  set.ir.weights[kDimBalance] = 0.15;
  set.ir.weights[kDimKeywordPlacement] = 0.24;
  set.ir.deviation[kDimHeadingDepth] = 0.0;

  // Integrated Search-Generation: chunk independence 0.38 -> uniform chunk
  // sizing (negative on the length CV), format diversity 0.35 -> F_d,
  // aggressive chunking 0.27 -> focused chunks (negative on topic entropy).
  set.isg.id = Architecture::ISG;
  set.isg.weights[kDimParagraphCv] = -0.38;
  set.isg.weights[kDimFormatDiversity] = 0.35;
  set.isg.weights[kDimChunkEntropy] = -0.27;
  set.isg.deviation[kDimHeadingDepth] = -0.5;

  return set;
}

TargetProfile compute_targets(const AlphaMix& alpha, const ProfileSet& profiles) {
  alpha.validate();

  TargetProfile t;
  t.alpha = alpha;
  t.sf_min.fill(kUnboundedLo);
  t.sf_max.fill(kUnboundedHi);
  t.constrained.fill(false);

  auto constrain = [&](size_t dim, double base, double lo, double hi) {
    t.sf_base[dim] = base;
    t.sf_min[dim] = lo;
    t.sf_max[dim] = hi;
    t.constrained[dim] = true;
  };

  constrain(kDimHeadingDepth, 4.0, 3.0, 5.0);
  constrain(kDimBalance, 1.0, 0.0, 1.0);
  constrain(kDimLinkDensity, 0.175, 0.15, 0.20);
  constrain(kDimParagraphCv, 0.0, 0.0, kUnboundedHi);
  constrain(kDimFormatDiversity, 0.30, 0.25, 0.35);
  constrain(kDimEmphasisDensity, 0.075, 0.05, 0.10);

  for (Architecture a : {Architecture::STS, Architecture::IR, Architecture::ISG}) {
    const auto& profile = profiles.get(a);
    const double weight = alpha.get(a);
    for (size_t i = 0; i < kFeatureCount; ++i) {
      t.sf_base[i] += weight * profile.deviation[i];
    }
  }
  for (size_t i = 0; i < kFeatureCount; ++i) {
    t.sf_base[i] = std::clamp(t.sf_base[i], t.sf_min[i], t.sf_max[i]);
  }
  return t;
}

}  // namespace geosfe
