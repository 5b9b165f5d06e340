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

#ifndef GEOSFE_CITATION_HPP
#define GEOSFE_CITATION_HPP

#include <array>
#include <string>

#include <nlohmann/json.hpp>

#include "geosfe/features.hpp"

namespace geosfe {

enum class Architecture { STS, IR, ISG };

const char* architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

struct ArchitectureProfile {
  Architecture id = Architecture::STS;
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
  // Per-dimension target deviations applied through the alpha mix.
  std::array<double, kFeatureCount> deviation{};

  nlohmann::json to_json() const;
  static ArchitectureProfile from_json(const nlohmann::json& j);
};

struct ProfileSet {
  ArchitectureProfile sts;
  ArchitectureProfile ir;
  ArchitectureProfile isg;

  const ArchitectureProfile& get(Architecture a) const;
};

struct AlphaMix {
  double sts = 1.0 / 3.0;
  double ir = 1.0 / 3.0;
  double isg = 1.0 / 3.0;

  void validate() const;  // throws BadAlpha
  double get(Architecture a) const;
};

struct TargetProfile {
  std::array<double, kFeatureCount> sf_base{};
  std::array<double, kFeatureCount> sf_min{};
  std::array<double, kFeatureCount> sf_max{};
  // Dimensions with principled targets; the rest are masked out of level
  // gap computations.
  std::array<bool, kFeatureCount> constrained{};
  AlphaMix alpha;

  // Paragraph-length window (words); the midpoint is the meso length target.
  double paragraph_words = 225.0;
  double paragraph_words_min = 150.0;
  double paragraph_words_max = 300.0;

  nlohmann::json to_json() const;
};

// Logistic citation probability for one architecture. Input must be the
// normalized feature vector.
double predict(const FeatureVector& sf_normalized, const ArchitectureProfile& arch);

double predict_mixed(const FeatureVector& sf_normalized, const AlphaMix& alpha,
                     const ProfileSet& profiles);

// Target features from principle midpoints plus architecture deviations
// weighted by the mix, clamped into the feasibility bounds.
TargetProfile compute_targets(const AlphaMix& alpha, const ProfileSet& profiles);

// Built-in weights. Magnitudes follow the per-architecture feature
// importances; the dimension mapping and signs are documented inline.
ProfileSet default_profiles();

}  // namespace geosfe

#endif  // GEOSFE_CITATION_HPP
