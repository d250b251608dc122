// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace cogent {

/// The five pseudo-missing scenarios. Disassemble and Combine apply to block
/// data; Reshape, Reformat and Revise to images.
enum class ScenarioKind {
  Disassemble = 0,  // requested range lies inside one cached object
  Combine = 1,      // several cached pieces tile the requested range
  Reshape = 2,      // same content, different dimensions / quality
  Reformat = 3,     // same content, different format
  Revise = 4,       // similar content (matched by similarity hash)
};

inline constexpr std::size_t kScenarioCount = 5;

inline constexpr std::array<ScenarioKind, kScenarioCount> kAllScenarios = {
    ScenarioKind::Disassemble, ScenarioKind::Combine, ScenarioKind::Reshape, ScenarioKind::Reformat,
    ScenarioKind::Revise};

constexpr std::size_t index_of(ScenarioKind s) { return static_cast<std::size_t>(s); }

constexpr std::string_view to_string(ScenarioKind s) {
  constexpr std::array<std::string_view, kScenarioCount> names = {"S1_Disassemble", "S2_Combine", "S3_Reshape",
                                                                  "S4_Reformat", "S5_Revise"};
  return names[index_of(s)];
}

}  // namespace cogent
