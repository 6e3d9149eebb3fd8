// Built-in model descriptors (ResNet-18/34/50, SqueezeNet 1.1), platform
// presets, ratio schedules, and external-bandwidth tiers.
#pragma once

#include <string>
#include <vector>

#include "ovgen/model.hpp"

namespace ovgen {

// Known names: resnet18, resnet34, resnet50, squeezenet1.1.
ModelSpec builtin_model(const std::string& name);

// Known names: z7045, zu7ev.
PlatformSpec builtin_platform(const std::string& name);

// Known names: none (all bypass), ovsf50, ovsf25, plus *_all3x3 variants that
// also compress ungrouped 3x3 convs (SqueezeNet stem).
RatioSchedule builtin_schedule(const std::string& name);

std::vector<std::string> builtin_model_names();
std::vector<std::string> builtin_platform_names();
std::vector<std::string> builtin_schedule_names();

struct BandwidthTier {
  std::string label;
  double gbs = 0.0;
};

// 1x / 2x / 4x / 12x external memory bandwidth steps.
std::vector<BandwidthTier> bandwidth_tiers();

}  // namespace ovgen
