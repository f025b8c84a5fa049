#pragma once

#include <string>
#include <vector>

#include "paramest/model.hpp"

namespace paramest {

enum class IdentifiabilityClass { global, local };

struct ModelRegistryEntry {
    std::string name;
    std::string dsl;
    OdeModel model;
    /// Unknowns scored by the benchmark: parameters and initial states,
    /// minus the known non-identifiable ones.
    std::vector<std::string> identifiable_unknowns;
    IdentifiabilityClass identifiability;
};

/// The ten benchmark models, in benchmark table order.
const std::vector<ModelRegistryEntry>& registry();
const ModelRegistryEntry& registry_entry(const std::string& name);
std::vector<std::string> registry_names();

/// The one-state example x' = -mu*x, y1 = x^2 + x.
const OdeModel& example_model();
const char* example_model_text();

}  // namespace paramest
