#pragma once

#include <optional>
#include <string>

#include "crflow/bubbles.hpp"
#include "crflow/config.hpp"
#include "crflow/flow.hpp"
#include "crflow/shadow.hpp"

namespace crflow {

ModelPtr build_model(const RunConfig& cfg);

struct Precheck {
  double sup_f = 0.0;
  double int_f = 0.0;
  bool passed = true;
};

struct PreparedRun {
  ModelPtr model;
  FlowState initial;
  Precheck precheck;
  std::optional<InitialData> bubble;  // set for initial = bubble
  RunOptions options;
};

// Builds the model, f and u0 and checks scenario preconditions
// (main2: sup f > 0 and int f dv < 0, otherwise DomainError).
PreparedRun prepare_run(const RunConfig& cfg);

struct ScenarioResult {
  PreparedRun prepared;
  RunResult result;
  std::string csv;
  std::string summary_json;
};

ScenarioResult run_scenario(const RunConfig& cfg, const StepObserver& observer = {});

// Snapshot of a flow state: grid, model, f and u values.
std::string snapshot_to_json(const FlowState& state);
FlowState snapshot_from_json(const std::string& text);

std::string bubble_fit_to_json(const BubbleFit& fit, const FlowState& state);

std::string read_file(const std::string& path);

}  // namespace crflow
