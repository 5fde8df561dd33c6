#pragma once

#include "lrnn/experiment.hpp"

#include <string>
#include <vector>

namespace lrnn {

/// Writes the figure set for a report into outdir (created if missing):
///   fig1_<problem>_<regime>.svg   mean cost vs iteration, one curve per T
///   fig1_<problem>_shared.svg     both regimes on a common cost scale
///   fig2_<problem>_<regime>.svg   prediction overlay at the largest T
///   fig3_<problem>.svg            prediction error vs T with mean/std/best/worst
/// Returns the written file paths.
std::vector<std::string> emit_plots(const ExperimentReport& report, const std::string& outdir);

}  // namespace lrnn
