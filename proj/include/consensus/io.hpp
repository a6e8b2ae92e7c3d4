#pragma once

#include "consensus/ergodic.hpp"
#include "consensus/gantmacher.hpp"
#include "consensus/growth.hpp"
#include "consensus/schedule.hpp"
#include "consensus/source.hpp"
#include "consensus/spectral.hpp"
#include "consensus/stochastic.hpp"

#include "json.hpp"

#include <filesystem>
#include <memory>

namespace consensus::io {

using nlohmann::json;

// Parsing throws Error(MalformedInput) on schema problems; validation
// errors of the matrices propagate unchanged.

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

/// {"n": n, "rows": [[...], ...]}
StochasticMatrix matrix_from_json(const json& doc, double eps_row = kDefaultRowTolerance, bool renormalize = false);
json matrix_to_json(const Eigen::MatrixXd& m);

/// {"n": n, "matrices": [rows, ...]}, {"generator": {...}} or a single
/// matrix document, read as the constant sequence A, A, ...
std::unique_ptr<MatrixSource> sequence_from_json(const json& doc, double eps_row = kDefaultRowTolerance,
                                                 bool renormalize = false);
json sequence_to_json(const MatrixSource& seq, std::size_t steps);

/// {"n", "seed", "steps", "delta", "gap": {"mode", "N" | "a"},
///  "activation": "full" | {"subset": p}, "pattern": [[0/1...]...]}
GeneratorSpec generator_spec_from_json(const json& doc);
json generator_spec_to_json(const GeneratorSpec& spec);

/// A JSON array of numbers, or {"x0": [...]}.
OpinionVector opinion_from_json(const json& doc);

json pattern_to_json(const ZeroPattern& p);
json tolerances_to_json(const Tolerances& tol);

json gantmacher_report(const ZeroPattern& p, const GantmacherForm& form);
json schedule_report(const AccumulationSchedule& schedule);
json convergence_report(const ConvergenceReport& report);
json jsr_report(const JsrBounds& bounds);
json series_report(const SeriesReport& report);
json growth_report(const GrowthReport& report);

} // namespace consensus::io
