#include "consensus/io.hpp"

#include "consensus/errors.hpp"

#include <fstream>

namespace consensus::io {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedInput, what); }

const json& field(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) malformed(std::string("missing field \"") + key + "\"");
    return doc.at(key);
}

std::size_t size_field(const json& doc, const char* key) {
    const json& v = field(doc, key);
    if (!v.is_number_integer() || v.get<long long>() < 0) malformed(std::string("\"") + key + "\" must be a count");
    return v.get<std::size_t>();
}

double number_field(const json& doc, const char* key) {
    const json& v = field(doc, key);
    if (!v.is_number()) malformed(std::string("\"") + key + "\" must be a number");
    return v.get<double>();
}

Eigen::MatrixXd rows_to_matrix(const json& rows, std::size_t n) {
    if (!rows.is_array() || rows.size() != n) malformed("expected " + std::to_string(n) + " rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const json& row = rows[i];
        if (!row.is_array()) malformed("row " + std::to_string(i) + " is not an array");
        if (row.size() != n) {
            throw Error(ErrorCode::NonSquare, "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                                                  " entries, expected " + std::to_string(n));
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!row[j].is_number()) malformed("entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not a number");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

std::string_view sign_name(BlockSign s) {
    switch (s) {
    case BlockSign::Positive: return "positive";
    case BlockSign::Zero: return "zero";
    case BlockSign::Mixed: return "mixed";
    }
    return "unknown";
}

GapMode parse_gap_mode(const std::string& name) {
    if (name == "bounded") return GapMode::Bounded;
    if (name == "log") return GapMode::Log;
    if (name == "loglog") return GapMode::LogLog;
    malformed("unknown gap mode \"" + name + "\"");
}

} // namespace

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) malformed("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        malformed(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) malformed("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

StochasticMatrix matrix_from_json(const json& doc, double eps_row, bool renormalize) {
    const std::size_t n = size_field(doc, "n");
    if (n == 0) malformed("\"n\" must be positive");
    return validate(rows_to_matrix(field(doc, "rows"), n), eps_row, renormalize);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::unique_ptr<MatrixSource> sequence_from_json(const json& doc, double eps_row, bool renormalize) {
    if (doc.is_object() && doc.contains("generator")) {
        return std::make_unique<GeneratedSequence>(generate_sequence(generator_spec_from_json(doc.at("generator"))));
    }
    if (doc.is_object() && doc.contains("rows")) {
        return std::make_unique<ConstantSource>(matrix_from_json(doc, eps_row, renormalize));
    }
    const std::size_t n = size_field(doc, "n");
    if (n == 0) malformed("\"n\" must be positive");
    const json& list = field(doc, "matrices");
    if (!list.is_array() || list.empty()) malformed("\"matrices\" must be a non-empty array");
    std::vector<StochasticMatrix> factors;
    factors.reserve(list.size());
    for (const auto& rows : list) factors.push_back(validate(rows_to_matrix(rows, n), eps_row, renormalize));
    return std::make_unique<VectorSource>(std::move(factors));
}

json sequence_to_json(const MatrixSource& seq, std::size_t steps) {
    json matrices = json::array();
    const std::size_t count = seq.available(steps);
    for (std::size_t t = 0; t < count; ++t) matrices.push_back(matrix_to_json(seq.at(t).matrix()));
    json doc;
    doc["n"] = seq.dimension();
    doc["matrices"] = std::move(matrices);
    return doc;
}

GeneratorSpec generator_spec_from_json(const json& doc) {
    GeneratorSpec spec;
    spec.n = size_field(doc, "n");
    if (doc.contains("seed")) spec.seed = field(doc, "seed").get<std::uint64_t>();
    if (doc.contains("steps")) spec.steps = size_field(doc, "steps");
    spec.delta = number_field(doc, "delta");
    if (doc.contains("gap")) {
        const json& gap = doc.at("gap");
        spec.gaps.mode = parse_gap_mode(field(gap, "mode").get<std::string>());
        spec.gaps.parameter = number_field(gap, spec.gaps.mode == GapMode::Bounded ? "N" : "a");
    }
    if (doc.contains("activation")) {
        const json& act = doc.at("activation");
        if (act.is_string() && act.get<std::string>() == "full") {
            spec.activation = Activation::Full;
        } else if (act.is_object() && act.contains("subset")) {
            spec.activation = Activation::RandomSubset;
            spec.activation_probability = number_field(act, "subset");
        } else {
            malformed("\"activation\" must be \"full\" or {\"subset\": p}");
        }
    }
    if (doc.contains("pattern")) {
        const json& rows = doc.at("pattern");
        if (!rows.is_array() || rows.size() != spec.n) malformed("\"pattern\" must have n rows");
        ZeroPattern p(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (!rows[i].is_array() || rows[i].size() != spec.n) malformed("\"pattern\" rows must have n entries");
            for (std::size_t j = 0; j < spec.n; ++j)
                if (rows[i][j].get<int>() != 0) p.set(i, j);
        }
        spec.base_pattern = p;
    }
    return spec;
}

json generator_spec_to_json(const GeneratorSpec& spec) {
    json doc;
    doc["n"] = spec.n;
    doc["seed"] = spec.seed;
    doc["steps"] = spec.steps;
    doc["delta"] = spec.delta;
    json gap;
    gap["mode"] = std::string(to_string(spec.gaps.mode));
    gap[spec.gaps.mode == GapMode::Bounded ? "N" : "a"] = spec.gaps.parameter;
    doc["gap"] = gap;
    if (spec.activation == Activation::Full)
        doc["activation"] = "full";
    else
        doc["activation"] = json{{"subset", spec.activation_probability}};
    if (spec.base_pattern) doc["pattern"] = pattern_to_json(*spec.base_pattern);
    return doc;
}

OpinionVector opinion_from_json(const json& doc) {
    const json& values = doc.is_object() ? field(doc, "x0") : doc;
    if (!values.is_array() || values.empty()) malformed("opinion vector must be a non-empty array");
    Eigen::VectorXd x(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].is_number()) malformed("opinion entry " + std::to_string(i) + " is not a number");
        x(static_cast<Eigen::Index>(i)) = values[i].get<double>();
    }
    return OpinionVector(std::move(x));
}

json pattern_to_json(const ZeroPattern& p) {
    json rows = json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < p.size(); ++j) row.push_back(p(i, j) ? 1 : 0);
        rows.push_back(std::move(row));
    }
    return rows;
}

json tolerances_to_json(const Tolerances& tol) {
    return json{{"eps_z", tol.eps_z}, {"eps_row", tol.eps_row}, {"eps_c", tol.eps_c}};
}

json gantmacher_report(const ZeroPattern& p, const GantmacherForm& form) {
    json doc;
    doc["classes"] = form.partition.classes;
    doc["g"] = form.essential_count();
    doc["p"] = form.class_count();
    doc["permutation"] = form.permutation;
    json blocks = json::array();
    for (const auto& row : block_signs(p, form)) {
        json r = json::array();
        for (auto s : row) r.push_back(std::string(sign_name(s)));
        blocks.push_back(std::move(r));
    }
    doc["block_pattern"] = std::move(blocks);
    return doc;
}

json schedule_report(const AccumulationSchedule& schedule) {
    json doc;
    doc["times"] = schedule.times;
    doc["stabilized"] = schedule.stabilized;
    doc["pattern"] = pattern_to_json(schedule.common_pattern);
    doc["gantmacher"] = gantmacher_report(schedule.common_pattern, gantmacher_form(schedule.common_pattern));
    doc["direction"] = schedule.direction == Direction::Backward ? "backward" : "forward";
    doc["horizon"] = schedule.horizon;
    doc["confirmation_span"] = schedule.confirmation_span;
    doc["raw_cuts"] = schedule.raw_cuts;
    doc["warnings"] = schedule.warnings;
    return doc;
}

json convergence_report(const ConvergenceReport& report) {
    json doc;
    doc["classes"] = report.form.partition.classes;
    doc["g"] = report.form.essential_count();
    doc["p"] = report.form.class_count();
    doc["permutation"] = report.form.permutation;
    json essential = json::array();
    for (const auto& c : report.classes) {
        json e;
        e["class"] = c.class_index;
        e["indices"] = c.indices;
        e["limit_row"] = vector_to_json(c.limit_row.transpose());
        e["residual"] = c.residual;
        e["tau_measured"] = c.tau_measured;
        e["tau_bound"] = c.tau_bound;
        e["converged"] = c.converged;
        e["windows_used"] = c.windows_used;
        e["consensus_value"] = c.consensus_value;
        e["opinion_deviation"] = c.opinion_deviation;
        e["opinion_consistent"] = c.opinion_consistent;
        essential.push_back(std::move(e));
    }
    doc["essential"] = std::move(essential);
    doc["converged"] = report.all_converged;
    doc["windows"] = report.windows;
    doc["final_step"] = report.final_step;
    doc["delta"] = {{"values", report.deltas.values},
                    {"partial_sums", report.deltas.partial_sums},
                    {"overridden", report.delta_overridden}};
    doc["tau_bound"] = report.tau_bound;
    doc["inessential_norm"] = report.inessential_norm;
    doc["tail_factor"] = matrix_to_json(report.tail_factor);
    doc["final_opinion"] = vector_to_json(report.final_opinion);
    doc["tolerances"] = tolerances_to_json(report.tolerances);
    doc["warnings"] = report.warnings;
    return doc;
}

json jsr_report(const JsrBounds& bounds) {
    json doc;
    doc["lower"] = bounds.lower;
    doc["upper"] = bounds.upper;
    doc["length"] = bounds.max_length;
    doc["witness"] = bounds.witness;
    doc["truncated"] = bounds.truncated;
    doc["lower_by_length"] = bounds.lower_by_length;
    doc["upper_by_length"] = bounds.upper_by_length;
    return doc;
}

json series_report(const SeriesReport& report) {
    json doc;
    doc["mode"] = std::string(to_string(report.mode));
    doc["delta"] = report.delta;
    doc["a"] = report.a;
    doc["terms"] = report.terms;
    doc["exponent"] = report.exponent;
    doc["verdict"] = std::string(to_string(report.verdict));
    doc["empirical"] = std::string(to_string(report.empirical));
    doc["decade_ratio"] = report.decade_ratio;
    doc["near_boundary"] = report.near_boundary;
    json checkpoints = json::array();
    for (const auto& c : report.checkpoints)
        checkpoints.push_back({{"n", c.n}, {"term", c.term}, {"partial_sum", c.partial_sum}});
    doc["checkpoints"] = std::move(checkpoints);
    if (report.tail_corrected_limit) doc["tail_corrected_limit"] = *report.tail_corrected_limit;
    if (report.mode == SeriesMode::LogLog) {
        doc["interval_gains"] = report.interval_gains;
        doc["interval_lower_bounds"] = report.interval_lower_bounds;
        doc["gains_exceed_bounds"] = report.gains_exceed_bounds;
    }
    return doc;
}

json growth_report(const GrowthReport& report) {
    json doc;
    doc["spec"] = generator_spec_to_json(report.spec);
    doc["schedule"] = {{"times_count", report.schedule.times.size()},
                       {"stabilized", report.schedule.stabilized},
                       {"pattern", pattern_to_json(report.schedule.common_pattern)},
                       {"warnings", report.schedule.warnings}};
    doc["designed_series"] = report.designed_series;
    doc["measured_delta_sum"] = report.measured_delta_sum;
    doc["delta_floor_holds"] = report.delta_floor_holds;
    doc["hypothesis_at_risk"] = report.hypothesis_at_risk;
    doc["reached_consensus"] = report.reached_consensus;
    doc["windows_to_converge"] = report.windows_to_converge;
    doc["steps_to_converge"] = report.steps_to_converge;
    json classes = json::array();
    for (const auto& c : report.convergence.classes)
        classes.push_back({{"class", c.class_index}, {"residual", c.residual}, {"converged", c.converged}});
    doc["essential"] = std::move(classes);
    doc["warnings"] = report.convergence.warnings;
    return doc;
}

} // namespace consensus::io
