#include "consensus/cli.hpp"

#include "consensus/ergodic.hpp"
#include "consensus/errors.hpp"
#include "consensus/gantmacher.hpp"
#include "consensus/io.hpp"
#include "consensus/spectral.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

namespace consensus::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

fs::path resolve(const RunConfig& cfg, const fs::path& p) {
    if (cfg.out_dir && p.is_relative()) return *cfg.out_dir / p;
    return p;
}

// Opens a file below --out-dir, or hands back `fallback`.
class Sink {
public:
    Sink(const RunConfig& cfg, const std::optional<fs::path>& path, std::ostream& fallback) : stream_(&fallback) {
        if (path) {
            const fs::path target = resolve(cfg, *path);
            file_.open(target);
            if (!file_) throw Error(ErrorCode::MalformedInput, "cannot write " + target.string());
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

void emit(const RunConfig& cfg, const json& doc, std::ostream& out) {
    if (cfg.out_dir) {
        io::write_json(*cfg.out_dir / (cfg.command + ".json"), doc);
    } else {
        out << doc.dump(2) << '\n';
    }
}

const fs::path& require_input(const RunConfig& cfg) {
    if (!cfg.input) throw Error(ErrorCode::MalformedInput, cfg.command + " needs --input FILE");
    return *cfg.input;
}

std::unique_ptr<MatrixSource> load_sequence(const RunConfig& cfg) {
    json doc = io::read_json(require_input(cfg));
    if (cfg.seed && doc.is_object() && doc.contains("generator")) doc["generator"]["seed"] = *cfg.seed;
    return io::sequence_from_json(doc, cfg.tolerances.eps_row, cfg.renormalize);
}

OpinionVector load_x0(const RunConfig& cfg, std::size_t n) {
    if (cfg.x0) return io::opinion_from_json(io::read_json(*cfg.x0));
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    return OpinionVector(std::move(x));
}

GeneratorSpec generator_from_flags(const RunConfig& cfg) {
    if (cfg.input) {
        json doc = io::read_json(*cfg.input);
        GeneratorSpec spec = io::generator_spec_from_json(doc.contains("generator") ? doc.at("generator") : doc);
        if (cfg.seed) spec.seed = *cfg.seed;
        if (cfg.steps) spec.steps = *cfg.steps;
        return spec;
    }
    GeneratorSpec spec;
    spec.n = cfg.n;
    spec.seed = cfg.seed.value_or(0);
    spec.steps = cfg.steps.value_or(1000);
    spec.delta = cfg.delta;
    spec.gaps.mode = cfg.mode;
    spec.gaps.parameter = cfg.mode == GapMode::Bounded ? cfg.gap_bound : cfg.a;
    spec.activation = cfg.activation;
    spec.activation_probability = cfg.activation_probability;
    return spec;
}

ScheduleOptions schedule_options(const RunConfig& cfg) {
    ScheduleOptions opt;
    opt.horizon = cfg.horizon;
    opt.confirmation_span = cfg.window;
    opt.eps_z = cfg.tolerances.eps_z;
    opt.direction = cfg.direction;
    return opt;
}

AccumulationSchedule schedule_for(const MatrixSource& seq, const RunConfig& cfg) {
    ScheduleOptions opt = schedule_options(cfg);
    if (!opt.confirmation_span) {
        if (const auto* gen = dynamic_cast<const GeneratedSequence*>(&seq))
            opt.confirmation_span = std::max(seq.dimension() * seq.dimension(), gen->max_gap() + 1);
    }
    return detect_schedule(seq, opt);
}

void add_not_stabilized(const AccumulationSchedule& s, std::vector<std::string>& warnings) {
    if (s.stabilized) return;
    for (const auto& w : warnings)
        if (w.rfind("ScheduleNotStabilized", 0) == 0) return;
    warnings.insert(warnings.begin(), "ScheduleNotStabilized: the report is advisory");
}

int cmd_gantmacher(const RunConfig& cfg, std::ostream& out) {
    const StochasticMatrix a = io::matrix_from_json(io::read_json(require_input(cfg)), cfg.tolerances.eps_row,
                                                    cfg.renormalize);
    const ZeroPattern p = pattern_of(a, cfg.tolerances.eps_z);
    json doc = io::gantmacher_report(p, gantmacher_form(p));
    doc["tolerances"] = io::tolerances_to_json(cfg.tolerances);
    doc["warnings"] = json::array();
    emit(cfg, doc, out);
    return 0;
}

int cmd_schedule(const RunConfig& cfg, std::ostream& out) {
    const auto seq = load_sequence(cfg);
    AccumulationSchedule s = schedule_for(*seq, cfg);
    add_not_stabilized(s, s.warnings);
    json doc = io::schedule_report(s);
    doc["tolerances"] = io::tolerances_to_json(cfg.tolerances);
    emit(cfg, doc, out);
    return 0;
}

void write_check_csv(const ConvergenceReport& r, std::ostream& csv) {
    csv << "window";
    for (const auto& c : r.classes) csv << ",spread_class_" << c.class_index;
    csv << ",tau_bound,inessential_norm\n";
    for (std::size_t i = 0; i < r.windows; ++i) {
        csv << i;
        for (const auto& s : r.spread) csv << ',' << num(s[i]);
        csv << ',' << num(r.tau_bound[i]) << ',' << (r.inessential_norm.empty() ? "" : num(r.inessential_norm[i]))
            << '\n';
    }
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    if (cfg.direction != Direction::Backward) {
        throw Error(ErrorCode::ParameterOutOfRange, "check runs on the backward schedule");
    }
    const auto seq = load_sequence(cfg);
    const AccumulationSchedule s = schedule_for(*seq, cfg);
    TheoremOptions opt;
    opt.max_windows = cfg.max_windows;
    opt.tolerances = cfg.tolerances;
    opt.delta_override = cfg.delta_override;
    ConvergenceReport r = check_theorem(*seq, s, load_x0(cfg, seq->dimension()), opt);

    std::vector<std::string> warnings = s.warnings;
    warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
    r.warnings = warnings;

    json doc = io::convergence_report(r);
    doc["times"] = std::vector<std::size_t>(s.times.begin(), s.times.begin() + static_cast<std::ptrdiff_t>(r.windows + 1));
    doc["stabilized"] = s.stabilized;
    if (cfg.csv) {
        Sink sink(cfg, cfg.csv, out);
        write_check_csv(r, sink.get());
    }
    emit(cfg, doc, out);
    return 0;
}

int cmd_jsr(const RunConfig& cfg, std::ostream& out) {
    const auto seq = load_sequence(cfg);
    std::vector<Eigen::MatrixXd> set;
    auto add = [&set](Eigen::MatrixXd m) {
        for (const auto& existing : set)
            if (existing == m) return;
        set.push_back(std::move(m));
    };
    std::vector<std::string> warnings;
    if (cfg.transform) {
        const AccumulationSchedule s = schedule_for(*seq, cfg);
        add_not_stabilized(s, warnings);
        if (s.times.empty()) throw Error(ErrorCode::ScheduleNotStabilized, "schedule has no stabilization time");
        const GantmacherForm form = gantmacher_form(s.common_pattern);
        for (const auto& w : window_accumulations(*seq, s, cfg.tolerances.eps_row, cfg.max_windows.value_or(4)))
            add(transform_full(w, form, cfg.tolerances.eps_z));
    } else {
        const std::size_t count = seq->available(cfg.horizon);
        for (std::size_t t = 0; t < count; ++t) add(seq->at(t).matrix());
    }
    JsrOptions opt;
    opt.max_length = cfg.max_len;
    opt.budget = cfg.budget;
    const JsrBounds b = jsr_bounds(set, opt);
    if (b.truncated) warnings.push_back("BudgetTruncated: stopped at length " + std::to_string(b.max_length));

    json doc = io::jsr_report(b);
    doc["set_size"] = set.size();
    doc["transformed"] = cfg.transform;
    doc["tolerances"] = io::tolerances_to_json(cfg.tolerances);
    doc["warnings"] = warnings;
    emit(cfg, doc, out);
    return 0;
}

int cmd_growth(const RunConfig& cfg, std::ostream& out) {
    json doc;
    std::vector<std::string> warnings;
    std::optional<SeriesReport> series;
    if (cfg.mode != GapMode::Bounded) {
        series = series_partial_sums(cfg.mode == GapMode::Log ? SeriesMode::Log : SeriesMode::LogLog, cfg.delta,
                                     cfg.a, cfg.terms);
        doc["series"] = io::series_report(*series);
        if (series->near_boundary) warnings.push_back("NearBoundary: a ln(delta) is within 0.05 of -1");
    }
    const DeltaThreshold th = check_delta_threshold(cfg.delta);
    doc["threshold"] = {{"inv_e", th.inv_e},
                        {"max_positive_entries", th.max_positive_entries},
                        {"above_inv_e", th.above_inv_e}};

    std::optional<GrowthReport> experiment;
    if (cfg.mode == GapMode::Bounded || cfg.steps) {
        const GeneratorSpec spec = generator_from_flags(cfg);
        experiment = growth_experiment(spec, spec.steps, cfg.tolerances.eps_c, cfg.tolerances);
        doc["experiment"] = io::growth_report(*experiment);
        if (experiment->hypothesis_at_risk) warnings.push_back("HypothesisAtRisk: log gaps with a ln(delta) < -1");
        for (const auto& w : experiment->convergence.warnings) warnings.push_back(w);
    }

    if (cfg.out) {
        Sink sink(cfg, cfg.out, out);
        std::ostream& csv = sink.get();
        csv << "n,term,partial_sum\n";
        if (series) {
            for (const auto& c : series->samples) csv << c.n << ',' << num(c.term) << ',' << num(c.partial_sum) << '\n';
        } else if (experiment) {
            // Designed series sum_i delta^gap(i) over the generated windows.
            double sum = 0.0;
            for (std::size_t i = 0; i < experiment->gaps.size(); ++i) {
                const double term = std::pow(cfg.delta, static_cast<double>(experiment->gaps[i]));
                sum += term;
                csv << i << ',' << num(term) << ',' << num(sum) << '\n';
            }
        }
    }
    doc["tolerances"] = io::tolerances_to_json(cfg.tolerances);
    doc["warnings"] = warnings;
    emit(cfg, doc, out);
    return 0;
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
    const GeneratedSequence seq = generate_sequence(generator_from_flags(cfg));
    const json doc = io::sequence_to_json(seq, seq.spec().steps);
    if (cfg.out) {
        io::write_json(resolve(cfg, *cfg.out), doc);
    } else {
        out << doc.dump() << '\n';
    }
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const auto seq = load_sequence(cfg);
    const OpinionVector x0 = load_x0(cfg, seq->dimension());
    if (x0.size() != seq->dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "opinion vector of length " + std::to_string(x0.size()) +
                                                      " for dimension " + std::to_string(seq->dimension()));
    }
    const std::size_t steps = seq->available(cfg.steps.value_or(seq->length().value_or(100)));

    Sink sink(cfg, cfg.out, out);
    std::ostream& csv = sink.get();
    csv << 't';
    for (std::size_t i = 1; i <= x0.size(); ++i) csv << ",x_" << i;
    csv << ",min,max\n";
    Eigen::VectorXd x = x0.values();
    for (std::size_t t = 0;; ++t) {
        csv << t;
        for (Eigen::Index i = 0; i < x.size(); ++i) csv << ',' << num(x(i));
        csv << ',' << num(x.minCoeff()) << ',' << num(x.maxCoeff()) << '\n';
        if (t == steps) break;
        x = seq->at(t).matrix() * x;
    }
    return 0;
}

json error_doc(const std::string& code, const std::string& message) {
    return json{{"error", {{"code", code}, {"message", message}}}};
}

} // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                                    int& status) {
    RunConfig cfg;
    CLI::App app{"Analysis of inhomogeneous products of row-stochastic matrices", "consensus-kit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir;
    app.add_option("--eps-z", cfg.tolerances.eps_z, "zero threshold")->check(CLI::PositiveNumber);
    app.add_option("--eps-row", cfg.tolerances.eps_row, "row-sum tolerance")->check(CLI::PositiveNumber);
    app.add_option("--eps-c", cfg.tolerances.eps_c, "consensus tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "generator seed");
    app.add_option("--out-dir", out_dir, "directory for reports")->check(CLI::ExistingDirectory);

    std::string input, x0, out_path, csv_path;
    std::string direction = "backward", mode = "bounded", activation = "full";
    auto add_input = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("-i,--input", input, "matrix, sequence or generator JSON")->check(CLI::ExistingFile);
        if (required) opt->required();
        sub->add_flag("--renormalize", cfg.renormalize, "divide each row by its sum");
    };
    auto add_schedule = [&](CLI::App* sub) {
        sub->add_option("--horizon", cfg.horizon, "factors examined")->check(CLI::PositiveNumber);
        sub->add_option("--window", cfg.window, "confirmation span")->check(CLI::PositiveNumber);
    };
    const std::map<std::string, GapMode> modes{
        {"bounded", GapMode::Bounded}, {"log", GapMode::Log}, {"loglog", GapMode::LogLog}};
    auto add_generator = [&](CLI::App* sub) {
        sub->add_option("--mode", mode, "gap growth")->check(CLI::IsMember({"bounded", "log", "loglog"}));
        sub->add_option("--delta", cfg.delta, "minimum positive entry of active factors");
        sub->add_option("--a", cfg.a, "gap growth rate (log, loglog)");
        sub->add_option("--N", cfg.gap_bound, "gap length (bounded)");
        sub->add_option("--n", cfg.n, "dimension")->check(CLI::PositiveNumber);
        sub->add_option("--steps", cfg.steps, "sequence length");
        sub->add_option("--activation", activation, "full or subset")->check(CLI::IsMember({"full", "subset"}));
        sub->add_option("--p", cfg.activation_probability, "off-diagonal activation probability (subset)");
    };

    auto* gantmacher = app.add_subcommand("gantmacher", "communicating classes and block form of a matrix");
    add_input(gantmacher, true);

    auto* schedule = app.add_subcommand("schedule", "accumulation schedule of a sequence");
    add_input(schedule, true);
    add_schedule(schedule);
    schedule->add_option("--direction", direction, "backward or forward")
        ->check(CLI::IsMember({"backward", "forward"}));

    auto* check = app.add_subcommand("check", "convergence check over the detected windows");
    add_input(check, true);
    add_schedule(check);
    check->add_option("--x0", x0, "initial opinions (JSON array)")->check(CLI::ExistingFile);
    check->add_option("--delta", cfg.delta_override, "uniform delta used for the bounds");
    check->add_option("--max-windows", cfg.max_windows, "windows evaluated");
    check->add_option("--csv", csv_path, "per-window trajectory CSV");

    auto* jsr = app.add_subcommand("jsr", "joint spectral radius bounds");
    add_input(jsr, true);
    add_schedule(jsr);
    jsr->add_option("--max-len", cfg.max_len, "longest product")->check(CLI::PositiveNumber);
    jsr->add_option("--budget", cfg.budget, "products per length")->check(CLI::PositiveNumber);
    jsr->add_flag("--transform", cfg.transform, "use projected window accumulations");
    jsr->add_option("--max-windows", cfg.max_windows, "windows used with --transform");

    auto* growth = app.add_subcommand("growth", "interval growth series and experiment");
    add_input(growth, false);
    add_generator(growth);
    growth->add_option("--terms", cfg.terms, "series terms")->check(CLI::PositiveNumber);
    growth->add_option("--out", out_path, "series CSV");

    auto* gen = app.add_subcommand("gen", "write a generated sequence");
    add_input(gen, false);
    add_generator(gen);
    gen->add_option("--out", out_path, "sequence JSON");

    auto* simulate = app.add_subcommand("simulate", "opinion trajectory");
    add_input(simulate, true);
    simulate->add_option("--x0", x0, "initial opinions (JSON array)")->check(CLI::ExistingFile);
    simulate->add_option("--steps", cfg.steps, "steps");
    simulate->add_option("--out", out_path, "trajectory CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        status = app.exit(e, out, err) == 0 ? 0 : 1;
        return std::nullopt;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    if (!input.empty()) cfg.input = input;
    if (!x0.empty()) cfg.x0 = x0;
    if (!out_path.empty()) cfg.out = out_path;
    if (!csv_path.empty()) cfg.csv = csv_path;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.direction = direction == "forward" ? Direction::Forward : Direction::Backward;
    cfg.mode = modes.at(mode);
    cfg.activation = activation == "subset" ? Activation::RandomSubset : Activation::Full;
    status = 0;
    return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "gantmacher") return cmd_gantmacher(cfg, out);
        if (cfg.command == "schedule") return cmd_schedule(cfg, out);
        if (cfg.command == "check") return cmd_check(cfg, out);
        if (cfg.command == "jsr") return cmd_jsr(cfg, out);
        if (cfg.command == "growth") return cmd_growth(cfg, out);
        if (cfg.command == "gen") return cmd_gen(cfg, out);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out);
        throw Error(ErrorCode::MalformedInput, "unknown command \"" + cfg.command + "\"");
    } catch (const Error& e) {
        err << "consensus-kit: " << e.what() << '\n';
        const int status = exit_status(e.code());
        if (status != 1) {
            // Invariant and budget failures keep the witness in the report.
            try {
                emit(cfg, error_doc(std::string(to_string(e.code())), e.what()), out);
            } catch (const Error&) {
            }
        }
        return status;
    } catch (const std::exception& e) {
        err << "consensus-kit: " << e.what() << '\n';
        return 1;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    int status = 0;
    const auto cfg = parse_args(argc, argv, out, err, status);
    if (!cfg) return status;
    return run(*cfg, out, err);
}

} // namespace consensus::cli
