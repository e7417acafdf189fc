#include "condexp/cli.hpp"

#include "condexp/errors.hpp"
#include "condexp/feasibility.hpp"
#include "condexp/io.hpp"
#include "condexp/polytope.hpp"
#include "condexp/simulator.hpp"
#include "condexp/two_slit.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace condexp::cli {

namespace fs = std::filesystem;
using io::json;
using io::MarginalsInput;

namespace {

struct ExperimentConfig {
    std::string command;
    std::string protocol;
    std::optional<std::string> scenario;
    std::optional<std::string> marginals;
    std::optional<std::string> geometry;
    std::uint64_t runs = 10000;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::size_t threads = 1;
    std::optional<double> omega_tau;
};

json config_json(const ExperimentConfig& cfg) {
    auto opt = [](const auto& v) -> json { return v ? json(*v) : json(nullptr); };
    json j;
    j["command"] = cfg.command;
    if (!cfg.protocol.empty()) j["protocol"] = cfg.protocol;
    j["scenario"] = opt(cfg.scenario);
    j["marginals"] = opt(cfg.marginals);
    j["geometry"] = opt(cfg.geometry);
    j["runs"] = cfg.runs;
    j["seed"] = opt(cfg.seed);
    j["threads"] = cfg.threads;
    j["omega_tau"] = opt(cfg.omega_tau);
    j["out"] = opt(cfg.out_dir);
    return j;
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

std::optional<fs::path> prepare_out_dir(const ExperimentConfig& cfg) {
    if (!cfg.out_dir) return std::nullopt;
    fs::path dir(*cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory " + dir.string());
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write " + path.string());
    return f;
}

void write_json(const fs::path& path, const json& j) {
    auto f = open_output(path);
    f << j.dump(2) << '\n';
}

json estimate_json(const Estimate& e) {
    json j;
    j["value"] = e.present() ? json(e.value()) : json(nullptr);
    j["stderr"] = e.present() ? json(e.standard_error()) : json(nullptr);
    j["count"] = e.count;
    j["sum"] = e.sum;
    if (!e.present()) j["absent"] = true;
    return j;
}

json estimates_json(const EstimatedCorrelations& est, const Scenario& s) {
    json singles = json::array();
    for (std::size_t i = 0; i < est.singles.size(); ++i) {
        json e = estimate_json(est.singles[i]);
        e["observable"] = s.observables()[i].label;
        singles.push_back(e);
    }
    json pairs = json::array();
    for (std::size_t k = 0; k < est.pairs.size(); ++k) {
        json e = estimate_json(est.correlators[k]);
        e["pair"] = s.observables()[est.pairs[k].first].label + "*" + s.observables()[est.pairs[k].second].label;
        pairs.push_back(e);
    }
    return {{"singles", singles}, {"correlators", pairs}};
}

void print_estimates(std::ostream& out, const EstimatedCorrelations& est, const Scenario& s) {
    for (std::size_t k = 0; k < est.pairs.size(); ++k) {
        const auto& e = est.correlators[k];
        out << "  K(" << s.observables()[est.pairs[k].first].label << "," << s.observables()[est.pairs[k].second].label
            << ") = ";
        if (e.present()) {
            out << io::format_double(e.value()) << " +- " << io::format_double(e.standard_error()) << "  (N=" << e.count << ")\n";
        } else {
            out << "absent (no runs)\n";
        }
    }
}

bool has_lg_pairs(const EstimatedCorrelations& est) {
    try {
        (void)lg_statistic(est);
        return true;
    } catch (const ShapeError&) {
        return false;
    }
}

int cmd_facets(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.scenario) throw ValidationError("facets needs --scenario <path>");
    const Scenario s = io::load_scenario(*cfg.scenario);
    for (const auto& w : s.warnings()) err << "warning: " << w << '\n';
    const auto dir = prepare_out_dir(cfg);
    const auto derivation = derive_polytope(s);

    out << "observables: " << s.num_observables() << ", contexts: " << s.num_contexts()
        << ", dimension: " << derivation.dimension << '\n';
    out << derivation.facets.size() << " facets\n";
    for (const auto& f : derivation.facets) {
        out << "  " << format_inequality(f, s) << (f.correlators_only() ? "   [correlators only]" : "") << '\n';
    }
    if (!derivation.implied_equations.empty()) {
        out << derivation.implied_equations.size() << " implied equations\n";
        for (const auto& e : derivation.implied_equations) {
            auto text = format_inequality(e, s);
            out << "  " << text.substr(0, text.size() - 2) << "= 0\n";
        }
    }
    if (dir) {
        auto f = open_output(*dir / "facets.csv");
        io::write_facets_csv(f, s, derivation.facets);
        out << "wrote " << (*dir / "facets.csv").string() << '\n';
    }
    return kSuccess;
}

int cmd_check(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.marginals) throw ValidationError("check needs --marginals <path>");
    const auto input = io::load_marginals(*cfg.marginals);
    const Scenario& s = input.scenario;
    for (const auto& w : s.warnings()) err << "warning: " << w << '\n';
    const auto dir = prepare_out_dir(cfg);
    const auto verdict = joint_exists(input.marginals, s);
    const auto cyclicity = detect_cyclicity(s);

    out << "status: " << to_string(verdict.status) << '\n';
    out << "context hypergraph: " << (cyclicity.acyclic ? "acyclic" : "cyclic") << '\n';
    out << "max sub-marginal discrepancy: " << verdict.consistency.max_discrepancy.get_str() << '\n';
    for (const auto& c : verdict.consistency.conflicts) out << "  " << c << '\n';

    json report;
    report["status"] = to_string(verdict.status);
    report["acyclic"] = cyclicity.acyclic;
    report["consistency"] = {{"consistent", verdict.consistency.consistent},
                             {"max_discrepancy", to_fraction_string(verdict.consistency.max_discrepancy)},
                             {"conflicts", verdict.consistency.conflicts}};
    if (verdict.witness) {
        json weights = json::array();
        out << "witness (nonzero weights):\n";
        for (std::uint32_t a = 0; a < verdict.witness->weights.size(); ++a) {
            const auto& w = verdict.witness->weights[a];
            weights.push_back(to_fraction_string(w));
            if (w != 0) out << "  " << outcome_label(a, s.num_observables()) << "  " << w.get_str() << '\n';
        }
        report["witness"] = weights;
    }
    if (verdict.certificate) {
        json coeffs = json::array();
        for (std::size_t c = 0; c < verdict.certificate->coefficients.size(); ++c) {
            json table = json::object();
            const auto& row = verdict.certificate->coefficients[c];
            for (std::uint32_t t = 0; t < row.size(); ++t) table[outcome_label(t, s.context(static_cast<ContextId>(c)).size())] = to_fraction_string(row[t]);
            coeffs.push_back({{"context", c}, {"coefficients", table}});
        }
        report["certificate"] = coeffs;
        out << "Farkas certificate over the tables (nonnegative on every assignment, value "
            << evaluate(*verdict.certificate, input.marginals).get_str() << " on the input)\n";
    }
    if (verdict.separating_inequality) {
        report["separating_inequality"] = io::inequality_to_json(*verdict.separating_inequality, s);
        const auto point = marginals_to_correlations(input.marginals, s);
        out << "violated facet: " << format_inequality(*verdict.separating_inequality, s) << "  (slack "
            << evaluate(*verdict.separating_inequality, point).get_str() << ")\n";
    }
    if (dir) {
        write_json(*dir / "verdict.json", report);
        out << "wrote " << (*dir / "verdict.json").string() << '\n';
        if (verdict.witness) {
            auto f = open_output(*dir / "witness.csv");
            f << "assignment,weight\n";
            for (std::uint32_t a = 0; a < verdict.witness->weights.size(); ++a) {
                f << outcome_label(a, s.num_observables()) << ',' << to_fraction_string(verdict.witness->weights[a]) << '\n';
            }
            out << "witness: " << (*dir / "witness.csv").string() << '\n';
        }
    }
    switch (verdict.status) {
    case FeasibilityStatus::feasible:
        return kSuccess;
    case FeasibilityStatus::infeasible:
        return kInfeasible;
    case FeasibilityStatus::inconsistent_marginals:
        return kInconsistentMarginals;
    }
    return kSuccess;
}

JointDistribution joint_from_single_context(const MarginalsInput& input) {
    const Scenario& s = input.scenario;
    if (s.num_contexts() != 1 || input.marginals.size() != 1) throw ValidationError("triple protocol needs one context table");
    const auto& ctx = s.context(0);
    if (ctx.size() != s.num_observables()) throw ValidationError("triple protocol context must measure every observable");
    validate_marginal(input.marginals[0], s);
    const auto n = s.num_observables();
    JointDistribution joint{n, std::vector<Rational>(std::size_t{1} << n, Rational(0))};
    for (std::uint32_t mask = 0; mask < joint.weights.size(); ++mask) {
        const Assignment a{mask, n};
        std::uint32_t t = 0;
        for (auto m : ctx.members) t = (t << 1) | (a.value(m) < 0 ? 1U : 0U);
        joint.weights[mask] = input.marginals[0].table[t];
    }
    return joint;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream&) {
    if (!cfg.seed) throw ValidationError("simulate needs --seed <u64>; runs are never seeded from entropy");
    if (cfg.runs == 0) throw ValidationError("--runs must be at least 1");
    const auto dir = prepare_out_dir(cfg);
    std::optional<std::ofstream> records_file;
    std::optional<CsvRecordWriter> writer;
    if (dir) {
        records_file.emplace(open_output(*dir / "records.csv"));
        writer.emplace(*records_file);
    }
    RunOptions options{cfg.threads, writer ? &*writer : nullptr};

    json summary;
    summary["config"] = config_json(cfg);
    summary["seed"] = *cfg.seed;

    if (cfg.protocol == "triple") {
        Scenario s = build_scenario({"Q1", "Q2", "Q3"}, {{0, 1, 2}});
        JointDistribution joint = uniform_joint(3);
        if (cfg.marginals) {
            auto input = io::load_marginals(*cfg.marginals);
            joint = joint_from_single_context(input);
            s = input.scenario;
        }
        const auto result = run_triple_protocol(s, joint, cfg.runs, *cfg.seed, options);
        summary["estimates"] = estimates_json(result.estimates, s);
        summary["lg_statistic"] = lg_statistic(result.estimates);
        json hist = json::object();
        for (const auto& [value, count] : result.statistic_histogram) hist[std::to_string(value)] = count;
        summary["per_record_statistic"] = {{"min", result.min_statistic},
                                           {"mean", result.mean_statistic()},
                                           {"sum", result.statistic_sum},
                                           {"histogram", hist}};
        out << "protocol: triple, runs: " << cfg.runs << ", seed: " << *cfg.seed << '\n';
        print_estimates(out, result.estimates, s);
        out << "min per-record statistic: " << result.min_statistic << '\n';
        out << "lg_statistic: " << io::format_double(lg_statistic(result.estimates)) << '\n';
    } else {
        PairProtocolResult result;
        Scenario s = three_time_pair_scenario();
        if (cfg.protocol == "quantum") {
            if (!cfg.omega_tau) throw ValidationError("simulate quantum needs --omega-tau <float>");
            const auto model = QuantumTwoLevelModel::equally_spaced(*cfg.omega_tau);
            result = run_quantum_pair_protocol(model, cfg.runs, *cfg.seed, options);
            json exact = json::object();
            for (const auto& c : s.contexts()) {
                exact[s.observables()[c.members[0]].label + "*" + s.observables()[c.members[1]].label] =
                    quantum_pair_correlator(model, c.members[0], c.members[1]);
            }
            summary["model"] = {{"omega", model.omega}, {"times", model.times}, {"preparation_time", model.preparation_time},
                                {"exact_correlators", exact}};
        } else if (cfg.protocol == "pair") {
            std::vector<ContextMarginal> tables;
            if (cfg.marginals) {
                auto input = io::load_marginals(*cfg.marginals);
                s = input.scenario;
                tables = input.marginals;
            } else {
                for (const auto& c : s.contexts()) tables.push_back({c.id, std::vector<Rational>(4, Rational(1, 4))});
            }
            result = run_pair_protocol(PairProtocolConfig::round_robin(s, tables), cfg.runs, *cfg.seed, options);
        } else {
            throw ValidationError("unknown protocol '" + cfg.protocol + "'; expected triple, pair or quantum");
        }
        summary["estimates"] = estimates_json(result.estimates, s);
        summary["runs_per_context"] = result.runs_per_context;
        out << "protocol: " << cfg.protocol << ", runs: " << cfg.runs << ", seed: " << *cfg.seed << '\n';
        print_estimates(out, result.estimates, s);
        if (has_lg_pairs(result.estimates)) {
            const double lg = lg_statistic(result.estimates);
            summary["lg_statistic"] = lg;
            out << "lg_statistic: " << io::format_double(lg) << '\n';
        } else {
            summary["lg_statistic"] = nullptr;
        }
    }
    summary["metadata"] = {{"generated_at", iso8601_now()}};
    if (dir) {
        records_file->close();
        write_json(*dir / "summary.json", summary);
        out << "wrote " << (*dir / "records.csv").string() << " and " << (*dir / "summary.json").string() << '\n';
    }
    return kSuccess;
}

int cmd_twoslit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    io::GeometryInput input;
    if (cfg.geometry) {
        input = io::load_geometry(*cfg.geometry);
    } else {
        input.geometry = SlitGeometry{};
    }
    const auto dir = prepare_out_dir(cfg);
    SlitContexts contexts;
    json summary;
    summary["config"] = config_json(cfg);
    if (input.geometry) {
        for (const auto& w : input.geometry->warnings()) err << "warning: " << w << '\n';
        contexts = build_contexts(*input.geometry);
        summary["geometry"] = io::geometry_to_json(*input.geometry);
    } else {
        contexts = *input.contexts;
        summary["geometry"] = nullptr;
    }
    const auto report = additivity_report(contexts.slit1, contexts.slit2, contexts.both);
    summary["bins"] = report.positions.size();
    summary["max_abs_deficit"] = report.max_abs_deficit;
    summary["deficit_sum"] = report.deficit_sum;
    summary["tolerance"] = kAdditivityTolerance;
    summary["classical_additive"] = report.classical_additive;
    summary["metadata"] = {{"generated_at", iso8601_now()}};

    out << "bins: " << report.positions.size() << '\n';
    out << "max |p12 - (p1+p2)/2|: " << io::format_double(report.max_abs_deficit) << '\n';
    out << "sum of deficits: " << io::format_double(report.deficit_sum) << '\n';
    out << "classical-additive: " << (report.classical_additive ? "true" : "false") << '\n';
    if (dir) {
        auto f = open_output(*dir / "report.csv");
        io::write_two_slit_csv(f, contexts, report);
        f.close();
        write_json(*dir / "summary.json", summary);
        out << "wrote " << (*dir / "report.csv").string() << '\n';
    }
    return kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conditions of possible experience: facets, joint-distribution checks, protocol simulations"};
    app.require_subcommand(1);
    ExperimentConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option_function<std::string>("--scenario", [&](const std::string& v) { cfg.scenario = v; }, "Scenario JSON file");
        sub->add_option_function<std::string>("--marginals", [&](const std::string& v) { cfg.marginals = v; }, "Marginals JSON file");
        sub->add_option_function<std::string>("--geometry", [&](const std::string& v) { cfg.geometry = v; }, "Two-slit geometry JSON file");
        sub->add_option("--runs", cfg.runs, "Number of runs")->check(CLI::PositiveNumber);
        sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { cfg.seed = v; }, "RNG seed");
        sub->add_option_function<std::string>("--out", [&](const std::string& v) { cfg.out_dir = v; }, "Output directory");
        sub->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option_function<double>("--omega-tau", [&](double v) { cfg.omega_tau = v; }, "Precession angle between measurements");
    };
    auto* facets = app.add_subcommand("facets", "Derive the facet inequalities of a scenario");
    auto* check = app.add_subcommand("check", "Decide whether marginals admit a joint distribution");
    auto* simulate = app.add_subcommand("simulate", "Run a measurement protocol");
    auto* twoslit = app.add_subcommand("twoslit", "Two-slit additivity report");
    for (auto* sub : {facets, check, simulate, twoslit}) add_common(sub);
    simulate->add_option("protocol", cfg.protocol, "triple, pair or quantum")->required()->check(CLI::IsMember({"triple", "pair", "quantum"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }

    try {
        if (facets->parsed()) {
            cfg.command = "facets";
            return cmd_facets(cfg, out, err);
        }
        if (check->parsed()) {
            cfg.command = "check";
            return cmd_check(cfg, out, err);
        }
        if (simulate->parsed()) {
            cfg.command = "simulate";
            return cmd_simulate(cfg, out, err);
        }
        cfg.command = "twoslit";
        return cmd_twoslit(cfg, out, err);
    } catch (const CapacityError& e) {
        err << "capacity error: " << e.what() << '\n';
        return kCapacity;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const ShapeError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const EmptyResultError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    }
}

} // namespace condexp::cli
