#include "condexp/errors.hpp"
#include "condexp/feasibility.hpp"
#include "condexp/io.hpp"
#include "condexp/polytope.hpp"
#include "condexp/scenario.hpp"
#include "condexp/simulator.hpp"
#include "condexp/two_slit.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace condexp;

// Exact rationals cross the boundary as fractions.Fraction; ints, floats
// (exact binary value) and "p/q" or decimal strings are accepted on input.
namespace pybind11::detail {
template <> struct type_caster<Rational> {
    PYBIND11_TYPE_CASTER(Rational, const_name("fractions.Fraction"));

    bool load(handle src, bool) {
        if (!src) return false;
        try {
            if (PyFloat_Check(src.ptr())) {
                value = rational_from_double(src.cast<double>());
            } else if (PyLong_Check(src.ptr()) || PyUnicode_Check(src.ptr()) ||
                       isinstance(src, module_::import("fractions").attr("Fraction"))) {
                value = parse_rational(py::str(src).cast<std::string>());
            } else {
                return false;
            }
        } catch (const std::exception&) {
            return false;
        }
        return true;
    }

    static handle cast(const Rational& r, return_value_policy, handle) {
        return module_::import("fractions").attr("Fraction")(to_fraction_string(r)).release();
    }
};

template <> struct type_caster<ObservablePair> {
    PYBIND11_TYPE_CASTER(ObservablePair, const_name("tuple[int, int]"));

    bool load(handle src, bool) {
        if (!isinstance<sequence>(src)) return false;
        auto seq = reinterpret_borrow<sequence>(src);
        if (seq.size() != 2) return false;
        auto a = seq[0].cast<ObservableId>();
        auto b = seq[1].cast<ObservableId>();
        value = a < b ? ObservablePair{a, b} : ObservablePair{b, a};
        return true;
    }

    static handle cast(const ObservablePair& p, return_value_policy, handle) {
        return py::make_tuple(p.first, p.second).release();
    }
};
} // namespace pybind11::detail

namespace {

py::list records_to_list(const std::vector<DataRecord>& records) {
    py::list out;
    for (const auto& r : records) out.append(r);
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Facets, joint-distribution feasibility, and measurement-protocol simulation";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<EmptyResultError>(m, "EmptyResultError", PyExc_ValueError);

    // scenario
    py::class_<Scenario>(m, "Scenario")
        .def_property_readonly("labels", &Scenario::labels)
        .def_property_readonly("contexts", &Scenario::member_lists)
        .def_property_readonly("correlated_pairs", &Scenario::correlated_pairs)
        .def_property_readonly("uncovered_observables", &Scenario::uncovered_observables)
        .def_property_readonly("warnings", &Scenario::warnings)
        .def_property_readonly("num_observables", &Scenario::num_observables)
        .def("to_json", [](const Scenario& s) { return io::scenario_to_json(s).dump(); })
        .def_static("from_json", [](const std::string& text) { return io::scenario_from_json(io::parse_json(text)); })
        .def(py::self == py::self)
        .def("__repr__", [](const Scenario& s) { return "Scenario(" + io::scenario_to_json(s).dump() + ")"; });
    m.def("build_scenario", &build_scenario, py::arg("observable_labels"), py::arg("context_member_lists"));

    py::class_<ResidualContext>(m, "ResidualContext")
        .def_readonly("context", &ResidualContext::context)
        .def_readonly("members", &ResidualContext::members);
    py::class_<CyclicityReport>(m, "CyclicityReport")
        .def_readonly("acyclic", &CyclicityReport::acyclic)
        .def_readonly("residual", &CyclicityReport::residual);
    m.def("detect_cyclicity", py::overload_cast<const Scenario&>(&detect_cyclicity), py::arg("scenario"));

    // polytope
    py::class_<CorrelationPoint>(m, "CorrelationPoint")
        .def(py::init<>())
        .def(py::init([](std::vector<Rational> singles, std::map<ObservablePair, Rational> correlators) {
                 return CorrelationPoint{std::move(singles), std::move(correlators)};
             }),
             py::arg("singles"), py::arg("correlators"))
        .def_readwrite("singles", &CorrelationPoint::singles)
        .def_readwrite("correlators", &CorrelationPoint::correlators)
        .def(py::self == py::self);
    py::class_<Inequality>(m, "Inequality")
        .def(py::init<>())
        .def_readwrite("constant", &Inequality::constant)
        .def_readwrite("single_coeffs", &Inequality::single_coeffs)
        .def_readwrite("pair_coeffs", &Inequality::pair_coeffs)
        .def("correlators_only", &Inequality::correlators_only)
        .def(py::self == py::self);
    py::class_<FacetDerivation>(m, "FacetDerivation")
        .def_readonly("facets", &FacetDerivation::facets)
        .def_readonly("implied_equations", &FacetDerivation::implied_equations)
        .def_readonly("dimension", &FacetDerivation::dimension);
    m.def("zero_point", &zero_point);
    m.def("enumerate_vertices", &enumerate_vertices, py::arg("scenario"));
    m.def("derive_facets", &derive_facets, py::arg("scenario"));
    m.def("derive_polytope", &derive_polytope, py::arg("scenario"));
    m.def("evaluate", py::overload_cast<const Inequality&, const CorrelationPoint&>(&evaluate), py::arg("inequality"), py::arg("point"));
    m.def("canonicalize", static_cast<Inequality (*)(Inequality)>(&canonicalize));
    m.def("format_inequality", &format_inequality);

    // feasibility
    py::class_<ContextMarginal>(m, "ContextMarginal")
        .def(py::init([](ContextId context, std::vector<Rational> table) { return ContextMarginal{context, std::move(table)}; }),
             py::arg("context"), py::arg("table"))
        .def_readwrite("context", &ContextMarginal::context)
        .def_readwrite("table", &ContextMarginal::table)
        .def(py::self == py::self);
    py::class_<JointDistribution>(m, "JointDistribution")
        .def(py::init([](std::size_t n, std::vector<Rational> weights) { return JointDistribution{n, std::move(weights)}; }),
             py::arg("num_observables"), py::arg("weights"))
        .def_readonly("num_observables", &JointDistribution::num_observables)
        .def_readonly("weights", &JointDistribution::weights);
    py::class_<ConsistencyReport>(m, "ConsistencyReport")
        .def_readonly("consistent", &ConsistencyReport::consistent)
        .def_readonly("max_discrepancy", &ConsistencyReport::max_discrepancy)
        .def_readonly("conflicts", &ConsistencyReport::conflicts);
    py::class_<MarginalCertificate>(m, "MarginalCertificate").def_readonly("coefficients", &MarginalCertificate::coefficients);
    py::enum_<FeasibilityStatus>(m, "FeasibilityStatus")
        .value("feasible", FeasibilityStatus::feasible)
        .value("infeasible", FeasibilityStatus::infeasible)
        .value("inconsistent_marginals", FeasibilityStatus::inconsistent_marginals);
    py::class_<FeasibilityVerdict>(m, "FeasibilityVerdict")
        .def_readonly("status", &FeasibilityVerdict::status)
        .def_readonly("consistency", &FeasibilityVerdict::consistency)
        .def_readonly("witness", &FeasibilityVerdict::witness)
        .def_readonly("certificate", &FeasibilityVerdict::certificate)
        .def_readonly("separating_inequality", &FeasibilityVerdict::separating_inequality);
    m.def("uniform_joint", &uniform_joint);
    m.def("project_all", &project_all, py::arg("joint"), py::arg("scenario"));
    m.def("check_consistency", &check_consistency, py::arg("marginals"), py::arg("scenario"));
    m.def("joint_exists", &joint_exists, py::arg("marginals"), py::arg("scenario"));
    m.def("correlations_to_marginals", &correlations_to_marginals, py::arg("point"), py::arg("scenario"));
    m.def("marginals_to_correlations", &marginals_to_correlations, py::arg("marginals"), py::arg("scenario"));

    // simulator
    py::enum_<Protocol>(m, "Protocol")
        .value("triple", Protocol::triple)
        .value("pair", Protocol::pair)
        .value("quantum", Protocol::quantum);
    py::class_<DataRecord>(m, "DataRecord")
        .def_readonly("run_index", &DataRecord::run_index)
        .def_readonly("context", &DataRecord::context)
        .def_readonly("outcomes", &DataRecord::outcomes)
        .def_readonly("protocol", &DataRecord::protocol);
    py::class_<Estimate>(m, "Estimate")
        .def_readonly("sum", &Estimate::sum)
        .def_readonly("count", &Estimate::count)
        .def_property_readonly("present", &Estimate::present)
        .def_property_readonly("value", &Estimate::value)
        .def_property_readonly("standard_error", &Estimate::standard_error);
    py::class_<EstimatedCorrelations>(m, "EstimatedCorrelations")
        .def_readonly("singles", &EstimatedCorrelations::singles)
        .def_readonly("pairs", &EstimatedCorrelations::pairs)
        .def_readonly("correlators", &EstimatedCorrelations::correlators)
        .def("correlator", &EstimatedCorrelations::correlator);
    py::class_<TripleProtocolResult>(m, "TripleProtocolResult")
        .def_readonly("estimates", &TripleProtocolResult::estimates)
        .def_readonly("statistic_histogram", &TripleProtocolResult::statistic_histogram)
        .def_readonly("min_statistic", &TripleProtocolResult::min_statistic)
        .def_readonly("statistic_sum", &TripleProtocolResult::statistic_sum)
        .def_readonly("runs", &TripleProtocolResult::runs)
        .def_property_readonly("mean_statistic", &TripleProtocolResult::mean_statistic);
    py::class_<PairProtocolConfig>(m, "PairProtocolConfig")
        .def(py::init([](Scenario s, std::vector<ContextMarginal> tables, std::optional<std::vector<ContextId>> schedule) {
                 auto cfg = PairProtocolConfig::round_robin(std::move(s), std::move(tables));
                 if (schedule) cfg.schedule = *schedule;
                 return cfg;
             }),
             py::arg("scenario"), py::arg("tables"), py::arg("schedule") = py::none())
        .def_readonly("schedule", &PairProtocolConfig::schedule);
    py::class_<PairProtocolResult>(m, "PairProtocolResult")
        .def_readonly("estimates", &PairProtocolResult::estimates)
        .def_readonly("runs_per_context", &PairProtocolResult::runs_per_context);
    py::class_<QuantumTwoLevelModel>(m, "QuantumTwoLevelModel")
        .def(py::init([](double omega, std::array<double, 3> times, double t0) { return QuantumTwoLevelModel{omega, times, t0}; }),
             py::arg("omega"), py::arg("times") = std::array<double, 3>{1.0, 2.0, 3.0}, py::arg("preparation_time") = 0.0)
        .def_static("equally_spaced", &QuantumTwoLevelModel::equally_spaced)
        .def_readwrite("omega", &QuantumTwoLevelModel::omega)
        .def_readwrite("times", &QuantumTwoLevelModel::times)
        .def_readwrite("preparation_time", &QuantumTwoLevelModel::preparation_time);

    m.def(
        "run_triple_protocol",
        [](const Scenario& s, const JointDistribution& joint, std::uint64_t runs, std::uint64_t seed, std::size_t threads,
           bool collect) {
            RecordCollector sink;
            auto result = run_triple_protocol(s, joint, runs, seed, {threads, collect ? &sink : nullptr});
            return py::make_tuple(records_to_list(sink.records), result);
        },
        py::arg("scenario"), py::arg("joint"), py::arg("runs"), py::arg("seed"), py::arg("threads") = 1,
        py::arg("collect_records") = false);
    m.def(
        "run_pair_protocol",
        [](const PairProtocolConfig& cfg, std::uint64_t runs, std::uint64_t seed, std::size_t threads, bool collect) {
            RecordCollector sink;
            auto result = run_pair_protocol(cfg, runs, seed, {threads, collect ? &sink : nullptr});
            return py::make_tuple(records_to_list(sink.records), result);
        },
        py::arg("config"), py::arg("runs"), py::arg("seed"), py::arg("threads") = 1, py::arg("collect_records") = false);
    m.def(
        "run_quantum_pair_protocol",
        [](const QuantumTwoLevelModel& model, std::uint64_t runs, std::uint64_t seed, std::size_t threads, bool collect) {
            RecordCollector sink;
            auto result = run_quantum_pair_protocol(model, runs, seed, {threads, collect ? &sink : nullptr});
            return py::make_tuple(records_to_list(sink.records), result);
        },
        py::arg("model"), py::arg("runs"), py::arg("seed"), py::arg("threads") = 1, py::arg("collect_records") = false);
    m.def("quantum_pair_correlator", &quantum_pair_correlator, py::arg("model"), py::arg("i"), py::arg("j"));
    m.def("quantum_sequential_table", &quantum_sequential_table, py::arg("model"), py::arg("i"), py::arg("j"));
    m.def("three_time_pair_scenario", &three_time_pair_scenario);
    m.def("lg_statistic", py::overload_cast<const CorrelationPoint&>(&lg_statistic));
    m.def("lg_statistic", py::overload_cast<const EstimatedCorrelations&>(&lg_statistic));

    // two-slit
    py::class_<SlitGeometry>(m, "SlitGeometry")
        .def(py::init<>())
        .def(py::init([](double a, double d, double lambda, double L, std::size_t bins, double span) {
                 return SlitGeometry{a, d, lambda, L, bins, span};
             }),
             py::arg("a"), py::arg("d"), py::arg("wavelength"), py::arg("L"), py::arg("bins") = 401, py::arg("span") = 0.0)
        .def_readwrite("slit_width", &SlitGeometry::slit_width)
        .def_readwrite("slit_separation", &SlitGeometry::slit_separation)
        .def_readwrite("wavelength", &SlitGeometry::wavelength)
        .def_readwrite("screen_distance", &SlitGeometry::screen_distance)
        .def_readwrite("bins", &SlitGeometry::bins)
        .def_readwrite("span", &SlitGeometry::span)
        .def("positions", &SlitGeometry::positions);
    py::enum_<SlitTag>(m, "SlitTag")
        .value("slit1_only", SlitTag::slit1_only)
        .value("slit2_only", SlitTag::slit2_only)
        .value("both_open", SlitTag::both_open);
    py::class_<SlitContext>(m, "SlitContext")
        .def(py::init([](SlitTag tag, std::vector<double> positions, std::vector<double> distribution) {
                 return SlitContext{tag, std::move(positions), std::move(distribution)};
             }),
             py::arg("tag"), py::arg("positions"), py::arg("distribution"))
        .def_readonly("tag", &SlitContext::tag)
        .def_readonly("positions", &SlitContext::positions)
        .def_readonly("distribution", &SlitContext::distribution);
    py::class_<AdditivityReport>(m, "AdditivityReport")
        .def_readonly("positions", &AdditivityReport::positions)
        .def_readonly("deficit", &AdditivityReport::deficit)
        .def_readonly("max_abs_deficit", &AdditivityReport::max_abs_deficit)
        .def_readonly("deficit_sum", &AdditivityReport::deficit_sum)
        .def_readonly("classical_additive", &AdditivityReport::classical_additive);
    m.def("build_contexts", [](const SlitGeometry& g) {
        auto c = build_contexts(g);
        return py::make_tuple(c.slit1, c.slit2, c.both);
    });
    m.def("additivity_report", &additivity_report, py::arg("c1"), py::arg("c2"), py::arg("c12"),
          py::arg("tolerance") = kAdditivityTolerance);
    m.def("sample_screen_hits", &sample_screen_hits, py::arg("context"), py::arg("runs"), py::arg("seed"),
          py::arg("threads") = 1);

    m.attr("__version__") = CONDEXP_VERSION;
}
