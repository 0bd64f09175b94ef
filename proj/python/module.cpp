#include "fdc/bench.hpp"
#include "fdc/evaluator.hpp"
#include "fdc/oracle.hpp"
#include "fdc/parser.hpp"
#include "fdc/solver.hpp"
#include "fdc/translate.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <chrono>

namespace py = pybind11;
using namespace fdc;

namespace {

const Theorem& theorem(const Model& m, const std::string& name) {
    if (name.empty() && m.theorems.size() == 1)
        return m.theorems[0];
    for (const auto& t : m.theorems)
        if (t.name == name)
            return t;
    throw py::key_error("no theorem '" + name + "'");
}

py::dict verdict_dict(const Verdict& v) {
    py::dict d;
    d["verdict"] = to_string(v.kind);
    d["witness"] = v.witness;
    d["reason"] = v.reason;
    return d;
}

Model parse(const std::string& text, const std::map<std::string, Value>& params,
            const std::string& path) {
    ParseOptions o;
    o.params = params;
    auto r = parse_model({text, path}, o);
    if (!r.ok()) {
        std::string msg;
        for (const auto& d : r.diagnostics)
            msg += (msg.empty() ? "" : "\n") + d.to_string();
        throw py::value_error(msg);
    }
    return std::move(*r.value);
}

TranslateOptions translate_options(const std::string& mode, std::optional<double> factor,
                                   bool eliminate_choices, bool inline_definitions) {
    TranslateOptions o;
    auto m = parse_quantifier_mode(mode);
    if (!m)
        throw py::value_error("unknown quantifier mode '" + mode + "'");
    o.mode = *m;
    o.heuristic_factor = factor;
    o.eliminate_choices = eliminate_choices;
    o.inline_definitions = inline_definitions;
    return o;
}

} // namespace

PYBIND11_MODULE(_fdcheck, mod) {
    mod.doc() = "Finite-domain validity checking by evaluation and SMT translation";

    py::class_<Model>(mod, "Model")
        .def_property_readonly("theorems",
                               [](const Model& m) {
                                   std::vector<std::string> names;
                                   for (const auto& t : m.theorems)
                                       names.push_back(t.name);
                                   return names;
                               })
        .def("__str__", [](const Model& m) { return pretty_print(m); });

    mod.def("parse", &parse, py::arg("text"),
            py::arg("params") = std::map<std::string, Value>{}, py::arg("path") = "",
            "Parse and typecheck a model; raises ValueError with the diagnostics.");

    mod.def("bench_model",
            [](const std::string& family, const std::string& pattern, unsigned n) {
                auto f = parse_family(family);
                auto p = parse_pattern(pattern);
                if (!f || !p)
                    throw py::value_error("unknown family or pattern");
                return bench_model({*f, *p, n});
            },
            py::arg("family"), py::arg("pattern"), py::arg("n") = 1);

    mod.def("check",
            [](const Model& m, const std::string& name, std::optional<double> timeout_s) {
                const Theorem& t = theorem(m, name);
                EvalOptions o;
                if (timeout_s)
                    o.deadline = std::chrono::steady_clock::now() +
                                 std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>(*timeout_s));
                CheckResult r;
                {
                    py::gil_scoped_release nogil;
                    r = check_validity(m, t.formula, o);
                }
                py::dict d = verdict_dict(r.verdict);
                d["body_evals"] = r.stats.body_evals;
                d["body_evals_by_depth"] = r.stats.body_evals_by_depth;
                d["choose_yields"] = r.stats.choose_yields;
                return d;
            },
            py::arg("model"), py::arg("theorem") = "", py::arg("timeout") = py::none());

    mod.def("oracle",
            [](const Model& m, const std::string& name) {
                return verdict_dict(oracle_check(m, theorem(m, name).formula));
            },
            py::arg("model"), py::arg("theorem") = "");

    mod.def("translate",
            [](const Model& m, const std::string& name, const std::string& mode,
               std::optional<double> factor, bool eliminate_choices, bool inline_definitions) {
                const Theorem& t = theorem(m, name);
                auto o = translate_options(mode, factor, eliminate_choices, inline_definitions);
                try {
                    return emit_smtlib(translate(m, t.formula, o, t.name));
                } catch (const TranslationError& e) {
                    throw py::value_error(e.what());
                }
            },
            py::arg("model"), py::arg("theorem") = "", py::arg("mode") = "eliminate",
            py::arg("heuristic") = 2.0, py::arg("eliminate_choices") = false,
            py::arg("inline_definitions") = false);

    mod.def("solvers",
            [](std::optional<std::string> config) {
                std::vector<std::string> names;
                for (const auto& c : solver_configs(config))
                    if (c.available())
                        names.push_back(c.name);
                return names;
            },
            py::arg("config") = py::none(), "Configured solvers whose program is found.");

    mod.def("solve",
            [](const Model& m, const std::string& solver, const std::string& name,
               const std::string& mode, double limit_s, std::optional<std::string> config) {
                const Theorem& t = theorem(m, name);
                auto cfgs = solver_configs(config);
                const SolverConfig* c = find_solver(cfgs, solver);
                if (!c)
                    throw py::value_error("no solver '" + solver + "'");
                auto o = translate_options(mode, 2.0, false, false);
                auto limit = std::chrono::milliseconds(static_cast<long>(limit_s * 1000));
                Decision r;
                {
                    py::gil_scoped_release nogil;
                    r = decide(m, t.formula, *c, o, limit, t.name);
                }
                py::dict d = verdict_dict(r.verdict);
                d["answer"] = to_string(r.outcome.answer);
                d["wall_ms"] = r.outcome.wall_ms;
                d["translate_ms"] = r.translate_ms;
                return d;
            },
            py::arg("model"), py::arg("solver"), py::arg("theorem") = "",
            py::arg("mode") = "eliminate", py::arg("limit") = 60.0,
            py::arg("config") = py::none());
}
