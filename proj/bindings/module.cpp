#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sppl/backend.hpp"
#include "sppl/evaluator.hpp"
#include "sppl/metrics.hpp"
#include "sppl/rank.hpp"
#include "sppl/scorer.hpp"
#include "sppl/stylepool.hpp"
#include "sppl/version.hpp"

namespace py = pybind11;

namespace {

sppl::RankDirection direction_from_string(const std::string& name) {
    if (name == "ascending") return sppl::RankDirection::Ascending;
    if (name == "descending") return sppl::RankDirection::Descending;
    throw py::value_error("direction must be 'ascending' or 'descending'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Strategy selection for instruction-tuning data via self-aligned perplexity";
    m.attr("__version__") = sppl::kVersion;

    m.def(
        "perplexity",
        [](const std::vector<double>& logprobs) { return sppl::perplexity(logprobs); },
        py::arg("logprobs"),
        "exp of the mean negative log-likelihood over continuation tokens");

    m.def(
        "fractional_ranks",
        [](const std::vector<double>& values, const std::string& direction) {
            return sppl::fractional_ranks(values, direction_from_string(direction));
        },
        py::arg("values"), py::arg("direction") = "ascending",
        "1..n ranks; tied values receive the mean of their positional ranks");

    m.def(
        "weighted_spearman",
        [](const std::vector<double>& r1, const std::vector<double>& r2,
           const std::vector<double>& w) -> py::object {
            auto rho = sppl::weighted_spearman(r1, r2, w);
            if (!rho) return py::none();
            return py::float_(*rho);
        },
        py::arg("r1"), py::arg("r2"), py::arg("weights"),
        "Weighted Pearson correlation between two rank vectors; None when undefined");

    m.def("population_std",
          [](const std::vector<double>& values) { return sppl::population_std(values); },
          py::arg("values"));

    m.def(
        "improvement_ratio",
        [](double acc_large, double acc_small) -> py::object {
            auto ratio = sppl::improvement_ratio(acc_large, acc_small);
            if (!ratio) return py::none();
            return py::float_(*ratio);
        },
        py::arg("acc_large"), py::arg("acc_small"),
        "acc_large / acc_small - 1; None when acc_small is zero");

    m.def(
        "extract_last_number",
        [](const std::string& text) -> py::object {
            auto value = sppl::extract_last_number(text);
            if (!value) return py::none();
            return py::float_(*value);
        },
        py::arg("text"), "Rightmost decimal number in the text, or None");

    m.def("numbers_match", &sppl::numbers_match, py::arg("a"), py::arg("gold"));
    m.def("extract_final_label",
          [](const std::string& text) { return sppl::extract_final_label(text); },
          py::arg("text"));
    m.def("normalize_label",
          [](const std::string& text) { return sppl::normalize_label(text); }, py::arg("text"));

    m.def(
        "rank_order",
        [](const std::map<std::string, double>& means) {
            std::map<std::string, sppl::StrategyScore> scores;
            for (const auto& [id, mean] : means) {
                scores[id] = {id, mean, mean, 1};
            }
            auto report = sppl::rank_strategies(scores, sppl::RankMetric::Sppl, "", 0);
            std::vector<std::string> order;
            for (const auto& e : report.entries) {
                order.push_back(e.strategy_id);
            }
            return order;
        },
        py::arg("means"),
        "Strategy ids ordered by ascending mean score (ties break lexicographically)");

    m.def(
        "sample_exemplar_ids",
        [](const std::map<std::string, std::string>& pool, const std::string& exclude, int count,
           std::uint64_t seed, const std::string& fallback) {
            sppl::StylePool style_pool;
            for (const auto& [task_id, text] : pool) {
                style_pool.entries[task_id] = {text, ""};
            }
            sppl::SpplConfig cfg;
            cfg.exemplar_count = count;
            cfg.seed = seed;
            auto parsed = sppl::fallback_from_string(fallback);
            if (!parsed) throw py::value_error("fallback must be 'reduce_count' or 'plain_ppl'");
            cfg.fallback = *parsed;
            std::vector<std::string> ids;
            for (const auto& exemplar : sppl::sample_exemplars(style_pool, exclude, cfg)) {
                ids.push_back(exemplar.task_id);
            }
            return ids;
        },
        py::arg("pool"), py::arg("exclude"), py::arg("count") = 2, py::arg("seed") = 0,
        py::arg("fallback") = "reduce_count",
        "Deterministic exemplar draw from a {task_id: text} pool, excluding one task");

    py::class_<sppl::MockBackend>(m, "MockBackend")
        .def(py::init([](const std::string& rules_path) {
                 return std::make_unique<sppl::MockBackend>("mock",
                                                            sppl::load_mock_rules(rules_path));
             }),
             py::arg("rules_path"))
        .def("token_logprobs",
             [](sppl::MockBackend& backend, const std::string& prompt,
                const std::string& continuation) {
                 return backend.token_logprobs(prompt, continuation);
             },
             py::arg("prompt"), py::arg("continuation"))
        .def_property_readonly("call_count", &sppl::MockBackend::call_count);
}
