// Python extension. Structured values cross the boundary as JSON text; the
// spygame package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "spygame/annotation.hpp"
#include "spygame/cli.hpp"
#include "spygame/deck.hpp"
#include "spygame/game_log.hpp"
#include "spygame/json_codec.hpp"
#include "spygame/matching.hpp"
#include "spygame/metrics.hpp"
#include "spygame/runner.hpp"

namespace py = pybind11;
using namespace spygame;

namespace {

Json ratio_json(const Ratio& r) {
  Json j;
  j["numerator"] = r.numerator;
  j["denominator"] = r.denominator;
  j["percent"] = r.percent() ? Json(*r.percent()) : Json(nullptr);
  return j;
}

Json row_json(const MetricRow& row) {
  Json j;
  j["group"] = row.group;
  j["games"] = row.games;
  j["aborted"] = row.aborted;
  j["WR"] = ratio_json(row.wr);
  j["LR"] = row.lr ? Json(*row.lr) : Json(nullptr);
  j["GS"] = ratio_json(row.gs);
  j["NR"] = ratio_json(row.nr);
  j["IC"] = ratio_json(row.ic);
  j["ID"] = ratio_json(row.id);
  j["CR"] = ratio_json(row.cr);
  j["VR"] = ratio_json(row.vr);
  j["VE"] = row.ve ? Json(*row.ve) : Json(nullptr);
  return j;
}

MetricReport report_for(const std::filesystem::path& dir, const std::string& group_by,
                        std::optional<std::string> vote_sources, bool include_aborted,
                        bool strict_caught) {
  ReportOptions o;
  o.group_by = group_by_from_string(group_by);
  if (vote_sources) o.vote_sources = vote_sources_from_string(*vote_sources);
  o.include_aborted = include_aborted;
  o.tie_counts_as_caught = !strict_caught;
  return build_report(load_corpus(dir), default_deck(), o);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SpyGame engine, logs and metrics";

  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IntegrityError>(m, "IntegrityError", PyExc_RuntimeError);
  py::register_exception<AnnotationError>(m, "AnnotationError", PyExc_ValueError);
  py::register_exception<DeckError>(m, "DeckError", PyExc_ValueError);

  m.def("default_experiment_json", [] { return to_json(default_experiment()).dump(); });

  m.def(
      "schedule_json",
      [](const std::string& config_json) {
        const auto games = schedule(experiment_from_json(Json::parse(config_json)));
        Json out = Json::array();
        for (const auto& g : games) {
          out.push_back({{"game_id", g.game_id}, {"location", g.location},
                         {"trial", g.trial}, {"seed", g.seed}});
        }
        return out.dump();
      },
      py::arg("config_json"));

  m.def(
      "run_experiment_json",
      [](const std::string& config_json, const std::string& base_dir, bool resume) {
        const ExperimentConfig c = experiment_from_json(Json::parse(config_json), base_dir);
        validate_experiment(c);
        RunSummary s;
        {
          py::gil_scoped_release release;
          s = run_experiment(c, {.resume = resume});
        }
        return to_json(s).dump();
      },
      py::arg("config_json"), py::arg("base_dir") = ".", py::arg("resume") = true);

  m.def(
      "replay",
      [](const std::filesystem::path& path) {
        const ReplayReport r = validate_replay(load_game(path));
        py::dict d;
        d["identical"] = r.identical;
        d["complete"] = r.complete;
        d["divergent_seq"] = r.divergent_seq;
        d["detail"] = r.detail;
        return d;
      },
      py::arg("path"));

  m.def(
      "load_game_text",
      [](const std::filesystem::path& path) { return serialize_record(load_game(path)); },
      py::arg("path"));

  m.def("fingerprint", [](const std::filesystem::path& path) {
    return record_fingerprint(load_game(path));
  });

  m.def(
      "metrics_json",
      [](const std::filesystem::path& dir, const std::string& group_by,
         std::optional<std::string> vote_sources, bool include_aborted, bool strict_caught) {
        const MetricReport r =
            report_for(dir, group_by, std::move(vote_sources), include_aborted, strict_caught);
        Json j;
        j["rows"] = Json::array();
        for (const auto& row : r.rows) j["rows"].push_back(row_json(row));
        j["total"] = row_json(r.total);
        j["vote_sources"] = r.vote_sources;
        j["warnings"] = r.warnings;
        return j.dump();
      },
      py::arg("dir"), py::arg("group_by") = "matchup",
      py::arg("vote_sources") = py::none(), py::arg("include_aborted") = false,
      py::arg("strict_caught") = false);

  m.def(
      "metrics_table",
      [](const std::filesystem::path& dir, const std::string& group_by,
         std::optional<std::string> vote_sources, bool include_aborted, bool strict_caught,
         bool csv) {
        const MetricReport r =
            report_for(dir, group_by, std::move(vote_sources), include_aborted, strict_caught);
        return csv ? render_report_csv(r) : render_report_text(r);
      },
      py::arg("dir"), py::arg("group_by") = "matchup",
      py::arg("vote_sources") = py::none(), py::arg("include_aborted") = false,
      py::arg("strict_caught") = false, py::arg("csv") = false);

  m.def(
      "corpus_stats",
      [](const std::filesystem::path& dir) {
        return render_corpus_stats(corpus_stats(load_corpus(dir)));
      },
      py::arg("dir"));

  m.def("fleiss_kappa", py::overload_cast<const std::vector<std::vector<int>>&>(&fleiss_kappa),
        py::arg("counts"));
  m.def("agreement_band", [](double k) { return std::string(agreement_band(k)); });
  m.def("kappa_report", [](const std::vector<std::filesystem::path>& paths) {
    return render_kappa(load_annotations(paths));
  });

  m.def("tally_entropy", [](const std::vector<int>& t) { return tally_entropy(t); },
        py::arg("tallies"));

  auto find = [](const std::string& location) {
    const auto c = find_card(default_deck(), location);
    if (!c) throw DeckError("unknown location: " + location);
    return *c;
  };
  m.def(
      "detect_exposure",
      [find](const std::string& text, const std::string& location) {
        return detect_exposure(text, find(location));
      },
      py::arg("text"), py::arg("location"));
  m.def(
      "match_location",
      [find](const std::string& guess, const std::string& location) {
        return match_location(guess, find(location));
      },
      py::arg("guess"), py::arg("location"));
  m.def("locations", [] {
    std::vector<std::string> out;
    for (const auto& c : default_deck()) out.push_back(c.name);
    return out;
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
