#include "regret/report.hpp"

#include <fstream>
#include <sstream>

namespace regret {

json to_json(const VStatTable& v) {
  json j = json::object();
  for (int y = 0; y < 2; ++y)
    for (int t = 0; t < 2; ++t)
      for (int d = 0; d < 2; ++d) j["v_" + std::to_string(y) + std::to_string(t) + std::to_string(d)] = v.v(y, t, d);
  for (int t = 0; t < 2; ++t)
    for (int d = 0; d < 2; ++d) j["rho_" + std::to_string(t) + std::to_string(d)] = v.rho(t, d);
  return j;
}

json to_json(const IdentifiedVStats& id) {
  json j = json::object();
  for (int y = 0; y < 2; ++y)
    for (int t = 0; t < 2; ++t) j["v_" + std::to_string(y) + std::to_string(t) + "1"] = id.v1[y][t];
  for (int t = 0; t < 2; ++t)
    for (int d = 0; d < 2; ++d) j["rho_" + std::to_string(t) + std::to_string(d)] = id.rho[t][d];
  return j;
}

json to_json(const Interval& iv) { return json{{"lower", iv.lower}, {"upper", iv.upper}}; }

json to_json(const RegretInterval& r) {
  json j{{"measure", measure_name(r.measure())},
         {"method", to_string(r.method())},
         {"lower", r.lower()},
         {"upper", r.upper()}};
  j["ci_lower"] = r.ci_lower() ? json(*r.ci_lower()) : json(nullptr);
  j["ci_upper"] = r.ci_upper() ? json(*r.ci_upper()) : json(nullptr);
  return j;
}

json to_json(const UncertaintySet& s) {
  return json{{"h10", to_json(s.h10)}, {"h00", to_json(s.h00)}, {"identified", to_json(s.identified)},
              {"size", set_size(s)}};
}

namespace {

json endpoint_ci(const std::optional<EndpointCI>& ci) {
  if (!ci) return nullptr;
  return json{{"lower_endpoint", to_json(ci->lower)}, {"upper_endpoint", to_json(ci->upper)}};
}

}  // namespace

json to_json(const RegretReport& r) {
  json j;
  j["assumption"] = r.assumption;
  j["estimator"] = to_string(r.estimator);
  j["n"] = r.n;
  j["k_folds"] = r.k_folds;
  j["seed"] = r.seed;
  j["h10"] = to_json(r.h10);
  j["h00"] = to_json(r.h00);

  json results = json::array();
  for (const auto& m : r.results) {
    results.push_back(json{{"measure", measure_name(m.measure)},
                           {"delta", to_json(m.delta)},
                           {"baseline", to_json(m.baseline)},
                           {"delta_ci", endpoint_ci(m.delta_ci)},
                           {"baseline_ci", endpoint_ci(m.baseline_ci)}});
  }
  j["results"] = std::move(results);

  json folds = json::array();
  for (const auto& f : r.folds) {
    json fj{{"fold", f.fold},
            {"rows", f.rows},
            {"set", to_json(f.set)},
            {"tau", json{{"rows", f.tau.rows},
                         {"clipped", f.tau.clipped},
                         {"crossings", f.tau.crossings},
                         {"positivity_flags", f.tau.positivity}}},
            {"warnings", f.warnings}};
    json per = json::array();
    for (std::size_t m = 0; m < f.delta.size(); ++m) {
      per.push_back(json{{"measure", measure_name(r.results[m].measure)},
                         {"delta", to_json(f.delta[m])},
                         {"baseline", to_json(f.baseline[m])}});
    }
    fj["intervals"] = std::move(per);
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);

  if (r.bootstrap) {
    j["bootstrap"] = json{{"replicates", r.bootstrap->replicates},
                          {"failures", r.bootstrap->failures},
                          {"failure_messages", r.bootstrap->failure_messages}};
  } else {
    j["bootstrap"] = nullptr;
  }

  json groups = json::array();
  for (const auto& g : r.groups) {
    json gj{{"group", g.name}, {"size", g.size}};
    if (g.report) {
      gj["report"] = to_json(*g.report);
    } else {
      gj["skipped"] = g.skipped_reason;
    }
    groups.push_back(std::move(gj));
  }
  j["groups"] = std::move(groups);
  j["warnings"] = r.warnings;
  return j;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void csv_rows(std::ostringstream& out, const std::string& group, const RegretReport& r) {
  for (const auto& m : r.results) {
    for (const RegretInterval* iv : {&m.delta, &m.baseline}) {
      out << group << ',' << measure_name(m.measure) << ',' << to_string(iv->method()) << ','
          << format_double(iv->lower()) << ',' << format_double(iv->upper()) << ',' << format_double(iv->width())
          << ',' << opt(iv->ci_lower()) << ',' << opt(iv->ci_upper()) << '\n';
    }
  }
}

}  // namespace

std::string report_csv(const RegretReport& r) {
  std::ostringstream out;
  out << "group,measure,method,lower,upper,width,ci_lower,ci_upper\n";
  csv_rows(out, "all", r);
  for (const auto& g : r.groups) {
    if (g.report) csv_rows(out, g.name, *g.report);
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace regret
