#pragma once

#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "david/econ_model.hpp"
#include "david/error.hpp"
#include "david/mechanisms.hpp"
#include "david/simulation.hpp"
#include "david/spda.hpp"

namespace david {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Gaussian model parameters: a JSON object, or `key = value` lines ('#' comments).

inline void set_model_field(GaussianTypeParams& p, const std::string& key, double x) {
  static const std::map<std::string, double GaussianTypeParams::*> fields{
      {"mu_e", &GaussianTypeParams::mu_e},
      {"mu_w", &GaussianTypeParams::mu_w},
      {"mu_v", &GaussianTypeParams::mu_v},
      {"sigma_e", &GaussianTypeParams::sigma_e},
      {"sigma_w", &GaussianTypeParams::sigma_w},
      {"sigma_v", &GaussianTypeParams::sigma_v},
      {"rho_ew", &GaussianTypeParams::rho_ew},
      {"rho_wv", &GaussianTypeParams::rho_wv},
      {"rho_ev", &GaussianTypeParams::rho_ev},
      {"shock_std_w", &GaussianTypeParams::shock_std_w},
      {"shock_std_v", &GaussianTypeParams::shock_std_v},
      {"shock_corr_wv", &GaussianTypeParams::shock_corr_wv},
  };
  const auto it = fields.find(key);
  if (it == fields.end()) throw BadParam("unknown model parameter '" + key + "'");
  p.*(it->second) = x;
}

inline GaussianTypeParams model_params_from_json(const json& j, GaussianTypeParams p = {}) {
  if (!j.is_object()) throw BadParam("model parameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw BadParam("model parameter '" + key + "' must be a number");
    set_model_field(p, key, value.get<double>());
  }
  return p;
}

inline json to_json(const GaussianTypeParams& p) {
  return json{{"mu_e", p.mu_e},         {"mu_w", p.mu_w},
              {"mu_v", p.mu_v},         {"sigma_e", p.sigma_e},
              {"sigma_w", p.sigma_w},   {"sigma_v", p.sigma_v},
              {"rho_ew", p.rho_ew},     {"rho_wv", p.rho_wv},
              {"rho_ev", p.rho_ev},     {"shock_std_w", p.shock_std_w},
              {"shock_std_v", p.shock_std_v}, {"shock_corr_wv", p.shock_corr_wv}};
}

inline GaussianTypeParams parse_model_params(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return model_params_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw BadParam(std::string("model config: ") + e.what());
    }
  }
  GaussianTypeParams p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw BadParam("model config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw BadParam("model config line " + std::to_string(lineno) + ": '" + value + "' is not a number");
    }
    set_model_field(p, key, x);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Instances

// Economy plus the reports found in the file. Missing `rol` means truthful;
// missing `targets` / `sub_rol` means none / canonical without disclosure.
struct Instance {
  Economy economy;
  std::vector<RankOrderedList> rols;
  std::vector<TargetSet> targets;
  std::vector<SubRol> sub_rols;
};

namespace detail {

inline std::vector<double> number_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInstance(what + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw InvalidInstance(what + " must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline SubCollege sub_college_from_json(const json& j) {
  if (!j.is_object() || !j.contains("college") || !j.contains("track")) {
    throw InvalidInstance("sub_rol entries are objects {\"college\": c, \"track\": \"regular\"|\"disclosure\"}");
  }
  const std::string track = j.at("track").get<std::string>();
  if (track != "regular" && track != "disclosure") throw InvalidInstance("unknown track '" + track + "'");
  return {j.at("college").get<int>(), track == "regular" ? Track::regular : Track::disclosure};
}

}  // namespace detail

inline Instance instance_from_json(const json& j) {
  try {
    Instance inst;
    Economy& econ = inst.economy;
    for (double c : detail::number_array(j.at("capacities"), "capacities")) {
      if (c != static_cast<int>(c)) throw InvalidInstance("capacities must be integers");
      econ.capacities.push_back(static_cast<int>(c));
    }
    econ.num_colleges = static_cast<int>(econ.capacities.size());
    econ.gamma_i = j.value("gamma_i", 0.0);
    econ.gamma_c = j.value("gamma_c", 0.0);
    if (j.contains("delta")) econ.delta = detail::number_array(j.at("delta"), "delta");
    if (j.contains("model")) econ.model = build_model(model_params_from_json(j.at("model")));
    if (j.contains("expected_payoff_table")) {
      Table t;
      for (const auto& row : j.at("expected_payoff_table")) t.push_back(detail::number_array(row, "expected_payoff_table row"));
      econ.expected_payoff = std::move(t);
    }
    const auto& students = j.at("students");
    if (!students.is_array()) throw InvalidInstance("students must be an array");
    for (std::size_t i = 0; i < students.size(); ++i) {
      const auto& s = students[i];
      StudentType t;
      t.id = s.value("id", static_cast<int>(i));
      t.v = detail::number_array(s.at("v"), "v");
      t.w = detail::number_array(s.at("w"), "w");
      t.e = detail::number_array(s.at("e"), "e");
      econ.students.push_back(t);
    }
    validate(econ);
    for (std::size_t i = 0; i < students.size(); ++i) {
      const auto& s = students[i];
      const auto id = static_cast<StudentId>(i);
      RankOrderedList rol = truthful_rol(econ.students[i]);
      if (s.contains("rol")) {
        rol.entries.clear();
        for (const auto& c : s.at("rol")) rol.entries.push_back(c.get<int>());
      }
      TargetSet t{id, {}};
      if (s.contains("targets")) t.targets = s.at("targets").get<std::vector<int>>();
      SubRol sub = canonical_sub_rol(rol, {});
      if (s.contains("sub_rol")) {
        sub.entries.clear();
        for (const auto& e : s.at("sub_rol")) sub.entries.push_back(detail::sub_college_from_json(e));
      }
      inst.rols.push_back(std::move(rol));
      inst.targets.push_back(std::move(t));
      inst.sub_rols.push_back(std::move(sub));
    }
    return inst;
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("instance JSON: ") + e.what());
  }
}

inline Instance load_instance(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("instance JSON: ") + e.what());
  }
  return instance_from_json(j);
}

inline json to_json(const Instance& inst) {
  const Economy& econ = inst.economy;
  json j;
  j["capacities"] = econ.capacities;
  j["gamma_i"] = econ.gamma_i;
  j["gamma_c"] = econ.gamma_c;
  if (!econ.delta.empty()) j["delta"] = econ.delta;
  if (econ.expected_payoff) j["expected_payoff_table"] = *econ.expected_payoff;
  if (econ.model) j["model"] = to_json(econ.model->params());
  j["students"] = json::array();
  for (std::size_t i = 0; i < econ.students.size(); ++i) {
    const auto& s = econ.students[i];
    json js{{"id", s.id}, {"v", s.v}, {"w", s.w}, {"e", s.e}};
    if (i < inst.rols.size()) js["rol"] = inst.rols[i].entries;
    if (i < inst.targets.size()) js["targets"] = inst.targets[i].targets;
    if (i < inst.sub_rols.size()) {
      json sub = json::array();
      for (const auto& e : inst.sub_rols[i].entries) {
        sub.push_back({{"college", e.college}, {"track", e.track == Track::regular ? "regular" : "disclosure"}});
      }
      js["sub_rol"] = sub;
    }
    j["students"].push_back(js);
  }
  return j;
}

// Raw SPDA instance: lists over slots, capacities, and priorities[slot][student].
inline json to_json(const SpdaInstance& inst) {
  json j;
  j["capacities"] = inst.capacities;
  j["students"] = json::array();
  for (const auto& r : inst.rols) j["students"].push_back({{"id", r.owner}, {"rol", r.entries}});
  j["priorities"] = json::array();
  for (int s = 0; s < inst.num_slots(); ++s) {
    std::vector<double> row;
    for (int i = 0; i < inst.num_students(); ++i) row.push_back(inst.priorities.at(s, i));
    j["priorities"].push_back(row);
  }
  return j;
}

inline SpdaInstance spda_instance_from_json(const json& j) {
  try {
    SpdaInstance inst;
    inst.capacities = j.at("capacities").get<std::vector<int>>();
    for (const auto& s : j.at("students")) {
      inst.rols.push_back({s.at("id").get<int>(), s.at("rol").get<std::vector<int>>()});
    }
    inst.priorities = PriorityProfile(inst.num_slots(), inst.num_students());
    const auto& pr = j.at("priorities");
    if (pr.size() != inst.capacities.size()) throw InvalidInstance("priorities need one row per slot");
    for (int s = 0; s < inst.num_slots(); ++s) {
      const auto row = detail::number_array(pr[static_cast<std::size_t>(s)], "priority row");
      if (static_cast<int>(row.size()) != inst.num_students()) throw InvalidInstance("priority rows need one entry per student");
      for (int i = 0; i < inst.num_students(); ++i) inst.priorities.set(s, i, row[static_cast<std::size_t>(i)]);
    }
    validate(inst);
    return inst;
  } catch (const json::exception& e) {
    throw InvalidInstance(std::string("SPDA instance JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV outputs

inline void write_match_csv(std::ostream& out, const MatchResult& r) {
  out << "student_id,slot_id,college_id,admitted_via_disclosure\n";
  for (std::size_t i = 0; i < r.college_of.size(); ++i) {
    const SlotId s = r.run.matching.assignment[i];
    out << i << ',';
    if (s == kUnmatched) {
      out << ",,\n";
      continue;
    }
    out << s << ',' << r.college_of[i] << ',' << (r.via_disclosure[i] ? 1 : 0) << '\n';
  }
}

inline void write_population_csv(std::ostream& out, const std::vector<StudentType>& students) {
  out << "student_id,college_id,v,w,e\n";
  for (const auto& s : students) {
    for (std::size_t c = 0; c < s.v.size(); ++c) {
      out << s.id << ',' << c << ',' << format_number(s.v[c]) << ',' << format_number(s.w[c]) << ','
          << format_number(s.e[c]) << '\n';
    }
  }
}

// One row per iterate; infinite cutoffs print as inf / -inf.
inline void write_cutoff_trace_csv(std::ostream& out, const std::vector<Cutoffs>& trace) {
  out << "iteration";
  const std::size_t width = trace.empty() ? 0 : trace.front().size();
  for (std::size_t c = 0; c < width; ++c) out << ",college_" << c;
  out << '\n';
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << k;
    for (double x : trace[k].value) out << ',' << format_number(x);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sweep configuration JSON:
// {"replications":100, "n_students":100, "n_colleges":6, "seats_per_college":10,
//  "gamma_i":0, "gamma_c":0, "seed":1, "max_iter":1000, "model":{...},
//  "axes":{"rho_ev":[...], "gamma_i":[...]}}

inline SweepConfig sweep_config_from_json(const json& j) {
  try {
    SweepConfig cfg;
    cfg.replications = j.value("replications", cfg.replications);
    cfg.n_students = j.value("n_students", cfg.n_students);
    cfg.n_colleges = j.value("n_colleges", cfg.n_colleges);
    cfg.seats_per_college = j.value("seats_per_college", cfg.seats_per_college);
    cfg.gamma_i = j.value("gamma_i", cfg.gamma_i);
    cfg.gamma_c = j.value("gamma_c", cfg.gamma_c);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    if (j.contains("model")) cfg.model = model_params_from_json(j.at("model"));
    if (j.contains("axes")) {
      for (const auto& [name, values] : j.at("axes").items()) {
        cfg.axes[name] = detail::number_array(values, "axis " + name);
      }
    }
    static const char* known[] = {"replications", "n_students", "n_colleges", "seats_per_college", "gamma_i",
                                  "gamma_c",      "seed",       "max_iter",   "model",             "axes"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
        throw BadParam("unknown sweep config key '" + key + "'");
      }
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw BadParam(std::string("sweep config: ") + e.what());
  }
}

inline SweepConfig load_sweep_config(std::istream& in) {
  try {
    return sweep_config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw BadParam(std::string("sweep config: ") + e.what());
  }
}

}  // namespace david
