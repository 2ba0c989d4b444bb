#include "vtm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vtm/errors.hpp"

namespace vtm {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(path + "." + key + ": missing");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(path + ": not finite");
  return x;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path + ": expected a string");
  return v.get<std::string>();
}

VectorXd vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected an array of numbers");
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

template <typename F>
auto with_field(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ValidationError(path + ": " + what);
  }
}

}  // namespace

ChainModel Scenario::model() const { return ChainModel(links, gravity); }

ConstraintSchedule Scenario::schedule() const {
  std::vector<LockEvent> ev;
  for (const auto& e : events) ev.push_back({e.time_s, e.joint, std::nullopt});
  return ConstraintSchedule(static_cast<int>(links.size()), std::move(ev));
}

State Scenario::initial_state() const { return State{0.0, q0, qd0}; }

RunOptions Scenario::run_options() const {
  RunOptions o;
  o.t_end = t_end;
  o.dt = dt;
  o.formulation = formulation;
  o.method = transition;
  o.sample_stride = sample_stride;
  o.impulses = impulses;
  return o;
}

void validate_scenario(const Scenario& sc) {
  with_field("model", [&] { return sc.model(); });
  const auto n = static_cast<Eigen::Index>(sc.links.size());
  if (sc.q0.size() != n) throw ValidationError("initial.q: expected " + std::to_string(n) + " entries");
  if (sc.qd0.size() != n) throw ValidationError("initial.qd: expected " + std::to_string(n) + " entries");
  if (!(sc.dt > 0.0)) throw ValidationError("dt: must be > 0");
  if (!(sc.t_end >= 0.0)) throw ValidationError("t_end: must be >= 0");
  if (sc.sample_stride < 1) throw ValidationError("sample_stride: must be >= 1");
  check_on_grid(sc.t_end, 0.0, sc.dt, "t_end");
  sc.schedule();
  for (std::size_t i = 0; i < sc.events.size(); ++i) {
    const std::string where = "events[" + std::to_string(i) + "].time_s";
    if (sc.events[i].time_s < 0.0) throw ValidationError(where + ": must be >= 0");
    if (sc.events[i].time_s > sc.t_end) throw ValidationError(where + ": after t_end");
    check_on_grid(sc.events[i].time_s, 0.0, sc.dt, where.c_str());
  }
  if (!sc.impulses.empty()) {
    if (sc.impulses.size() != sc.events.size()) {
      throw ValidationError("impulses: expected one vector per event");
    }
    for (std::size_t i = 0; i < sc.impulses.size(); ++i) {
      if (sc.impulses[i].size() != n) {
        throw ValidationError("impulses[" + std::to_string(i) + "]: expected " + std::to_string(n) + " entries");
      }
    }
  }
}

Scenario parse_scenario_text(const std::string& src) {
  json doc;
  try {
    doc = json::parse(src);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("scenario: top level must be an object");

  Scenario sc;
  const json& model = require(doc, "model", "scenario");
  const json& links = require(model, "links", "model");
  if (!links.is_array()) throw ValidationError("model.links: expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = "model.links[" + std::to_string(i) + "]";
    const json& l = links[i];
    LinkParams p;
    p.length = number(require(l, "length", path), path + ".length");
    p.mass = number(require(l, "mass", path), path + ".mass");
    p.com_offset = l.contains("com_offset") ? number(l["com_offset"], path + ".com_offset") : 0.5 * p.length;
    p.inertia_com = number(require(l, "inertia_com", path), path + ".inertia_com");
    sc.links.push_back(p);
  }
  if (model.contains("gravity")) sc.gravity = number(model["gravity"], "model.gravity");

  const json& initial = require(doc, "initial", "scenario");
  sc.q0 = vector(require(initial, "q", "initial"), "initial.q");
  sc.qd0 = initial.contains("qd") ? vector(initial["qd"], "initial.qd")
                                  : VectorXd::Zero(static_cast<Eigen::Index>(sc.links.size()));

  sc.t_end = number(require(doc, "t_end", "scenario"), "t_end");
  if (doc.contains("dt")) sc.dt = number(doc["dt"], "dt");

  if (doc.contains("events")) {
    const json& events = doc["events"];
    if (!events.is_array()) throw ValidationError("events: expected an array");
    for (std::size_t i = 0; i < events.size(); ++i) {
      const std::string path = "events[" + std::to_string(i) + "]";
      ScenarioEvent e;
      e.time_s = number(require(events[i], "time_s", path), path + ".time_s");
      e.joint = integer(require(events[i], "joint", path), path + ".joint");
      sc.events.push_back(e);
    }
  }
  if (doc.contains("formulation")) {
    sc.formulation = with_field("formulation", [&] { return parse_formulation(text(doc["formulation"], "formulation")); });
  }
  if (doc.contains("transition")) {
    sc.transition =
        with_field("transition", [&] { return parse_transition_method(text(doc["transition"], "transition")); });
  }
  if (doc.contains("impulses") && !doc["impulses"].is_null()) {
    const json& imp = doc["impulses"];
    if (!imp.is_array()) throw ValidationError("impulses: expected an array of arrays");
    for (std::size_t i = 0; i < imp.size(); ++i) sc.impulses.push_back(vector(imp[i], "impulses[" + std::to_string(i) + "]"));
  }
  if (doc.contains("sample_stride")) sc.sample_stride = integer(doc["sample_stride"], "sample_stride");

  validate_scenario(sc);
  return sc;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

}  // namespace vtm
