#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hockens/error.hpp"
#include "hockens/force.hpp"
#include "hockens/mechanism.hpp"
#include "hockens/optimize.hpp"

namespace hockens {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

struct PathSettings {
  Angle theta_lo = Angle::deg(0.0);
  Angle theta_hi = Angle::deg(359.99);
  Angle step = Angle::deg(0.01);
  double deviation_budget = 0.0164;  // units of l
};

struct TrajectorySettings {
  double omega1_deg_s = 10.0;
  double dt_s = 0.001;
  bool pushed = true;
};

struct ForceSettings {
  std::vector<double> theta1_deg{80.0, 120.0};
  double omega1_deg_s = 10.0;
  GridAxis p_axis{1.0, 10.0, 19};
  GridAxis r_axis{10.0, 55.0, 19};
};

struct OutputSettings {
  std::string dir = "out";
  bool svg = false;
  bool deterministic_svg = false;
  std::string cache_dir = ".hockens-cache";
  bool use_cache = true;
};

/// Everything one CLI invocation needs. The scan spec shares its Hoeckens
/// stage, stroke and workspace margin with the finger.
struct RunConfig {
  FingerConfig finger;
  SpringParams springs;
  ScanSpec scan;
  unsigned scan_threads = 0;
  PathSettings path;
  TrajectorySettings trajectory;
  ForceSettings force;
  OutputSettings output;

  /// Canonical JSON of every field that affects numeric results.
  nlohmann::ordered_json canonical() const;
  std::uint64_t hash() const { return detail::fnv1a(canonical().dump()); }
};

namespace detail {

using json = nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(Errc::Config, "section '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw Error(Errc::Config, "bad type for '" + name_ + "." + key + "'");
    }
  }

  void angle(const char* key, Angle& out) {
    double v = out.deg();
    get(key, v);
    out = Angle::deg(v);
  }

  void point(const char* key, Point2& out) {
    std::vector<double> v{out.x, out.y};
    get(key, v);
    if (v.size() != 2) throw Error(Errc::Config, "'" + name_ + "." + key + "' must be [x, y]");
    out = {v[0], v[1]};
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw Error(Errc::Config, "unknown key '" + name_ + "." + k + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

inline void read_axis(Section& s, const char* lo, const char* hi, const char* n, GridAxis& axis) {
  s.get(lo, axis.lo);
  s.get(hi, axis.hi);
  s.get(n, axis.n);
}

}  // namespace detail

/// Parses a configuration document. Omitted keys keep their defaults.
inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::Section;
  RunConfig rc;
  Section root(doc, "");
  int version = 0;
  root.get("schema_version", version);
  if (version != kSchemaVersion) {
    throw Error(Errc::Config, "unsupported schema_version " + std::to_string(version) + " (expected " +
                                  std::to_string(kSchemaVersion) + ")");
  }

  if (const auto* j = root.sub("finger")) {
    Section s(*j, "finger");
    FingerConfig& f = rc.finger;
    double l = f.hoeckens.unit_length;
    s.get("unit_length_mm", l);
    f.hoeckens = HoeckensParams::paper_proportions(l);
    s.get("l_ab_mm", f.hoeckens.l_ab);
    s.get("l_ac_mm", f.hoeckens.l_ac);
    s.get("l_bd_mm", f.hoeckens.l_bd);
    f.hoeckens.c = {f.hoeckens.l_ac, 0.0};
    s.get("l_ag_mm", f.l_ag);
    s.get("l_dg_mm", f.l_gd);
    s.angle("stopper_q2_deg", f.stopper_q2);
    s.angle("stopper_q3_deg", f.stopper_q3);
    s.get("delta_h1_mm", f.delta_h1);
    s.get("delta_h2_mm", f.delta_h2);
    s.get("h_max_mm", f.h_max);
    s.angle("posture_sweep_deg", f.posture_sweep);
    double l_di = f.phalange_length;
    s.get("phalange_length_mm", l_di);
    f = f.with_phalange(l_di);
    s.angle("stroke_start_deg", f.stroke_start);
    s.angle("stroke_end_deg", f.stroke_end);
    s.angle("aux_base_deg", f.aux_base);
    s.get("workspace_margin_mm", f.workspace_margin);
    s.finish();
  }

  if (const auto* j = root.sub("springs")) {
    Section s(*j, "springs");
    SpringParams& sp = rc.springs;
    s.get("k1_nmm_per_rad", sp.k1);
    s.angle("k1_pretension_deg", sp.k1_pretension);
    s.get("k2_n_per_mm", sp.k2);
    s.point("k2_anchor_mm", sp.k2_anchor);
    s.get("k2_arm_mm", sp.k2_arm);
    if (const auto* fl = s.sub("k2_free_length_mm"); fl && !fl->is_null()) {
      if (!fl->is_number()) throw Error(Errc::Config, "bad type for 'springs.k2_free_length_mm'");
      sp.k2_free_length = fl->get<double>();
    }
    s.finish();
  }

  if (const auto* j = root.sub("scan")) {
    Section s(*j, "scan");
    s.get("ag_min_mm", rc.scan.ag_min);
    s.get("ag_max_mm", rc.scan.ag_max);
    s.get("dg_min_mm", rc.scan.dg_min);
    s.get("dg_max_mm", rc.scan.dg_max);
    s.get("resolution_mm", rc.scan.resolution);
    s.angle("trace_step_deg", rc.scan.trace_step);
    s.get("threads", rc.scan_threads);
    s.finish();
  }

  if (const auto* j = root.sub("hoeckens_path")) {
    Section s(*j, "hoeckens_path");
    s.angle("theta_lo_deg", rc.path.theta_lo);
    s.angle("theta_hi_deg", rc.path.theta_hi);
    s.angle("step_deg", rc.path.step);
    s.get("deviation_budget", rc.path.deviation_budget);
    s.finish();
  }

  if (const auto* j = root.sub("trajectory")) {
    Section s(*j, "trajectory");
    s.get("omega1_deg_s", rc.trajectory.omega1_deg_s);
    s.get("dt_s", rc.trajectory.dt_s);
    s.get("pushed", rc.trajectory.pushed);
    s.finish();
  }

  if (const auto* j = root.sub("force")) {
    Section s(*j, "force");
    s.get("theta1_deg", rc.force.theta1_deg);
    s.get("omega1_deg_s", rc.force.omega1_deg_s);
    detail::read_axis(s, "p_min_w", "p_max_w", "p_nodes", rc.force.p_axis);
    detail::read_axis(s, "r_min_mm", "r_max_mm", "r_nodes", rc.force.r_axis);
    s.finish();
  }

  if (const auto* j = root.sub("output")) {
    Section s(*j, "output");
    s.get("dir", rc.output.dir);
    s.get("svg", rc.output.svg);
    s.get("deterministic_svg", rc.output.deterministic_svg);
    s.get("cache_dir", rc.output.cache_dir);
    s.get("use_cache", rc.output.use_cache);
    s.finish();
  }
  root.finish();

  rc.scan.hoeckens = rc.finger.hoeckens;
  rc.scan.trace_start = rc.finger.stroke_start;
  rc.scan.trace_end = rc.finger.stroke_end;
  rc.scan.workspace_margin = rc.finger.workspace_margin;

  try {
    rc.finger.validate();
    rc.springs.validate();
    rc.scan.validate();
  } catch (const Error& e) {
    throw Error(Errc::Config, e.what());
  }
  return rc;
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline nlohmann::ordered_json RunConfig::canonical() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  const auto& h = finger.hoeckens;
  j["finger"] = {{"unit_length_mm", h.unit_length},
                 {"l_ab_mm", h.l_ab},
                 {"l_ac_mm", h.l_ac},
                 {"l_bd_mm", h.l_bd},
                 {"l_ag_mm", finger.l_ag},
                 {"l_dg_mm", finger.l_gd},
                 {"stopper_q2_deg", finger.stopper_q2.deg()},
                 {"stopper_q3_deg", finger.stopper_q3.deg()},
                 {"delta_h1_mm", finger.delta_h1},
                 {"delta_h2_mm", finger.delta_h2},
                 {"h_max_mm", finger.h_max},
                 {"posture_sweep_deg", finger.posture_sweep.deg()},
                 {"phalange_length_mm", finger.phalange_length},
                 {"stroke_start_deg", finger.stroke_start.deg()},
                 {"stroke_end_deg", finger.stroke_end.deg()},
                 {"aux_base_deg", finger.aux_base.deg()},
                 {"workspace_margin_mm", finger.workspace_margin}};
  j["springs"] = {{"k1_nmm_per_rad", springs.k1},
                  {"k1_pretension_deg", springs.k1_pretension.deg()},
                  {"k2_n_per_mm", springs.k2},
                  {"k2_anchor_mm", {springs.k2_anchor.x, springs.k2_anchor.y}},
                  {"k2_arm_mm", springs.k2_arm},
                  {"k2_free_length_mm", springs.k2_free_length ? nlohmann::ordered_json(*springs.k2_free_length)
                                                               : nlohmann::ordered_json(nullptr)}};
  j["scan"] = {{"ag_min_mm", scan.ag_min},           {"ag_max_mm", scan.ag_max},
               {"dg_min_mm", scan.dg_min},           {"dg_max_mm", scan.dg_max},
               {"resolution_mm", scan.resolution},   {"trace_step_deg", scan.trace_step.deg()}};
  j["hoeckens_path"] = {{"theta_lo_deg", path.theta_lo.deg()},
                        {"theta_hi_deg", path.theta_hi.deg()},
                        {"step_deg", path.step.deg()},
                        {"deviation_budget", path.deviation_budget}};
  j["trajectory"] = {{"omega1_deg_s", trajectory.omega1_deg_s},
                     {"dt_s", trajectory.dt_s},
                     {"pushed", trajectory.pushed}};
  j["force"] = {{"theta1_deg", force.theta1_deg},      {"omega1_deg_s", force.omega1_deg_s},
                {"p_min_w", force.p_axis.lo},          {"p_max_w", force.p_axis.hi},
                {"p_nodes", force.p_axis.n},           {"r_min_mm", force.r_axis.lo},
                {"r_max_mm", force.r_axis.hi},         {"r_nodes", force.r_axis.n}};
  return j;
}

}  // namespace hockens
