#pragma once

// JSON model configuration. Every number is exact: integers or rational
// strings "a/b"; floats are rejected so binary rounding never contaminates
// the lattice data. Schema errors name the offending field.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wallx/git_core.hpp"
#include "wallx/transform.hpp"

namespace wallx {

using Json = nlohmann::ordered_json;

struct ConfigDocument {
  Json echo;  // normalized copy of everything parsed, for report embedding
  GitInput git;
  Q order = 6;                    // truncation order for series commands
  std::vector<VecI> gkz_degrees;  // explicit directions; empty = derived set
  long long gkz_radius = 2;       // derived set: basis + all |d|_inf <= radius
  std::vector<VecI> twists;
  std::optional<FitConfig> fit;
  std::vector<Q> watson_u = {Q(10), Q(20), Q(40)};
  std::string command;  // optional default subcommand
};

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> k = {
      "analyze",  "ifunction",   "gkz-check", "reg-check",
      "resum",    "watson-demo", "solve-l",   "ci-check"};
  return k;
}

namespace cfg {

[[noreturn]] inline void fail(const std::string& where,
                              const std::string& what) {
  throw Error(Err::ConfigError, "config " + where + ": " + what);
}

inline void check_keys(const Json& j, const std::string& where,
                       const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      fail(where + "." + it.key(), "unknown field");
}

inline Q parse_q(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Q(j.get<long long>());
  if (j.is_number_float())
    fail(where, "floats are not accepted; write rationals as \"a/b\"");
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (!s.empty() && s.find_first_not_of("0123456789/-") == std::string::npos) {
      try {
        Q q(s);
        return q;
      } catch (const std::exception&) {
      }
    }
    fail(where, "malformed rational \"" + s + "\"");
  }
  fail(where, "expected an integer or a rational string \"a/b\"");
}

inline long long parse_int(const Json& j, const std::string& where) {
  Q q = parse_q(j, where);
  if (!q_is_int(q)) fail(where, "expected an integer");
  return static_cast<long long>(q_int(q));
}

inline VecQ parse_vecq(const Json& j, const std::string& where, size_t len) {
  if (!j.is_array() || (len && j.size() != len))
    fail(where, "expected a vector of length " + std::to_string(len));
  VecQ v;
  for (size_t i = 0; i < j.size(); ++i)
    v.push_back(parse_q(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline VecI parse_veci(const Json& j, const std::string& where, size_t len) {
  if (!j.is_array() || (len && j.size() != len))
    fail(where, "expected an integer vector of length " + std::to_string(len));
  VecI v;
  for (size_t i = 0; i < j.size(); ++i)
    v.push_back(parse_int(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline Mat parse_mat(const Json& j, const std::string& where, size_t rows,
                     size_t cols) {
  if (!j.is_array() || j.size() != rows)
    fail(where, "expected " + std::to_string(rows) + " rows");
  Mat m;
  for (size_t i = 0; i < rows; ++i)
    m.push_back(parse_vecq(j[i], where + "[" + std::to_string(i) + "]", cols));
  return m;
}

inline Cplx parse_cplx(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    fail(where, "expected a [re, im] rational pair");
  return Cplx(q_dbl(parse_q(j[0], where + "[0]")),
              q_dbl(parse_q(j[1], where + "[1]")));
}

inline Json echo_q(const Q& v) { return q_str(v); }
inline Json echo_vq(const VecQ& v) {
  Json a = Json::array();
  for (const Q& x : v) a.push_back(q_str(x));
  return a;
}
inline Json echo_vi(const VecI& v) {
  Json a = Json::array();
  for (long long x : v) a.push_back(x);
  return a;
}
inline Json echo_mat(const Mat& m) {
  Json a = Json::array();
  for (const VecQ& r : m) a.push_back(echo_vq(r));
  return a;
}

inline FitConfig parse_fit(const Json& j, size_t r) {
  check_keys(j, "fit",
             {"ray_arg", "max_ray_arg", "mags", "transverse", "z", "blocks",
              "tsvd_rel", "rank_tol", "sig_rel", "monomial_tol", "window",
              "label_max", "plus_cap", "wall_max"});
  FitConfig f;
  if (!j.count("z") || !j["z"].is_array() || j["z"].empty())
    fail("fit.z", "at least one [re, im] sample is required");
  for (size_t i = 0; i < j["z"].size(); ++i)
    f.zs.push_back(parse_cplx(j["z"][i], "fit.z[" + std::to_string(i) + "]"));
  if (j.count("ray_arg")) f.ray_arg = q_dbl(parse_q(j["ray_arg"], "fit.ray_arg"));
  if (j.count("max_ray_arg"))
    f.max_ray_arg = q_dbl(parse_q(j["max_ray_arg"], "fit.max_ray_arg"));
  if (!j.count("mags")) fail("fit.mags", "wall-coordinate magnitudes required");
  for (const Q& m : parse_vecq(j["mags"], "fit.mags", 0))
    f.mags.push_back(q_dbl(m));
  if (!j.count("transverse"))
    fail("fit.transverse", "transverse sample tuples required");
  if (!j["transverse"].is_array() || j["transverse"].empty())
    fail("fit.transverse", "expected a nonempty array of tuples");
  for (size_t i = 0; i < j["transverse"].size(); ++i) {
    std::vector<double> tup;
    for (const Q& x : parse_vecq(j["transverse"][i],
                                 "fit.transverse[" + std::to_string(i) + "]",
                                 r - 1))
      tup.push_back(q_dbl(x));
    f.transverse.push_back(tup);
  }
  if (j.count("blocks"))
    f.check_blocks = size_t(parse_int(j["blocks"], "fit.blocks"));
  if (j.count("tsvd_rel")) f.tsvd_rel = q_dbl(parse_q(j["tsvd_rel"], "fit.tsvd_rel"));
  if (j.count("rank_tol")) f.rank_tol = q_dbl(parse_q(j["rank_tol"], "fit.rank_tol"));
  if (j.count("sig_rel")) f.sig_rel = q_dbl(parse_q(j["sig_rel"], "fit.sig_rel"));
  if (j.count("monomial_tol"))
    f.monomial_tol = q_dbl(parse_q(j["monomial_tol"], "fit.monomial_tol"));
  if (j.count("window")) f.window = int(parse_int(j["window"], "fit.window"));
  if (j.count("label_max"))
    f.eval.label_max = parse_int(j["label_max"], "fit.label_max");
  if (j.count("plus_cap")) f.eval.plus_cap = parse_int(j["plus_cap"], "fit.plus_cap");
  if (j.count("wall_max")) f.eval.wall_max = parse_int(j["wall_max"], "fit.wall_max");
  return f;
}

}  // namespace cfg

inline ConfigDocument parse_config(const Json& j) {
  using namespace cfg;
  check_keys(j, "top level",
             {"name", "r", "m", "charges", "omega_plus", "omega_minus",
              "p_plus", "p_minus", "order", "gkz_degrees", "gkz_radius",
              "twists", "fit", "watson_u", "command"});
  ConfigDocument out;

  if (!j.count("charges") || !j["charges"].is_array() || j["charges"].empty())
    fail("charges", "at least one character row is required");
  size_t m = j["charges"].size();
  if (!j["charges"][0].is_array() || j["charges"][0].empty())
    fail("charges[0]", "expected an integer row");
  size_t r = j["charges"][0].size();
  for (size_t jr = 0; jr < m; ++jr)
    out.git.charges.push_back(
        parse_veci(j["charges"][jr], "charges[" + std::to_string(jr) + "]", r));
  out.git.r = r;
  if (j.count("r") && size_t(parse_int(j["r"], "r")) != r)
    fail("r", "does not match the width of the charge rows");
  if (j.count("m") && size_t(parse_int(j["m"], "m")) != m)
    fail("m", "does not match the number of charge rows");

  out.git.name = j.count("name") ? j["name"].get<std::string>() : "model";
  if (!j.count("omega_plus")) fail("omega_plus", "required");
  out.git.omega_plus = parse_vecq(j["omega_plus"], "omega_plus", r);
  if (j.count("omega_minus"))
    out.git.omega_minus = parse_vecq(j["omega_minus"], "omega_minus", r);
  if (j.count("p_plus")) out.git.p_plus = parse_mat(j["p_plus"], "p_plus", r, r);
  if (j.count("p_minus"))
    out.git.p_minus = parse_mat(j["p_minus"], "p_minus", r, r);

  if (j.count("order")) {
    out.order = parse_q(j["order"], "order");
    if (out.order < 0) fail("order", "must be nonnegative");
  }
  if (j.count("gkz_radius")) {
    out.gkz_radius = parse_int(j["gkz_radius"], "gkz_radius");
    if (out.gkz_radius < 0) fail("gkz_radius", "must be nonnegative");
  }
  if (j.count("gkz_degrees"))
    for (size_t i = 0; i < j["gkz_degrees"].size(); ++i)
      out.gkz_degrees.push_back(parse_veci(
          j["gkz_degrees"][i], "gkz_degrees[" + std::to_string(i) + "]", r));
  if (j.count("twists"))
    for (size_t i = 0; i < j["twists"].size(); ++i)
      out.twists.push_back(
          parse_veci(j["twists"][i], "twists[" + std::to_string(i) + "]", r));
  if (j.count("fit")) out.fit = parse_fit(j["fit"], r);
  if (j.count("watson_u")) {
    out.watson_u = parse_vecq(j["watson_u"], "watson_u", 0);
    for (const Q& u : out.watson_u)
      if (u < 1) fail("watson_u", "demonstration scale must be >= 1");
  }
  if (j.count("command")) {
    out.command = j["command"].get<std::string>();
    if (!known_commands().count(out.command))
      fail("command", "unknown command \"" + out.command + "\"");
  }

  // normalized echo in fixed field order
  out.echo["name"] = out.git.name;
  out.echo["r"] = r;
  out.echo["m"] = m;
  Json ch = Json::array();
  for (const VecI& row : out.git.charges) ch.push_back(echo_vi(row));
  out.echo["charges"] = ch;
  out.echo["omega_plus"] = echo_vq(out.git.omega_plus);
  if (out.git.omega_minus)
    out.echo["omega_minus"] = echo_vq(*out.git.omega_minus);
  if (out.git.p_plus) out.echo["p_plus"] = echo_mat(*out.git.p_plus);
  if (out.git.p_minus) out.echo["p_minus"] = echo_mat(*out.git.p_minus);
  out.echo["order"] = echo_q(out.order);
  if (!out.gkz_degrees.empty()) {
    Json dg = Json::array();
    for (const VecI& d : out.gkz_degrees) dg.push_back(echo_vi(d));
    out.echo["gkz_degrees"] = dg;
  } else {
    out.echo["gkz_radius"] = out.gkz_radius;
  }
  if (!out.twists.empty()) {
    Json tw = Json::array();
    for (const VecI& e : out.twists) tw.push_back(echo_vi(e));
    out.echo["twists"] = tw;
  }
  if (j.count("fit")) out.echo["fit"] = j["fit"];
  if (j.count("watson_u")) out.echo["watson_u"] = j["watson_u"];
  if (!out.command.empty()) out.echo["command"] = out.command;
  return out;
}

inline ConfigDocument parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(Err::ConfigError, std::string("config is not valid JSON: ") +
                                      e.what());
  }
  return parse_config(j);
}

inline ConfigDocument load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Err::ConfigError, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace wallx
