#include "ebv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace ebv {

namespace {

void require_keys(const json& j, const char* block, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(block) + " block must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in " + block + " block");
}

double num(const json& j, const char* what) {
  if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
  return v;
}

int integer(const json& j, const char* what) {
  if (!j.is_number_integer()) throw ConfigError(std::string(what) + " must be an integer");
  return j.get<int>();
}

std::vector<double> num_list(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(num(x, what));
  return out;
}

Vec2 vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " entries must be [x, y] pairs");
  return {num(j[0], what), num(j[1], what)};
}

}  // namespace

FlowField parse_flow(const json& j) {
  require_keys(j, "flow", {"builtin", "delta", "amplitude", "modes", "label"});
  const double amp = j.contains("amplitude") ? num(j["amplitude"], "flow.amplitude") : 1.0;
  const bool builtin = j.contains("builtin");
  const bool modes = j.contains("modes");
  if (builtin == modes) throw ConfigError("flow block needs exactly one of 'builtin' or 'modes'");
  try {
    if (builtin) {
      if (!j["builtin"].is_string()) throw ConfigError("flow.builtin must be a string");
      const std::string name = j["builtin"].get<std::string>();
      if (name != "cats_eye" && j.contains("delta")) throw ConfigError("flow.delta only applies to cats_eye");
      if (name == "zero") return make_zero().with_amplitude(amp);
      if (name == "shear_sin") return make_shear_sin(amp);
      if (name == "cellular") return make_cellular(amp);
      if (name == "cats_eye") {
        if (!j.contains("delta")) throw ConfigError("cats_eye needs flow.delta");
        return make_cats_eye(num(j["delta"], "flow.delta"), amp);
      }
      throw ConfigError("unknown builtin flow '" + name + "'");
    }
    if (!j["modes"].is_array() || j["modes"].empty()) throw ConfigError("flow.modes must be a nonempty array");
    FlowField::ModeMap mm;
    for (const auto& m : j["modes"]) {
      require_keys(m, "flow.modes[]", {"k", "re", "im"});
      if (!m.contains("k") || !m.contains("re") || !m.contains("im"))
        throw ConfigError("each mode needs 'k', 're' and 'im'");
      const Vec2 kv = vec2(m["k"], "mode k");
      const Wave k{static_cast<int>(kv.x), static_cast<int>(kv.y)};
      if (k[0] != kv.x || k[1] != kv.y) throw ConfigError("mode k must be integer");
      const Vec2 re = vec2(m["re"], "mode re");
      const Vec2 im = vec2(m["im"], "mode im");
      if (mm.count(k)) throw ConfigError("duplicate mode k");
      mm[k] = CVec2{cplx(re.x, im.x), cplx(re.y, im.y)};
    }
    std::string label = "modes";
    if (j.contains("label")) {
      if (!j["label"].is_string()) throw ConfigError("flow.label must be a string");
      label = j["label"].get<std::string>();
    }
    return FlowField(std::move(mm), amp, std::nullopt, label);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid flow: ") + e.what());
  }
}

SolverConfig parse_solver(const json& j) {
  require_keys(j, "solver",
               {"n", "dt_safety", "t_max", "tol", "discount_eps_list", "cross_check", "method", "scheme",
                "lambda_rel_tol", "check_every", "quad_n"});
  SolverConfig c;
  if (j.contains("n")) c.n = integer(j["n"], "solver.n");
  if (j.contains("dt_safety")) c.dt_safety = num(j["dt_safety"], "solver.dt_safety");
  if (j.contains("t_max")) c.t_max = num(j["t_max"], "solver.t_max");
  if (j.contains("tol")) c.tol = num(j["tol"], "solver.tol");
  if (j.contains("discount_eps_list")) c.discount_eps_list = num_list(j["discount_eps_list"], "solver.discount_eps_list");
  if (j.contains("cross_check")) {
    if (!j["cross_check"].is_boolean()) throw ConfigError("solver.cross_check must be a boolean");
    c.cross_check = j["cross_check"].get<bool>();
  }
  try {
    if (j.contains("method")) {
      if (!j["method"].is_string()) throw ConfigError("solver.method must be a string");
      c.method = parse_method(j["method"].get<std::string>());
    }
    if (j.contains("scheme")) {
      if (!j["scheme"].is_string()) throw ConfigError("solver.scheme must be a string");
      c.scheme = parse_scheme(j["scheme"].get<std::string>());
    }
    if (j.contains("lambda_rel_tol")) c.lambda_rel_tol = num(j["lambda_rel_tol"], "solver.lambda_rel_tol");
    if (j.contains("check_every")) c.check_every = integer(j["check_every"], "solver.check_every");
    if (j.contains("quad_n")) c.quad_n = integer(j["quad_n"], "solver.quad_n");
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid solver block: ") + e.what());
  }
  return c;
}

RunConfig parse_run_config(const json& j) {
  require_keys(j, "top-level", {"flow", "solver", "experiment", "output"});
  RunConfig rc;
  if (!j.contains("flow")) throw ConfigError("config needs a flow block");
  rc.flow = parse_flow(j["flow"]);
  if (j.contains("solver")) rc.solver = parse_solver(j["solver"]);

  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    require_keys(e, "experiment",
                 {"p_list", "eps_list", "A_list", "t_list", "n_angles", "level", "kappa_tol", "model", "model_scale",
                  "random_p", "random_r_min", "random_r_max", "p2_step", "p2_max"});
    auto& x = rc.experiment;
    if (e.contains("p_list")) {
      if (!e["p_list"].is_array() || e["p_list"].empty()) throw ConfigError("experiment.p_list must be a nonempty array");
      for (const auto& p : e["p_list"]) x.p_list.push_back(vec2(p, "experiment.p_list"));
    }
    if (e.contains("eps_list")) x.eps_list = num_list(e["eps_list"], "experiment.eps_list");
    if (e.contains("A_list")) x.a_list = num_list(e["A_list"], "experiment.A_list");
    if (e.contains("t_list")) x.t_list = num_list(e["t_list"], "experiment.t_list");
    if (e.contains("n_angles")) x.n_angles = integer(e["n_angles"], "experiment.n_angles");
    if (e.contains("level")) x.level = num(e["level"], "experiment.level");
    if (e.contains("kappa_tol")) x.kappa_tol = num(e["kappa_tol"], "experiment.kappa_tol");
    if (e.contains("model")) {
      if (!e["model"].is_string()) throw ConfigError("experiment.model must be a string");
      x.model = e["model"].get<std::string>();
      if (x.model != "euclidean" && x.model != "ell1" && x.model != "sampled")
        throw ConfigError("experiment.model must be euclidean, ell1 or sampled");
    }
    if (e.contains("model_scale")) x.model_scale = num(e["model_scale"], "experiment.model_scale");
    if (e.contains("random_p")) x.random_p = integer(e["random_p"], "experiment.random_p");
    if (e.contains("random_r_min")) x.random_r_min = num(e["random_r_min"], "experiment.random_r_min");
    if (e.contains("random_r_max")) x.random_r_max = num(e["random_r_max"], "experiment.random_r_max");
    if (e.contains("p2_step")) x.p2_step = num(e["p2_step"], "experiment.p2_step");
    if (e.contains("p2_max")) x.p2_max = num(e["p2_max"], "experiment.p2_max");

    if (x.n_angles < 8) throw ConfigError("experiment.n_angles must be >= 8");
    if (x.random_p < 0) throw ConfigError("experiment.random_p must be >= 0");
    if (!(x.random_r_min >= 0.0 && x.random_r_max >= x.random_r_min))
      throw ConfigError("experiment random radius range is invalid");
    if (!(x.model_scale > 0.0)) throw ConfigError("experiment.model_scale must be positive");
    if (!(x.p2_step > 0.0 && x.p2_max >= x.p2_step)) throw ConfigError("experiment p2 scan is invalid");
    for (double t : x.t_list)
      if (t < 0.0) throw ConfigError("experiment.t_list entries must be >= 0");
    for (double a : x.a_list)
      if (!(a > 0.0)) throw ConfigError("experiment.A_list entries must be positive");
    for (std::size_t i = 0; i < x.eps_list.size(); ++i) {
      if (!(x.eps_list[i] > 0.0)) throw ConfigError("experiment.eps_list entries must be positive");
      if (i > 0 && !(x.eps_list[i] < x.eps_list[i - 1])) throw ConfigError("experiment.eps_list must be decreasing");
    }
    if (x.level && !(*x.level > 0.0)) throw ConfigError("experiment.level must be positive");
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    require_keys(o, "output", {"dir", "formats"});
    if (o.contains("dir")) {
      if (!o["dir"].is_string() || o["dir"].get<std::string>().empty())
        throw ConfigError("output.dir must be a nonempty string");
      rc.output.dir = o["dir"].get<std::string>();
    }
    if (o.contains("formats")) {
      if (!o["formats"].is_array() || o["formats"].empty()) throw ConfigError("output.formats must be a nonempty array");
      rc.output.csv = rc.output.json = rc.output.svg = false;
      for (const auto& f : o["formats"]) {
        if (!f.is_string()) throw ConfigError("output.formats entries must be strings");
        const std::string s = f.get<std::string>();
        if (s == "csv") {
          rc.output.csv = true;
        } else if (s == "json") {
          rc.output.json = true;
        } else if (s == "svg") {
          rc.output.svg = true;
        } else {
          throw ConfigError("unknown output format '" + s + "'");
        }
      }
    }
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

std::vector<Vec2> momenta(const ExperimentSpec& e, std::uint64_t seed) {
  std::vector<Vec2> out = e.p_list;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < e.random_p; ++i) {
    const double th = kTwoPi * u(gen);
    const double r = e.random_r_min + (e.random_r_max - e.random_r_min) * u(gen);
    out.push_back(unit_at(th) * r);
  }
  return out;
}

// ---- tables -------------------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw std::logic_error("table row width does not match the header");
  rows_.push_back(std::move(row));
}

namespace {

std::string csv_field(const Table::Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  if (const long* l = std::get_if<long>(&c)) return std::to_string(*l);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(Vec2 v) { return json::array({num_json(v.x), num_json(v.y)}); }

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += '\n';
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
    out += '\n';
  }
  return out;
}

json Table::to_json() const {
  json arr = json::array();
  for (const auto& r : rows_) {
    json o = json::object();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (const double* d = std::get_if<double>(&r[i])) {
        o[columns_[i]] = num_json(*d);
      } else if (const long* l = std::get_if<long>(&r[i])) {
        o[columns_[i]] = *l;
      } else {
        o[columns_[i]] = std::get<std::string>(r[i]);
      }
    }
    arr.push_back(std::move(o));
  }
  return arr;
}

json to_json(const HbarResult& r) {
  json j = {{"p", vec_json(r.p)},
            {"value", num_json(r.value)},
            {"method", method_name(r.method)},
            {"residual", num_json(r.residual)},
            {"error_estimate", num_json(r.error_estimate)},
            {"iterations", r.iterations}};
  if (r.cross_check_delta) j["cross_check_delta"] = num_json(*r.cross_check_delta);
  return j;
}

json to_json(const BurningVelocityResult& r) {
  return {{"p", vec_json(r.p)},
          {"alpha", num_json(r.alpha)},
          {"alpha_err", num_json(r.alpha_err)},
          {"lambda_p", num_json(r.lambda_p)},
          {"bracket", json::array({num_json(r.lambda_lo), num_json(r.lambda_hi)})},
          {"optimality_gap", num_json(r.optimality_gap)},
          {"gap_bound", num_json(r.gap_bound)},
          {"fd_step", num_json(r.fd_step)},
          {"hbar_at_min", num_json(r.hbar_at_min)},
          {"evaluations", r.evaluations}};
}

json to_json(const LevelCurve& c) {
  json arcs = json::array();
  const int n = static_cast<int>(c.samples.size());
  for (const auto& a : c.flat_arcs) {
    json o = {{"start_index", a.start_index},
              {"end_index", a.end_index},
              {"samples", a.sample_count(n)},
              {"normal", vec_json(a.normal)},
              {"chord_deviation", num_json(a.chord_deviation)},
              {"matches_resonance", a.matches_resonance}};
    if (a.matches_resonance) o["matched_normal"] = vec_json(a.matched_normal);
    arcs.push_back(std::move(o));
  }
  return {{"meta",
           {{"kind", c.meta.kind},
            {"flow", c.meta.flow_label},
            {"amplitude", num_json(c.meta.amplitude)},
            {"level", num_json(c.meta.level)},
            {"tol", num_json(c.meta.tol)},
            {"kappa_tol", num_json(c.meta.kappa_tol)},
            {"samples", n},
            {"min_radius", num_json(n ? c.min_radius() : 0.0)},
            {"max_radius", num_json(n ? c.max_radius() : 0.0)}}},
          {"flat_arcs", std::move(arcs)}};
}

json to_json(const ResonantDirection& d) {
  return {{"k", json::array({d.k[0], d.k[1]})}, {"normal", vec_json(d.normal)}, {"strength", num_json(d.strength)}};
}

json to_json(const PerturbationResult& r) {
  json ex = json::array();
  for (const auto& k : r.excluded_modes) ex.push_back(json::array({k[0], k[1]}));
  return {{"p", vec_json(r.p)},
          {"a2", num_json(r.a2)},
          {"truncated", r.truncated},
          {"min_divisor", num_json(r.min_divisor)},
          {"excluded_modes", std::move(ex)}};
}

json to_json(const FrontConsistency& c) {
  return {{"max_abs_u", num_json(c.max_abs_u)},
          {"convexity_defect", num_json(c.convexity_defect)},
          {"min_turning", num_json(c.min_turning)}};
}

Table level_curve_table(const LevelCurve& c) {
  Table t({"theta", "x", "y", "value", "value_err", "lambda"});
  for (const auto& s : c.samples) t.add({s.theta, s.point.x, s.point.y, s.value_used, s.value_err, s.lambda});
  return t;
}

// ---- SVG ----------------------------------------------------------------------

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<SvgCurve>& curves, const SvgOptions& opt) {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  bool any = false;
  for (const auto& c : curves)
    for (const Vec2& p : c.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      if (!any) {
        xmin = xmax = p.x;
        ymin = ymax = p.y;
        any = true;
      }
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
  double half = std::max(0.5 * (xmax - xmin), 0.5 * (ymax - ymin));
  if (!(half > 0.0)) half = 1.0;
  const double box = 1.2 * half;

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.pixels << "\" height=\"" << opt.pixels
    << "\" viewBox=\"" << fixed6(cx - box) << ' ' << fixed6(-(cy + box)) << ' ' << fixed6(2.0 * box) << ' '
    << fixed6(2.0 * box) << "\">\n";
  if (!opt.title.empty()) o << "<title>" << escape(opt.title) << "</title>\n";
  for (const auto& c : curves) {
    o << '<' << (c.closed ? "polygon" : "polyline") << " points=\"";
    bool first = true;
    for (const Vec2& p : c.points) {
      if (!first) o << ' ';
      first = false;
      o << fixed6(p.x) << ',' << fixed6(-p.y);
    }
    o << "\" fill=\"none\" stroke=\"" << escape(c.stroke) << "\" stroke-width=\"" << fixed6(c.stroke_width)
      << "\" vector-effect=\"non-scaling-stroke\"";
    if (!c.dash.empty()) o << " stroke-dasharray=\"" << escape(c.dash) << '"';
    o << "/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ebv
