#include "fluxom/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fluxom/error.hpp"
#include "json_detail.hpp"

namespace fluxom {

using detail::json;

namespace {

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    fail(Errc::parse_error, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// JSON object reader that remembers which keys were used.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(Errc::validation_error, where() + " must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(Errc::validation_error, name(key) + " must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(Errc::validation_error, name(key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    used_.insert(key);
    if (!has(key)) fail(Errc::validation_error, "missing required key " + name(key));
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(Errc::validation_error, name(key) + " must be a string");
    return v.get<std::string>();
  }

  template <std::size_t N>
  std::array<double, N> array(const std::string& key, std::array<double, N> fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array() || v.size() != N) fail(Errc::validation_error, name(key) + " must be an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number()) fail(Errc::validation_error, name(key) + " must contain numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  std::vector<double> vector(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return {};
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(Errc::validation_error, name(key) + " must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(Errc::validation_error, name(key) + " must contain numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::optional<Section> child(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return Section(j_.at(key), name(key));
  }

  void mark(const std::string& key) { used_.insert(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(Errc::validation_error, "unknown key " + name(it.key()));
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? std::string("document") : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_circuit(Section s, CircuitParams& c) {
  c.L0 = s.number("L0_H", c.L0);
  c.Lm = s.number("Lm_H", c.Lm);
  c.La = s.number("La_H", c.La);
  c.L1 = s.number("L1_H", c.L1);
  c.C = s.number("C_F", c.C);
  c.Cc = s.number("Cc_F", c.Cc);
  c.Z0 = s.number("Z0_ohm", c.Z0);
  if (auto r = s.optional_number("R_loss_ohm")) c.R_loss = *r;
  s.finish();
}

void read_squid(Section s, SquidParams& q) {
  q.Ic0 = s.number("Ic0_A", q.Ic0);
  q.L_loop = s.number("L_loop_H", q.L_loop);
  q.gamma_L = s.number("gamma_L", q.gamma_L);
  q.Lambda = s.number("Lambda", q.Lambda);
  q.omega0_sweet = hz_to_angular(s.number("f0_sweet_Hz", angular_to_hz(q.omega0_sweet)));
  q.switch_threshold = s.number("switch_threshold_phi0", q.switch_threshold);
  s.mark("field_table");
  if (s.has("field_table")) {
    const auto& tab = s.raw("field_table");
    if (!tab.is_array()) fail(Errc::validation_error, s.name("field_table") + " must be an array");
    q.field_table.clear();
    for (std::size_t i = 0; i < tab.size(); ++i) {
      Section row(tab[i], s.name("field_table") + "[" + std::to_string(i) + "]");
      FieldDependentArch a;
      a.b_parallel = row.number("b_parallel_T", a.b_parallel);
      a.gamma_L = row.number("gamma_L", q.gamma_L);
      a.Lambda = row.number("Lambda", q.Lambda);
      row.finish();
      q.field_table.push_back(a);
    }
  }
  s.finish();
}

void read_mech(Section s, MechParams& m) {
  m.mass = s.number("mass_kg", m.mass);
  m.Omega0 = hz_to_angular(s.number("f0_Hz", angular_to_hz(m.Omega0)));
  m.Gamma_m = hz_to_angular(s.number("gamma_m_Hz", angular_to_hz(m.Gamma_m)));
  m.length = s.number("length_m", m.length);
  m.stiffening_scale = s.number("stiffening_scale", m.stiffening_scale);
  s.finish();
}

Config config_from_json(const json& j) {
  Section top(j, "");
  Config cfg;
  auto dev = top.child("device");
  if (!dev) fail(Errc::validation_error, "missing required section device");
  if (auto c = dev->child("circuit")) read_circuit(*c, cfg.device.circuit);
  if (auto q = dev->child("squid")) read_squid(*q, cfg.device.squid);
  if (auto m = dev->child("mech")) read_mech(*m, cfg.device.mech);
  cfg.device.b_parallel = dev->number("b_parallel_T", cfg.device.b_parallel);
  cfg.device.gamma_mode = dev->number("gamma_mode", cfg.device.gamma_mode);
  dev->finish();

  auto cal = top.child("calibration");
  if (!cal) fail(Errc::validation_error, "missing required section calibration");
  auto& c = cfg.calibration;
  c.P_source_dbm = cal->number("P_source_dbm", c.P_source_dbm);
  c.G_signal_db = cal->number("G_signal_db", c.G_signal_db);
  c.G_pump_db = cal->number("G_pump_db", c.G_pump_db);
  c.T_hemt_K = cal->number("T_hemt_K", c.T_hemt_K);
  cal->finish();
  top.finish();

  cfg.device.validate();
  if (!(c.T_hemt_K > 0.0)) fail(Errc::validation_error, "T_hemt_K must be positive");
  return cfg;
}

BackgroundCoeffs background_from(Section s) {
  if (s.has("ripple")) {
    auto r = *s.child("ripple");
    const double f_lo = r.number("f_lo_hz", 0.0), f_hi = r.number("f_hi_hz", 0.0);
    const double db = r.number("ripple_db", 2.4), period = r.number("period_hz", 60e6);
    const double delay = r.number("delay_s", 5e-9), level = r.number("level", 1.0);
    r.finish();
    s.finish();
    return ripple_background(f_lo, f_hi, db, period, delay, level);
  }
  BackgroundCoeffs b;
  b.poly = s.array<6>("poly", b.poly);
  b.cos1 = s.array<3>("cos1", b.cos1);
  b.cos2 = s.array<3>("cos2", b.cos2);
  b.phase = s.array<2>("phase", b.phase);
  b.omega_ref = s.number("omega_ref", b.omega_ref);
  b.omega_scale = s.number("omega_scale", b.omega_scale);
  s.finish();
  return b;
}

Scenario scenario_from_json(const json& j) {
  Section top(j, "");
  Scenario sc;
  sc.kind = scenario_kind_from_string(top.string("kind"));
  if (auto g = top.child("grid")) {
    sc.grid.f_start_hz = g->number("f_start_hz", 0.0);
    sc.grid.f_stop_hz = g->number("f_stop_hz", 0.0);
    sc.grid.n_points = g->unsigned_integer("n_points", 0);
    g->finish();
  } else {
    fail(Errc::validation_error, "missing required section grid");
  }
  if (!(sc.grid.f_stop_hz > sc.grid.f_start_hz) || sc.grid.n_points < 2)
    fail(Errc::validation_error, "grid needs f_stop_hz > f_start_hz and n_points >= 2");
  if (auto n = top.child("noise")) {
    sc.noise.seed = n->unsigned_integer("seed", 0);
    sc.noise.sigma = n->number("sigma", 0.0);
    n->finish();
  }
  if (!(sc.noise.sigma >= 0.0)) fail(Errc::validation_error, "noise.sigma must be non-negative");
  if (auto b = top.child("background")) sc.background = background_from(*b);

  if (auto s = top.child("cavity")) {
    auto& c = sc.cavity;
    c.f0_hz = s->optional_number("f0_hz");
    c.flux_phi0 = s->number("flux_phi0", c.flux_phi0);
    c.kappa_hz = s->number("kappa_hz", c.kappa_hz);
    c.K_over_kappa = s->number("K_over_kappa", c.K_over_kappa);
    c.theta = s->number("theta_rad", c.theta);
    s->finish();
  }
  if (auto s = top.child("flux_sweep")) {
    auto& f = sc.flux_sweep;
    f.bias_currents_A = s->vector("bias_currents_A");
    if (auto sw = s->child("bias_sweep")) {
      const double a = sw->number("start_A", 0.0), b = sw->number("stop_A", 0.0);
      const auto n = static_cast<std::size_t>(sw->unsigned_integer("n_points", 0));
      bool back = false;
      if (sw->has("return")) {
        const auto& r = sw->raw("return");
        if (!r.is_boolean()) fail(Errc::validation_error, sw->name("return") + " must be true or false");
        back = r.get<bool>();
      }
      sw->finish();
      if (n < 2) fail(Errc::validation_error, "flux_sweep.bias_sweep.n_points must be >= 2");
      f.bias_currents_A = linear_grid(std::min(a, b), std::max(a, b), n);
      if (b < a) std::reverse(f.bias_currents_A.begin(), f.bias_currents_A.end());
      if (back) {
        auto rev = f.bias_currents_A;
        std::reverse(rev.begin(), rev.end());
        f.bias_currents_A.insert(f.bias_currents_A.end(), rev.begin() + 1, rev.end());
      }
    }
    f.calibration.current_to_flux =
        s->number("current_to_flux_phi0_per_A", f.calibration.current_to_flux / kPhi0) * kPhi0;
    f.calibration.offset = s->number("offset_phi0", f.calibration.offset / kPhi0) * kPhi0;
    f.kappa_hz = s->number("kappa_hz", f.kappa_hz);
    f.K_over_kappa = s->number("K_over_kappa", f.K_over_kappa);
    f.theta = s->number("theta_rad", f.theta);
    s->finish();
  }
  if (auto s = top.child("omit")) {
    auto& o = sc.omit;
    o.flux_phi0 = s->number("flux_phi0", o.flux_phi0);
    o.kappa_hz = s->number("kappa_hz", o.kappa_hz);
    o.K_over_kappa = s->number("K_over_kappa", o.K_over_kappa);
    o.theta = s->number("theta_rad", o.theta);
    o.p_source_dbm = s->number("p_source_dbm", o.p_source_dbm);
    o.g_chain_db = s->number("g_chain_db", o.g_chain_db);
    o.delta_m_hz = s->number("delta_m_hz", o.delta_m_hz);
    o.g0_hz = s->optional_number("g0_hz");
    o.leak_halfwidth_hz = s->number("leak_halfwidth_hz", o.leak_halfwidth_hz);
    o.leak_factor = s->number("leak_factor", o.leak_factor);
    o.f0_lo_hz = s->number("f0_lo_hz", o.f0_lo_hz);
    o.f0_hi_hz = s->number("f0_hi_hz", o.f0_hi_hz);
    o.omit_halfspan_hz = s->number("omit_halfspan_hz", o.omit_halfspan_hz);
    o.omit_points = static_cast<std::size_t>(s->unsigned_integer("omit_points", o.omit_points));
    s->finish();
  }
  if (auto s = top.child("thermal_psd")) {
    auto& t = sc.thermal;
    t.flux_phi0 = s->number("flux_phi0", t.flux_phi0);
    t.floor = s->number("floor", t.floor);
    t.peak_over_floor = s->number("peak_over_floor", t.peak_over_floor);
    s->finish();
  }
  if (auto s = top.child("driven_sideband")) {
    auto& d = sc.sideband;
    d.flux_phi0 = s->number("flux_phi0", d.flux_phi0);
    d.force_N = s->number("force_N", d.force_N);
    d.parasitic_rel = s->number("parasitic_rel", d.parasitic_rel);
    d.parasitic_phase = s->number("parasitic_phase_rad", d.parasitic_phase);
    s->finish();
  }
  top.finish();
  return sc;
}

}  // namespace

Config parse_config_string(std::string_view text) { return config_from_json(parse_text(text)); }

Config parse_config(const std::filesystem::path& path) { return parse_config_string(read_file(path)); }

Scenario parse_scenario_string(std::string_view text) { return scenario_from_json(parse_text(text)); }

Scenario parse_scenario(const std::filesystem::path& path) { return parse_scenario_string(read_file(path)); }

std::string background_to_json(const BackgroundCoeffs& b) { return detail::background_to_json(b).dump(2); }

std::string config_to_json(const Config& cfg) {
  const auto& d = cfg.device;
  json circuit = {{"L0_H", d.circuit.L0}, {"Lm_H", d.circuit.Lm}, {"La_H", d.circuit.La}, {"L1_H", d.circuit.L1},
                  {"C_F", d.circuit.C},   {"Cc_F", d.circuit.Cc}, {"Z0_ohm", d.circuit.Z0}};
  if (d.circuit.R_loss) circuit["R_loss_ohm"] = *d.circuit.R_loss;
  json table = json::array();
  for (const auto& r : d.squid.field_table)
    table.push_back({{"b_parallel_T", r.b_parallel}, {"gamma_L", r.gamma_L}, {"Lambda", r.Lambda}});
  json squid = {{"Ic0_A", d.squid.Ic0},
                {"L_loop_H", d.squid.L_loop},
                {"gamma_L", d.squid.gamma_L},
                {"Lambda", d.squid.Lambda},
                {"f0_sweet_Hz", angular_to_hz(d.squid.omega0_sweet)},
                {"switch_threshold_phi0", d.squid.switch_threshold},
                {"field_table", table}};
  json mech = {{"mass_kg", d.mech.mass},
               {"f0_Hz", angular_to_hz(d.mech.Omega0)},
               {"gamma_m_Hz", angular_to_hz(d.mech.Gamma_m)},
               {"length_m", d.mech.length},
               {"stiffening_scale", d.mech.stiffening_scale}};
  json j = {{"device",
             {{"circuit", circuit}, {"squid", squid}, {"mech", mech}, {"b_parallel_T", d.b_parallel},
              {"gamma_mode", d.gamma_mode}}},
            {"calibration",
             {{"P_source_dbm", cfg.calibration.P_source_dbm},
              {"G_signal_db", cfg.calibration.G_signal_db},
              {"G_pump_db", cfg.calibration.G_pump_db},
              {"T_hemt_K", cfg.calibration.T_hemt_K}}}};
  return j.dump(2);
}

}  // namespace fluxom
