#include "vigrid/scenario.hpp"

#include <fstream>
#include <sstream>

#include "vigrid/errors.hpp"
#include "vigrid/passivity.hpp"

namespace vigrid {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ValidationError("scenario" + pointer + ": " + what);
}

const json& need(const json& j, const std::string& pointer, const char* key) {
  if (!j.contains(key)) fail(pointer + "/" + key, "missing required field");
  return j.at(key);
}

double need_number(const json& j, const std::string& pointer, const char* key) {
  const json& v = need(j, pointer, key);
  if (!v.is_number()) fail(pointer + "/" + key, "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

std::string need_string(const json& j, const std::string& pointer, const char* key) {
  const json& v = need(j, pointer, key);
  if (!v.is_string()) fail(pointer + "/" + key, "expected a string");
  return v.get<std::string>();
}

LtiSupply parse_supply(const json& j, const std::string& pointer) {
  const std::string kind = need_string(j, pointer, "kind");
  if (kind == "first_order") {
    FirstOrderSupply fo;
    fo.time_constant = need_number(j, pointer, "tau");
    fo.droop = need_number(j, pointer, "droop");
    fo.damping = need_number(j, pointer, "damping");
    return to_state_space(fo);
  }
  if (kind == "governor") {
    TurbineGovernor g;
    g.droop = need_number(j, pointer, "droop");
    g.servo_tc = need_number(j, pointer, "servo_tc");
    g.lag_tc = need_number(j, pointer, "lag_tc");
    g.lead_tc = need_number(j, pointer, "lead_tc");
    g.hp_tc = need_number(j, pointer, "hp_tc");
    g.reheat_tc = need_number(j, pointer, "reheat_tc");
    g.damping = need_number(j, pointer, "damping");
    return to_state_space(g);
  }
  if (kind == "state_space") {
    const json& Aj = need(j, pointer, "A");
    if (!Aj.is_array()) fail(pointer + "/A", "expected a matrix");
    const auto n = static_cast<Eigen::Index>(Aj.size());
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = Aj.at(static_cast<std::size_t>(r));
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        fail(pointer + "/A", "expected a square matrix");
      for (Eigen::Index c = 0; c < n; ++c)
        A(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    const json& Bj = need(j, pointer, "B");
    const json& Cj = need(j, pointer, "C");
    if (static_cast<Eigen::Index>(Bj.size()) != n ||
        static_cast<Eigen::Index>(Cj.size()) != n)
      fail(pointer, "B and C must have one entry per state");
    Eigen::VectorXd B(n);
    Eigen::RowVectorXd C(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      B(i) = Bj.at(static_cast<std::size_t>(i)).get<double>();
      C(i) = Cj.at(static_cast<std::size_t>(i)).get<double>();
    }
    return LtiSupply(A, B, C, need_number(j, pointer, "D"));
  }
  fail(pointer + "/kind", "unknown supply kind \"" + kind + "\"");
}

}  // namespace

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError("scenario parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
  }
  return from_json(j);
}

Scenario Scenario::from_json(const json& j) {
  Scenario sc;
  if (need_string(j, "", "schema_version") != "1")
    fail("/schema_version", "unsupported schema version");
  sc.mva_base_ = number_or(j, "mva_base", 100.0);

  const json& buses = need(j, "", "buses");
  if (!buses.is_array() || buses.empty()) fail("/buses", "expected a non-empty array");
  std::vector<std::string> ids;
  std::vector<BusParams> params;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string ptr = "/buses/" + std::to_string(i);
    const json& b = buses.at(i);
    ids.push_back(need_string(b, ptr, "id"));
    BusParams p;
    p.inertia = need_number(b, ptr, "M0");
    p.damping = number_or(b, "Dv", 0.0);
    p.load = number_or(b, "pL", 0.0);
    params.push_back(p);
    sc.supply_decls_.push_back(need(b, ptr, "supply"));
  }

  const json& lines = need(j, "", "lines");
  if (!lines.is_array() || lines.empty()) fail("/lines", "expected a non-empty array");
  std::vector<Line> ls;
  auto index_of = [&](const std::string& id, const std::string& ptr) {
    for (std::size_t k = 0; k < ids.size(); ++k)
      if (ids[k] == id) return k;
    fail(ptr, "dangling bus reference \"" + id + "\"");
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string ptr = "/lines/" + std::to_string(i);
    const json& l = lines.at(i);
    Line ln;
    ln.from = index_of(need_string(l, ptr, "from"), ptr + "/from");
    ln.to = index_of(need_string(l, ptr, "to"), ptr + "/to");
    ln.susceptance = need_number(l, ptr, "susceptance");
    ls.push_back(ln);
  }
  sc.graph_ = std::make_shared<NetworkGraph>(ids, params, ls);

  for (std::size_t i = 0; i < sc.supply_decls_.size(); ++i) {
    const std::string ptr = "/buses/" + std::to_string(i) + "/supply";
    LtiSupply sup = parse_supply(sc.supply_decls_[i], ptr);
    // fold the declared bus damping into the supply feedthrough
    if (params[i].damping != 0.0)
      sup = LtiSupply(sup.A(), sup.B(), sup.C(), sup.D() + params[i].damping);
    sc.supplies_.push_back(std::move(sup));
  }

  const json& sim = need(j, "", "sim");
  sc.sim_.step = number_or(sim, "step", 0.01);
  sc.sim_.horizon = need_number(sim, "/sim", "horizon");
  const std::string model = sim.contains("model")
                                ? sim.at("model").get<std::string>()
                                : std::string("nonlinear");
  if (model == "nonlinear")
    sc.sim_.model = FlowModel::Nonlinear;
  else if (model == "linear")
    sc.sim_.model = FlowModel::Linear;
  else
    fail("/sim/model", "expected \"nonlinear\" or \"linear\"");
  if (!(sc.sim_.step > 0.0)) fail("/sim/step", "must be > 0");
  if (!(sc.sim_.horizon > 0.0)) fail("/sim/horizon", "must be > 0");

  if (j.contains("disturbances")) {
    const json& ds = j.at("disturbances");
    if (!ds.is_array()) fail("/disturbances", "expected an array");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const std::string ptr = "/disturbances/" + std::to_string(i);
      const json& d = ds.at(i);
      Disturbance dist;
      dist.bus = index_of(need_string(d, ptr, "bus"), ptr + "/bus");
      dist.delta_load = need_number(d, ptr, "delta_pL");
      dist.time = need_number(d, ptr, "time");
      sc.sim_.disturbances.push_back(dist);
    }
  }

  sc.seed_ = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;

  if (j.contains("policy")) {
    const json& p = j.at("policy");
    PolicySpec& ps = sc.policy_;
    ps.kind = need_string(p, "/policy", "kind");
    if (p.contains("buses")) {
      for (std::size_t i = 0; i < p.at("buses").size(); ++i) {
        const std::string id = p.at("buses").at(i).get<std::string>();
        index_of(id, "/policy/buses/" + std::to_string(i));
        ps.bus_ids.push_back(id);
      }
    }
    if (ps.kind == "constant") {
      const json& mv = need(p, "/policy", "Mv");
      for (const auto& v : mv) ps.constant_mv.push_back(v.get<double>());
    } else if (ps.kind == "bang_bang") {
      ps.bang_bang.magnitude = need_number(p, "/policy", "Ma");
      ps.bang_bang.threshold = number_or(p, "threshold", 0.02);
    } else if (ps.kind == "rate_limited" || ps.kind == "randomized") {
      ps.magnitude = need_number(p, "/policy", "Ma");
      ps.filter_rate = number_or(p, "tau", 100.0);
      ps.epsilon = number_or(p, "epsilon", 1e-4);
      ps.threshold = number_or(p, "threshold", 0.02);
      if (p.contains("rho"))
        for (const auto& v : p.at("rho")) ps.rho.push_back(v.get<double>());
      if (ps.kind == "randomized") {
        ps.randomized.update_period = number_or(p, "update_period", 0.5);
        ps.randomized.step_fraction = number_or(p, "step", 0.5);
        ps.randomized.seed = sc.seed_;
      }
    } else if (ps.kind == "open_loop") {
      const json& prof = need(p, "/policy", "profiles");
      for (const auto& knots : prof) {
        std::vector<OpenLoopPolicy::Knot> ks;
        for (const auto& k : knots)
          ks.push_back({k.at("t").get<double>(), k.at("Mv").get<double>()});
        ps.profiles.push_back(std::move(ks));
      }
    } else if (ps.kind == "destabilizer") {
      DestabilizerParams& d = ps.destabilizer;
      const std::string target = need_string(p, "/policy", "target_bus");
      d.target_bus = index_of(target, "/policy/target_bus");
      ps.bus_ids = {target};
      d.hold_inertia = need_number(p, "/policy", "M_hold");
      d.settle_tolerance = number_or(p, "settle_tolerance", 1e-4);
      d.dwell = number_or(p, "dwell", 1.0);
      d.growth_threshold = number_or(p, "growth_threshold", 1.05);
      d.ramp_duration = number_or(p, "ramp", 2.0 * sc.sim_.step);
      d.escape_radius = number_or(p, "escape_radius", 0.5);
      d.max_cycles = static_cast<std::size_t>(number_or(p, "max_cycles", 10000));
    } else {
      fail("/policy/kind", "unknown policy kind \"" + ps.kind + "\"");
    }
  }
  return sc;
}

json Scenario::to_json() const {
  json j;
  j["schema_version"] = "1";
  j["mva_base"] = mva_base_;
  json buses = json::array();
  for (std::size_t i = 0; i < graph_->bus_count(); ++i) {
    json b;
    b["id"] = graph_->bus_id(i);
    b["M0"] = graph_->bus_params()[i].inertia;
    b["Dv"] = graph_->bus_params()[i].damping;
    b["pL"] = graph_->bus_params()[i].load;
    b["supply"] = supply_decls_[i];
    buses.push_back(b);
  }
  j["buses"] = buses;
  json lines = json::array();
  for (const auto& l : graph_->lines()) {
    json e;
    e["from"] = graph_->bus_id(l.from);
    e["to"] = graph_->bus_id(l.to);
    e["susceptance"] = l.susceptance;
    lines.push_back(e);
  }
  j["lines"] = lines;
  json sim;
  sim["step"] = sim_.step;
  sim["horizon"] = sim_.horizon;
  sim["model"] = sim_.model == FlowModel::Nonlinear ? "nonlinear" : "linear";
  j["sim"] = sim;
  json ds = json::array();
  for (const auto& d : sim_.disturbances) {
    json e;
    e["bus"] = graph_->bus_id(d.bus);
    e["delta_pL"] = d.delta_load;
    e["time"] = d.time;
    ds.push_back(e);
  }
  j["disturbances"] = ds;
  j["seed"] = seed_;
  if (!policy_.kind.empty() && policy_.kind != "none") {
    json p;
    p["kind"] = policy_.kind;
    json pb = json::array();
    for (const auto& id : policy_.bus_ids) pb.push_back(id);
    if (policy_.kind == "constant") {
      p["buses"] = pb;
      p["Mv"] = policy_.constant_mv;
    } else if (policy_.kind == "bang_bang") {
      p["buses"] = pb;
      p["Ma"] = policy_.bang_bang.magnitude;
      p["threshold"] = policy_.bang_bang.threshold;
    } else if (policy_.kind == "rate_limited" || policy_.kind == "randomized") {
      p["buses"] = pb;
      p["Ma"] = policy_.magnitude;
      p["tau"] = policy_.filter_rate;
      p["epsilon"] = policy_.epsilon;
      p["threshold"] = policy_.threshold;
      if (!policy_.rho.empty()) p["rho"] = policy_.rho;
      if (policy_.kind == "randomized") {
        p["update_period"] = policy_.randomized.update_period;
        p["step"] = policy_.randomized.step_fraction;
      }
    } else if (policy_.kind == "open_loop") {
      p["buses"] = pb;
      json profs = json::array();
      for (const auto& prof : policy_.profiles) {
        json ks = json::array();
        for (const auto& k : prof) {
          json kk;
          kk["t"] = k.t;
          kk["Mv"] = k.mv;
          ks.push_back(kk);
        }
        profs.push_back(ks);
      }
      p["profiles"] = profs;
    } else if (policy_.kind == "destabilizer") {
      p["target_bus"] = graph_->bus_id(policy_.destabilizer.target_bus);
      p["M_hold"] = policy_.destabilizer.hold_inertia;
      p["settle_tolerance"] = policy_.destabilizer.settle_tolerance;
      p["dwell"] = policy_.destabilizer.dwell;
      p["growth_threshold"] = policy_.destabilizer.growth_threshold;
      p["ramp"] = policy_.destabilizer.ramp_duration;
      p["escape_radius"] = policy_.destabilizer.escape_radius;
      p["max_cycles"] = policy_.destabilizer.max_cycles;
    }
    j["policy"] = p;
  }
  return j;
}

void Scenario::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file " + path);
  out << to_json().dump(2) << "\n";
}

Eigen::VectorXd Scenario::final_loads() const {
  Eigen::VectorXd loads = graph_->loads();
  for (const auto& d : sim_.disturbances)
    loads(static_cast<Eigen::Index>(d.bus)) += d.delta_load;
  return loads;
}

Equilibrium Scenario::target_equilibrium() const {
  return find_equilibrium(*graph_, supplies_, final_loads(), sim_.model);
}

std::vector<double> Scenario::bus_strictness() const {
  std::vector<double> rho(graph_->bus_count());
  for (std::size_t j = 0; j < supplies_.size(); ++j) {
    auto res = strictness_constant(supplies_[j]);
    rho[j] = res.rho;
  }
  return rho;
}

StorageSet Scenario::storage_set() const {
  StorageSet set(graph_->bus_count());
  for (std::size_t j = 0; j < supplies_.size(); ++j) {
    auto res = strictness_constant(supplies_[j]);
    if (res.passive) set[j] = res.certificate.storage;
  }
  return set;
}

std::vector<double> Scenario::margined_strictness() const {
  std::vector<double> rho(graph_->bus_count(), 0.0);
  for (std::size_t j = 0; j < supplies_.size(); ++j) {
    auto res = strictness_constant(supplies_[j]);
    rho[j] = res.passive ? res.certificate.margined_rho : res.rho;
  }
  return rho;
}

std::unique_ptr<InertiaPolicy> Scenario::make_policy(
    std::optional<std::uint64_t> seed_override) const {
  const PolicySpec& ps = policy_;
  std::vector<std::size_t> buses;
  for (const auto& id : ps.bus_ids) buses.push_back(graph_->index_of(id));

  if (ps.kind.empty() || ps.kind == "none") return nullptr;
  if (ps.kind == "constant")
    return std::make_unique<ConstantPolicy>(buses, ps.constant_mv);
  if (ps.kind == "bang_bang")
    return std::make_unique<BangBangPolicy>(buses, ps.bang_bang);
  if (ps.kind == "rate_limited" || ps.kind == "randomized") {
    RateLimitedParams rl;
    rl.magnitude = ps.magnitude;
    rl.filter_rate = ps.filter_rate;
    rl.epsilon = ps.epsilon;
    rl.threshold = ps.threshold;
    if (!ps.rho.empty()) {
      if (ps.rho.size() != buses.size())
        throw ValidationError("policy rho list must match the bus list");
      rl.rho = ps.rho;
    } else {
      for (std::size_t b : buses) {
        auto res = strictness_constant(supplies_[b]);
        if (!res.passive)
          throw ValidationError("bus " + graph_->bus_id(b) +
                                " is not input strictly passive; rate-limited "
                                "scheme rejected");
        rl.rho.push_back(res.rho);
      }
    }
    if (ps.kind == "rate_limited")
      return std::make_unique<RateLimitedPolicy>(buses, rl);
    RandomizedParams rnd = ps.randomized;
    rnd.seed = seed_override.value_or(seed_);
    return std::make_unique<RandomizedPolicy>(buses, rl, rnd);
  }
  if (ps.kind == "open_loop")
    return std::make_unique<OpenLoopPolicy>(buses, ps.profiles);
  if (ps.kind == "destabilizer") {
    DestabilizerParams d = ps.destabilizer;
    d.omega_sync_star = target_equilibrium().omega_sync;
    return std::make_unique<DestabilizerPolicy>(d);
  }
  throw ValidationError("unknown policy kind \"" + ps.kind + "\"");
}

}  // namespace vigrid
