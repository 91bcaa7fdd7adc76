#include "bdris/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bdris {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kScenarioKeys = {
    "N",           "K_r",         "K_t",         "M",
    "mode",        "arch",        "G",           "P_dbm",
    "noise_dbm",   "d_bi",        "d_iu",        "d0",
    "zeta0_db",    "exponent_bi", "exponent_iu", "fading",
    "kappa_db",    "bs_aod_deg",  "ris_aoa_deg", "seed",
    "max_outer",   "rel_tol",     "single_solver", "projection"};

const std::set<std::string> kSweepKeys = {"var", "values", "trials",
                                          "base_seed", "cases"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

double to_double(const std::string &field, const std::string &text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v))
      throw std::invalid_argument(text);
    return v;
  } catch (const std::exception &) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
}

long long to_integer(const std::string &field, const std::string &text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size())
      throw std::invalid_argument(text);
    return v;
  } catch (const std::exception &) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
}

class Section {
public:
  Section(std::string name, const pt::ptree *tree)
      : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> text(const std::string &key) const {
    if (!tree_)
      return std::nullopt;
    auto v = tree_->get_optional<std::string>(key);
    if (!v)
      return std::nullopt;
    return trim(*v);
  }
  std::string field(const std::string &key) const { return name_ + "." + key; }

  void read(const std::string &key, double &out) const {
    if (auto t = text(key))
      out = to_double(field(key), *t);
  }
  void read(const std::string &key, int &out) const {
    if (auto t = text(key)) {
      const long long v = to_integer(field(key), *t);
      if (v < INT32_MIN || v > INT32_MAX)
        throw ConfigError(field(key), "out of range");
      out = int(v);
    }
  }
  void read(const std::string &key, std::uint64_t &out) const {
    if (auto t = text(key)) {
      const long long v = to_integer(field(key), *t);
      if (v < 0)
        throw ConfigError(field(key), "must be non-negative");
      out = std::uint64_t(v);
    }
  }

private:
  std::string name_;
  const pt::ptree *tree_;
};

void check_keys(const std::string &section, const pt::ptree &tree,
                const std::set<std::string> &allowed) {
  for (const auto &[key, child] : tree) {
    if (!child.empty())
      throw ConfigError(section + "." + key, "nested sections are not allowed");
    if (!allowed.count(key))
      throw ConfigError(section + "." + key, "unknown key");
  }
}

Scenario read_scenario(const Section &sec) {
  Scenario s;
  sec.read("N", s.bs_antennas);
  sec.read("K_r", s.reflective_users);
  sec.read("K_t", s.transmissive_users);
  sec.read("M", s.cells);

  if (auto t = sec.text("mode")) {
    try {
      s.mode = parse_mode(*t);
    } catch (const std::exception &e) {
      throw ConfigError(sec.field("mode"), e.what());
    }
  }
  int groups = 0;
  sec.read("G", groups);
  if (auto t = sec.text("arch")) {
    try {
      s.arch = parse_architecture(*t, groups);
    } catch (const std::exception &e) {
      throw ConfigError(sec.field("arch"), e.what());
    }
  } else if (groups != 0) {
    s.arch = Architecture::group(groups);
  }

  double p_dbm = watts_to_dbm(s.power_watts);
  double noise_dbm = watts_to_dbm(s.noise_watts);
  sec.read("P_dbm", p_dbm);
  sec.read("noise_dbm", noise_dbm);
  s.power_watts = dbm_to_watts(p_dbm);
  s.noise_watts = dbm_to_watts(noise_dbm);

  sec.read("d_bi", s.geometry.d_bi);
  sec.read("d_iu", s.geometry.d_iu);
  sec.read("d0", s.geometry.d0);
  sec.read("bs_aod_deg", s.geometry.bs_aod_deg);
  sec.read("ris_aoa_deg", s.geometry.ris_aoa_deg);
  sec.read("zeta0_db", s.pathloss.zeta0_db);
  sec.read("exponent_bi", s.pathloss.exponent_bi);
  sec.read("exponent_iu", s.pathloss.exponent_iu);

  double kappa_db = 5.0;
  sec.read("kappa_db", kappa_db);
  if (auto t = sec.text("fading")) {
    if (*t == "rayleigh")
      s.fading = {FadingKind::kRayleigh, 0.0, 0.0};
    else if (*t == "rician")
      s.fading = {FadingKind::kRician, db_to_linear(kappa_db),
                  db_to_linear(kappa_db)};
    else
      throw ConfigError(sec.field("fading"),
                        "expected rayleigh or rician, got '" + *t + "'");
  }

  sec.read("seed", s.seed);
  sec.read("max_outer", s.max_outer);
  sec.read("rel_tol", s.rel_tol);

  if (auto t = sec.text("single_solver")) {
    if (*t == "closed_form")
      s.single_solver = SingleSolver::kClosedForm;
    else if (*t == "manifold")
      s.single_solver = SingleSolver::kManifold;
    else
      throw ConfigError(sec.field("single_solver"),
                        "expected closed_form or manifold, got '" + *t + "'");
  }
  if (auto t = sec.text("projection")) {
    if (*t == "orthogonal")
      s.projection = TangentProjection::kOrthogonal;
    else if (*t == "diagonal")
      s.projection = TangentProjection::kDiagonal;
    else
      throw ConfigError(sec.field("projection"),
                        "expected orthogonal or diagonal, got '" + *t + "'");
  }
  return s;
}

SweepCase parse_case(const std::string &field, const std::string &text,
                     int groups) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError(field, "case '" + text + "' is not mode:arch");
  SweepCase c;
  try {
    c.mode = parse_mode(trim(text.substr(0, colon)));
    c.arch = parse_architecture(trim(text.substr(colon + 1)), groups);
  } catch (const std::exception &e) {
    throw ConfigError(field, e.what());
  }
  return c;
}

SweepSpec read_sweep(const Section &sec, const Scenario &base) {
  SweepSpec spec;
  spec.base = base;
  spec.base_seed = base.seed;
  if (auto t = sec.text("var")) {
    try {
      spec.var = parse_swept_var(*t);
    } catch (const std::exception &e) {
      throw ConfigError(sec.field("var"), e.what());
    }
  }
  if (auto t = sec.text("values"))
    for (const auto &item : split_list(*t))
      spec.values.push_back(to_double(sec.field("values"), item));
  if (spec.values.empty())
    throw ConfigError(sec.field("values"), "value list must not be empty");
  if (spec.var != SweptVar::kPowerDbm)
    for (double v : spec.values)
      if (v != std::floor(v))
        throw ConfigError(sec.field("values"),
                          "integer values required for this variable");

  sec.read("trials", spec.trials);
  if (spec.trials < 1)
    throw ConfigError(sec.field("trials"), "must be at least 1");
  sec.read("base_seed", spec.base_seed);

  const int groups = base.arch.kind == ArchKind::kGroup ? base.arch.groups : 0;
  if (auto t = sec.text("cases"))
    for (const auto &item : split_list(*t))
      spec.cases.push_back(parse_case(sec.field("cases"), item, groups));
  if (spec.cases.empty())
    spec.cases.push_back({base.mode, base.arch});

  // Fail on the first invalid point now rather than midway through a sweep.
  for (const auto &c : spec.cases)
    for (double v : spec.values) {
      try {
        scenario_at(spec, c, v);
      } catch (const ScenarioError &e) {
        throw ConfigError("scenario." + e.field(), e.what());
      }
    }
  return spec;
}

} // namespace

std::string_view to_string(SweptVar v) {
  switch (v) {
  case SweptVar::kPowerDbm:
    return "P_dbm";
  case SweptVar::kCells:
    return "M";
  case SweptVar::kTransmissiveUsers:
    return "K_t";
  case SweptVar::kReflectiveUsers:
    return "K_r";
  }
  return "?";
}

SweptVar parse_swept_var(std::string_view text) {
  for (auto v : {SweptVar::kPowerDbm, SweptVar::kCells,
                 SweptVar::kTransmissiveUsers, SweptVar::kReflectiveUsers})
    if (text == to_string(v))
      return v;
  throw std::invalid_argument("unknown swept variable '" + std::string(text) +
                              "' (expected P_dbm, M, K_t or K_r)");
}

ExperimentConfig parse_config(std::istream &in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError("", "line " + std::to_string(e.line()) + ": " +
                              e.message());
  }

  for (const auto &[name, child] : tree) {
    if (child.empty() && !child.data().empty())
      throw ConfigError(name, "key outside of a section");
    if (name != "scenario" && name != "sweep")
      throw ConfigError(name, "unknown section");
  }

  const auto *scenario_tree = tree.get_child_optional("scenario").get_ptr();
  const auto *sweep_tree = tree.get_child_optional("sweep").get_ptr();
  if (scenario_tree)
    check_keys("scenario", *scenario_tree, kScenarioKeys);
  if (sweep_tree)
    check_keys("sweep", *sweep_tree, kSweepKeys);

  ExperimentConfig cfg;
  const Section scenario_sec("scenario", scenario_tree);
  cfg.scenario = read_scenario(scenario_sec);
  if (!sweep_tree) {
    try {
      validate_scenario(cfg.scenario);
    } catch (const ScenarioError &e) {
      throw ConfigError("scenario." + e.field(), e.what());
    }
  } else {
    cfg.sweep = read_sweep(Section("sweep", sweep_tree), cfg.scenario);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot open config '" + path.string() + "'");
  return parse_config(in);
}

Scenario scenario_at(const SweepSpec &spec, const SweepCase &c, double value) {
  Scenario s = spec.base;
  s.mode = c.mode;
  s.arch = c.arch;
  switch (spec.var) {
  case SweptVar::kPowerDbm:
    s.power_watts = dbm_to_watts(value);
    break;
  case SweptVar::kCells:
    s.cells = int(value);
    break;
  case SweptVar::kTransmissiveUsers:
    s.transmissive_users = int(value);
    break;
  case SweptVar::kReflectiveUsers:
    s.reflective_users = int(value);
    break;
  }
  validate_scenario(s);
  return s;
}

} // namespace bdris
