// Experiment driver: one pipeline per subcommand, one JSON report per run.
//
// Exit codes: 0 ok or unique, 1 configuration error, 2 non_unique,
// 3 no_solution, 4 failed precondition (e.g. nonzero state momentum).

#include "hamrec.hpp"

#include <CLI11.hpp>
#include <cblas-openblas.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

namespace {

using namespace hamrec;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNonUnique = 2;
constexpr int kExitNoSolution = 3;
constexpr int kExitPrecondition = 4;

// Dense diagonalization above this dimension is too slow for an interactive run;
// ground states switch to Lanczos.
constexpr std::size_t kLanczosAbove = 1024;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json default_config() {
  return {{"n", 8},
          {"local_dim", 2},
          {"k", 2},
          {"boundary", "periodic"},
          {"ensemble", "disordered"},
          {"model", "tfim"},
          {"params", json::object()},
          {"stddev", 1.0},
          {"seed", 1},
          {"selector", "ground"},
          {"index", 0},
          {"zero_momentum", false},
          {"product_digits", json::array()},
          {"zero_tolerance", kDefaultZeroTolerance},
          {"degeneracy_threshold", kDefaultDegeneracyThreshold},
          {"gap_band", 8},
          {"epsilons", {1e-4, 1e-3, 1e-2}},
          {"draws", 32},
          {"region", {{"start", 0}, {"size", 4}}},
          {"trim", 1},
          {"beta", 0.5},
          {"mode", "disordered"}};
}

void require_config(bool ok, const std::string& what) {
  if (!ok) throw config_error(what);
}

void validate_config(const json& c) {
  const json defaults = default_config();
  for (const auto& [key, value] : c.items()) {
    require_config(defaults.contains(key), "unknown config key '" + key + "'");
    require_config(std::string(value.type_name()) == defaults[key].type_name() ||
                       (value.is_number() && defaults[key].is_number()),
                   "config key '" + key + "' must be " + defaults[key].type_name());
  }
  for (const char* key : {"n", "local_dim", "k", "seed", "index", "gap_band", "draws", "trim"}) {
    require_config(c[key].is_number_integer(), std::string("config key '") + key + "' must be an integer");
  }
  static const std::set<std::string> ensembles{"disordered", "ti", "named", "haar", "product"};
  static const std::set<std::string> selectors{"ground", "mid", "index"};
  require_config(ensembles.count(c["ensemble"].get<std::string>()) > 0,
                 "ensemble must be one of disordered, ti, named, haar, product");
  require_config(selectors.count(c["selector"].get<std::string>()) > 0, "selector must be one of ground, mid, index");
  require_config(c["zero_tolerance"].get<double>() > 0.0, "zero_tolerance must be positive");
  require_config(c["stddev"].get<double>() > 0.0, "stddev must be positive");
  require_config(c["draws"].get<int>() >= 1, "draws must be at least 1");
  for (const auto& p : c["params"].items()) require_config(p.value().is_number(), "model params must be numbers");
  for (const auto& e : c["epsilons"]) require_config(e.is_number() && e.get<double>() >= 0.0, "epsilons must be >= 0");
  require_config(c["region"].contains("start") && c["region"].contains("size"), "region needs start and size");
  try {
    spec_from_json(c).validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
}

/// Parses "a.b=value"; value is read as JSON when it parses, else as a string.
void apply_setting(json& cfg, const std::string& setting) {
  const auto eq = setting.find('=');
  require_config(eq != std::string::npos && eq > 0, "--set expects key=value, got '" + setting + "'");
  const std::string path = setting.substr(0, eq);
  const std::string text = setting.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  std::string pointer = "/" + path;
  std::replace(pointer.begin(), pointer.end(), '.', '/');
  cfg[json::json_pointer(pointer)] = std::move(value);
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  require_config(static_cast<bool>(in), "cannot open config file '" + path + "'");
  json j = json::parse(in, nullptr, false);
  require_config(!j.is_discarded() && j.is_object(), "config file '" + path + "' is not a JSON object");
  return j;
}

struct Experiment {
  json cfg;
  LatticeSpec spec;
  std::shared_ptr<const LocalBasis> basis;
  std::optional<LocalHamiltonian> h;
  std::optional<HamiltonianSpectrum> dense;
  Eigen::VectorXcd state;
  json state_info;
  std::string source_id;
};

std::optional<LocalHamiltonian> make_hamiltonian(const json& c, const std::shared_ptr<const LocalBasis>& basis) {
  const std::string ens = c["ensemble"];
  const auto seed = c["seed"].get<std::uint64_t>();
  if (ens == "disordered") return random_disordered(basis, seed, c["stddev"].get<double>());
  if (ens == "ti") return random_translation_invariant(basis, seed, c["stddev"].get<double>());
  if (ens == "named") {
    std::map<std::string, double> params;
    for (const auto& p : c["params"].items()) params[p.key()] = p.value().get<double>();
    return named_model(c["model"].get<std::string>(), params, basis);
  }
  return std::nullopt;
}

Experiment build_experiment(const json& c) {
  Experiment x;
  x.cfg = c;
  x.spec = spec_from_json(c);
  x.basis = make_basis(x.spec);
  const std::string ens = c["ensemble"];
  x.source_id = ens + ":seed=" + std::to_string(c["seed"].get<std::uint64_t>());
  try {
    x.h = make_hamiltonian(c, x.basis);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }

  if (ens == "haar") {
    x.state = haar_state(x.spec.dim(), c["seed"].get<std::uint64_t>());
    x.state_info = {{"kind", "haar"}};
    return x;
  }
  if (ens == "product") {
    std::vector<int> digits = c["product_digits"].get<std::vector<int>>();
    if (digits.empty()) digits.assign(static_cast<std::size_t>(x.spec.n), 0);
    try {
      x.state = product_state(x.spec, digits);
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    x.state_info = {{"kind", "product"}, {"digits", digits}};
    x.source_id = "product";
    return x;
  }

  const std::string sel = c["selector"];
  const std::size_t dim = x.spec.dim();
  EigenstateRecord r;
  std::string method = "dense";
  if (sel == "ground" && dim > kLanczosAbove) {
    r = ground_state_lanczos(*x.h);
    method = "lanczos";
  } else {
    x.dense = diagonalize(*x.h, kDefaultDenseCap, c["degeneracy_threshold"].get<double>());
    std::size_t index = 0;
    if (sel == "mid") index = dim / 2;
    if (sel == "index") {
      require_config(c["index"].get<long long>() >= 0 && static_cast<std::size_t>(c["index"].get<long long>()) < dim,
                     "eigenstate index out of range");
      index = c["index"].get<std::size_t>();
    }
    if (c["zero_momentum"].get<bool>()) {
      require_config(x.spec.boundary == Boundary::periodic, "zero_momentum needs a periodic chain");
      // Nearest non-degenerate zero-momentum eigenstate, searching outward from `index`.
      std::optional<std::size_t> found;
      for (std::size_t off = 0; off < dim && !found; ++off) {
        for (long long cand : {static_cast<long long>(index) - static_cast<long long>(off),
                               static_cast<long long>(index + off)}) {
          if (cand < 0 || static_cast<std::size_t>(cand) >= dim || found) continue;
          const auto rec = x.dense->record(static_cast<std::size_t>(cand));
          if (rec.degenerate) continue;
          try {
            if (state_momentum(rec.state, x.spec) == 0) found = static_cast<std::size_t>(cand);
          } catch (const precondition_error&) {
          }
        }
      }
      if (!found) throw precondition_error("no non-degenerate zero-momentum eigenstate", 0.0);
      index = *found;
    }
    r = x.dense->record(index);
  }
  x.state = r.state;
  x.state_info = {{"kind", "eigenstate"}, {"method", method},     {"index", r.index},
                  {"energy", r.energy},   {"residual", r.residual}, {"degenerate", r.degenerate}};
  x.source_id += ":" + sel + "=" + std::to_string(r.index);
  return x;
}

std::optional<Eigen::VectorXd> ti_truth(const Experiment& x) {
  if (!x.h) return std::nullopt;
  try {
    return ti_coefficients(*x.h);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

struct Outcome {
  json report;
  int exit_code = kExitOk;
};

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::unique: return kExitOk;
    case Verdict::non_unique: return kExitNonUnique;
    case Verdict::no_solution: return kExitNoSolution;
  }
  return kExitOk;
}

Outcome cmd_spectrum(const Experiment& x) {
  const auto m = build_pure(x.state, x.basis, kDefaultCacheBudget, x.source_id);
  const auto s = correlation_spectrum(m, x.cfg["zero_tolerance"].get<double>());
  json r = spectrum_report(x.spec, m, s, x.cfg);
  r["state"] = x.state_info;
  return {r, kExitOk};
}

Outcome cmd_reconstruct(const Experiment& x) {
  const auto m = build_pure(x.state, x.basis, kDefaultCacheBudget, x.source_id);
  std::optional<Eigen::VectorXd> truth;
  if (x.h) truth = x.h->coeffs;
  const auto res = recover(m, x.cfg["zero_tolerance"].get<double>(), truth);
  json r = reconstruction_report(x.spec, res, x.source_id, x.cfg);
  r["state"] = x.state_info;
  return {r, verdict_exit(res.verdict)};
}

Outcome cmd_bands(const Experiment& x) {
  require_config(x.spec.boundary == Boundary::periodic, "bands need a periodic chain");
  const double tol = x.cfg["zero_tolerance"].get<double>();
  const auto blocks = build_blocks(x.state, x.basis);
  const auto bands = band_spectrum(blocks, x.cfg["gap_band"].get<int>());
  const auto q0 = recover_translation_invariant(blocks.blocks[0], tol, ti_truth(x));
  json r = band_report(bands, x.cfg, tol);
  r["state"] = x.state_info;
  r["q0"] = {{"verdict", to_string(q0.verdict)},
             {"kernel_dim", q0.spectrum.kernel_dim},
             {"lambda1", q0.lambda1},
             {"lambda2", q0.lambda2},
             {"angle_to_truth", optional_json(q0.angle_to_truth)},
             {"recovered", to_json(q0.vector())}};
  r["offdiagonal_residual"] = blocks.offdiagonal_residual;
  return {r, kExitOk};
}

Outcome cmd_perturb(const Experiment& x) {
  const auto m = build_pure(x.state, x.basis, kDefaultCacheBudget, x.source_id);
  const auto eps = x.cfg["epsilons"].get<std::vector<double>>();
  const auto rep = sensitivity_report(m.entries, eps, x.cfg["draws"].get<int>(), x.cfg["seed"].get<std::uint64_t>(),
                                      x.cfg["zero_tolerance"].get<double>());
  json r = sensitivity_json(rep, x.cfg);
  r["state"] = x.state_info;
  return {r, kExitOk};
}

Outcome cmd_subregion(const Experiment& x) {
  const double tol = x.cfg["zero_tolerance"].get<double>();
  const SubregionMode mode = subregion_mode_from_string(x.cfg["mode"].get<std::string>());
  const int trim = x.cfg["trim"].get<int>();
  std::vector<int> region;
  try {
    region = make_region(x.spec, x.cfg["region"]["start"].get<int>(), x.cfg["region"]["size"].get<int>());
    if (mode != SubregionMode::translation_invariant) SubregionTask{x.spec, region, mode, trim}.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  const auto basis_a = std::make_shared<const LocalBasis>(restrict_to_region(*x.basis, region));
  std::optional<Eigen::VectorXd> truth;
  if (x.h) truth = restrict_coefficients(*x.h, *basis_a);

  std::optional<double> theta_u, theta_t, l1, l2, beta;
  if (mode == SubregionMode::thermal_log) {
    require_config(x.dense.has_value(), "thermal_log needs a dense-diagonalized Hamiltonian (selector mid or index)");
    const auto rho = reduce_gibbs_state(*x.dense, region, x.cfg["beta"].get<double>());
    const auto res = recover_thermal_log(rho, *basis_a, truth, trim);
    theta_u = res.theta_untrimmed;
    theta_t = res.theta_trimmed;
    beta = res.beta;
  } else {
    const auto rho = reduce_state(x.spec, x.state, region);
    if (mode == SubregionMode::translation_invariant) {
      const auto res = recover_ti_from_subregion(rho, x.basis, tol, trim, ti_truth(x));
      theta_u = res.reconstruction.angle_to_truth;
      l1 = res.reconstruction.lambda1;
      l2 = res.reconstruction.lambda2;
    } else {
      const auto res = mode == SubregionMode::disordered ? recover_disordered_subregion(rho, basis_a, truth, trim, tol)
                                                         : recover_commutator_subregion(rho, basis_a, truth, trim, tol);
      theta_u = res.theta_untrimmed;
      theta_t = res.theta_trimmed;
      l1 = res.reconstruction.lambda1;
      l2 = res.reconstruction.lambda2;
    }
  }
  json r = subregion_report(mode, x.spec, region, trim, theta_u, theta_t, l1, l2, beta, x.cfg, tol);
  r["state"] = x.state_info;
  return {r, kExitOk};
}

Outcome cmd_gen(const json& cfg, const std::string& coefficients_path) {
  const LatticeSpec spec = spec_from_json(cfg);
  const auto basis = make_basis(spec);
  json r = report_envelope("hamiltonian", cfg, json::object());
  std::optional<LocalHamiltonian> h;
  try {
    h = make_hamiltonian(cfg, basis);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  r["basis"] = basis_descriptor(*basis);
  r["coefficients"] = h ? to_json(h->coeffs) : json(nullptr);
  r["label"] = h ? json(h->label) : json(nullptr);
  if (!coefficients_path.empty()) {
    require_config(h.has_value(), "ensemble '" + cfg["ensemble"].get<std::string>() + "' has no Hamiltonian to write");
    std::ofstream f(coefficients_path);
    if (!f) throw std::runtime_error("cannot write '" + coefficients_path + "'");
    write_coefficients(f, h->coeffs);
  }
  return {r, kExitOk};
}

void write_report(const json& r, const std::string& out) {
  const std::string text = r.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian reconstruction from a single eigenstate"};
  app.require_subcommand(1);

  std::string config_path, out_path, coefficients_path;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::optional<int> n, index, trim;
  std::optional<std::string> boundary, ensemble, selector, model, mode;
  std::optional<double> zero_tolerance, beta;
  std::vector<std::string> settings;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "64-bit seed");
    sub->add_option("--out", out_path, "report path ('-' for stdout)");
    sub->add_flag("--deterministic", deterministic, "pin BLAS to one thread");
    sub->add_option("--n", n, "number of sites");
    sub->add_option("--boundary", boundary, "periodic | open");
    sub->add_option("--ensemble", ensemble, "disordered | ti | named | haar | product");
    sub->add_option("--model", model, "named model: tfim | xxz | heisenberg | decoupled");
    sub->add_option("--selector", selector, "ground | mid | index");
    sub->add_option("--index", index, "eigenstate index for selector=index");
    sub->add_option("--zero-tolerance", zero_tolerance, "relative kernel threshold");
    sub->add_option("--trim", trim, "sites trimmed from each region edge");
    sub->add_option("--beta", beta, "inverse temperature for thermal_log");
    sub->add_option("--mode", mode, "subregion mode");
    sub->add_option("--set", settings, "override any config key: key=value, nested keys with dots");
  };
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"spectrum", "reconstruct", "bands", "perturb", "subregion", "gen"}) {
    subs[name] = app.add_subcommand(name);
    add_common(subs[name]);
  }
  subs["spectrum"]->description("correlation spectrum of a state");
  subs["reconstruct"]->description("kernel analysis and recovered Hamiltonian");
  subs["bands"]->description("momentum band spectrum of a zero-momentum state");
  subs["perturb"]->description("sensitivity table under random perturbations of M");
  subs["subregion"]->description("reconstruction from a reduced state");
  subs["gen"]->description("emit the resolved config and generated Hamiltonian");
  subs["gen"]->add_option("--coefficients", coefficients_path, "also write a coefficient text file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  if (deterministic) openblas_set_num_threads(1);

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }

  try {
    // Precedence: flags > file > defaults.
    json cfg = default_config();
    if (!config_path.empty()) cfg.merge_patch(load_config(config_path));
    if (seed) cfg["seed"] = *seed;
    if (n) cfg["n"] = *n;
    if (boundary) cfg["boundary"] = *boundary;
    if (ensemble) cfg["ensemble"] = *ensemble;
    if (model) cfg["model"] = *model;
    if (selector) cfg["selector"] = *selector;
    if (index) cfg["index"] = *index;
    if (zero_tolerance) cfg["zero_tolerance"] = *zero_tolerance;
    if (trim) cfg["trim"] = *trim;
    if (beta) cfg["beta"] = *beta;
    if (mode) cfg["mode"] = *mode;
    for (const auto& s : settings) apply_setting(cfg, s);
    validate_config(cfg);

    Outcome o;
    if (command == "gen") {
      o = cmd_gen(cfg, coefficients_path);
    } else {
      const Experiment x = build_experiment(cfg);
      if (command == "spectrum") o = cmd_spectrum(x);
      if (command == "reconstruct") o = cmd_reconstruct(x);
      if (command == "bands") o = cmd_bands(x);
      if (command == "perturb") o = cmd_perturb(x);
      if (command == "subregion") o = cmd_subregion(x);
    }
    write_report(o.report, out_path);
    return o.exit_code;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const precondition_error& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
