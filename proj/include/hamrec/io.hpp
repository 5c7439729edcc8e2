#pragma once

#include "hamrec/subregion.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace hamrec {

using json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kBuildVersion = "hamrec 1.0.0";

// ---- lattice and basis descriptors --------------------------------------

inline json to_json(const LatticeSpec& s) {
  return {{"n", s.n}, {"local_dim", s.local_dim}, {"k", s.k}, {"boundary", std::string(to_string(s.boundary))}};
}

inline LatticeSpec spec_from_json(const json& j) {
  LatticeSpec s;
  s.n = j.at("n").get<int>();
  s.local_dim = j.value("local_dim", 2);
  s.k = j.value("k", 2);
  s.boundary = boundary_from_string(j.value("boundary", std::string("periodic")));
  s.validate();
  return s;
}

/// {"spec": ..., "ops": [[anchor, label_0, ..., label_{k-1}], ...]}
inline json basis_descriptor(const LocalBasis& b) {
  json ops = json::array();
  for (const auto& op : b.ops()) {
    json row = json::array({op.anchor});
    for (int l : op.labels) row.push_back(l);
    ops.push_back(std::move(row));
  }
  return {{"spec", to_json(b.spec())}, {"size", b.size()}, {"ops", std::move(ops)}};
}

inline LocalBasis basis_from_descriptor(const json& j) {
  const LatticeSpec spec = spec_from_json(j.at("spec"));
  std::vector<LocalOp> ops;
  std::vector<int> alpha;
  std::map<int, int> next_alpha;
  for (const auto& row : j.at("ops")) {
    if (row.size() != static_cast<std::size_t>(spec.k) + 1) throw std::invalid_argument("basis row has wrong length");
    LocalOp op;
    op.anchor = row.at(0).get<int>();
    for (int t = 0; t < spec.k; ++t) op.labels.push_back(row.at(static_cast<std::size_t>(t) + 1).get<int>());
    ops.push_back(std::move(op));
    alpha.push_back(next_alpha[ops.back().anchor]++);
  }
  return LocalBasis(spec, SiteAlgebra::make(spec.local_dim), std::move(ops), std::move(alpha));
}

// ---- coefficient text files ---------------------------------------------

/// "# hamrec coefficients <size>" header, then one %.17g value per line.
inline void write_coefficients(std::ostream& os, const Eigen::VectorXd& c) {
  os << "# hamrec coefficients " << c.size() << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", c(i));
    os << buf;
  }
}

inline Eigen::VectorXd read_coefficients(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# hamrec coefficients ", 0) != 0) {
    throw std::invalid_argument("missing coefficient file header");
  }
  const long size = std::stol(line.substr(std::strlen("# hamrec coefficients ")));
  Eigen::VectorXd c(size);
  for (long i = 0; i < size; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("coefficient file is truncated");
    c(i) = std::strtod(line.c_str(), nullptr);
  }
  return c;
}

// ---- binary state and density-matrix files ------------------------------
// Layout: the magic line "HAMREC1\n", one JSON header line, then raw
// little-endian complex<double> values (column major for matrices).

namespace detail {

inline constexpr const char* kBinaryMagic = "HAMREC1";

inline void write_binary(std::ostream& os, json header, const cplx* data, std::size_t count) {
  header["dtype"] = "complex128";
  header["endian"] = "little";
  header["count"] = count;
  os << kBinaryMagic << '\n' << header.dump() << '\n';
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(cplx)));
  if (!os) throw std::runtime_error("failed to write binary payload");
}

inline json read_binary_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kBinaryMagic) throw std::invalid_argument("not a hamrec binary file");
  if (!std::getline(is, line)) throw std::invalid_argument("missing binary header");
  json h = json::parse(line);
  if (h.value("dtype", "") != "complex128" || h.value("endian", "") != "little") {
    throw std::invalid_argument("unsupported binary encoding");
  }
  return h;
}

inline void read_payload(std::istream& is, cplx* data, std::size_t count) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(cplx)));
  if (static_cast<std::size_t>(is.gcount()) != count * sizeof(cplx)) throw std::invalid_argument("binary payload is truncated");
}

}  // namespace detail

inline void write_state(std::ostream& os, const LatticeSpec& spec, const Eigen::VectorXcd& v) {
  if (static_cast<std::size_t>(v.size()) != spec.dim()) throw std::invalid_argument("state dimension mismatch");
  detail::write_binary(os, {{"kind", "state"}, {"spec", to_json(spec)}}, v.data(), static_cast<std::size_t>(v.size()));
}

inline Eigen::VectorXcd read_state(std::istream& is, LatticeSpec* spec_out = nullptr) {
  const json h = detail::read_binary_header(is);
  if (h.value("kind", "") != "state") throw std::invalid_argument("binary file does not hold a state");
  const LatticeSpec spec = spec_from_json(h.at("spec"));
  const auto count = h.at("count").get<std::size_t>();
  if (count != spec.dim()) throw std::invalid_argument("state length does not match the header spec");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(count));
  detail::read_payload(is, v.data(), count);
  if (spec_out) *spec_out = spec;
  return v;
}

inline void write_density(std::ostream& os, const DensityMatrix& rho) {
  detail::write_binary(os, {{"kind", "density"}, {"region", rho.region}, {"local_dim", rho.local_dim}},
                       rho.matrix.data(), static_cast<std::size_t>(rho.matrix.size()));
}

inline DensityMatrix read_density(std::istream& is) {
  const json h = detail::read_binary_header(is);
  if (h.value("kind", "") != "density") throw std::invalid_argument("binary file does not hold a density matrix");
  DensityMatrix rho;
  rho.region = h.at("region").get<std::vector<int>>();
  rho.local_dim = h.at("local_dim").get<int>();
  const auto d = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(rho.local_dim), static_cast<int>(rho.region.size())));
  if (h.at("count").get<std::size_t>() != static_cast<std::size_t>(d * d)) {
    throw std::invalid_argument("density payload does not match its region");
  }
  rho.matrix.resize(d, d);
  detail::read_payload(is, rho.matrix.data(), static_cast<std::size_t>(d * d));
  return rho;
}

// ---- reports -------------------------------------------------------------

/// FNV-1a 64-bit hash, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Common envelope: kind, schema_version, build_version, config, config_hash, tolerances.
inline json report_envelope(const std::string& kind, const json& config, const json& tolerances) {
  return {{"kind", kind},
          {"schema_version", kReportSchemaVersion},
          {"build_version", kBuildVersion},
          {"config", config},
          {"config_hash", fnv1a_hex(config.dump())},
          {"tolerances", tolerances}};
}

inline json spectrum_report(const LatticeSpec& spec, const CorrelationMatrix& m, const CorrelationSpectrum& s,
                            const json& config = json::object()) {
  json r = report_envelope("spectrum", config, {{"zero_tolerance", s.zero_tolerance}});
  r["spec"] = to_json(spec);
  r["variant"] = to_string(m.variant);
  r["source_id"] = m.source;
  r["eigenvalues"] = to_json(s.eigenvalues);
  r["kernel_dim"] = s.kernel_dim;
  r["zero_tolerance"] = s.zero_tolerance;
  return r;
}

inline json reconstruction_report(const LatticeSpec& spec, const ReconstructionResult& res,
                                  const std::string& source_id, const json& config = json::object()) {
  json r = report_envelope("reconstruction", config, {{"zero_tolerance", res.spectrum.zero_tolerance}});
  r["spec"] = to_json(spec);
  r["source_id"] = source_id;
  r["verdict"] = to_string(res.verdict);
  r["kernel_dim"] = res.spectrum.kernel_dim;
  r["lambda1"] = res.lambda1;
  r["lambda2"] = res.lambda2;
  r["best_effort"] = res.best_effort();
  json vecs = json::array();
  for (Eigen::Index c = 0; c < res.recovered.cols(); ++c) vecs.push_back(to_json(Eigen::VectorXd(res.recovered.col(c))));
  r["recovered"] = std::move(vecs);
  r["angle_to_truth"] = res.angle_to_truth ? json(*res.angle_to_truth) : json(nullptr);
  return r;
}

inline json band_report(const BandSpectrum& b, const json& config = json::object(), double zero_tolerance = kDefaultZeroTolerance) {
  json r = report_envelope("bands", config, {{"zero_tolerance", zero_tolerance}});
  std::vector<int> momenta(static_cast<std::size_t>(b.n));
  for (int j = 0; j < b.n; ++j) momenta[static_cast<std::size_t>(j)] = j;
  r["n"] = b.n;
  r["bands"] = b.bands();
  r["momenta"] = momenta;
  r["lambda"] = b.lambda;
  r["gap_report"] = {{"band", b.gap_report.band},
                     {"gap", b.gap_report.gap},
                     {"lower_max_j", b.gap_report.lower_max_j},
                     {"upper_min_j", b.gap_report.upper_min_j},
                     {"largest_gap", b.gap_report.largest_gap},
                     {"largest_gap_band", b.gap_report.largest_gap_band}};
  return r;
}

inline json sensitivity_json(const SensitivityReport& s, const json& config = json::object()) {
  json r = report_envelope("sensitivity", config, {{"davis_kahan_slack", 1e-12}});
  r["lambda1"] = s.lambda1;
  r["lambda2"] = s.lambda2;
  r["draws"] = s.draws;
  r["master_seed"] = s.master_seed;
  json rows = json::array();
  for (const auto& row : s.rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"median_theta", row.median_theta},
                    {"max_theta", row.max_theta},
                    {"bound", row.bound},
                    {"max_half_sin2theta", row.max_half_sin2},
                    {"violations", row.violations}});
  }
  r["rows"] = std::move(rows);
  return r;
}

inline json optional_json(const std::optional<double>& v);

/// {mode, n, m_A, trim, theta_untrimmed, theta_trimmed, lambda1, lambda2, beta}; absent values are null.
inline json subregion_report(SubregionMode mode, const LatticeSpec& spec, const std::vector<int>& region, int trim,
                             std::optional<double> theta_untrimmed, std::optional<double> theta_trimmed,
                             std::optional<double> lambda1, std::optional<double> lambda2, std::optional<double> beta,
                             const json& config = json::object(), double zero_tolerance = kDefaultZeroTolerance) {
  json r = report_envelope("subregion", config, {{"zero_tolerance", zero_tolerance}});
  r["mode"] = to_string(mode);
  r["spec"] = to_json(spec);
  r["n"] = spec.n;
  r["region"] = region;
  r["m_A"] = region.size();
  r["trim"] = trim;
  r["theta_untrimmed"] = optional_json(theta_untrimmed);
  r["theta_trimmed"] = optional_json(theta_trimmed);
  r["lambda1"] = optional_json(lambda1);
  r["lambda2"] = optional_json(lambda2);
  r["beta"] = optional_json(beta);
  return r;
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---- schema checks for report consumers ---------------------------------

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("report schema: " + what);
}

inline void check_envelope(const json& r, const std::string& kind) {
  require(r.is_object(), "report is not an object");
  require(r.value("kind", "") == kind, "kind is not '" + kind + "'");
  require(r.contains("schema_version") && r["schema_version"] == kReportSchemaVersion, "unrecognized schema_version");
  require(r.contains("config_hash") && r["config_hash"].is_string(), "missing config_hash");
  require(r.contains("build_version") && r["build_version"].is_string(), "missing build_version");
  require(r.contains("tolerances") && r["tolerances"].is_object(), "missing tolerances");
}

}  // namespace detail

/// Throws std::invalid_argument unless `r` is a well-formed spectrum report.
inline void validate_spectrum_report(const json& r) {
  detail::check_envelope(r, "spectrum");
  detail::require(r.contains("eigenvalues") && r["eigenvalues"].is_array(), "eigenvalues missing");
  detail::require(!r["eigenvalues"].empty(), "eigenvalues empty");
  double prev = -INFINITY;
  for (const auto& v : r["eigenvalues"]) {
    detail::require(v.is_number(), "eigenvalue is not a number");
    detail::require(v.get<double>() >= prev, "eigenvalues not ascending");
    prev = v.get<double>();
  }
  detail::require(r.contains("kernel_dim") && r["kernel_dim"].is_number_integer(), "kernel_dim missing");
  const int kd = r["kernel_dim"].get<int>();
  detail::require(kd >= 0 && static_cast<std::size_t>(kd) <= r["eigenvalues"].size(), "kernel_dim out of range");
  detail::require(r.contains("zero_tolerance") && r["zero_tolerance"].is_number(), "zero_tolerance missing");
  detail::require(r.contains("spec") && r["spec"].is_object(), "spec missing");
  detail::require(r.contains("variant") && r["variant"].is_string(), "variant missing");
  detail::require(r.contains("source_id"), "source_id missing");
}

/// Throws std::invalid_argument unless `r` is a well-formed band report.
inline void validate_band_report(const json& r) {
  detail::check_envelope(r, "bands");
  detail::require(r.contains("n") && r["n"].is_number_integer(), "n missing");
  detail::require(r.contains("bands") && r["bands"].is_number_integer(), "bands missing");
  const int n = r["n"].get<int>();
  const int bands = r["bands"].get<int>();
  detail::require(n > 0 && bands > 0, "empty band table");
  detail::require(r.contains("momenta") && r["momenta"].size() == static_cast<std::size_t>(n), "momenta length != n");
  detail::require(r.contains("lambda") && r["lambda"].size() == static_cast<std::size_t>(bands), "lambda rows != bands");
  for (const auto& row : r["lambda"]) {
    detail::require(row.is_array() && row.size() == static_cast<std::size_t>(n), "lambda row length != n");
  }
  for (int j = 0; j < n; ++j) {
    for (int b = 1; b < bands; ++b) {
      detail::require(r["lambda"][static_cast<std::size_t>(b)][static_cast<std::size_t>(j)].get<double>() >=
                          r["lambda"][static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(j)].get<double>(),
                      "bands not ascending at fixed momentum");
    }
  }
  detail::require(r.contains("gap_report") && r["gap_report"].contains("gap") && r["gap_report"].contains("band"),
                  "gap_report missing");
}

}  // namespace hamrec
