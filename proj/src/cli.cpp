#include "jbt/cli.hpp"

#define TOML_HEADER_ONLY 1
#include <toml.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "jbt/oracle.hpp"
#include "jbt/triple.hpp"

namespace jbt::cli {

namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  return s;
}

double to_double(const std::string& s) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidParameters("not a number: '" + s + "'");
  }
  if (used != s.size()) throw InvalidParameters("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

// %.17g; JSON has no NaN/Inf so those become null.
std::string num(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "nan";
  return num(v);
}

std::string cnum(cplx z) { return "{\"re\":" + num(z.real()) + ",\"im\":" + num(z.imag()) + "}"; }

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

std::string config_json(const RunConfig& cfg) {
  std::ostringstream os;
  os << "{\"alpha\":" << num(cfg.alpha) << ",\"beta\":" << num(cfg.beta) << ",\"n\":" << cfg.n
     << ",\"extension\":" << quoted(cfg.extension) << ",\"theta\":[";
  for (size_t i = 0; i < cfg.theta.size(); ++i) os << (i ? "," : "") << num(cfg.theta[i]);
  os << "]}";
  return os.str();
}

std::string matrix_json(const CMatrix& m) {
  std::ostringstream os;
  os << "[";
  for (int r = 0; r < m.rows(); ++r) {
    os << (r ? "," : "") << "[";
    for (int c = 0; c < m.cols(); ++c) os << (c ? "," : "") << cnum(m(r, c));
    os << "]";
  }
  os << "]";
  return os.str();
}

std::string exponent_json(const Exponent& e, double a, double b) {
  return "{\"i\":" + std::to_string(e.i) + ",\"s\":" + std::to_string(e.s) + ",\"t\":" + std::to_string(e.t) +
         ",\"value\":" + num(e.value(a, b)) + "}";
}

double tol_or(const RunConfig& cfg, double d) { return cfg.tolerance.value_or(d); }

}  // namespace

cplx parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ') s += ch;
  if (s.empty()) throw InvalidParameters("empty complex number");
  if (s.back() != 'i') return {to_double(s), 0.0};
  s.pop_back();
  // Split at the last sign that is not part of an exponent.
  size_t cut = std::string::npos;
  for (size_t k = s.size(); k-- > 1;)
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      cut = k;
      break;
    }
  auto imag_of = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return to_double(t);
  };
  if (cut == std::string::npos) return {0.0, imag_of(s)};
  return {to_double(s.substr(0, cut)), imag_of(s.substr(cut))};
}

LambdaGrid parse_grid(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.size() != 3) throw InvalidParameters("lambda grid must be start:stop:count, got '" + text + "'");
  LambdaGrid g{parse_complex(parts[0]), parse_complex(parts[1]), 0};
  double c = to_double(parts[2]);
  if (c < 1 || c != std::floor(c)) throw InvalidParameters("lambda grid count must be a positive integer");
  g.count = int(c);
  return g;
}

std::pair<double, double> parse_window(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.size() != 2) throw InvalidParameters("window must be lo:hi, got '" + text + "'");
  double lo = to_double(parts[0]), hi = to_double(parts[1]);
  if (!(hi > lo)) throw InvalidParameters("window needs lo < hi");
  return {lo, hi};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(to_double(p));
  return out;
}

void apply_toml(const std::string& path, RunConfig& cfg) {
  toml::table t;
  try {
    t = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "cannot read config " << path << ": " << e.description();
    throw InvalidParameters(os.str());
  }
  if (auto v = t["alpha"].value<double>()) cfg.alpha = *v;
  if (auto v = t["beta"].value<double>()) cfg.beta = *v;
  if (auto v = t["n"].value<int64_t>()) cfg.n = int(*v);
  if (auto v = t["power"].value<int64_t>()) cfg.n = int(*v);
  if (auto v = t["extension"].value<std::string>()) cfg.extension = *v;
  if (auto* arr = t["theta"].as_array()) {
    cfg.theta.clear();
    for (auto& x : *arr) {
      auto d = x.value<double>();
      if (!d) throw InvalidParameters("theta entries must be numbers");
      cfg.theta.push_back(*d);
    }
  }
  if (auto v = t["lambda_grid"].value<std::string>()) cfg.lambda_grid = parse_grid(*v);
  if (auto* arr = t["lambdas"].as_array()) {
    cfg.lambdas.clear();
    for (auto& x : *arr) {
      if (auto s = x.value<std::string>()) cfg.lambdas.push_back(parse_complex(*s));
      else if (auto d = x.value<double>()) cfg.lambdas.push_back(*d);
      else throw InvalidParameters("lambdas entries must be numbers or strings");
    }
  }
  if (auto v = t["window"].value<std::string>()) cfg.window = parse_window(*v);
  if (auto v = t["output_format"].value<std::string>()) cfg.output_format = *v;
  if (auto v = t["tolerance"].value<double>()) cfg.tolerance = *v;
  if (auto v = t["input"].value<std::string>()) cfg.input = *v;
}

void validate(const RunConfig& cfg) {
  cfg.parameters();
  if (cfg.extension != "friedrichs" && cfg.extension != "gamma1" && cfg.extension != "separated" &&
      cfg.extension != "periodic")
    throw InvalidParameters("unknown extension '" + cfg.extension + "'");
  if (cfg.extension == "separated" && int(cfg.theta.size()) != 2 * cfg.n)
    throw InvalidParameters("separated extension needs --theta with 2n = " + std::to_string(2 * cfg.n) +
                            " entries, got " + std::to_string(cfg.theta.size()));
  if (cfg.output_format != "json" && cfg.output_format != "csv")
    throw InvalidParameters("format must be json or csv");
  if (cfg.tolerance && !(*cfg.tolerance > 0)) throw InvalidParameters("tolerance must be positive");
}

ExtensionSpec extension_of(const RunConfig& cfg) {
  if (cfg.extension == "friedrichs") return ExtensionSpec::kernel_gamma0();
  if (cfg.extension == "gamma1") return ExtensionSpec::kernel_gamma1();
  if (cfg.extension == "separated") return ExtensionSpec::separated(cfg.theta);
  if (cfg.extension == "periodic") return ExtensionSpec::periodic();
  throw InvalidParameters("unknown extension '" + cfg.extension + "'");
}

std::vector<cplx> grid_points(const RunConfig& cfg) {
  std::vector<cplx> pts;
  if (cfg.lambda_grid) {
    const auto& g = *cfg.lambda_grid;
    for (int k = 0; k < g.count; ++k)
      pts.push_back(g.count == 1 ? g.start : g.start + (g.stop - g.start) * (double(k) / (g.count - 1)));
  }
  pts.insert(pts.end(), cfg.lambdas.begin(), cfg.lambdas.end());
  return pts;
}

// --- records -------------------------------------------------------------------

namespace {

double json_number(const nlohmann::json& j) {
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

std::vector<Record> records_from_json(const nlohmann::json& doc) {
  std::vector<Record> out;
  for (const auto& r : doc.at("records")) {
    Record rec;
    rec.lambda = {json_number(r.at("lambda").at("re")), json_number(r.at("lambda").at("im"))};
    const auto& rows = r.at("matrix");
    const int dim = int(rows.size());
    rec.m = CMatrix(dim, dim);
    for (int i = 0; i < dim; ++i) {
      if (int(rows[i].size()) != dim) throw InvalidParameters("record matrix is not square");
      for (int k = 0; k < dim; ++k) rec.m(i, k) = {json_number(rows[i][k].at("re")), json_number(rows[i][k].at("im"))};
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Record> records_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidParameters("empty CSV input");
  const auto header = split(line, ',');
  const int entries = int(header.size()) - 2;
  const int dim = int(std::lround(std::sqrt(entries / 2.0)));
  if (header.size() < 2 || header[0] != "lambda_re" || 2 * dim * dim != entries)
    throw InvalidParameters("unrecognized CSV header");
  std::vector<Record> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (int(cells.size()) != entries + 2) throw InvalidParameters("CSV row has the wrong number of cells");
    auto val = [&](int k) { return cells[k] == "nan" ? std::nan("") : to_double(cells[k]); };
    Record rec;
    rec.lambda = {val(0), val(1)};
    rec.m = CMatrix(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) {
        int k = 2 + 2 * (r * dim + c);
        rec.m(r, c) = {val(k), val(k + 1)};
      }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<Record> read_records(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return records_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidParameters(std::string("malformed JSON input: ") + e.what());
    }
  }
  std::istringstream ss(text);
  return records_from_csv(ss);
}

std::vector<RecordVerdict> herglotz_from_records(const std::vector<Record>& recs, double positivity_tol,
                                                 double symmetry_tol) {
  std::vector<RecordVerdict> out;
  for (const auto& r : recs) {
    RecordVerdict v;
    v.lambda = r.lambda;
    if (r.lambda.imag() > 0) {
      v.min_imag_eigenvalue = min_imag_eigenvalue(r.m);
      v.pass = *v.min_imag_eigenvalue >= -positivity_tol;
    }
    for (const auto& o : recs)
      if (o.lambda == std::conj(r.lambda) && r.lambda.imag() != 0.0 && o.m.rows() == r.m.rows()) {
        v.symmetry_error = (o.m - r.m.adjoint()).cwiseAbs().maxCoeff();
        v.pass = v.pass && *v.symmetry_error < symmetry_tol;
      }
    out.push_back(v);
  }
  return out;
}

// --- suites --------------------------------------------------------------------

namespace {

SuiteResult finish(SuiteResult s) {
  s.pass = std::isfinite(s.worst) && s.worst < s.tolerance && s.detail.find("error") == std::string::npos;
  return s;
}

SuiteResult suite_gram_schmidt(const BasisFamily& b, const Parameters& pr, double tol) {
  SuiteResult s{"gram-schmidt", false, 0.0, tol, ""};
  s.worst = interaction_matrix(b, pr).max_deviation();
  return finish(s);
}

SuiteResult suite_green(const BasisFamily& b, const Parameters& pr, double tol) {
  SuiteResult s{"green-identity", false, 0.0, tol, ""};
  auto fs = b.all();
  for (const auto& f : fs)
    for (const auto& g : fs) s.worst = std::max(s.worst, green_identity_residual(f, g, b, pr));
  return finish(s);
}

SuiteResult suite_quasi(const BasisFamily& b, const Parameters& pr, double tol) {
  SuiteResult s{"quasi-derivative", false, 0.0, tol, ""};
  const int n = pr.n;
  for (const auto& f : b.all()) {
    auto g0 = gamma0(f, b, pr);
    for (int k = n; k < 2 * n; ++k) {
      s.worst = std::max(s.worst, std::abs(quasi_derivative_symbolic(f, k, pr, 1) - g0(n + k - n)));
      s.worst = std::max(s.worst, std::abs(-quasi_derivative_symbolic(f, k, pr, -1) - g0(k - n)));
    }
  }
  return finish(s);
}

SuiteResult suite_normalization(const Parameters& pr, double tol, std::mt19937_64& rng) {
  SuiteResult s{"normalization", false, 0.0, tol, ""};
  std::uniform_real_distribution<double> re(-10.0, 10.0), im(-5.0, 5.0);
  int done = 0;
  while (done < 100) {
    cplx mu(re(rng), im(rng));
    bool exceptional = false;
    for (cplx z : {mu + pr.alpha + 1.0, mu + pr.beta + 1.0, 1.0 + mu, mu + pr.alpha + pr.beta + 1.0})
      exceptional = exceptional || distance_to_integer(z) <= kExceptionalRadius;
    if (exceptional) continue;
    auto k = root_constants(mu, pr);
    s.worst = std::max(s.worst, std::abs(k.gamma * k.eta - k.delta * k.eps - 1.0));
    ++done;
  }
  return finish(s);
}

SuiteResult suite_oracle(const BasisFamily& b, const Parameters& pr, double tol, std::mt19937_64& rng) {
  SuiteResult s{"oracle-agreement", false, 0.0, tol, ""};
  auto fs = b.all();
  std::uniform_int_distribution<size_t> pick(0, fs.size() - 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto& f = fs[pick(rng)];
    const auto& g = fs[pick(rng)];
    for (int ep : {1, -1}) {
      try {
        cplx sym = sesquilinear_form(f, g, pr, ep);
        cplx num_v = numeric_limit_oracle(f, g, pr, ep);
        s.worst = std::max(s.worst, std::abs(sym - num_v) / (1.0 + std::abs(sym)));
      } catch (const Error& e) {
        s.detail = std::string("error: ") + e.what();
        s.worst = INFINITY;
      }
    }
  }
  return finish(s);
}

SuiteResult suite_herglotz(const RunConfig& cfg, const Parameters& pr, double tol) {
  SuiteResult s{"herglotz", false, 0.0, tol, ""};
  const std::vector<cplx> samples = {{0, 1}, {1, 2}, {-3, 0.5}, {10, 0.1}};
  std::vector<double> theta = int(cfg.theta.size()) == 2 * pr.n ? cfg.theta : std::vector<double>(2 * pr.n, 0.0);
  std::ostringstream bad;
  for (const auto& ext : {ExtensionSpec::kernel_gamma0(), ExtensionSpec::kernel_gamma1(),
                          ExtensionSpec::separated(theta), ExtensionSpec::periodic()}) {
    auto rep = herglotz_check(ext, samples, pr);
    for (const auto& e : rep.entries) {
      if (!e.error.empty()) {
        bad << " " << kind_name(ext.kind) << "@" << detail::fmt(e.lambda) << " error: " << e.error << ";";
        s.worst = INFINITY;
        continue;
      }
      double viol = std::max(-e.min_imag_eigenvalue, e.symmetry_error);
      s.worst = std::max(s.worst, viol);
      if (-e.min_imag_eigenvalue >= tol || e.symmetry_error >= tol) {
        std::ostringstream one;
        one.precision(6);
        one << " " << kind_name(ext.kind) << "@" << e.lambda.real() << (e.lambda.imag() < 0 ? "" : "+")
            << e.lambda.imag() << "i min-eig " << e.min_imag_eigenvalue << ";";
        bad << one.str();
      }
    }
  }
  s.detail = bad.str();
  s.pass = std::isfinite(s.worst) && s.worst < tol;
  return s;
}

double closed_form_hi(const Parameters& pr) { return std::pow(4.0 * (4.0 + pr.alpha + pr.beta + 1.0), pr.n) + 1.0; }
double closed_form_lo(const Parameters& pr) { return -std::pow(std::max(pr.alpha + pr.beta, 1.0), pr.n) - 1.0; }

struct Matching {
  std::vector<double> closed;  // inside the window
  std::vector<Eigenvalue> scanned;
  std::vector<std::optional<size_t>> partner_of_closed;  // index into scanned
  std::vector<bool> scanned_matched;
  std::vector<std::string> failures;
  bool all_matched() const {
    return std::all_of(partner_of_closed.begin(), partner_of_closed.end(), [](auto& p) { return p.has_value(); }) &&
           std::all_of(scanned_matched.begin(), scanned_matched.end(), [](bool b) { return b; });
  }
};

Matching match_closed_form(ExtensionKind kind, double lo, double hi, const Parameters& pr, double tol) {
  Matching mt;
  auto scan = pole_scan(kind == ExtensionKind::KernelGamma0 ? ExtensionSpec::kernel_gamma0()
                                                             : ExtensionSpec::kernel_gamma1(),
                        lo, hi, pr);
  mt.scanned = scan.eigenvalues;
  mt.failures = scan.failures;
  auto fam = kind == ExtensionKind::KernelGamma0 ? ClosedFamily::Sigma0 : ClosedFamily::Sigma1;
  // Enough m to pass hi; values grow like m^{2n}.
  int m_max = int(std::ceil(std::pow(std::max(hi, 1.0), 1.0 / (2.0 * pr.n)))) + 3;
  for (const auto& e : closed_form_spectrum(fam, m_max, pr).eigenvalues)
    if (e.lambda >= lo && e.lambda <= hi &&
        std::none_of(mt.closed.begin(), mt.closed.end(), [&](double c) { return c == e.lambda; }))
      mt.closed.push_back(e.lambda);
  std::sort(mt.closed.begin(), mt.closed.end());
  mt.scanned_matched.assign(mt.scanned.size(), false);
  for (double c : mt.closed) {
    std::optional<size_t> best;
    for (size_t k = 0; k < mt.scanned.size(); ++k)
      if (std::abs(mt.scanned[k].lambda - c) <= tol &&
          (!best || std::abs(mt.scanned[k].lambda - c) < std::abs(mt.scanned[*best].lambda - c)))
        best = k;
    mt.partner_of_closed.push_back(best);
    if (best) mt.scanned_matched[*best] = true;
  }
  return mt;
}

SuiteResult suite_poles(const Parameters& pr, double tol) {
  SuiteResult s{"pole-closed-form", false, 0.0, tol, ""};
  const double lo = closed_form_lo(pr), hi = closed_form_hi(pr);
  std::ostringstream bad;
  for (auto kind : {ExtensionKind::KernelGamma0, ExtensionKind::KernelGamma1}) {
    auto mt = match_closed_form(kind, lo, hi, pr, tol);
    for (size_t i = 0; i < mt.closed.size(); ++i) {
      if (mt.partner_of_closed[i]) {
        double c = mt.closed[i];
        s.worst = std::max(s.worst, std::abs(mt.scanned[*mt.partner_of_closed[i]].lambda - c));
      } else {
        bad << " " << kind_name(kind) << " missed " << mt.closed[i] << ";";
      }
    }
    for (size_t k = 0; k < mt.scanned.size(); ++k)
      if (!mt.scanned_matched[k]) bad << " " << kind_name(kind) << " extra pole " << mt.scanned[k].lambda << ";";
  }
  s.detail = bad.str();
  s.pass = s.detail.empty() && s.worst < tol;
  return s;
}

}  // namespace

std::vector<SuiteResult> verify_suites(const RunConfig& cfg) {
  const auto pr = cfg.parameters();
  std::mt19937_64 rng(20240917);
  std::vector<SuiteResult> out;
  BasisFamily b;
  try {
    b = modified_gram_schmidt(build_basis(pr), pr);
  } catch (const DegenerateDenominator& e) {
    out.push_back({"gram-schmidt", false, INFINITY, tol_or(cfg, 1e-9), std::string("error: ") + e.what()});
    return out;
  }
  out.push_back(suite_gram_schmidt(b, pr, tol_or(cfg, 1e-9)));
  out.push_back(suite_green(b, pr, tol_or(cfg, 1e-9)));
  out.push_back(suite_quasi(b, pr, tol_or(cfg, 1e-9)));
  out.push_back(suite_normalization(pr, tol_or(cfg, 1e-10), rng));
  out.push_back(suite_oracle(b, pr, tol_or(cfg, 1e-6), rng));
  out.push_back(suite_herglotz(cfg, pr, tol_or(cfg, 1e-9)));
  out.push_back(suite_poles(pr, tol_or(cfg, pr.n == 1 ? 1e-8 : 1e-6)));
  return out;
}

// --- commands ------------------------------------------------------------------

int cmd_gram_schmidt(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto pr = cfg.parameters();
  BasisFamily b;
  try {
    b = modified_gram_schmidt(build_basis(pr), pr);
  } catch (const DegenerateDenominator& e) {
    err << "degenerate Gram-Schmidt denominator (k=" << e.k << ", endpoint " << e.endpoint << "): " << e.what() << "\n";
    return kDegenerate;
  }
  auto im = interaction_matrix(b, pr);
  const double tol = tol_or(cfg, 1e-9);
  const double dev = im.max_deviation();
  const bool pass = dev < tol;
  if (cfg.output_format == "json") {
    out << "{\"config\":" << config_json(cfg) << ",\"u\":[";
    bool first = true;
    for (int ep : {1, -1})
      for (int k = 1; k <= pr.n; ++k) {
        const auto& e = b.u(ep)[k - 1].at(ep);
        out << (first ? "" : ",") << "{\"endpoint\":" << ep << ",\"k\":" << k << ",\"terms\":[";
        first = false;
        for (size_t t = 0; t < e.terms.size(); ++t)
          out << (t ? "," : "") << "{\"coeff\":" << cnum(e.terms[t].coeff)
              << ",\"p\":" << exponent_json(e.terms[t].p, pr.alpha, pr.beta)
              << ",\"q\":" << exponent_json(e.terms[t].q, pr.alpha, pr.beta) << "}";
        out << "]}";
      }
    out << "],\"interaction_matrix\":" << matrix_json(im.values) << ",\"max_deviation\":" << num(dev)
        << ",\"tolerance\":" << num(tol) << ",\"pass\":" << (pass ? "true" : "false") << "}\n";
  } else {
    out << "endpoint,k,coeff_re,coeff_im,p_i,p_s,p_t,p_value,q_i,q_s,q_t,q_value\n";
    for (int ep : {1, -1})
      for (int k = 1; k <= pr.n; ++k)
        for (const auto& t : b.u(ep)[k - 1].at(ep).terms)
          out << ep << "," << k << "," << csv_num(t.coeff.real()) << "," << csv_num(t.coeff.imag()) << "," << t.p.i
              << "," << t.p.s << "," << t.p.t << "," << csv_num(t.p.value(pr.alpha, pr.beta)) << "," << t.q.i << ","
              << t.q.s << "," << t.q.t << "," << csv_num(t.q.value(pr.alpha, pr.beta)) << "\n";
    out << "\nrow";
    for (int c = 0; c < im.values.cols(); ++c) out << ",c" << c + 1 << "_re,c" << c + 1 << "_im";
    out << "\n";
    for (int r = 0; r < im.values.rows(); ++r) {
      out << r + 1;
      for (int c = 0; c < im.values.cols(); ++c)
        out << "," << csv_num(im.values(r, c).real()) << "," << csv_num(im.values(r, c).imag());
      out << "\n";
    }
  }
  if (!pass) {
    err << "interaction matrix deviates from the expected pattern by " << dev << " (tolerance " << tol << ")\n";
    return kCheckFailed;
  }
  return kOk;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto pr = cfg.parameters();
  const auto ext = extension_of(cfg);
  const bool closed = ext.kind == ExtensionKind::KernelGamma0 || ext.kind == ExtensionKind::KernelGamma1;
  auto [lo, hi] = cfg.window.value_or(std::pair{closed_form_lo(pr), closed_form_hi(pr)});
  const double tol = tol_or(cfg, 1e-8);

  struct Row {
    std::optional<double> closed, scanned;
    double residual = NAN;
  };
  std::vector<Row> rows;
  std::vector<std::string> failures;
  bool ok = true;
  if (closed) {
    auto mt = match_closed_form(ext.kind, lo, hi, pr, tol);
    failures = mt.failures;
    for (size_t i = 0; i < mt.closed.size(); ++i) {
      Row r;
      r.closed = mt.closed[i];
      if (auto p = mt.partner_of_closed[i]) {
        r.scanned = mt.scanned[*p].lambda;
        r.residual = mt.scanned[*p].residual;
      }
      rows.push_back(r);
    }
    for (size_t k = 0; k < mt.scanned.size(); ++k)
      if (!mt.scanned_matched[k]) rows.push_back({std::nullopt, mt.scanned[k].lambda, mt.scanned[k].residual});
    ok = mt.all_matched();
  } else {
    auto scan = pole_scan(ext, lo, hi, pr);
    failures = scan.failures;
    for (const auto& e : scan.eigenvalues) rows.push_back({std::nullopt, e.lambda, e.residual});
  }
  auto key = [](const Row& r) { return r.closed ? *r.closed : r.scanned.value_or(0.0); };
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) { return key(a) < key(b); });
  auto opt = [](const std::optional<double>& v, bool json) { return v ? num(*v) : (json ? "null" : ""); };
  if (cfg.output_format == "json") {
    out << "{\"config\":" << config_json(cfg) << ",\"window\":[" << num(lo) << "," << num(hi) << "],\"rows\":[";
    for (size_t i = 0; i < rows.size(); ++i)
      out << (i ? "," : "") << "{\"index\":" << i << ",\"lambda_closed_form\":" << opt(rows[i].closed, true)
          << ",\"lambda_scanned\":" << opt(rows[i].scanned, true) << ",\"residual\":" << num(rows[i].residual) << "}";
    out << "],\"matched\":" << (ok ? "true" : "false") << "}\n";
  } else {
    out << "index,lambda_closed_form,lambda_scanned,residual\n";
    for (size_t i = 0; i < rows.size(); ++i)
      out << i << "," << opt(rows[i].closed, false) << "," << opt(rows[i].scanned, false) << ","
          << csv_num(rows[i].residual) << "\n";
  }
  for (const auto& f : failures) err << "scan: " << f << "\n";
  if (!ok) {
    err << "scan and closed form disagree within tolerance " << tol << "\n";
    return kUnmatchedPole;
  }
  return kOk;
}

int cmd_mfunction(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto pr = cfg.parameters();
  const auto ext = extension_of(cfg);
  auto pts = grid_points(cfg);
  if (pts.empty()) throw InvalidParameters("mfunction needs --lambda-grid or --lambda");
  std::vector<Record> recs;
  std::vector<std::string> skipped;
  for (cplx l : pts) {
    try {
      recs.push_back({l, weyl_m(l, ext, pr).m});
    } catch (const OnSpectrum& e) {
      skipped.push_back(detail::fmt(l) + ": " + e.what());
    } catch (const ExceptionalParameter& e) {
      skipped.push_back(detail::fmt(l) + ": " + e.what());
    } catch (const DegenerateSpectralPoint& e) {
      skipped.push_back(detail::fmt(l) + ": " + e.what());
    }
  }
  const int dim = 2 * pr.n;
  if (cfg.output_format == "json") {
    out << "{\"config\":" << config_json(cfg) << ",\"records\":[";
    for (size_t i = 0; i < recs.size(); ++i)
      out << (i ? "," : "") << "{\"lambda\":" << cnum(recs[i].lambda) << ",\"matrix\":" << matrix_json(recs[i].m) << "}";
    out << "]}\n";
  } else {
    out << "lambda_re,lambda_im";
    for (int r = 1; r <= dim; ++r)
      for (int c = 1; c <= dim; ++c) out << ",m_" << r << c << "_re,m_" << r << c << "_im";
    out << "\n";
    for (const auto& rec : recs) {
      out << csv_num(rec.lambda.real()) << "," << csv_num(rec.lambda.imag());
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) out << "," << csv_num(rec.m(r, c).real()) << "," << csv_num(rec.m(r, c).imag());
      out << "\n";
    }
  }
  if (!skipped.empty()) {
    err << "skipped " << skipped.size() << " grid point(s) on the spectrum or at exceptional parameters:\n";
    for (const auto& s : skipped) err << "  " << s << "\n";
    return kSkippedPoints;
  }
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.input.empty()) {
    std::ifstream in(cfg.input);
    if (!in) throw InvalidParameters("cannot open " + cfg.input);
    auto verdicts = herglotz_from_records(read_records(in), tol_or(cfg, kHerglotzPositivityTol),
                                          tol_or(cfg, kHerglotzSymmetryTol));
    bool all = true;
    for (const auto& v : verdicts) {
      out << "lambda " << detail::fmt(v.lambda) << ": ";
      out << "min-eig " << (v.min_imag_eigenvalue ? num(*v.min_imag_eigenvalue) : "n/a") << ", symmetry "
          << (v.symmetry_error ? num(*v.symmetry_error) : "n/a") << " -> " << (v.pass ? "PASS" : "FAIL") << "\n";
      all = all && v.pass;
    }
    out << (all ? "herglotz: PASS" : "herglotz: FAIL") << " (" << verdicts.size() << " records)\n";
    if (!all) {
      err << "first failing suite: herglotz\n";
      return kCheckFailed;
    }
    return kOk;
  }
  auto suites = verify_suites(cfg);
  const SuiteResult* first_fail = nullptr;
  for (const auto& s : suites) {
    out << s.name << ": " << (s.pass ? "PASS" : "FAIL") << " (worst " << num(s.worst) << ", tolerance "
        << num(s.tolerance) << ")";
    if (!s.detail.empty()) out << s.detail;
    out << "\n";
    if (!s.pass && !first_fail) first_fail = &s;
  }
  if (first_fail) {
    err << "first failing suite: " << first_fail->name << "\n";
    return kCheckFailed;
  }
  return kOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary triples and Weyl m-functions for powers of the Jacobi operator"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string theta, grid, window, config;
  std::vector<std::string> lambdas;
  app.add_option("--alpha", cfg.alpha, "alpha in (0,1)");
  app.add_option("--beta", cfg.beta, "beta in (0,1)");
  app.add_option("--power,-n", cfg.n, "power n >= 1");
  app.add_option("--extension", cfg.extension, "friedrichs | gamma1 | separated | periodic");
  app.add_option("--theta", theta, "c1,...,c2n for the separated extension");
  app.add_option("--lambda-grid", grid, "start:stop:count (complex endpoints allowed, e.g. 1i:4+1i:4)");
  app.add_option("--lambda", lambdas, "extra spectral points");
  app.add_option("--window", window, "lo:hi for spectrum");
  app.add_option("--format", cfg.output_format, "json | csv");
  app.add_option("--tolerance", cfg.tolerance, "override check tolerances");
  app.add_option("--config", config, "TOML file; its values override flags");
  app.add_option("--input", cfg.input, "verify: saved mfunction output to re-check");
  auto* gs = app.add_subcommand("gram-schmidt", "u_k coefficients and the interaction matrix");
  auto* sp = app.add_subcommand("spectrum", "pole scan against the closed-form spectra");
  auto* mf = app.add_subcommand("mfunction", "m-function values on a lambda grid");
  auto* vf = app.add_subcommand("verify", "run the invariant suites");
  for (auto* s : {gs, sp, mf, vf}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (!theta.empty()) cfg.theta = parse_list(theta);
    if (!grid.empty()) cfg.lambda_grid = parse_grid(grid);
    for (const auto& l : lambdas) cfg.lambdas.push_back(parse_complex(l));
    if (!window.empty()) cfg.window = parse_window(window);
    if (!config.empty()) apply_toml(config, cfg);
    validate(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }
  try {
    if (gs->parsed()) return cmd_gram_schmidt(cfg, out, err);
    if (sp->parsed()) return cmd_spectrum(cfg, out, err);
    if (mf->parsed()) return cmd_mfunction(cfg, out, err);
    return cmd_verify(cfg, out, err);
  } catch (const InvalidParameters& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace jbt::cli
