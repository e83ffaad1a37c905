#include "ltn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ltn/errors.hpp"

namespace ltn {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  if (v == 0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(field, "must be finite");
  return v;
}

bool is_inf_string(const json& j) {
  if (!j.is_string()) return false;
  std::string s = j.get<std::string>();
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s == "inf" || s == "+inf" || s == "infinity";
}

double cap(const json& j, const std::string& field) {
  if (is_inf_string(j)) return kInfiniteCap;
  const double v = number(j, field);
  if (!(v > 0)) throw ParseError(field, "caps must be positive or \"inf\"");
  return v;
}

Vector number_array(const json& j, const std::string& field, std::optional<std::size_t> len) {
  if (!j.is_array()) throw ParseError(field, "expected an array of numbers");
  if (len && j.size() != *len)
    throw ParseError(field, "expected " + std::to_string(*len) + " entries, got " +
                                std::to_string(j.size()));
  Vector v;
  for (std::size_t k = 0; k < j.size(); ++k)
    v.push_back(number(j[k], field + "[" + std::to_string(k) + "]"));
  return v;
}

std::vector<std::size_t> index_array(const json& j, const std::string& field, std::size_t n) {
  if (!j.is_array()) throw ParseError(field, "expected an array of node indices");
  std::vector<std::size_t> out;
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string f = field + "[" + std::to_string(k) + "]";
    if (!j[k].is_number_integer()) throw ParseError(f, "expected an integer index");
    const auto v = j[k].get<long long>();
    if (v < 0 || static_cast<std::size_t>(v) >= n)
      throw ParseError(f, "index out of range [0, " + std::to_string(n) + ")");
    if (!seen.insert(static_cast<std::size_t>(v)).second) throw ParseError(f, "duplicate index");
    out.push_back(static_cast<std::size_t>(v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Nested rows, or a flat row-major array of rows * cols numbers.
Matrix matrix(const json& j, const std::string& field, std::optional<std::size_t> rows,
              std::optional<std::size_t> cols) {
  if (!j.is_array() || j.empty()) throw ParseError(field, "expected a non-empty array");
  if (j[0].is_array()) {
    if (rows && j.size() != *rows)
      throw ParseError(field, "expected " + std::to_string(*rows) + " rows, got " +
                                  std::to_string(j.size()));
    const std::size_t r = j.size();
    const std::size_t c = cols ? *cols : j[0].size();
    std::vector<double> data;
    for (std::size_t i = 0; i < r; ++i) {
      const Vector row = number_array(j[i], field + "[" + std::to_string(i) + "]", c);
      data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
  }
  if (!rows || !cols) throw ParseError(field, "a flat array needs known dimensions");
  return Matrix(*rows, *cols, number_array(j, field, *rows * *cols));
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix) {
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key)) throw ParseError(prefix + key, "unknown field");
}

std::size_t infer_n(const json& doc) {
  if (doc.contains("n")) {
    const json& n = doc["n"];
    if (!n.is_number_integer() || n.get<long long>() < 1)
      throw ParseError("n", "expected a positive integer");
    return static_cast<std::size_t>(n.get<long long>());
  }
  if (!doc.contains("W")) throw ParseError("W", "missing");
  const json& w = doc["W"];
  if (!w.is_array() || w.empty()) throw ParseError("W", "expected a non-empty array");
  if (w[0].is_array()) return w.size();
  const auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(w.size()))));
  if (root * root != w.size()) throw ParseError("W", "flat array length is not a square; give n");
  return root;
}

}  // namespace

NetworkDocument parse_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("<document>", e.what());
  }
  if (!doc.is_object()) throw ParseError("<document>", "expected a JSON object");
  reject_unknown(doc, {"n", "W", "m", "tau", "labels", "d", "partition"}, "");

  const std::size_t n = infer_n(doc);
  if (!doc.contains("W")) throw ParseError("W", "missing");
  NetworkDocument out;
  out.net.w = matrix(doc["W"], "W", n, n);

  std::vector<double> caps(n, kInfiniteCap);
  if (doc.contains("m")) {
    const json& m = doc["m"];
    if (m.is_array()) {
      if (m.size() != n)
        throw ParseError("m", "expected " + std::to_string(n) + " entries, got " +
                                  std::to_string(m.size()));
      for (std::size_t i = 0; i < n; ++i) caps[i] = cap(m[i], "m[" + std::to_string(i) + "]");
    } else {
      std::fill(caps.begin(), caps.end(), cap(m, "m"));
    }
  }
  out.net.m = CapVector(std::move(caps));

  if (doc.contains("tau")) {
    out.net.tau = number(doc["tau"], "tau");
    if (!(out.net.tau > 0)) throw ParseError("tau", "must be positive");
  }
  if (doc.contains("labels")) {
    const json& l = doc["labels"];
    if (!l.is_array() || l.size() != n)
      throw ParseError("labels", "expected " + std::to_string(n) + " strings");
    for (std::size_t i = 0; i < n; ++i) {
      if (!l[i].is_string()) throw ParseError("labels[" + std::to_string(i) + "]", "expected a string");
      out.net.labels.push_back(l[i].get<std::string>());
    }
  }
  if (doc.contains("d")) out.d = number_array(doc["d"], "d", n);

  if (doc.contains("partition")) {
    const json& p = doc["partition"];
    if (!p.is_object()) throw ParseError("partition", "expected an object");
    reject_unknown(p, {"irrelevant", "relevant", "B_minus", "d_relevant"}, "partition.");
    if (!p.contains("irrelevant")) throw ParseError("partition.irrelevant", "missing");
    PartitionSpec part;
    part.irrelevant = index_array(p["irrelevant"], "partition.irrelevant", n);
    if (part.irrelevant.empty() || part.irrelevant.size() == n)
      throw ParseError("partition.irrelevant", "must be a proper non-empty subset of the nodes");
    for (std::size_t i = 0; i < n; ++i)
      if (!std::binary_search(part.irrelevant.begin(), part.irrelevant.end(), i))
        part.relevant.push_back(i);
    if (p.contains("relevant") &&
        index_array(p["relevant"], "partition.relevant", n) != part.relevant)
      throw ParseError("partition.relevant", "must be the complement of partition.irrelevant");
    if (p.contains("B_minus")) {
      const json& b = p["B_minus"];
      part.b_minus = matrix(b, "partition.B_minus", part.irrelevant.size(), std::nullopt);
      for (double v : part.b_minus->data())
        if (v > 0) throw ParseError("partition.B_minus", "entries must be nonpositive");
    }
    if (p.contains("d_relevant"))
      part.d_relevant = number_array(p["d_relevant"], "partition.d_relevant", part.relevant.size());
    out.partition = std::move(part);
  }

  try {
    out.net.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("W", e.what());
  }
  return out;
}

NetworkDocument read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("<file>", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

std::string write_network(const NetworkDocument& doc) {
  // Hand-laid JSON: one matrix row per line, keys in schema order. Numbers
  // go through the JSON library so they keep their round-trip digits.
  const NetworkSpec& net = doc.net;
  auto num = [](double v) { return json(v).dump(); };
  auto vec = [&](std::span<const double> v) {
    std::string out = "[";
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + num(v[k]);
    return out + "]";
  };
  auto mat = [&](const Matrix& a, const std::string& indent) {
    std::string out = "[\n";
    for (std::size_t i = 0; i < a.rows(); ++i)
      out += indent + "  " + vec(a.row(i)) + (i + 1 < a.rows() ? ",\n" : "\n");
    return out + indent + "]";
  };
  auto idx = [](const std::vector<std::size_t>& v) {
    std::string out = "[";
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + std::to_string(v[k]);
    return out + "]";
  };

  std::ostringstream os;
  os << "{\n  \"n\": " << net.size() << ",\n  \"W\": " << mat(net.w, "  ") << ",\n  \"m\": [";
  for (std::size_t i = 0; i < net.size(); ++i)
    os << (i ? ", " : "") << (net.m.finite(i) ? num(net.m[i]) : "\"inf\"");
  os << "],\n  \"tau\": " << num(net.tau);
  if (!net.labels.empty()) os << ",\n  \"labels\": " << json(net.labels).dump();
  if (doc.d) os << ",\n  \"d\": " << vec(*doc.d);
  if (doc.partition) {
    const PartitionSpec& p = *doc.partition;
    os << ",\n  \"partition\": {\n    \"irrelevant\": " << idx(p.irrelevant)
       << ",\n    \"relevant\": " << idx(p.relevant);
    if (p.b_minus) os << ",\n    \"B_minus\": " << mat(*p.b_minus, "    ");
    if (p.d_relevant) os << ",\n    \"d_relevant\": " << vec(*p.d_relevant);
    os << "\n  }";
  }
  os << "\n}\n";
  return os.str();
}

Vector document_input(const NetworkDocument& doc, std::optional<Vector> fallback) {
  if (doc.d) return *doc.d;
  if (fallback) {
    if (fallback->size() != doc.net.size())
      throw ParseError("d", "expected " + std::to_string(doc.net.size()) + " entries");
    return *fallback;
  }
  throw ParseError("d", "missing (give it in the file or on the command line)");
}

BilayerPartition document_partition(const NetworkDocument& doc) {
  if (!doc.partition) throw ParseError("partition", "missing");
  const PartitionSpec& p = *doc.partition;
  if (!p.b_minus) throw ParseError("partition.B_minus", "missing");
  Vector dr;
  if (p.d_relevant) {
    dr = *p.d_relevant;
  } else if (doc.d) {
    for (std::size_t i : p.relevant) dr.push_back((*doc.d)[i]);
  } else {
    dr.assign(p.relevant.size(), 0.0);
  }
  try {
    return make_partition(doc.net.size(), p.irrelevant, *p.b_minus, std::move(dr));
  } catch (const InvalidArgument& e) {
    throw ParseError("partition", e.what());
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "# ltnet trajectory v1\n# input: " << traj.input << "\nt";
  const std::size_t n = traj.x.empty() ? 0 : traj.x.front().size();
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    os << format_number(traj.t[k]);
    for (double v : traj.x[k]) os << ',' << format_number(v);
    os << '\n';
  }
  return os.str();
}

std::string equilibria_csv(const std::vector<Equilibrium>& eqs) {
  std::ostringstream os;
  os << "# ltnet equilibria v1\nsigma";
  const std::size_t n = eqs.empty() ? 0 : eqs.front().state.size();
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i;
  os << ",valid,stability,max_real,min_real\n";
  for (const auto& e : eqs) {
    os << e.sigma.str();
    for (double v : e.state) os << ',' << format_number(v);
    os << ',' << (e.valid ? "true" : "false") << ',' << to_string(e.stability) << ','
       << format_number(e.max_real) << ',' << format_number(e.min_real) << '\n';
  }
  return os.str();
}

std::string ensemble_csv(const EnsembleReport& rep) {
  std::ostringstream os;
  os << "# ltnet ensemble v1\n"
     << "n,parameter,samples,p_matrix,p_matrix_sem,hurwitz,hurwitz_sem,abs_schur,abs_schur_sem,"
        "mean_log_rho,marginal\n";
  auto est = [&](const std::optional<Estimate>& e) {
    if (e) os << ',' << format_number(e->p) << ',' << format_number(e->sem);
    else os << ",,";
  };
  for (const auto& r : rep.rows) {
    os << r.n << ',' << (std::isnan(r.parameter) ? "" : format_number(r.parameter)) << ','
       << r.abs_schur.samples;
    est(r.p_matrix);
    est(r.hurwitz);
    est(r.abs_schur);
    os << ',' << format_number(r.mean_log_rho) << ',' << r.marginal << '\n';
  }
  return os.str();
}

namespace {

std::string set_str(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
  return out + "}";
}

std::string matrix_str(const Matrix& a, const std::string& indent) {
  std::ostringstream os;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    os << indent << '[';
    for (std::size_t j = 0; j < a.cols(); ++j) os << (j ? ", " : "") << format_number(a(i, j));
    os << "]\n";
  }
  return os.str();
}

std::string vector_str(std::span<const double> v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + format_number(v[k]);
  return out + "]";
}

}  // namespace

std::string certificate_text(const ClassCertificate& c) {
  std::ostringstream os;
  os << "I - W in P:      " << to_string(c.p.verdict) << "  (min principal minor "
     << format_number(c.p.extreme) << ")";
  if (c.p.witness && c.p.verdict != Verdict::True) os << "  witness " << set_str(*c.p.witness);
  os << "\n-I + W in H:     " << to_string(c.h.verdict) << "  (max spectral abscissa "
     << format_number(c.h.extreme) << ")";
  if (c.h.witness && c.h.verdict != Verdict::True) os << "  witness " << set_str(*c.h.witness);
  os << "\nW in L:          " << to_string(c.l.verdict) << "  (objective "
     << format_number(c.l.objective) << (c.l.budget_limited ? ", iteration budget hit" : "")
     << ")\n";
  os << "rho(|W|) < 1:    " << to_string(c.abs_schur.verdict) << "  (rho = "
     << format_number(c.abs_schur.value) << ")\n";
  os << "||W|| < 1:       " << to_string(c.norm.verdict) << "  (norm = "
     << format_number(c.norm.value) << ")\n";
  if (c.l.p) os << "Lyapunov matrix P:\n" << matrix_str(*c.l.p, "  ");
  const auto h = hierarchy_consistency(c);
  os << "hierarchy:       " << (h.consistent() ? "consistent" : "VIOLATED") << '\n';
  for (const auto& v : h.violations) os << "  " << v << '\n';
  return os.str();
}

std::string equilibria_text(const EquilibriumSet& set) {
  std::ostringstream os;
  os << set.equilibria.size() << " valid equilibria over " << set.regions << " regions\n";
  for (std::size_t k = 0; k < set.equilibria.size(); ++k) {
    const auto& e = set.equilibria[k];
    os << "  " << e.sigma.str() << "  x = " << vector_str(e.state) << "  " << to_string(e.stability);
    if (set.duplicate_groups[k].size() > 1) os << "  (shared by " << set.duplicate_groups[k].size() << " regions)";
    os << '\n';
  }
  if (set.assumption_marginal) os << "warning: some mode matrix is numerically singular\n";
  if (!set.lemma_consistent) os << "warning: candidate coincidences disagree with M_sigma d\n";
  return os.str();
}

std::string inhibition_text(const NetworkSpec& net, const BilayerPartition& part,
                            const InhibitionDesign& d, const EquivalenceReport* eq) {
  std::ostringstream os;
  os << "network: n = " << net.size() << ", irrelevant " << set_str(part.irrelevant)
     << ", relevant " << set_str(part.relevant) << ", p = " << part.p() << '\n';
  const RangeReport range = check_range_condition(net, part);
  os << "range condition: " << (range.holds ? "holds" : "fails") << " (residual "
     << format_number(range.residual) << ", rank B- = " << range.rank_b << ")\n";
  if (d.mode == InhibitionMode::Feedforward) {
    os << "mode: feedforward\n";
    os << "trajectory bound nu: " << vector_str(d.nu) << '\n';
    os << "input threshold u_bar: " << vector_str(d.u_bar) << "  (any u >= u_bar)\n";
  } else {
    os << "mode: feedback" << (d.rectified ? " (rectified)" : "") << '\n';
    os << "gain K:\n" << matrix_str(d.k_bar, "  ");
    os << "closed loop W + B K:\n" << matrix_str(d.closed_loop, "  ");
    if (d.certificate) os << "closed-loop classes:\n" << certificate_text(*d.certificate);
  }
  os << "residual: " << format_number(d.residual) << '\n';
  if (eq) {
    os << "closed loop vs relevant subnetwork:\n";
    for (const auto& it : eq->items)
      os << "  " << it.name << ": " << to_string(it.closed_loop) << " / " << to_string(it.subnetwork)
         << (it.discrepancy ? "  MISMATCH" : "") << '\n';
  }
  return os.str();
}

std::string wilson_cowan_text(const WilsonCowanParams& p, const WilsonCowanReport& rep) {
  std::ostringstream os;
  os << "reduced W:\n" << matrix_str(wilson_cowan_matrix(p), "  ");
  for (const auto& c : rep.checks) {
    os << c.name << ": " << (c.analytic ? "true" : "false") << "  (margin " << format_number(c.margin)
       << ", numeric " << to_string(c.numeric) << (c.marginal ? ", marginal" : "")
       << (c.agree ? "" : ", DISAGREE") << ")\n";
  }
  return os.str();
}

std::string scaling_fit_text(const ScalingFit& fit) {
  std::ostringstream os;
  os << "log rho(|W|) = alpha log n + beta  (log base " << format_number(fit.log_base) << ")\n";
  for (std::size_t k = 0; k < fit.n_values.size(); ++k)
    os << "  n = " << fit.n_values[k] << ": mean log rho = " << format_number(fit.mean_log_rho[k]) << '\n';
  os << "alpha = " << format_number(fit.alpha) << "\nbeta = " << format_number(fit.beta) << '\n';
  return os.str();
}

}  // namespace ltn
