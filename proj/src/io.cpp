#include "holofg/io.hpp"

#include <fstream>
#include <sstream>

namespace holofg {

using nlohmann::json;

namespace {

json complex_to_json(const std::complex<double>& z) {
  return json::array({z.real(), z.imag()});
}

json cmatrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(complex_to_json(m(r, c)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json rmatrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json rvector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

const json& need(const json& doc, const char* key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return *it;
}

std::string need_string(const json& doc, const char* key,
                        const std::string& where) {
  const json& v = need(doc, key, where);
  if (!v.is_string()) {
    throw ParseError(where + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::complex<double> json_to_complex(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    throw ParseError(where + ": complex entries are [re, im] number pairs");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Eigen::MatrixXcd json_to_cmatrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) {
    throw ParseError(where + ": expected a non-empty matrix");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXcd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw ParseError(where + ": matrix rows must all have length " +
                       std::to_string(rows));
    }
    if (r == 0) m.resize(rows, rows);
    for (Eigen::Index c = 0; c < rows; ++c) {
      m(r, c) = json_to_complex(row[static_cast<std::size_t>(c)],
                                where + " row " + std::to_string(r));
    }
  }
  return m;
}

Eigen::MatrixXd json_to_rmatrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) {
    throw ParseError(where + ": expected a non-empty matrix");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw ParseError(where + ": matrix rows must all have length " +
                       std::to_string(rows));
    }
    if (r == 0) m.resize(rows, rows);
    for (Eigen::Index c = 0; c < rows; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_number()) {
        throw ParseError(where + ": real matrix entries must be numbers");
      }
      m(r, c) = e.get<double>();
    }
  }
  return m;
}

Eigen::VectorXd json_to_rvector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const json& e = v[static_cast<std::size_t>(k)];
    if (!e.is_number()) throw ParseError(where + ": entries must be numbers");
    out[k] = e.get<double>();
  }
  return out;
}

void check_version(const json& doc, const std::string& where) {
  const json& v = need(doc, "format_version", where);
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
    throw ParseError(where + ": unsupported format_version");
  }
}

}  // namespace

json graph_to_json(const ClassicalFactorGraph& g) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "classical";
  json vars = json::array();
  for (const ClassicalVariable& v : g.variables()) {
    vars.push_back({{"id", v.id},
                    {"domain", v.domain_size},
                    {"weight", rvector_to_json(v.weight)}});
  }
  doc["variables"] = std::move(vars);
  json facs = json::array();
  for (const ClassicalFactor& f : g.factors()) {
    facs.push_back({{"id", f.id},
                    {"neighbors", f.neighbors},
                    {"table", rvector_to_json(f.table)}});
  }
  doc["factors"] = std::move(facs);
  return doc;
}

json graph_to_json(const QuantumFactorGraph& g) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "quantum";
  json vars = json::array();
  for (const QuantumVariable& v : g.variables()) {
    vars.push_back({{"id", v.id},
                    {"dim", v.dim},
                    {"weight", cmatrix_to_json(v.weight.entries())}});
  }
  doc["variables"] = std::move(vars);
  json facs = json::array();
  for (const QuantumFactor& f : g.factors()) {
    // Matrix rows follow the canonical label order (sorted variable ids).
    facs.push_back({{"id", f.id},
                    {"neighbors", f.neighbors},
                    {"table", cmatrix_to_json(f.table.entries())}});
  }
  doc["factors"] = std::move(facs);
  return doc;
}

GraphVariant parse_graph_json(const json& doc, const Tolerances& tol) {
  check_version(doc, "graph document");
  const std::string kind = need_string(doc, "kind", "graph document");
  const json& vars = need(doc, "variables", "graph document");
  const json& facs = need(doc, "factors", "graph document");
  if (!vars.is_array() || !facs.is_array()) {
    throw ParseError("graph document: variables and factors must be arrays");
  }

  if (kind == "classical") {
    std::vector<ClassicalVariable> cvars;
    for (const json& v : vars) {
      const std::string id = need_string(v, "id", "variable");
      ClassicalVariable cv;
      cv.id = id;
      const json& dom = need(v, "domain", "variable " + id);
      if (!dom.is_number_integer()) {
        throw ParseError("variable " + id + ": domain must be an integer");
      }
      cv.domain_size = dom.get<int>();
      cv.weight = json_to_rvector(need(v, "weight", "variable " + id),
                                  "variable " + id + " weight");
      cvars.push_back(std::move(cv));
    }
    std::vector<ClassicalFactor> cfacs;
    for (const json& f : facs) {
      const std::string id = need_string(f, "id", "factor");
      ClassicalFactor cf;
      cf.id = id;
      const json& nb = need(f, "neighbors", "factor " + id);
      if (!nb.is_array()) {
        throw ParseError("factor " + id + ": neighbors must be an array");
      }
      for (const json& n : nb) {
        if (!n.is_string()) {
          throw ParseError("factor " + id + ": neighbor ids must be strings");
        }
        cf.neighbors.push_back(n.get<std::string>());
      }
      cf.table = json_to_rvector(need(f, "table", "factor " + id),
                                 "factor " + id + " table");
      cfacs.push_back(std::move(cf));
    }
    return ClassicalFactorGraph(std::move(cvars), std::move(cfacs));
  }

  if (kind == "quantum") {
    std::vector<QuantumVariable> qvars;
    for (const json& v : vars) {
      const std::string id = need_string(v, "id", "variable");
      const json& dim = need(v, "dim", "variable " + id);
      if (!dim.is_number_integer() || dim.get<int>() < 1) {
        throw ParseError("variable " + id + ": dim must be a positive integer");
      }
      const int q = dim.get<int>();
      const Eigen::MatrixXcd w = json_to_cmatrix(
          need(v, "weight", "variable " + id), "variable " + id + " weight");
      if (w.rows() != q) {
        throw ParseError("variable " + id + ": weight matrix side " +
                         std::to_string(w.rows()) + " does not match dim " +
                         std::to_string(q));
      }
      qvars.push_back({id, q, LabeledOperator({SpaceLabel::base(id, q)}, w)});
    }
    auto dim_of = [&](const std::string& id) -> int {
      for (const QuantumVariable& v : qvars) {
        if (v.id == id) return v.dim;
      }
      throw ParseError("factor references unknown variable " + id);
    };
    std::vector<QuantumFactor> qfacs;
    for (const json& f : facs) {
      const std::string id = need_string(f, "id", "factor");
      QuantumFactor qf;
      qf.id = id;
      const json& nb = need(f, "neighbors", "factor " + id);
      if (!nb.is_array() || nb.empty()) {
        throw ParseError("factor " + id +
                         ": neighbors must be a non-empty array");
      }
      std::vector<SpaceLabel> labels;
      for (const json& n : nb) {
        if (!n.is_string()) {
          throw ParseError("factor " + id + ": neighbor ids must be strings");
        }
        const std::string nid = n.get<std::string>();
        qf.neighbors.push_back(nid);
        labels.push_back(SpaceLabel::base(nid, dim_of(nid)));
      }
      std::sort(labels.begin(), labels.end(), label_less);
      const Eigen::MatrixXcd table = json_to_cmatrix(
          need(f, "table", "factor " + id), "factor " + id + " table");
      qf.table = LabeledOperator(labels, table);
      qfacs.push_back(std::move(qf));
    }
    return QuantumFactorGraph(std::move(qvars), std::move(qfacs), tol);
  }

  throw ParseError("graph document: kind must be 'classical' or 'quantum'");
}

json transforms_to_json(const ClassicalTransformSet& ts) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "classical";
  json list = json::array();
  for (const auto& [key, t] : ts.entries()) {
    list.push_back({{"variable", t.variable},
                    {"factor", t.factor},
                    {"phi", rmatrix_to_json(t.phi)},
                    {"phi_hat", rmatrix_to_json(t.phi_hat)}});
  }
  doc["transforms"] = std::move(list);
  return doc;
}

json transforms_to_json(const QuantumTransformSet& ts) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "quantum";
  json list = json::array();
  for (const auto& [key, t] : ts.entries()) {
    // CJ matrices in canonical leg order: phi on [base, hat], phi_hat on
    // [hat, prime].
    list.push_back({{"variable", t.variable},
                    {"factor", t.factor},
                    {"mode", mode_name(t.mode)},
                    {"phi", cmatrix_to_json(t.phi.cj())},
                    {"phi_hat", cmatrix_to_json(t.phi_hat.cj())}});
  }
  doc["transforms"] = std::move(list);
  return doc;
}

TransformVariant parse_transforms_json(const json& doc) {
  check_version(doc, "transform document");
  const std::string kind = need_string(doc, "kind", "transform document");
  const json& list = need(doc, "transforms", "transform document");
  if (!list.is_array()) {
    throw ParseError("transform document: transforms must be an array");
  }

  if (kind == "classical") {
    ClassicalTransformSet ts;
    for (const json& e : list) {
      const std::string var = need_string(e, "variable", "transform");
      const std::string fac = need_string(e, "factor", "transform");
      const std::string where = "transform (" + var + ", " + fac + ")";
      ts.add({var, fac, json_to_rmatrix(need(e, "phi", where), where + " phi"),
              json_to_rmatrix(need(e, "phi_hat", where), where + " phi_hat")});
    }
    return ts;
  }

  if (kind == "quantum") {
    QuantumTransformSet ts;
    for (const json& e : list) {
      const std::string var = need_string(e, "variable", "transform");
      const std::string fac = need_string(e, "factor", "transform");
      const std::string where = "transform (" + var + ", " + fac + ")";
      const std::string mode = need_string(e, "mode", where);
      if (mode != "strong" && mode != "diagonal") {
        throw ParseError(where + ": mode must be 'strong' or 'diagonal'");
      }
      const Eigen::MatrixXcd phi =
          json_to_cmatrix(need(e, "phi", where), where + " phi");
      const Eigen::MatrixXcd phi_hat =
          json_to_cmatrix(need(e, "phi_hat", where), where + " phi_hat");
      const double side = std::sqrt(static_cast<double>(phi.rows()));
      const int q = static_cast<int>(side + 0.5);
      if (static_cast<Eigen::Index>(q) * q != phi.rows() ||
          phi.rows() != phi_hat.rows()) {
        throw ParseError(where + ": CJ matrices must be square of side q^2");
      }
      EdgeTransform t;
      t.variable = var;
      t.factor = fac;
      t.mode =
          mode == "strong" ? TransformMode::Strong : TransformMode::Diagonal;
      t.phi = SuperOperator::from_cj({hat_label(var, fac, q)},
                                     {SpaceLabel::base(var, q)}, phi);
      t.phi_hat = SuperOperator::from_cj({prime_label(var, fac, q)},
                                         {hat_label(var, fac, q)}, phi_hat);
      ts.add(std::move(t));
    }
    return ts;
  }

  throw ParseError("transform document: kind must be 'classical' or 'quantum'");
}

json transformed_to_json(const TransformedClassicalGraph& t) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "transformed_classical";
  json edges = json::array();
  for (const auto& e : t.edges) {
    edges.push_back({{"variable", e.variable},
                     {"factor", e.factor},
                     {"domain", e.domain_size}});
  }
  doc["edges"] = std::move(edges);
  auto tables_json = [](const std::vector<TransformedClassicalGraph::Table>& ts_) {
    json out = json::array();
    for (const auto& table : ts_) {
      out.push_back({{"id", table.id},
                     {"edge_indices", table.edge_indices},
                     {"values", rvector_to_json(table.values)}});
    }
    return out;
  };
  doc["factor_tables"] = tables_json(t.factor_tables);
  doc["variable_tables"] = tables_json(t.variable_tables);
  return doc;
}

json transformed_to_json(const TransformedQuantumGraph& t) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "transformed_quantum";
  auto tables_json =
      [](const std::vector<std::pair<std::string, LabeledOperator>>& ts_) {
        json out = json::array();
        for (const auto& [id, op] : ts_) {
          json legs = json::array();
          for (const SpaceLabel& l : op.labels()) {
            legs.push_back({{"variable", l.node},
                            {"factor", l.factor},
                            {"dim", l.dim}});
          }
          out.push_back({{"id", id},
                         {"hat_legs", std::move(legs)},
                         {"matrix", cmatrix_to_json(op.entries())}});
        }
        return out;
      };
  doc["factor_tables"] = tables_json(t.factor_tables);
  doc["variable_tables"] = tables_json(t.variable_tables);
  return doc;
}

json report_to_json(const HolantReport& report, const ReportMeta& meta) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "report";
  doc["tool_version"] = kToolVersion;
  if (meta.seed.has_value()) doc["seed"] = *meta.seed;
  doc["wall_clock_seconds"] = meta.wall_clock_seconds;
  doc["tolerances"] = {{"psd", meta.tolerances.psd},
                       {"rank_factor", meta.tolerances.rank_factor},
                       {"identity", meta.tolerances.identity},
                       {"hermitian", meta.tolerances.hermitian},
                       {"commute", meta.tolerances.commute},
                       {"inverse", meta.tolerances.inverse},
                       {"biorthogonality", meta.tolerances.biorthogonality},
                       {"imag", meta.tolerances.imag},
                       {"discrepancy_quantum",
                        meta.tolerances.discrepancy_quantum},
                       {"discrepancy_classical",
                        meta.tolerances.discrepancy_classical},
                       {"invert_condition", meta.tolerances.invert_condition}};
  doc["verdict"] = verdict_name(report.verdict);
  doc["z_original"] = complex_to_json(report.z_original);
  doc["z_transformed"] = complex_to_json(report.z_transformed);
  doc["discrepancy"] = report.discrepancy;
  doc["order_probe"] = report.order_probe;

  json edges = json::array();
  for (const auto& e : report.edge_residuals) {
    edges.push_back({{"variable", e.variable},
                     {"factor", e.factor},
                     {"mode", e.mode},
                     {"residual", e.residual},
                     {"ok", e.ok}});
  }
  doc["edge_residuals"] = std::move(edges);

  json nodes = json::array();
  for (const auto& n : report.node_commutation) {
    nodes.push_back({{"node", n.node},
                     {"residual", n.residual},
                     {"identity_exempt", n.identity_exempt},
                     {"ok", n.ok}});
  }
  doc["node_commutation"] = std::move(nodes);

  json pairs = json::array();
  for (const auto& p : report.factor_commutation) {
    pairs.push_back(
        {{"first", p.first}, {"second", p.second}, {"residual", p.residual}});
  }
  doc["factor_commutation"] = std::move(pairs);
  doc["failures"] = report.failures;
  return doc;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw ParseError("failed writing " + path);
}

GraphVariant parse_graph(const std::string& path, const Tolerances& tol) {
  return parse_graph_json(read_json_file(path), tol);
}

TransformVariant parse_transforms(const std::string& path) {
  return parse_transforms_json(read_json_file(path));
}

}  // namespace holofg
