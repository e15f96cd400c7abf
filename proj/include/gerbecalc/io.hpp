#pragma once

/* JSON ingestion and serialization for the domain types, plus the named
 * fixture catalog used by the command-line interface.
 *
 * Conventions (schema version "v1"):
 *  - every top-level document is an object carrying "schema": "v1" and a
 *    "type" tag; nested component objects carry only their fields;
 *  - exact arithmetic values (cochain entries, phases, coefficients) are
 *    fraction strings "a" or "a/b"; structural integers (vertex ids,
 *    degrees, levels, ranks, dimensions) are JSON numbers;
 *  - complexes are stored by their maximal simplices in lexicographic
 *    order; every other ordering is inherited from sorted containers, so
 *    serialization is deterministic and byte-identical across runs;
 *  - malformed documents raise IOError carrying a JSON-pointer-style path.
 */

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gerbecalc/reduction.hpp"
#include "gerbecalc/sections.hpp"

namespace gerbecalc {

using Json = nlohmann::ordered_json;

namespace io {

/* ------------------------------------------------------------------ */
/* scalars                                                              */
/* ------------------------------------------------------------------ */

inline std::string rat_str(const Rat& q) {
  return den(q) == 1 ? num(q).str() : num(q).str() + "/" + den(q).str();
}

inline Rat rat_parse(const Json& j, const std::string& path) {
  if (!j.is_string()) throw IOError("expected a fraction string", path);
  return rat_from_string(j.get<std::string>(), path);
}

inline int int_parse(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw IOError("expected an integer", path);
  return j.get<int>();
}

inline std::string ring_str(Ring r) {
  switch (r) {
    case Ring::Int: return "int";
    case Ring::Rat: return "rat";
    default: return "mod1";
  }
}

inline Ring ring_parse(const Json& j, const std::string& path) {
  if (!j.is_string()) throw IOError("expected a ring tag", path);
  const std::string s = j.get<std::string>();
  if (s == "int") return Ring::Int;
  if (s == "rat") return Ring::Rat;
  if (s == "mod1") return Ring::RatMod1;
  throw IOError("unknown ring '" + s + "' (expected int|rat|mod1)", path);
}

/* ------------------------------------------------------------------ */
/* simplices and complexes                                              */
/* ------------------------------------------------------------------ */

inline Json simplex_to_json(const Simplex& s) {
  Json out = Json::array();
  for (int v : s) out.push_back(v);
  return out;
}

inline Simplex simplex_parse(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty())
    throw IOError("expected a nonempty vertex array", path);
  Simplex s;
  for (size_t i = 0; i < j.size(); ++i)
    s.push_back(int_parse(j[i], path + "/" + std::to_string(i)));
  return s;
}

inline Json complex_to_json(const ComplexPtr& K) {
  Json maximal = Json::array();
  for (int q = 0; q <= K->dim(); ++q) {
    const auto cof = coface_table(*K, q);
    for (const Simplex& s : K->by_dim[q])
      if ((*cof)[K->index_of(s)].empty()) maximal.push_back(simplex_to_json(s));
  }
  Json out = Json::object();
  out["type"] = "complex";
  out["maximal"] = std::move(maximal);
  return out;
}

inline ComplexPtr complex_parse_body(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("maximal") || !j["maximal"].is_array())
    throw IOError("complex needs a 'maximal' simplex array", path);
  std::vector<Simplex> maximal;
  const Json& arr = j["maximal"];
  for (size_t i = 0; i < arr.size(); ++i)
    maximal.push_back(simplex_parse(arr[i], path + "/maximal/" + std::to_string(i)));
  return build_complex(maximal);
}

/* ------------------------------------------------------------------ */
/* cochain and chain value lists                                        */
/* ------------------------------------------------------------------ */

inline Json values_to_json(const Cochain& c) {
  Json out = Json::array();
  for (const auto& [s, v] : c.values)
    out.push_back(Json::array({simplex_to_json(s), rat_str(v)}));
  return out;
}

inline void values_into(Cochain& c, const Json& j, const std::string& path) {
  if (!j.is_array()) throw IOError("expected an array of [simplex, value] pairs", path);
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != 2)
      throw IOError("expected a [simplex, value] pair", p);
    Simplex s = simplex_parse(j[i][0], p + "/0");
    Rat v = rat_parse(j[i][1], p + "/1");
    cochain_set(c, s, v);
  }
}

inline Json cochain_to_json(const Cochain& c) {
  Json out = Json::object();
  out["type"] = "cochain";
  out["degree"] = c.degree;
  out["ring"] = ring_str(c.ring);
  out["complex"] = complex_to_json(c.K);
  out["values"] = values_to_json(c);
  return out;
}

inline Cochain cochain_parse_body(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("degree") || !j.contains("ring") ||
      !j.contains("complex") || !j.contains("values"))
    throw IOError("cochain needs degree, ring, complex and values", path);
  ComplexPtr K = complex_parse_body(j["complex"], path + "/complex");
  int degree = int_parse(j["degree"], path + "/degree");
  if (degree < 0 || degree > K->dim())
    throw IOError("cochain degree outside the complex", path + "/degree");
  Cochain c = make_cochain(K, degree, ring_parse(j["ring"], path + "/ring"));
  values_into(c, j["values"], path + "/values");
  return c;
}

inline Json chain_to_json(const Chain& z) {
  Json coeffs = Json::array();
  for (const auto& [s, v] : z.coeffs)
    coeffs.push_back(Json::array({simplex_to_json(s), rat_str(v)}));
  Json out = Json::object();
  out["type"] = "chain";
  out["degree"] = z.degree;
  out["complex"] = complex_to_json(z.K);
  out["coefficients"] = std::move(coeffs);
  return out;
}

inline Chain chain_parse_body(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("degree") || !j.contains("complex") ||
      !j.contains("coefficients"))
    throw IOError("chain needs degree, complex and coefficients", path);
  ComplexPtr K = complex_parse_body(j["complex"], path + "/complex");
  int degree = int_parse(j["degree"], path + "/degree");
  if (degree < 0 || degree > K->dim())
    throw IOError("chain degree outside the complex", path + "/degree");
  Chain z = make_chain(K, degree);
  const Json& arr = j["coefficients"];
  if (!arr.is_array())
    throw IOError("expected an array of [simplex, value] pairs",
                  path + "/coefficients");
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "/coefficients/" + std::to_string(i);
    if (!arr[i].is_array() || arr[i].size() != 2)
      throw IOError("expected a [simplex, value] pair", p);
    chain_accumulate(z, simplex_parse(arr[i][0], p + "/0"),
                     rat_parse(arr[i][1], p + "/1"));
  }
  return z;
}

/* ------------------------------------------------------------------ */
/* simplicial maps                                                      */
/* ------------------------------------------------------------------ */

inline Json map_to_json(const SimplicialMap& phi) {
  Json vm = Json::array();
  for (const auto& [a, b] : phi.vertex_map) vm.push_back(Json::array({a, b}));
  Json out = Json::object();
  out["type"] = "map";
  out["source"] = complex_to_json(phi.src);
  out["vertices"] = std::move(vm);
  return out;
}

/* the target complex comes from context (e.g. from the datum alongside) */
inline SimplicialMap map_parse_body(const Json& j, const ComplexPtr& dst,
                                    const std::string& path) {
  if (!j.is_object() || !j.contains("source") || !j.contains("vertices"))
    throw IOError("map needs a source complex and a vertex table", path);
  ComplexPtr src = complex_parse_body(j["source"], path + "/source");
  std::map<int, int> vm;
  const Json& arr = j["vertices"];
  if (!arr.is_array()) throw IOError("expected an array of [src, dst] pairs",
                                     path + "/vertices");
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "/vertices/" + std::to_string(i);
    if (!arr[i].is_array() || arr[i].size() != 2)
      throw IOError("expected a [src, dst] vertex pair", p);
    vm[int_parse(arr[i][0], p + "/0")] = int_parse(arr[i][1], p + "/1");
  }
  return make_simplicial_map(src, dst, vm);
}

/* ------------------------------------------------------------------ */
/* differential cocycles and local data                                 */
/* ------------------------------------------------------------------ */

inline Json cocycle_to_json(const DifferentialCocycle& x) {
  Json out = Json::object();
  out["type"] = "differential_cocycle";
  out["level"] = x.n;
  out["complex"] = complex_to_json(x.K);
  out["c"] = values_to_json(x.c);
  out["h"] = values_to_json(x.h);
  out["w"] = values_to_json(x.w);
  return out;
}

inline DifferentialCocycle cocycle_parse_body(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("level") || !j.contains("complex") ||
      !j.contains("c") || !j.contains("h") || !j.contains("w"))
    throw IOError("differential cocycle needs level, complex, c, h, w", path);
  ComplexPtr K = complex_parse_body(j["complex"], path + "/complex");
  int n = int_parse(j["level"], path + "/level");
  if (n < 1 || n > K->dim() + 1)
    throw IOError("level outside 1..dim+1", path + "/level");
  Cochain c = make_cochain(K, n, Ring::Int);
  Cochain h = make_cochain(K, n - 1, Ring::Rat);
  Cochain w = make_cochain(K, n, Ring::Rat);
  values_into(c, j["c"], path + "/c");
  values_into(h, j["h"], path + "/h");
  values_into(w, j["w"], path + "/w");
  return make_differential_cocycle(K, n, c, h, w);
}

inline Json datum_to_json(const LocalDatum& d) {
  Json layers = Json::array();
  for (const StarCollection& layer : d.comp) {
    Json entries = Json::array();
    for (const auto& [key, c] : layer)
      entries.push_back(
          Json::array({simplex_to_json(key), ring_str(c.ring), values_to_json(c)}));
    layers.push_back(std::move(entries));
  }
  Json out = Json::object();
  out["type"] = "local_datum";
  out["level"] = d.level;
  out["complex"] = complex_to_json(d.K);
  out["layers"] = std::move(layers);
  out["zcol"] = values_to_json(d.zcol);
  return out;
}

inline LocalDatum datum_parse_body(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("level") || !j.contains("complex") ||
      !j.contains("layers") || !j.contains("zcol"))
    throw IOError("local datum needs level, complex, layers and zcol", path);
  ComplexPtr K = complex_parse_body(j["complex"], path + "/complex");
  int level = int_parse(j["level"], path + "/level");
  if (level < 1 || level > K->dim() + 1)
    throw IOError("level outside 1..dim+1", path + "/level");
  LocalDatum d = make_local_datum(K, level);
  const Json& layers = j["layers"];
  if (!layers.is_array() || layers.size() > d.comp.size())
    throw IOError("layers must be one array per descent row", path + "/layers");
  for (size_t p = 0; p < layers.size(); ++p) {
    const std::string lp = path + "/layers/" + std::to_string(p);
    if (!layers[p].is_array()) throw IOError("expected a layer array", lp);
    for (size_t i = 0; i < layers[p].size(); ++i) {
      const std::string ep = lp + "/" + std::to_string(i);
      const Json& entry = layers[p][i];
      if (!entry.is_array() || entry.size() != 3)
        throw IOError("expected a [simplex, ring, values] triple", ep);
      Simplex key = simplex_parse(entry[0], ep + "/0");
      if (key.size() != p + 1)
        throw IOError("layer key has the wrong dimension", ep + "/0");
      if (!K->has(key))
        throw IOError("layer key is not a simplex of the complex", ep + "/0");
      Cochain c = make_cochain(closed_star(K, key), d.level - 1 - (int)p,
                               ring_parse(entry[1], ep + "/1"));
      values_into(c, entry[2], ep + "/2");
      d.comp[p][key] = std::move(c);
    }
  }
  values_into(d.zcol, j["zcol"], path + "/zcol");
  return d;
}

/* ------------------------------------------------------------------ */
/* monomial matrices and morphisms                                      */
/* ------------------------------------------------------------------ */

inline Json monomial_to_json(const MonomialMatrix& m) {
  Json perm = Json::array(), phases = Json::array();
  for (int k = 0; k < m.size; ++k) {
    perm.push_back(m.perm[(size_t)k]);
    phases.push_back(rat_str(m.phase[(size_t)k]));
  }
  Json out = Json::object();
  out["perm"] = std::move(perm);
  out["phases"] = std::move(phases);
  return out;
}

inline MonomialMatrix monomial_parse_body(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("perm") || !j.contains("phases") ||
      !j["perm"].is_array() || !j["phases"].is_array() ||
      j["perm"].size() != j["phases"].size())
    throw IOError("monomial needs equal-length perm and phases arrays", path);
  std::vector<int> perm;
  std::vector<Rat> phases;
  for (size_t i = 0; i < j["perm"].size(); ++i) {
    perm.push_back(int_parse(j["perm"][i], path + "/perm/" + std::to_string(i)));
    phases.push_back(
        rat_parse(j["phases"][i], path + "/phases/" + std::to_string(i)));
  }
  return make_monomial(std::move(perm), std::move(phases));
}

inline Json morphism_to_json(const TwistedBundleMorphism& t) {
  Json conns = Json::array();
  for (const auto& [v, slots] : t.conn) {
    Json entry = Json::array();
    entry.push_back(simplex_to_json(v));
    Json per_slot = Json::array();
    for (const Cochain& c : slots) per_slot.push_back(values_to_json(c));
    entry.push_back(std::move(per_slot));
    conns.push_back(std::move(entry));
  }
  Json trans = Json::array();
  for (const auto& [e, m] : t.trans)
    trans.push_back(Json::array({simplex_to_json(e), monomial_to_json(m)}));
  Json out = Json::object();
  out["type"] = "morphism";
  out["rank"] = t.rank;
  out["source"] = datum_to_json(t.source);
  out["target"] = datum_to_json(t.target);
  out["connections"] = std::move(conns);
  out["transitions"] = std::move(trans);
  return out;
}

inline TwistedBundleMorphism morphism_parse_body(const Json& j,
                                                 const std::string& path) {
  if (!j.is_object() || !j.contains("rank") || !j.contains("source") ||
      !j.contains("target") || !j.contains("connections") ||
      !j.contains("transitions"))
    throw IOError("morphism needs rank, source, target, connections, transitions",
                  path);
  GerbeDatum source = datum_parse_body(j["source"], path + "/source");
  GerbeDatum target = datum_parse_body(j["target"], path + "/target");
  TwistedBundleMorphism t =
      make_morphism(std::move(source), std::move(target),
                    int_parse(j["rank"], path + "/rank"));
  const Json& conns = j["connections"];
  if (!conns.is_array())
    throw IOError("expected an array of [vertex, slots] pairs",
                  path + "/connections");
  for (size_t i = 0; i < conns.size(); ++i) {
    const std::string p = path + "/connections/" + std::to_string(i);
    if (!conns[i].is_array() || conns[i].size() != 2 || !conns[i][1].is_array())
      throw IOError("expected a [vertex, slots] pair", p);
    Simplex v = simplex_parse(conns[i][0], p + "/0");
    if (v.size() != 1 || !t.source.K->has(v))
      throw IOError("connection key is not a vertex of the complex", p + "/0");
    ComplexPtr star = closed_star(t.source.K, v);
    std::vector<Cochain> slots;
    for (size_t k = 0; k < conns[i][1].size(); ++k) {
      Cochain c = make_cochain(star, 1, Ring::Rat);
      values_into(c, conns[i][1][k], p + "/1/" + std::to_string(k));
      slots.push_back(std::move(c));
    }
    set_connection(t, v, std::move(slots));
  }
  const Json& trans = j["transitions"];
  if (!trans.is_array())
    throw IOError("expected an array of [edge, monomial] pairs",
                  path + "/transitions");
  for (size_t i = 0; i < trans.size(); ++i) {
    const std::string p = path + "/transitions/" + std::to_string(i);
    if (!trans[i].is_array() || trans[i].size() != 2)
      throw IOError("expected an [edge, monomial] pair", p);
    set_transition(t, simplex_parse(trans[i][0], p + "/0"),
                   monomial_parse_body(trans[i][1], p + "/1"));
  }
  return t;
}

/* ------------------------------------------------------------------ */
/* products                                                             */
/* ------------------------------------------------------------------ */

inline Json product_to_json(const ProductComplex& P) {
  Json out = Json::object();
  out["type"] = "product";
  out["m"] = P.m;
  out["base"] = complex_to_json(P.base);
  out["total"] = complex_to_json(P.total);
  return out;
}

inline ProductComplex product_parse_body(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("m") || !j.contains("base"))
    throw IOError("product needs m and a base complex", path);
  int m = int_parse(j["m"], path + "/m");
  if (m < 3) throw IOError("circle factor needs m >= 3", path + "/m");
  return product_with_circle(complex_parse_body(j["base"], path + "/base"), m);
}

/* ------------------------------------------------------------------ */
/* exact cyclotomic values and intertwiners (serialize only)            */
/* ------------------------------------------------------------------ */

inline Json cyc_to_json(const Cyc& v) {
  Json out = Json::array();
  for (const auto& [theta, coeff] : v.terms)
    out.push_back(Json::array({rat_str(theta), rat_str(coeff)}));
  return out;
}

inline Json cyc_mat_to_json(const CycMat& m) {
  Json out = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const Cyc& v : row) r.push_back(cyc_to_json(v));
    out.push_back(std::move(r));
  }
  return out;
}

inline Json intertwiner_to_json(const Intertwiner& w) {
  Json psi = Json::array();
  for (const auto& [v, mat] : w.psi)
    psi.push_back(Json::array({simplex_to_json(v), cyc_mat_to_json(mat)}));
  Json out = Json::object();
  out["parallel"] = w.parallel;
  out["psi"] = std::move(psi);
  return out;
}

/* ------------------------------------------------------------------ */
/* reports (serialize only)                                             */
/* ------------------------------------------------------------------ */

inline Json group_to_json(const GroupPresentation& g) {
  Json torsion = Json::array();
  for (const Int& d : g.torsion) torsion.push_back(d.str());
  Json out = Json::object();
  out["free_rank"] = g.free_rank;
  out["torsion"] = std::move(torsion);
  return out;
}

inline Json coords_to_json(const ClassCoords& c) {
  Json torsion = Json::array();
  for (const auto& [d, r] : c.torsion)
    torsion.push_back(Json::array({d.str(), r.str()}));
  Json free = Json::array();
  for (const Int& v : c.free_part) free.push_back(v.str());
  Json out = Json::object();
  out["torsion"] = std::move(torsion);
  out["free"] = std::move(free);
  out["order"] = c.order().str(); /* "0" means infinite order */
  out["zero"] = c.is_zero();
  return out;
}

inline Json class_report_to_json(const DDClassReport& r) {
  Json out = Json::object();
  out["type"] = "class_report";
  out["group"] = group_to_json(r.group);
  out["coords"] = coords_to_json(r.coords);
  return out;
}

inline Json cocycle_check_to_json(const CocycleCheck& c) {
  Json fails = Json::array();
  for (const auto& [what, where] : c.failures)
    fails.push_back(Json::array({what, simplex_to_json(where)}));
  Json out = Json::object();
  out["type"] = "cocycle_check";
  out["ok"] = c.ok;
  out["failures"] = std::move(fails);
  return out;
}

inline Json morphism_report_to_json(const MorphismReport& r) {
  Json out = Json::object();
  out["type"] = "morphism_report";
  out["ok"] = r.ok();
  out["violations"] = r.violations;
  out["trace_condition"] = r.trace_condition;
  out["fake_curvature"] = r.fake_curvature;
  return out;
}

inline Json trivialization_to_json(const Trivialization& t) {
  Json out = Json::object();
  out["type"] = "trivialization";
  out["complex"] = complex_to_json(t.b.K);
  out["b"] = values_to_json(t.b);
  out["k"] = values_to_json(t.k);
  out["rho"] = values_to_json(t.rho);
  return out;
}

inline Json section_report_to_json(const SectionSpaceReport& r) {
  Json image = Json::array();
  for (const Rat& v : r.rational_image) image.push_back(rat_str(v));
  Json sections = Json::array();
  for (const TwistedBundleMorphism& s : r.known_sections)
    sections.push_back(morphism_to_json(s));
  Json out = Json::object();
  out["type"] = "section_report";
  out["torsion_order"] = r.torsion_order.str();
  out["rational_image"] = std::move(image);
  out["certified_empty"] = r.certified_empty;
  out["candidate_rank_multiple"] = r.candidate_rank_multiple.str();
  out["known_sections"] = std::move(sections);
  return out;
}

inline Json inner_product_to_json(const InnerProductValue& v) {
  Json basis = Json::array();
  for (const Intertwiner& w : v.basis) basis.push_back(intertwiner_to_json(w));
  Json out = Json::object();
  out["type"] = "inner_product";
  out["dimension"] = v.dimension;
  out["conjugate_link"] = v.conjugate_link;
  out["diagnostic"] = v.diagnostic;
  out["basis"] = std::move(basis);
  return out;
}

inline Json intertwiner_space_to_json(const IntertwinerSpace& s) {
  Json basis = Json::array();
  for (const Intertwiner& w : s.basis) basis.push_back(intertwiner_to_json(w));
  Json out = Json::object();
  out["type"] = "intertwiner_space";
  out["dimension"] = s.dimension;
  out["basis"] = std::move(basis);
  return out;
}

inline Json hilbert_report_to_json(const Hilbert2Report& r) {
  Json out = Json::object();
  out["type"] = "hilbert_report";
  out["ok"] = r.ok();
  out["hom_bijection"] = r.hom_bijection;
  out["symmetry"] = r.symmetry;
  out["nondegeneracy"] = r.nondegeneracy;
  out["additivity"] = r.additivity;
  out["notes"] = r.notes;
  return out;
}

inline Json reduced_section_to_json(const ReducedSection& r) {
  Json values = Json::array();
  for (const auto& [x, v] : r.values)
    values.push_back(Json::array({x, cyc_to_json(v)}));
  Json out = Json::object();
  out["type"] = "reduced_section";
  out["winding"] = r.winding;
  out["zero_section_warning"] = r.zero_section_warning;
  out["parallel_expected"] = r.parallel_expected;
  out["relations_ok"] = r.relations_ok;
  out["values"] = std::move(values);
  out["line"] = datum_to_json(r.line);
  return out;
}

inline Json reduction_report_to_json(const ReductionReport& r) {
  Json sections = Json::array();
  for (const auto& [s, red] : r.section_reductions) {
    Json entry = Json::object();
    entry["section"] = morphism_to_json(s);
    entry["reduced"] = reduced_section_to_json(red);
    sections.push_back(std::move(entry));
  }
  Json out = Json::object();
  out["type"] = "reduction_report";
  out["ok"] = r.ok();
  out["stage"] = r.stage;
  out["error_kind"] = r.error_kind;
  out["class_check"] = r.class_check;
  out["curvature_check"] = r.curvature_check;
  out["notes"] = r.notes;
  out["sections"] = std::move(sections);
  out["gerbe"] = datum_to_json(r.gerbe);
  out["line"] = datum_to_json(r.line);
  return out;
}

/* ------------------------------------------------------------------ */
/* top-level schema envelope                                            */
/* ------------------------------------------------------------------ */

inline Json tagged(const Json& body) {
  Json out = Json::object();
  out["schema"] = "v1";
  for (const auto& [k, v] : body.items()) out[k] = v;
  return out;
}

inline std::string document_type(const Json& j) {
  if (!j.is_object()) throw IOError("document must be a JSON object", "/");
  if (!j.contains("schema") || j["schema"] != "v1")
    throw IOError("missing or unsupported schema (expected \"v1\")", "/schema");
  if (!j.contains("type") || !j["type"].is_string())
    throw IOError("missing document type", "/type");
  return j["type"].get<std::string>();
}

inline void require_type(const Json& j, const std::string& want) {
  std::string got = document_type(j);
  if (got != want)
    throw IOError("expected a document of type '" + want + "', found '" + got + "'",
                  "/type");
}

/* serialized bytes: compact deterministic dump plus newline */
inline std::string to_bytes(const Json& j) { return j.dump() + "\n"; }

inline Json serialize(const ComplexPtr& K) { return tagged(complex_to_json(K)); }
inline Json serialize(const Cochain& c) { return tagged(cochain_to_json(c)); }
inline Json serialize(const Chain& z) { return tagged(chain_to_json(z)); }
inline Json serialize(const SimplicialMap& f) { return tagged(map_to_json(f)); }
inline Json serialize(const DifferentialCocycle& x) { return tagged(cocycle_to_json(x)); }
inline Json serialize(const LocalDatum& d) { return tagged(datum_to_json(d)); }
inline Json serialize(const TwistedBundleMorphism& t) { return tagged(morphism_to_json(t)); }
inline Json serialize(const ProductComplex& P) { return tagged(product_to_json(P)); }

inline ComplexPtr parse_complex(const Json& j) {
  require_type(j, "complex");
  return complex_parse_body(j, "");
}
inline Cochain parse_cochain(const Json& j) {
  require_type(j, "cochain");
  return cochain_parse_body(j, "");
}
inline Chain parse_chain(const Json& j) {
  require_type(j, "chain");
  return chain_parse_body(j, "");
}
inline SimplicialMap parse_map(const Json& j, const ComplexPtr& dst) {
  require_type(j, "map");
  return map_parse_body(j, dst, "");
}
inline DifferentialCocycle parse_cocycle(const Json& j) {
  require_type(j, "differential_cocycle");
  return cocycle_parse_body(j, "");
}
inline LocalDatum parse_datum(const Json& j) {
  require_type(j, "local_datum");
  return datum_parse_body(j, "");
}
inline TwistedBundleMorphism parse_morphism(const Json& j) {
  require_type(j, "morphism");
  return morphism_parse_body(j, "");
}
inline ProductComplex parse_product(const Json& j) {
  require_type(j, "product");
  return product_parse_body(j, "");
}

/* ------------------------------------------------------------------ */
/* files                                                                */
/* ------------------------------------------------------------------ */

inline Json read_json_text(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IOError("input is not valid JSON", "/");
  return j;
}

inline Json read_json_file(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  if (!in) throw IOError("cannot open file '" + filename + "'", "/");
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_json_text(buf.str());
}

/* ------------------------------------------------------------------ */
/* the fixture catalog                                                  */
/* ------------------------------------------------------------------ */

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {
      "circle(m)", "sphere2", "sphere3", "torus9", "rp2_6", "rp2xs1"};
  return names;
}

/* named built-in, with circle(m) parsed for any m >= 3 */
inline ComplexPtr fixture_complex(const std::string& name) {
  if (name == "sphere2") return fixtures::sphere2();
  if (name == "sphere3") return fixtures::sphere3();
  if (name == "torus9") return fixtures::torus9();
  if (name == "rp2_6") return fixtures::rp2_6();
  if (name == "rp2xs1") return fixtures::rp2xs1();
  if (name.size() > 8 && name.substr(0, 7) == "circle(" && name.back() == ')') {
    const std::string digits = name.substr(7, name.size() - 8);
    if (!digits.empty() &&
        digits.find_first_not_of("0123456789") == std::string::npos) {
      long long m = std::stoll(digits);
      if (m >= 3 && m <= 1000000) return fixtures::circle((int)m);
    }
    throw IOError("circle fixture needs circle(m) with 3 <= m <= 1000000", "/");
  }
  throw IOError("unknown fixture '" + name + "'", "/");
}

/* argument that is either a fixture name or a path to a complex file */
inline ComplexPtr complex_from_arg(const std::string& arg) {
  for (const std::string& n : fixture_names())
    if (arg == n && n != "circle(m)") return fixture_complex(arg);
  if (arg.rfind("circle(", 0) == 0) return fixture_complex(arg);
  return parse_complex(read_json_file(arg));
}

/* The catalog's precomputed integral cohomology, cross-checked on demand:
   recomputes every built-in's table and compares with the frozen values. */
inline bool fixture_selfcheck(std::vector<std::string>* notes = nullptr) {
  struct Entry {
    std::string name;
    std::vector<GroupPresentation> table; /* degree 0..dim */
  };
  auto z = [](long long r) { return GroupPresentation{r, {}}; };
  auto zt = [](long long r, std::vector<Int> t) {
    return GroupPresentation{r, std::move(t)};
  };
  const std::vector<Entry> expected = {
      {"circle(5)", {z(1), z(1)}},
      {"sphere2", {z(1), z(0), z(1)}},
      {"sphere3", {z(1), z(0), z(0), z(1)}},
      {"torus9", {z(1), z(2), z(1)}},
      {"rp2_6", {z(1), z(0), zt(0, {Int(2)})}},
      {"rp2xs1", {z(1), z(1), zt(0, {Int(2)}), zt(0, {Int(2)})}},
  };
  bool all_ok = true;
  for (const Entry& e : expected) {
    ComplexPtr K = fixture_complex(e.name);
    for (int q = 0; q <= K->dim(); ++q) {
      GroupPresentation got = cohomology_any(K, q, Ring::Int);
      if (!(got == e.table[(size_t)q])) {
        all_ok = false;
        if (notes)
          notes->push_back(e.name + " degree " + std::to_string(q) +
                           ": expected " + e.table[(size_t)q].str() + ", got " +
                           got.str());
      }
    }
  }
  return all_ok;
}

}  // namespace io
}  // namespace gerbecalc
