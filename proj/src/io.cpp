#include "opk/io.hpp"

#include <fstream>
#include <sstream>

#include "opk/error.hpp"

namespace opk {

namespace {

std::string key3(int a, int b, int c) { return std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c); }

SlotKey parse_key3(const std::string& s) {
  int a = 0, b = 0, c = 0;
  char x = 0, y = 0;
  std::istringstream in(s);
  if (!(in >> a >> x >> b >> y >> c) || x != ',' || y != ',')
    throw Error(ErrorCode::ParseError, "bad slot key '" + s + "' (expected m,i,n)");
  return {a, b, c};
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad " + what + " '" + s + "'");
  }
}

std::size_t find_id(const ChainComplex& c, const std::string& id, const std::string& what) {
  auto i = c.find(id);
  if (!i) throw Error(ErrorCode::ParseError, what + ": unknown generator '" + id + "'");
  return *i;
}

template <class F>
auto guarded(const std::string& what, F f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

Json to_json(const FieldSpec& f) {
  if (f.is_rational()) return "Q";
  return Json{{"Fp", f.characteristic()}};
}

FieldSpec field_from_json(const Json& j) {
  return guarded("field", [&] {
    if (j.is_string()) return FieldSpec::parse(j.get<std::string>());
    if (j.is_object() && j.contains("Fp")) return FieldSpec::prime(j.at("Fp").get<std::int64_t>());
    throw Error(ErrorCode::ParseError, "field must be \"Q\" or {\"Fp\": p}");
  });
}

Json to_json(const SparseMatrix& m) {
  Json out = Json::array();
  for (const auto& [r, c, x] : m.triplets()) out.push_back(Json::array({r, c, scalar_to_string(x)}));
  return out;
}

SparseMatrix matrix_from_json(const Json& j, std::size_t rows, std::size_t cols, const FieldSpec& f) {
  return guarded("matrix", [&] {
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    for (const auto& e : j) {
      const auto r = e.at(0).get<std::size_t>(), c = e.at(1).get<std::size_t>();
      if (r >= rows || c >= cols) throw Error(ErrorCode::ParseError, "matrix entry out of range");
      Scalar x = e.at(2).is_string() ? scalar_from_string(e.at(2).get<std::string>()) : Scalar(e.at(2).get<long>());
      x = f.normalize(x);
      if (x != 0) t.emplace_back(r, c, x);
    }
    return SparseMatrix::from_triplets(rows, cols, t, f);
  });
}

Json to_json(const ChainComplex& c) {
  Json degrees = Json::object(), diffs = Json::object();
  for (int d : c.degrees()) {
    Json ids = Json::array();
    for (std::size_t i : c.indices_in_degree(d)) ids.push_back(c.generator(i).id);
    degrees[std::to_string(d)] = ids;
    const auto block = c.differential_block(d);
    if (!block.is_zero()) diffs[std::to_string(d)] = to_json(block);
  }
  return Json{{"field", to_json(c.field())}, {"degrees", degrees}, {"differentials", diffs}};
}

ChainComplex complex_from_json(const Json& j) {
  return guarded("chain complex", [&] {
    const auto f = field_from_json(j.at("field"));
    std::map<int, std::vector<std::string>> gens;
    for (const auto& [d, ids] : j.at("degrees").items()) gens[parse_int(d, "degree")] = ids.get<std::vector<std::string>>();
    std::map<int, SparseMatrix> diffs;
    if (j.contains("differentials"))
      for (const auto& [ds, m] : j.at("differentials").items()) {
        const int d = parse_int(ds, "degree");
        const std::size_t rows = gens.count(d - 1) ? gens[d - 1].size() : 0;
        const std::size_t cols = gens.count(d) ? gens[d].size() : 0;
        diffs[d] = matrix_from_json(m, rows, cols, f);
      }
    return ChainComplex::from_degrees(f, gens, diffs);
  });
}

Json to_json(const EquivariantComplex& x) {
  Json j = to_json(x.complex());
  j["arity"] = x.arity();
  Json t = Json::object();
  for (int i = 1; i < x.arity(); ++i) t[std::to_string(i)] = to_json(x.transposition(i));
  j["transpositions"] = t;
  return j;
}

EquivariantComplex equivariant_from_json(const Json& j) {
  return guarded("equivariant complex", [&] {
    auto c = complex_from_json(j);
    const int n = j.at("arity").get<int>();
    std::vector<SparseMatrix> t;
    for (int i = 1; i < n; ++i) {
      const auto key = std::to_string(i);
      if (j.contains("transpositions") && j.at("transpositions").contains(key))
        t.push_back(matrix_from_json(j.at("transpositions").at(key), c.dim(), c.dim(), c.field()));
      else
        t.push_back(SparseMatrix::identity(c.dim()));
    }
    return EquivariantComplex::validated(std::move(c), n, std::move(t));
  });
}

Json to_json(const SymmetricSequence& s) {
  Json ar = Json::object();
  for (const auto& [n, x] : s.components()) ar[std::to_string(n)] = to_json(x);
  return Json{{"field", to_json(s.field())}, {"arities", ar}};
}

SymmetricSequence sequence_from_json(const Json& j) {
  return guarded("symmetric sequence", [&] {
    SymmetricSequence s(field_from_json(j.at("field")));
    for (const auto& [n, x] : j.at("arities").items()) {
      auto e = equivariant_from_json(x);
      if (e.arity() != parse_int(n, "arity")) throw Error(ErrorCode::ParseError, "arity key disagrees with component");
      s.set(e.arity(), std::move(e));
    }
    return s;
  });
}

Json to_json(const Operad& o) {
  Json j = to_json(o.seq);
  j["name"] = o.name;
  j["unit"] = o.seq.has(1) ? o.seq.at(1).complex().generator(o.unit).id : "";
  Json pc = Json::object();
  for (const auto& [k, m] : o.comp) {
    const auto [a, i, b] = k;
    pc[key3(a, i, b)] = to_json(m);
  }
  j["partial_compositions"] = pc;
  return j;
}

Operad operad_from_json(const Json& j) {
  return guarded("operad", [&] {
    Operad o;
    o.seq = sequence_from_json(j);
    o.name = j.value("name", std::string("operad"));
    if (!o.seq.has(1)) throw Error(ErrorCode::ParseError, "operad has no arity-1 component for the unit");
    o.unit = find_id(o.seq.at(1).complex(), j.at("unit").get<std::string>(), "operad unit");
    for (const auto& [k, m] : j.at("partial_compositions").items()) {
      const auto key = parse_key3(k);
      const auto [a, i, b] = key;
      o.comp.emplace(key, matrix_from_json(m, o.seq.dim(a + b - 1), o.seq.dim(a) * o.seq.dim(b), o.field()));
    }
    auto r = validate_operad(o);
    if (!r.report.ok()) throw Error(ErrorCode::InvalidInput, "operad fails validation: " + r.report.violations.front());
    return o;
  });
}

Json to_json(const Cooperad& p) {
  Json j = to_json(p.seq);
  j["name"] = p.name;
  j["counit"] = p.seq.has(1) ? p.seq.at(1).complex().generator(p.counit).id : "";
  Json pd = Json::object();
  for (const auto& [k, m] : p.decomp) {
    const auto [a, i, b] = k;
    pd[key3(a, i, b)] = to_json(m);
  }
  j["partial_decompositions"] = pd;
  return j;
}

Cooperad cooperad_from_json(const Json& j) {
  return guarded("cooperad", [&] {
    Cooperad p;
    p.seq = sequence_from_json(j);
    p.name = j.value("name", std::string("cooperad"));
    if (!p.seq.has(1)) throw Error(ErrorCode::ParseError, "cooperad has no arity-1 component for the counit");
    p.counit = find_id(p.seq.at(1).complex(), j.at("counit").get<std::string>(), "cooperad counit");
    for (const auto& [k, m] : j.at("partial_decompositions").items()) {
      const auto key = parse_key3(k);
      const auto [a, i, b] = key;
      p.decomp.emplace(key, matrix_from_json(m, p.seq.dim(a) * p.seq.dim(b), p.seq.dim(a + b - 1), p.field()));
    }
    auto r = validate_cooperad(p);
    if (!r.report.ok()) throw Error(ErrorCode::InvalidInput, "cooperad fails validation: " + r.report.violations.front());
    return p;
  });
}

Json to_json(const Provenance& p) {
  return Json{{"construction", p.construction},
              {"source", p.source},
              {"caps", {{"max_arity", p.caps.max_arity}, {"max_degree", p.caps.max_degree}}}};
}

Json to_json(const Algebra& a) {
  const std::size_t d = a.carrier.dim();
  Json acts = Json::object();
  for (const auto& [n, table] : a.actions) {
    const std::size_t ops = a.operad->seq.dim(n), cols = ops * ipow(d, n);
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    for (const auto& [key, v] : table) {
      std::size_t col = key[0];
      for (std::size_t j = 1; j < key.size(); ++j) col = col * d + key[j];
      for (const auto& [r, x] : v) t.emplace_back(r, col, x);
    }
    acts[std::to_string(n)] = to_json(SparseMatrix::from_triplets(d, cols, t, a.field()));
  }
  return Json{{"name", a.name},
              {"operad", a.operad->name},
              {"carrier", to_json(a.carrier)},
              {"weights", a.weights},
              {"actions", acts}};
}

Algebra algebra_from_json(const Json& j, OperadPtr operad) {
  return guarded("algebra", [&] {
    Algebra a;
    a.name = j.value("name", std::string("algebra"));
    a.operad = std::move(operad);
    a.carrier = complex_from_json(j.at("carrier"));
    const std::size_t d = a.carrier.dim();
    a.weights = j.contains("weights") ? j.at("weights").get<std::vector<int>>() : std::vector<int>(d, 1);
    for (const auto& [ns, m] : j.at("actions").items()) {
      const int n = parse_int(ns, "arity");
      const std::size_t cols = a.operad->seq.dim(n) * ipow(d, n);
      const auto mat = matrix_from_json(m, d, cols, a.field());
      for (std::size_t c = 0; c < cols; ++c) {
        if (mat.col(c).empty()) continue;
        std::vector<std::size_t> key(static_cast<std::size_t>(n) + 1);
        std::size_t rest = c;
        for (int k = n; k >= 1; --k) {
          key[static_cast<std::size_t>(k)] = rest % d;
          rest /= d;
        }
        key[0] = rest;
        a.actions[n][key] = mat.col(c);
      }
    }
    auto r = validate_algebra(a);
    if (!r.ok()) throw Error(ErrorCode::InvalidInput, "algebra fails validation: " + r.violations.front());
    return a;
  });
}

Json to_json(const RightModule& m) {
  Json j = to_json(m.seq);
  j["name"] = m.name;
  j["operad"] = m.operad->name;
  Json act = Json::object();
  for (const auto& [k, mat] : m.act) {
    const auto [a, i, b] = k;
    act[key3(a, i, b)] = to_json(mat);
  }
  j["actions"] = act;
  return j;
}

Json to_json(const HomologyReport& h) {
  Json dims = Json::object();
  for (const auto& [d, x] : h.dims) dims[std::to_string(d)] = x;
  Json j{{"dims", dims}};
  j["exact_through"] = h.exact_through ? Json(*h.exact_through) : Json(nullptr);
  j["finiteness_certified"] = h.certification.finiteness_certified;
  j["connectivity"] = h.certification.connectivity ? Json(*h.certification.connectivity) : Json(nullptr);
  return j;
}

Json to_json(const KoszulReport& r) {
  Json tower = Json::array(), layers = Json::array();
  for (const auto& t : r.tower_tables)
    tower.push_back({{"k", t.k}, {"lhs", to_json(t.lhs)}, {"rhs", to_json(t.rhs)}, {"ok", t.ok}});
  for (const auto& l : r.layer_tables)
    layers.push_back({{"k", l.k},
                      {"fiber", to_json(l.fiber)},
                      {"tensor", to_json(l.tensor)},
                      {"cotensor", to_json(l.cotensor)},
                      {"exact", l.exact},
                      {"ok", l.ok}});
  Json j{{"operad", r.operad},
         {"module", r.module},
         {"algebra", r.algebra},
         {"caps", {{"max_arity", r.caps.max_arity}, {"max_degree", r.caps.max_degree}}},
         {"verdict", to_string(r.verdict)}};
  j["mismatch_at"] = r.mismatch_at ? Json{{"k", r.mismatch_at->first}, {"degree", r.mismatch_at->second}} : Json(nullptr);
  j["reason"] = r.reason;
  j["lhs_homology"] = to_json(r.lhs_homology);
  j["rhs_homology"] = to_json(r.rhs_homology);
  j["tower_tables"] = tower;
  j["layer_tables"] = layers;
  return j;
}

Json to_json(const DimComparison& d) {
  auto dims = [](const std::map<int, std::size_t>& m) {
    Json o = Json::object();
    for (const auto& [k, x] : m) o[std::to_string(k)] = x;
    return o;
  };
  return Json{{"lhs", dims(d.lhs)}, {"rhs", dims(d.rhs)}, {"ok", d.ok}};
}

Json to_json(const FiniteGroupoid& g) {
  // morphisms are renumbered in the order they appear in "hom"
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> hom;
  for (std::size_t m = 0; m < g.num_morphisms(); ++m) hom[{g.src[m], g.tgt[m]}].push_back(m);
  std::vector<std::size_t> renum(g.num_morphisms());
  std::size_t next = 0;
  Json h = Json::object();
  for (const auto& [ab, ms] : hom) {
    Json names = Json::array();
    for (std::size_t m : ms) {
      renum[m] = next++;
      names.push_back(g.names[m]);
    }
    h[std::to_string(ab.first) + "," + std::to_string(ab.second)] = names;
  }
  Json ids = Json::array();
  for (std::size_t i : g.identity) ids.push_back(renum[i]);
  Json comp = Json::object();
  for (const auto& [gf, c] : g.comp)
    comp[std::to_string(renum[gf.first]) + "," + std::to_string(renum[gf.second])] = renum[c];
  return Json{{"objects", g.objects}, {"hom", h}, {"identities", ids}, {"compose", comp}};
}

FiniteGroupoid groupoid_from_json(const Json& j) {
  return guarded("groupoid", [&] {
    FiniteGroupoid g;
    g.objects = j.at("objects").get<std::vector<std::string>>();
    for (const auto& [ab, names] : j.at("hom").items()) {
      const auto comma = ab.find(',');
      if (comma == std::string::npos) throw Error(ErrorCode::ParseError, "bad hom key '" + ab + "'");
      const int a = parse_int(ab.substr(0, comma), "object"), b = parse_int(ab.substr(comma + 1), "object");
      for (const auto& n : names) {
        g.names.push_back(n.get<std::string>());
        g.src.push_back(static_cast<std::size_t>(a));
        g.tgt.push_back(static_cast<std::size_t>(b));
      }
    }
    g.identity = j.at("identities").get<std::vector<std::size_t>>();
    for (const auto& [gf, c] : j.at("compose").items()) {
      const auto comma = gf.find(',');
      if (comma == std::string::npos) throw Error(ErrorCode::ParseError, "bad compose key '" + gf + "'");
      g.comp[{static_cast<std::size_t>(parse_int(gf.substr(0, comma), "morphism")),
              static_cast<std::size_t>(parse_int(gf.substr(comma + 1), "morphism"))}] = c.get<std::size_t>();
    }
    auto r = validate_groupoid(g);
    if (!r.ok()) throw Error(ErrorCode::InvalidInput, "groupoid fails validation: " + r.violations.front());
    return g;
  });
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace opk
