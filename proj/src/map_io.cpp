#include "greenlab/map_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace greenlab {

using nlohmann::json;

static std::int64_t get_int(const json& term, const char* key, std::int64_t dflt,
                            bool required) {
  if (!term.contains(key)) {
    if (required) throw UsageError(std::string("map file: term missing \"") + key + "\"");
    return dflt;
  }
  const json& v = term.at(key);
  if (!v.is_number_integer())
    throw UsageError(std::string("map file: \"") + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

RationalMap map_from_json(const json& j) {
  if (!j.is_object() || !j.contains("space") || !j.contains("components"))
    throw UsageError("map file: need \"space\" and \"components\"");
  ModelSpace space = ModelSpace::make(space_kind_from_string(j.at("space").get<std::string>()));

  const json& comps = j.at("components");
  if (!comps.is_array() || static_cast<int>(comps.size()) != space.nhomog) {
    std::ostringstream os;
    os << "map file: expected " << space.nhomog << " component groups for "
       << to_string(space.kind) << ", got " << comps.size();
    throw UsageError(os.str());
  }

  std::vector<Poly> polys;
  for (const json& comp : comps) {
    if (!comp.is_array() || comp.empty())
      throw UsageError("map file: each component is a non-empty array of terms");
    Poly p(space.nhomog);
    for (const json& term : comp) {
      const json& ex = term.at("exponents");
      if (!ex.is_array() || static_cast<int>(ex.size()) != space.nhomog)
        throw UsageError("map file: \"exponents\" length must match the coordinate count");
      Expo e{};
      for (int v = 0; v < space.nhomog; ++v) {
        e[v] = ex.at(v).get<std::int64_t>();
        if (e[v] < 0) throw UsageError("map file: negative exponent");
      }
      std::int64_t re_num = get_int(term, "coeff_re_num", 0, true);
      std::int64_t re_den = get_int(term, "coeff_re_den", 1, false);
      std::int64_t im_num = get_int(term, "coeff_im_num", 0, false);
      std::int64_t im_den = get_int(term, "coeff_im_den", 1, false);
      if (re_den == 0 || im_den == 0) throw UsageError("map file: zero denominator");
      GaussRational c(Rational(re_num) / re_den, Rational(im_num) / im_den);
      p.add_term(e, c);
    }
    polys.push_back(std::move(p));
  }
  try {
    return make_map(space, std::move(polys));
  } catch (const DomainError& e) {
    throw UsageError(std::string("map file: ") + e.what());
  }
}

RationalMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open map file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("map file " + path + ": " + e.what());
  }
  return map_from_json(j);
}

static json rational_num_den(const Rational& r, const char* num_key, const char* den_key,
                             json& term) {
  term[num_key] = static_cast<std::int64_t>(boost::multiprecision::numerator(r));
  term[den_key] = static_cast<std::int64_t>(boost::multiprecision::denominator(r));
  return term;
}

json map_to_json(const RationalMap& f) {
  json comps = json::array();
  for (const Poly& p : f.comps) {
    json terms = json::array();
    for (const auto& [e, c] : p.terms()) {
      json term;
      json ex = json::array();
      for (int v = 0; v < f.space.nhomog; ++v) ex.push_back(e[v]);
      term["exponents"] = ex;
      rational_num_den(c.re, "coeff_re_num", "coeff_re_den", term);
      rational_num_den(c.im, "coeff_im_num", "coeff_im_den", term);
      terms.push_back(term);
    }
    comps.push_back(terms);
  }
  return json{{"space", to_string(f.space.kind)}, {"components", comps}};
}

std::string map_hash(const RationalMap& f) {
  // canonical text: Poly::terms() is an ordered map and make_map gcd-reduces,
  // so proportional inputs hash equal.
  std::ostringstream os;
  os << to_string(f.space.kind);
  for (const Poly& p : f.comps) {
    os << "|";
    for (const auto& [e, c] : p.terms()) {
      for (int v = 0; v < f.space.nhomog; ++v) os << e[v] << ",";
      os << c.re << "+" << c.im << "i;";
    }
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace greenlab
