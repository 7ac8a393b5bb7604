#include "atvkit/law_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "atvkit/tolerances.hpp"

namespace atvkit {

using nlohmann::json;

namespace {

std::vector<std::string> split_prefix(const std::string& key) {
  std::vector<std::string> out;
  if (key.empty()) return out;
  size_t start = 0;
  while (true) {
    size_t slash = key.find('/', start);
    if (slash == std::string::npos) {
      out.push_back(key.substr(start));
      break;
    }
    out.push_back(key.substr(start, slash - start));
    start = slash + 1;
  }
  return out;
}

}  // namespace

ProcessLaw load_law(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("law document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("law document must be a JSON object");
  if (!doc.contains("horizon") || !doc["horizon"].is_number_integer()) {
    throw ParseError("field 'horizon' missing or not an integer");
  }
  const int T = doc["horizon"].get<int>();
  if (T < 1) throw ParseError("field 'horizon' must be >= 1");
  if (!doc.contains("spaces") || !doc["spaces"].is_array() ||
      static_cast<int>(doc["spaces"].size()) != T) {
    throw ParseError("field 'spaces' must be an array of T atom lists");
  }

  json values = json::array();
  if (doc.contains("values")) {
    values = doc["values"];
    if (!values.is_array() || static_cast<int>(values.size()) != T) {
      throw ParseError("field 'values' must be an array of T objects");
    }
  }

  SpaceList spaces;
  for (int t = 0; t < T; ++t) {
    const json& ids = doc["spaces"][static_cast<size_t>(t)];
    if (!ids.is_array() || ids.empty()) {
      throw ParseError("spaces[" + std::to_string(t) + "] must be a nonempty array");
    }
    std::vector<Atom> atoms;
    for (const json& id : ids) {
      if (!id.is_string()) {
        throw ParseError("spaces[" + std::to_string(t) + "] atom ids must be strings");
      }
      Atom atom{id.get<std::string>(), std::nullopt};
      if (!values.empty()) {
        const json& vt = values[static_cast<size_t>(t)];
        if (!vt.is_object()) {
          throw ParseError("values[" + std::to_string(t) + "] must be an object");
        }
        if (vt.contains(atom.id)) {
          if (!vt[atom.id].is_number()) {
            throw ParseError("values[" + std::to_string(t) + "]['" + atom.id +
                             "'] must be numeric");
          }
          atom.value = vt[atom.id].get<double>();
        }
      }
      atoms.push_back(std::move(atom));
    }
    try {
      spaces.emplace_back(std::move(atoms));
    } catch (const InvalidLaw& e) {
      throw ParseError("spaces[" + std::to_string(t) + "]: " + e.what());
    }
  }
  auto spaces_ptr = std::make_shared<const SpaceList>(std::move(spaces));

  if (!doc.contains("kernels") || !doc["kernels"].is_object()) {
    throw ParseError("field 'kernels' missing or not an object");
  }
  std::map<Path, std::vector<double>> kernels;
  for (const auto& [key, row_json] : doc["kernels"].items()) {
    std::vector<std::string> ids = split_prefix(key);
    if (static_cast<int>(ids.size()) >= T) {
      throw ParseError("kernels['" + key + "']: prefix length must be < horizon");
    }
    Path prefix;
    for (size_t t = 0; t < ids.size(); ++t) {
      int a = (*spaces_ptr)[t].index_of(ids[t]);
      if (a < 0) {
        throw ParseError("kernels['" + key + "']: unknown atom '" + ids[t] +
                         "' in coordinate " + std::to_string(t + 1));
      }
      prefix.push_back(a);
    }
    if (!row_json.is_object()) {
      throw ParseError("kernels['" + key + "'] must be an object");
    }
    const Space& sp = (*spaces_ptr)[prefix.size()];
    std::vector<double> row(static_cast<size_t>(sp.size()), 0.0);
    double sum = 0.0;
    for (const auto& [atom_id, prob_json] : row_json.items()) {
      int a = sp.index_of(atom_id);
      if (a < 0) {
        throw ParseError("kernels['" + key + "']: unknown child atom '" + atom_id + "'");
      }
      if (!prob_json.is_number()) {
        throw ParseError("kernels['" + key + "']['" + atom_id + "'] must be numeric");
      }
      double p = prob_json.get<double>();
      if (p < 0.0) {
        throw ParseError("kernels['" + key + "']['" + atom_id + "'] is negative");
      }
      row[static_cast<size_t>(a)] = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol::kParserProbSum) {
      std::ostringstream msg;
      msg << "kernels['" << key << "']: probabilities sum to " << sum
          << ", deviation exceeds " << tol::kParserProbSum;
      throw ParseError(msg.str());
    }
    for (double& p : row) p /= sum;
    if (!kernels.emplace(std::move(prefix), std::move(row)).second) {
      throw ParseError("kernels['" + key + "'] appears twice");
    }
  }

  try {
    return ProcessLaw(spaces_ptr, std::move(kernels));
  } catch (const Error& e) {
    throw ParseError(std::string("invalid law: ") + e.what());
  }
}

std::string save_law(const ProcessLaw& law) {
  json doc;
  doc["horizon"] = law.horizon();
  json spaces = json::array();
  json values = json::array();
  bool any_value = false;
  for (int t = 0; t < law.horizon(); ++t) {
    const Space& sp = (*law.spaces())[static_cast<size_t>(t)];
    json ids = json::array();
    json vt = json::object();
    for (int a = 0; a < sp.size(); ++a) {
      ids.push_back(sp.atom(a).id);
      if (sp.atom(a).value) {
        vt[sp.atom(a).id] = *sp.atom(a).value;
        any_value = true;
      }
    }
    spaces.push_back(std::move(ids));
    values.push_back(std::move(vt));
  }
  doc["spaces"] = std::move(spaces);
  if (any_value) doc["values"] = std::move(values);
  json kernels = json::object();
  for (const auto& [prefix, row] : law.kernels()) {
    const Space& sp = (*law.spaces())[prefix.size()];
    json row_json = json::object();
    for (int a = 0; a < sp.size(); ++a) {
      if (row[static_cast<size_t>(a)] > 0.0) {
        row_json[sp.atom(a).id] = row[static_cast<size_t>(a)];
      }
    }
    kernels[path_to_string(*law.spaces(), 0, prefix)] = std::move(row_json);
  }
  doc["kernels"] = std::move(kernels);
  return doc.dump(2) + "\n";
}

ProcessLaw load_law_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open law file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_law(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_law_file(const ProcessLaw& law, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write law file '" + path + "'");
  out << save_law(law);
}

}  // namespace atvkit
