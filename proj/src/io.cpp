#include "msb/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace msb {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValidationError(where + ": unknown key \"" + key + "\"");
  }
}

double number(const json& obj, const char* key, const std::string& where, double fallback,
              bool required) {
  if (!obj.contains(key)) {
    if (required) throw ValidationError(where + ": missing key \"" + key + "\"");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key + ": expected a number");
  return v.get<double>();
}

LevyAtomMeasure parse_measure(const json& obj, const char* key, const std::string& where) {
  LevyAtomMeasure m;
  if (!obj.contains(key)) return m;
  const json& arr = obj.at(key);
  const std::string path = where + "." + key;
  if (!arr.is_array()) throw ValidationError(path + ": expected an array of [z1, z2, w]");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& a = arr[i];
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!a.is_array() || a.size() != 3) throw ValidationError(at + ": expected [z1, z2, w]");
    if (!a[0].is_number() || !a[2].is_number()) throw ValidationError(at + ": z1 and w must be numbers");
    LevyAtom atom;
    atom.z1 = a[0].get<double>();
    atom.weight = a[2].get<double>();
    if (a[1].is_number_integer()) {
      atom.z2 = a[1].get<std::int64_t>();
    } else if (a[1].is_number_float() && std::floor(a[1].get<double>()) == a[1].get<double>()) {
      atom.z2 = static_cast<std::int64_t>(a[1].get<double>());
    } else {
      throw ValidationError(at + ": z2 must be an integer");
    }
    m.atoms.push_back(atom);
  }
  return m;
}

}  // namespace

MechanismFile parse_mechanism(const json& doc) {
  reject_unknown(doc, {"branching", "immigration"}, "mechanism");
  if (!doc.contains("branching")) throw ValidationError("mechanism: missing key \"branching\"");
  MechanismFile out;
  const json& b = doc.at("branching");
  reject_unknown(b, {"a11", "a21", "alpha", "n1", "n2"}, "branching");
  out.branching.a11 = number(b, "a11", "branching", 0.0, true);
  out.branching.a21 = number(b, "a21", "branching", 0.0, false);
  out.branching.alpha = number(b, "alpha", "branching", 0.0, false);
  out.branching.n1 = parse_measure(b, "n1", "branching");
  out.branching.n2 = parse_measure(b, "n2", "branching");
  if (doc.contains("immigration")) {
    const json& im = doc.at("immigration");
    reject_unknown(im, {"b", "m"}, "immigration");
    ImmigrationMechanism imm;
    imm.b = number(im, "b", "immigration", 0.0, false);
    imm.m = parse_measure(im, "m", "immigration");
    out.immigration = imm;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MechanismFile load_mechanism(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
  return parse_mechanism(doc);
}

json to_json(const LevyAtomMeasure& m) {
  json arr = json::array();
  for (const auto& a : m.atoms) arr.push_back({a.z1, a.z2, a.weight});
  return arr;
}

json to_json(const BranchingMechanism& mech) {
  return {{"a11", mech.a11}, {"a21", mech.a21}, {"alpha", mech.alpha},
          {"n1", to_json(mech.n1)}, {"n2", to_json(mech.n2)}};
}

json to_json(const ImmigrationMechanism& imm) { return {{"b", imm.b}, {"m", to_json(imm.m)}}; }

json to_json(const MechanismFile& file) {
  json doc = {{"branching", to_json(file.branching)}};
  if (file.immigration) doc["immigration"] = to_json(*file.immigration);
  return doc;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest(const json& canonical) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical.dump())));
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ValidationError("short write: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace msb
