#include "vmrd/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vmrd/errors.hpp"

namespace vmrd {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError(where + ": missing field \"" + key + "\"");
  }
  return obj.at(key);
}

template <typename T>
std::vector<T> as_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<T> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& e = j[k];
    if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer()) {
        throw ValidationError(where + "[" + std::to_string(k) + "]: expected an integer");
      }
    } else {
      if (!e.is_number()) {
        throw ValidationError(where + "[" + std::to_string(k) + "]: expected a number");
      }
    }
    out.push_back(e.get<T>());
  }
  return out;
}

Eigen::VectorXd as_vector(const json& j, const std::string& where) {
  auto v = as_array<double>(j, where);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json to_json_array(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

ProblemSpec parse_problem(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("problem file: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("problem file: top level must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const char* known[] = {"L", "alphabet_sizes", "source", "vending", "distortion", "cost"};
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return it.key() == k; }) == std::end(known)) {
      throw ValidationError("problem file: unknown field \"" + it.key() + "\"");
    }
  }

  ProblemSpec spec;
  const auto& L = field(doc, "L", "problem file");
  if (!L.is_number_integer()) throw ValidationError("L: expected an integer");
  spec.alphabets.L = L.get<int>();
  const auto& sizes = field(doc, "alphabet_sizes", "problem file");
  spec.alphabets.sizes_x = as_array<int>(field(sizes, "X", "alphabet_sizes"), "alphabet_sizes.X");
  spec.alphabets.sizes_a = as_array<int>(field(sizes, "A", "alphabet_sizes"), "alphabet_sizes.A");
  spec.alphabets.sizes_y = as_array<int>(field(sizes, "Y", "alphabet_sizes"), "alphabet_sizes.Y");
  spec.alphabets.sizes_xhat =
      as_array<int>(field(sizes, "Xhat", "alphabet_sizes"), "alphabet_sizes.Xhat");

  const auto& vending = field(doc, "vending", "problem file");
  const auto& mode = field(vending, "mode", "vending");
  if (!mode.is_string()) throw ValidationError("vending.mode: expected a string");
  const auto& source = field(doc, "source", "problem file");

  if (mode == "kernel") {
    KernelSideInfo k;
    const auto& kernels = field(vending, "kernels", "vending");
    if (!kernels.is_array()) throw ValidationError("vending.kernels: expected an array");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      k.tables.push_back(as_vector(kernels[i], "vending.kernels[" + std::to_string(i) + "]"));
    }
    spec.side_info = std::move(k);
    spec.source.px = as_vector(field(source, "px", "source"), "source.px");
  } else if (mode == "functional") {
    FunctionalSideInfo fn;
    const auto& zs = field(vending, "z_size", "vending");
    if (!zs.is_number_integer()) throw ValidationError("vending.z_size: expected an integer");
    fn.z_size = zs.get<int>();
    fn.pz = as_vector(field(vending, "pz", "vending"), "vending.pz");
    const auto& f = field(vending, "f", "vending");
    const auto& g = field(vending, "g", "vending");
    if (!f.is_array()) throw ValidationError("vending.f: expected an array");
    if (!g.is_array()) throw ValidationError("vending.g: expected an array");
    for (std::size_t i = 0; i < f.size(); ++i) {
      fn.f.push_back(as_array<int>(f[i], "vending.f[" + std::to_string(i) + "]"));
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      fn.g.push_back(as_array<int>(g[i], "vending.g[" + std::to_string(i) + "]"));
    }
    if (source.is_object() && source.contains("px")) {
      spec.source.px = as_vector(source.at("px"), "source.px");
    } else {
      spec.alphabets.check();
      spec.source = compile_functional(fn.pz, fn.f, fn.g, spec.alphabets).source;
    }
    spec.side_info = std::move(fn);
  } else {
    throw ValidationError("vending.mode: expected \"kernel\" or \"functional\"");
  }

  spec.metrics.d = as_vector(field(doc, "distortion", "problem file"), "distortion");
  spec.metrics.gamma = as_vector(field(doc, "cost", "problem file"), "cost");
  return spec;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open problem file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ProblemSpec spec = parse_problem(buf.str());
  require_valid(spec);
  return spec;
}

std::string problem_to_json(const ProblemSpec& spec) {
  json doc;
  doc["L"] = spec.alphabets.L;
  doc["alphabet_sizes"] = {{"X", spec.alphabets.sizes_x},
                           {"A", spec.alphabets.sizes_a},
                           {"Y", spec.alphabets.sizes_y},
                           {"Xhat", spec.alphabets.sizes_xhat}};
  doc["source"] = {{"px", to_json_array(spec.source.px)}};
  if (const auto* k = std::get_if<KernelSideInfo>(&spec.side_info)) {
    json tables = json::array();
    for (const auto& t : k->tables) tables.push_back(to_json_array(t));
    doc["vending"] = {{"mode", "kernel"}, {"kernels", tables}};
  } else {
    const auto& fn = spec.functional();
    doc["vending"] = {{"mode", "functional"},
                      {"z_size", fn.z_size},
                      {"pz", to_json_array(fn.pz)},
                      {"f", fn.f},
                      {"g", fn.g}};
  }
  doc["distortion"] = to_json_array(spec.metrics.d);
  doc["cost"] = to_json_array(spec.metrics.gamma);
  return doc.dump(2) + "\n";
}

void save_problem(const ProblemSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << problem_to_json(spec);
}

}  // namespace vmrd
