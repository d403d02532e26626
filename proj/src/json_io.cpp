#include "cetrace/json_io.hpp"

#include <fstream>

#include "cetrace/error.hpp"

namespace cetrace {

Json histogram_to_json(const PixelHistogram& h) {
  Json j;
  j["bits"] = h.bits();
  j["values"] = std::vector<double>(h.values().begin(), h.values().end());
  return j;
}

PixelHistogram histogram_from_json(const Json& j) {
  try {
    return PixelHistogram(j.at("bits").get<int>(), j.at("values").get<std::vector<double>>());
  } catch (const Json::exception& e) {
    throw FormatError(std::string("histogram JSON: ") + e.what());
  }
}

Json curve_to_json(const TransformCurve& c) {
  Json j;
  j["n"] = c.top();
  j["phi"] = std::vector<int>(c.map().begin(), c.map().end());
  return j;
}

TransformCurve curve_from_json(const Json& j) {
  try {
    return TransformCurve(j.at("n").get<int>(), j.at("phi").get<std::vector<int>>());
  } catch (const Json::exception& e) {
    throw FormatError(std::string("curve JSON: ") + e.what());
  }
}

Json report_to_json(const SolverReport& r) {
  Json j;
  j["objective"] = r.objective;
  j["w1_term"] = r.w1_term;
  j["surrogate_term"] = r.surrogate_term;
  j["empty_bins"] = r.empty_bins;
  j["iterations"] = r.iterations;
  j["trace"] = r.trace;
  j["h_star"] = histogram_to_json(r.h_star);
  return j;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace cetrace
