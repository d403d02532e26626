#pragma once

#include <filesystem>

#include <json.hpp>

#include "cetrace/histogram.hpp"
#include "cetrace/solver.hpp"
#include "cetrace/transforms.hpp"

namespace cetrace {

using Json = nlohmann::ordered_json;

Json histogram_to_json(const PixelHistogram& h);
/// Expects {"bits": int, "values": [...]}; throws FormatError on shape errors.
PixelHistogram histogram_from_json(const Json& j);

Json curve_to_json(const TransformCurve& c);
/// Expects {"n": int, "phi": [...]}.
TransformCurve curve_from_json(const Json& j);

Json report_to_json(const SolverReport& r);

/// Throws IoError if unreadable, FormatError if not valid JSON.
Json read_json(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace cetrace
