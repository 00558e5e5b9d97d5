#include "entrywise/json_io.hpp"

#include "entrywise/csv_io.hpp"
#include "entrywise/errors.hpp"

#include <cmath>
#include <fstream>

namespace entrywise {

Json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_to_15_digits(v);
}

Json bound_record(Index index, const EntryBound& b) {
  const bool finite = b.status == BoundStatus::Finite;
  Json j;
  j["index"] = index;
  j["status"] = std::string(to_string(b.status));
  j["lower"] = finite ? json_number(b.lower) : Json(nullptr);
  j["upper"] = finite ? json_number(b.upper) : Json(nullptr);
  j["midpoint"] = json_number(b.midpoint);
  j["half_width"] = finite ? json_number(b.half_width) : Json(nullptr);
  j["sensitivity"] = json_number(b.sensitivity);
  j["lambda"] = b.lambda ? json_number(*b.lambda) : Json(nullptr);
  return j;
}

Json to_json(const DiagEstimate& d) {
  Json j;
  j["samples"] = d.samples;
  j["used_samples"] = d.used_samples;
  j["flagged"] = d.flagged;
  j["seed"] = d.seed;
  j["probe"] = std::string(to_string(d.probe_kind));
  Json values = Json::array();
  for (Index i = 0; i < d.values.size(); ++i) values.push_back(json_number(d.values(i)));
  j["values"] = std::move(values);
  return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace entrywise
