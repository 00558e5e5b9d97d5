#pragma once

#include "entrywise/bounds.hpp"
#include "entrywise/matfree.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace entrywise {

// Insertion-ordered so that serialized output is stable and readable.
using Json = nlohmann::ordered_json;

// Rounded to 15 significant digits; non-finite values become null.
Json json_number(double v);

// {index, status, lower, upper, midpoint, half_width, sensitivity, lambda}.
// lower/upper are null unless the status is finite.
Json bound_record(Index index, const EntryBound& b);

Json to_json(const DiagEstimate& d);

// Two-space indented dump with a trailing newline.
std::string dump_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);

}  // namespace entrywise
