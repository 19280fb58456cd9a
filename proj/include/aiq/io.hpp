#pragma once

#include <string>

#include <json.hpp>

#include "aiq/cbnorm.hpp"
#include "aiq/reconstruction.hpp"

namespace aiq {

using json = nlohmann::json;

inline constexpr const char* kChannelFormat = "aiq-channel/1";
inline constexpr const char* kReportFormat = "aiq-report/1";
inline constexpr const char* kToolVersion = "0.1.0";

// Complex numbers are [re, im]; matrices are row-major nested arrays.
json to_json(const Mat& m);
Mat mat_from_json(const json& j);

/// {"format", "picture", "dim_in", "dim_out", "convention", "choi", "source"}.
json channel_to_json(const Channel& ch, const json& source = json::object());
/// ParseError on a malformed document or wrong format tag.
Channel channel_from_json(const json& j);

json to_json(const NormCertificate& c);
json to_json(const ValidityFlags& f);
json to_json(const BlockSpec& s);
BlockSpec spec_from_json(const json& j);

/// Parses "(2,2),(1,3)" into pairs and "3,2,1" or "(3,2,1)" into sizes. BadSpec on garbage.
std::vector<std::pair<int, int>> parse_pairs(const std::string& text);
std::vector<int> parse_sizes(const std::string& text);

/// FNV-1a over the compact dump, as 16 hex digits.
std::string digest(const json& j);

std::string read_file(const std::string& path);
json read_json(const std::string& path);
/// Writes to path.tmp and renames it over path.
void write_file_atomic(const std::string& path, const std::string& text);
void write_json_atomic(const std::string& path, const json& j);

}  // namespace aiq
