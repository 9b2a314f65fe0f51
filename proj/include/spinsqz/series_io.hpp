#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spinsqz/collective.hpp"

namespace spinsqz {

/// Column names in file order. The error columns appear only for ensemble
/// series.
std::vector<std::string> series_columns(const TimeSeries& ts);

/// CSV with one row per time; n_sw is empty where not applicable, NaN is
/// written as "nan".
void write_series_csv(const TimeSeries& ts, const std::string& path);

/// Sidecar path: the CSV path with its extension replaced by ".json".
std::string sidecar_path(const std::string& csv_path);

/// Writes the CSV plus a JSON sidecar holding metadata and warnings.
void write_series(const TimeSeries& ts, const std::string& csv_path);

/// Reads a series CSV (and its sidecar when present). Throws ConfigError on a
/// missing required column, naming it.
TimeSeries read_series(const std::string& csv_path);

/// Plain numeric table with a header row.
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

}  // namespace spinsqz
