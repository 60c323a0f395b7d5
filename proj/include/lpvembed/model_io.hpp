#pragma once

// JSON model files.
//
// NLFR file: {"format": "nlfr", "dims": {n_x, n_u, n_y, n_w, n_z}, "A", "Bw", "Bu",
//             "Cz", "Cy", "Dzu", "Dyw", "Dyu", optional "Dzw" (must be all zero),
//             "f": [expression strings]}
// LPV file:  the NLFR keys plus "ordering" (1-based), "c", "d", "y0",
//            "basis": [{r, i, Ak, Bk, Ck, Dk}], "schedule": [{r, i, kind, ...}]
// Matrices are arrays of rows. Numbers are written in shortest round-trip form,
// so load(save(m)) reproduces every entry bit for bit.

#include "lpvembed/model.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace lpvembed {

enum class ModelKind { Nlfr, Lpv };

ModelKind detect_kind(const nlohmann::json& doc);

NlfrModel nlfr_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const NlfrModel& model);

LpvModel lpv_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const LpvModel& model);

std::string serialize_nlfr(const NlfrModel& model);
NlfrModel deserialize_nlfr(std::string_view text);
std::string serialize_lpv(const LpvModel& model);
LpvModel deserialize_lpv(std::string_view text);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

NlfrModel load_nlfr(const std::string& path);
void save_nlfr(const NlfrModel& model, const std::string& path);
LpvModel load_lpv(const std::string& path);
void save_lpv(const LpvModel& model, const std::string& path);

}  // namespace lpvembed
