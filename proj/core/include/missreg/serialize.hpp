#pragma once

#include "missreg/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace missreg {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const MaskedMatrix& x);
MaskedMatrix masked_matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AdaptiveLinearModel& m);
AdaptiveLinearModel adaptive_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Downstream& d);
Downstream downstream_from_json(const nlohmann::json& j);

/// Complete model document for a fitted pipeline; round-trips bit-exactly.
nlohmann::json to_json(const Pipeline& p);
Pipeline pipeline_from_json(const nlohmann::json& j);

void save_pipeline(const Pipeline& p, const std::string& path);
Pipeline load_pipeline(const std::string& path);

}  // namespace missreg
