#ifndef FDBREAK_REPORT_JSON_HPP
#define FDBREAK_REPORT_JSON_HPP

#include <json.hpp>

#include "fdbreak/csv_io.hpp"
#include "fdbreak/detect.hpp"

namespace fdbreak {

/// Stable snake_case JSON schema; key order is fixed so identical runs
/// serialize to identical bytes.
nlohmann::ordered_json to_json(const PipelineConfig& config);
nlohmann::ordered_json to_json(const DetectionReport& report);
nlohmann::ordered_json to_json(const JumpBand& band);

/// Input provenance block (path plus the x rescale map when one was applied).
nlohmann::ordered_json input_block(const std::string& path, const IngestResult& ingest);

}  // namespace fdbreak

#endif
