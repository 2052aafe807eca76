#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tca/pipeline.hpp"

namespace tca {

/// FNV-1a over a byte buffer; used to fingerprint report payloads inside
/// run-report files without embedding them.
uint64_t fnv1a64(const uint8_t* data, size_t size);
std::string fnv1a64_hex(const std::vector<uint8_t>& bytes);

/// Structured run-report document. Flat by construction, so emitting it
/// through the text encoder can never trip the limits this project models.
DocValue run_report_to_doc(const RunReport& report, const std::string& scenario_name);

/// Text encoding of run_report_to_doc — the bytes written to report files.
std::vector<uint8_t> run_report_bytes(const RunReport& report, const std::string& scenario_name);

/// Workload + pipeline snapshot recovered from a run-report document.
/// Reports are self-contained: re-running the snapshot reproduces the
/// recorded metrics exactly.
struct ParsedSnapshot {
  WorkloadSpec workload;
  PipelineConfig config;
};

std::optional<ParsedSnapshot> snapshot_from_doc(const DocValue& report_doc);

}  // namespace tca
