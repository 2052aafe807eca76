#pragma once

#include <optional>
#include <string>

#include "tca/pipeline.hpp"

namespace tca {

std::string to_string(OverflowPolicy policy);
std::string to_string(AggregationMode mode);
std::string to_string(BreachPolicy policy);
std::string to_string(EncodingKind kind);
std::string to_string(StoreMode mode);

std::optional<OverflowPolicy> parse_overflow_policy(const std::string& s);
std::optional<AggregationMode> parse_aggregation_mode(const std::string& s);
std::optional<BreachPolicy> parse_breach_policy(const std::string& s);
std::optional<EncodingKind> parse_encoding_kind(const std::string& s);
std::optional<StoreMode> parse_store_mode(const std::string& s);
std::optional<Verdict> parse_verdict(const std::string& s);
std::optional<ReportIntegrity> parse_report_integrity(const std::string& s);

}  // namespace tca
