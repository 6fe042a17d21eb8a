#ifndef HOLOFG_IO_HPP
#define HOLOFG_IO_HPP

#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "holofg/classical.hpp"
#include "holofg/quantum.hpp"
#include "holofg/transform.hpp"

namespace holofg {

using GraphVariant = std::variant<ClassicalFactorGraph, QuantumFactorGraph>;
using TransformVariant =
    std::variant<ClassicalTransformSet, QuantumTransformSet>;

// --- graph documents ---

nlohmann::json graph_to_json(const ClassicalFactorGraph& g);
nlohmann::json graph_to_json(const QuantumFactorGraph& g);
GraphVariant parse_graph_json(const nlohmann::json& doc,
                              const Tolerances& tol = {});

// --- transform documents ---

nlohmann::json transforms_to_json(const ClassicalTransformSet& ts);
nlohmann::json transforms_to_json(const QuantumTransformSet& ts);
TransformVariant parse_transforms_json(const nlohmann::json& doc);

// --- transformed-graph documents ---

nlohmann::json transformed_to_json(const TransformedClassicalGraph& t);
nlohmann::json transformed_to_json(const TransformedQuantumGraph& t);

// --- report documents ---

struct ReportMeta {
  std::optional<std::uint64_t> seed;
  double wall_clock_seconds = 0.0;
  Tolerances tolerances;
};

nlohmann::json report_to_json(const HolantReport& report,
                              const ReportMeta& meta);

// --- files ---

// Throws ParseError on IO failure or malformed JSON (with byte position).
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& doc);

GraphVariant parse_graph(const std::string& path, const Tolerances& tol = {});
TransformVariant parse_transforms(const std::string& path);

}  // namespace holofg

#endif
