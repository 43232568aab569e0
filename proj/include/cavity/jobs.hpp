#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cavity/config.hpp"

namespace cavity {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;    // file stem
    std::string schema;  // e.g. cavity.transitions.v1
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// 12 significant digits; NaN renders as an empty field (CSV) or null (JSON).
std::string format_number(double v);
// RFC 4180 with a leading `#schema=` comment line.
std::string render_csv(const Table& t);
// Object with sorted keys: {"columns": [...], "rows": [...], "schema": "..."}.
std::string render_json(const Table& t);

std::uint64_t fnv1a64(const std::string& bytes);

struct ManifestEntry {
    std::string file;
    std::uint64_t hash;
    std::size_t bytes;
};

struct Manifest {
    std::string job;
    std::string directory;
    std::vector<ManifestEntry> files;
};

// Pure part of a job: the tables it would write.
std::vector<Table> compute_job(const JobConfig& cfg);
// Validates, computes, writes tables plus manifest.json into `out_dir` (default cfg.output_dir).
Manifest run_job(const JobConfig& cfg, const std::optional<std::string>& out_dir = std::nullopt);

}  // namespace cavity
