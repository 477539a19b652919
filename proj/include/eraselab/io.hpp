#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "eraselab/dnf.hpp"
#include "eraselab/net.hpp"
#include "eraselab/recovery.hpp"

#include "json.hpp"

namespace eraselab {

// Shortest round-trip decimal form of a double (via std::to_chars), so CSV
// output is byte-stable and parses back to the identical value.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

nlohmann::json formula_to_json(const Formula& f);
Formula formula_from_json(const nlohmann::json& j);
void save_formula(const std::filesystem::path& path, const Formula& f);
Formula load_formula(const std::filesystem::path& path);

// CSV columns: bit_0..bit_{n-1}, label, satisfying_clause (blank when absent).
void save_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset_csv(const std::filesystem::path& path);

struct SnapshotMeta {
    std::uint64_t seed = 0;
    std::int64_t step_count = 0;
};

nlohmann::json snapshot_to_json(const NetworkWeights& w, const SnapshotMeta& meta);
std::pair<NetworkWeights, SnapshotMeta> snapshot_from_json(const nlohmann::json& j);
void save_snapshot(const std::filesystem::path& path, const NetworkWeights& w,
                   const SnapshotMeta& meta);
std::pair<NetworkWeights, SnapshotMeta> load_snapshot(const std::filesystem::path& path);

// CSV columns: epoch, target_tpr, control_tpr, target_fpr, control_fpr.
void save_trace_csv(const std::filesystem::path& path, const RecoveryTrace& trace,
                    int first_epoch = 1);
RecoveryTrace load_trace_csv(const std::filesystem::path& path);

} // namespace eraselab
