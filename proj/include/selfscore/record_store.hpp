#pragma once

#include "selfscore/orchestrator.hpp"

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace selfscore {

/// One JSONL line: {"crc32":"<8 hex digits>","record":<record>}\n, the
/// checksum taken over the exact bytes of the record value.
std::string encode_record_line(const InteractionResult& result);

/// Returns nullopt (with the reason in `why`) for a malformed line or a
/// checksum mismatch.
std::optional<InteractionResult> decode_record_line(std::string_view line, std::string* why = nullptr);

/// Append-only JSONL file. Each record is written with a single write(2) on
/// an O_APPEND descriptor while holding an exclusive flock, so concurrent
/// writers in other processes never interleave partial lines.
class RecordStore {
public:
    explicit RecordStore(std::filesystem::path path);
    ~RecordStore();
    RecordStore(const RecordStore&) = delete;
    RecordStore& operator=(const RecordStore&) = delete;

    void append(const InteractionResult& result);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
    std::mutex mu_;
};

void persist_result(const InteractionResult& result, RecordStore& sink);

struct LoadedRecords {
    std::vector<InteractionResult> records;
    std::size_t skipped = 0;
};

/// Reads a record file. Corrupt lines are skipped and reported on `warnings`.
LoadedRecords load_records(const std::filesystem::path& path, std::ostream* warnings = nullptr);

/// `<dir>/<run_label>_<YYYYMMDDTHHMMSSZ>.jsonl` in UTC.
std::filesystem::path record_file_path(const std::filesystem::path& dir, std::string_view run_label,
                                       std::chrono::system_clock::time_point when);

/// Fields left empty keep each record's stored value.
struct RecalcOverrides {
    std::optional<WeightVector> weights;
    std::optional<CostModel> cost_model;
    std::optional<bool> clamp_quality;
};

/// Recomputes scores and per-turn costs from stored data, without any
/// gateway calls. Failed records pass through unchanged.
std::vector<InteractionResult> recalculate(std::span<const InteractionResult> records,
                                           const RecalcOverrides& overrides = {});

} // namespace selfscore
