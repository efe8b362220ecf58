#include "selfscore/record_store.hpp"

#include "selfscore/error.hpp"
#include "selfscore/serialization.hpp"

#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace selfscore {
namespace {

constexpr std::string_view kPrefix = "{\"crc32\":\"";
constexpr std::string_view kMiddle = "\",\"record\":";

std::string crc_hex(std::string_view bytes) {
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

std::string errno_text() { return std::strerror(errno); }

} // namespace

std::string encode_record_line(const InteractionResult& result) {
    const std::string record = to_json(result).dump();
    std::string line;
    line.reserve(record.size() + 40);
    line += kPrefix;
    line += crc_hex(record);
    line += kMiddle;
    line += record;
    line += "}\n";
    return line;
}

std::optional<InteractionResult> decode_record_line(std::string_view line, std::string* why) {
    auto fail = [&](const std::string& reason) -> std::optional<InteractionResult> {
        if (why != nullptr) *why = reason;
        return std::nullopt;
    };
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    if (!line.starts_with(kPrefix) || line.size() < kPrefix.size() + 8 + kMiddle.size() + 1 || !line.ends_with("}")) {
        return fail("not a record line");
    }
    const auto stored = line.substr(kPrefix.size(), 8);
    if (line.substr(kPrefix.size() + 8, kMiddle.size()) != kMiddle) return fail("not a record line");
    const auto record = line.substr(kPrefix.size() + 8 + kMiddle.size());
    const auto body = record.substr(0, record.size() - 1);
    if (crc_hex(body) != stored) return fail("checksum mismatch");
    const auto doc = Json::parse(body, nullptr, false);
    if (doc.is_discarded()) return fail("record is not valid JSON");
    try {
        return result_from_json(doc);
    } catch (const Error& e) {
        return fail(e.what());
    }
}

RecordStore::RecordStore(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path_.parent_path().string() + ": " + ec.message());
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open " + path_.string() + ": " + errno_text());
}

RecordStore::~RecordStore() {
    if (fd_ >= 0) ::close(fd_);
}

void RecordStore::append(const InteractionResult& result) {
    const std::string line = encode_record_line(result);
    std::lock_guard lock(mu_);
    if (::flock(fd_, LOCK_EX) != 0) throw IoError("cannot lock " + path_.string() + ": " + errno_text());
    std::size_t written = 0;
    std::string failure;
    while (written < line.size()) {
        const auto n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            failure = errno_text();
            break;
        }
        written += static_cast<std::size_t>(n);
    }
    ::flock(fd_, LOCK_UN);
    if (!failure.empty()) throw IoError("write to " + path_.string() + " failed: " + failure);
}

void persist_result(const InteractionResult& result, RecordStore& sink) { sink.append(result); }

LoadedRecords load_records(const std::filesystem::path& path, std::ostream* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    LoadedRecords out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string why;
        if (auto r = decode_record_line(line, &why)) {
            out.records.push_back(std::move(*r));
        } else {
            ++out.skipped;
            if (warnings != nullptr) {
                *warnings << "warning: " << path.string() << ":" << line_no << ": skipped record (" << why << ")\n";
            }
        }
    }
    return out;
}

std::filesystem::path record_file_path(const std::filesystem::path& dir, std::string_view run_label,
                                       std::chrono::system_clock::time_point when) {
    const std::time_t t = std::chrono::system_clock::to_time_t(when);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[20];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    return dir / (std::string(run_label) + "_" + stamp + ".jsonl");
}

std::vector<InteractionResult> recalculate(std::span<const InteractionResult> records,
                                           const RecalcOverrides& overrides) {
    std::vector<InteractionResult> out(records.begin(), records.end());
    for (auto& r : out) {
        if (r.terminated_by == Termination::failed) continue;
        ScoringOptions opts = r.scoring;
        if (overrides.weights) opts.weights = *overrides.weights;
        if (overrides.cost_model) opts.cost_model = overrides.cost_model;
        if (overrides.clamp_quality) opts.clamp_quality = *overrides.clamp_quality;
        for (auto& t : r.turns) {
            t.turn_cost.reset();
            if (opts.cost_model) t.turn_cost = turn_cost(*opts.cost_model, t.input_tokens, t.output_tokens);
        }
        r.score = rescore(r, opts);
        r.scoring = opts;
    }
    return out;
}

} // namespace selfscore
