#pragma once

#include "selfscore/orchestrator.hpp"
#include "selfscore/serialization.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace selfscore {

/// Gateway section of a config file. Keys: endpoint_url, model,
/// api_key_env, temperature, timeout_ms, max_retries, parallelism_bound.
/// `default_key_env` is used when api_key_env is absent; an empty string
/// disables the Authorization header.
GatewayConfig gateway_config_from_json(const Json& j, std::string_view default_key_env, double default_temperature);
Json to_json(const GatewayConfig& g);

/// Contents of run.json. Relative paths are resolved against the directory
/// holding the config file.
struct RunFile {
    RunConfig run;
    std::filesystem::path corpus = "corpus.jsonl";
    std::optional<std::filesystem::path> split;       // evaluate the eval pool of this split
    std::optional<std::int64_t> min_upvotes;          // otherwise filter the corpus by this
    std::optional<std::size_t> limit;                 // evaluate at most this many entries
    std::filesystem::path runs_dir = "runs";
    std::optional<std::filesystem::path> templates_dir;
};

RunFile parse_run_file(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunFile load_run_file(const std::filesystem::path& path);
/// Fully resolved configuration, as recorded in run manifests.
Json to_json(const RunFile& f);

/// Contents of an ingest config file; every field also has a CLI flag.
struct IngestFile {
    std::filesystem::path posts;
    std::filesystem::path out_dir = ".";
    std::int64_t min_upvotes = 100;
    std::optional<std::int64_t> rag_min_upvotes; // defaults to min_upvotes
    std::uint64_t seed = 0;
    bool extract = true;
    int parallelism = 4;
    GatewayConfig judge;
};

IngestFile parse_ingest_file(std::string_view json_text, const std::filesystem::path& base_dir = {});
IngestFile load_ingest_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace selfscore
