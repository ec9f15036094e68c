#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cst {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h);

// Reproducibility header written as the first line of every JSONL artifact.
struct ArtifactHeader {
    std::string schema;      // e.g. "cst.scenes.v1"
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = "0.1.0";
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
    static ArtifactHeader from_json(const nlohmann::json& j);
};

class JsonlWriter {
public:
    JsonlWriter(const std::filesystem::path& path, const ArtifactHeader& header);
    void write(const nlohmann::json& record);
    void close();

private:
    std::ofstream out_;
};

class JsonlReader {
public:
    // Opens the file and validates the header's schema tag.
    JsonlReader(const std::filesystem::path& path, const std::string& expected_schema);
    const ArtifactHeader& header() const { return header_; }
    std::optional<nlohmann::json> next();

private:
    std::ifstream in_;
    ArtifactHeader header_;
};

// Convenience wrappers for whole-file IO.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path,
                                       const std::string& expected_schema,
                                       ArtifactHeader* header_out = nullptr);
void write_jsonl(const std::filesystem::path& path, const ArtifactHeader& header,
                 const std::vector<nlohmann::json>& records);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace cst
