#include "cst/io.hpp"

#include <sstream>

namespace cst {

using nlohmann::json;

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

json ArtifactHeader::to_json() const {
    return json{{"_schema", schema},
                {"config_hash", config_hash},
                {"seed", seed},
                {"version", version},
                {"extra", extra}};
}

ArtifactHeader ArtifactHeader::from_json(const json& j) {
    ArtifactHeader h;
    j.at("_schema").get_to(h.schema);
    j.at("config_hash").get_to(h.config_hash);
    j.at("seed").get_to(h.seed);
    j.at("version").get_to(h.version);
    if (j.contains("extra")) h.extra = j.at("extra");
    return h;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, const ArtifactHeader& header) {
    out_.open(path);
    if (!out_) throw DataError("cannot open for writing: " + path.string());
    out_ << header.to_json().dump() << "\n";
}

void JsonlWriter::write(const json& record) { out_ << record.dump() << "\n"; }

void JsonlWriter::close() { out_.close(); }

JsonlReader::JsonlReader(const std::filesystem::path& path, const std::string& expected_schema) {
    in_.open(path);
    if (!in_) throw DataError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in_, line)) throw DataError("empty artifact file: " + path.string());
    json j;
    try {
        j = json::parse(line);
        header_ = ArtifactHeader::from_json(j);
    } catch (const json::exception& e) {
        throw DataError("malformed artifact header in " + path.string() + ": " + e.what());
    }
    if (!expected_schema.empty() && header_.schema != expected_schema)
        throw DataError("artifact schema mismatch in " + path.string() + ": expected " +
                        expected_schema + ", found " + header_.schema);
}

std::optional<json> JsonlReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        if (line.empty()) continue;
        try {
            return json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed JSONL record: ") + e.what());
        }
    }
    return std::nullopt;
}

std::vector<json> read_jsonl(const std::filesystem::path& path, const std::string& expected_schema,
                             ArtifactHeader* header_out) {
    JsonlReader reader(path, expected_schema);
    if (header_out) *header_out = reader.header();
    std::vector<json> records;
    while (auto r = reader.next()) records.push_back(std::move(*r));
    return records;
}

void write_jsonl(const std::filesystem::path& path, const ArtifactHeader& header,
                 const std::vector<json>& records) {
    JsonlWriter writer(path, header);
    for (const auto& r : records) writer.write(r);
    writer.close();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << content;
}

}  // namespace cst
