#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hermit/unital.hpp"
#include "json.hpp"

namespace hermit::pipeline {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCertificateFormat = "hermit-classicality-certificate";

enum class Mode { exhaustive, sampled };
const char* to_string(Mode m);
/// Throws std::invalid_argument for anything but "exhaustive" or "sampled".
Mode parse_mode(const std::string& s);

struct PipelineConfig {
    int order = 4;
    int line = -1;  // base line, -1 for the least id
    Mode mode = Mode::exhaustive;
    std::uint32_t seed = 0;
    bool full_flock = false;  // secant flock condition at every z_1
    bool timings = false;     // runtimes in reports (breaks byte equality)
    int triangle_samples = 1000;
    int sample_size = 64;  // points, lines or pairs per sampled stage
    int triangle_sample = 50;
};

/// Throws std::invalid_argument unless the order is even with 2 <= n <= 8
/// and the sample sizes are positive.
void validate(const PipelineConfig& c);

enum class Status { pass, fail, skipped, outside_hypotheses };
const char* to_string(Status s);

struct StageResult {
    std::string id;
    std::string anchor;
    Status status = Status::skipped;
    bool checks_passed = false;  // the computed outcome, also for outside-hypotheses rows
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json witnesses = nlohmann::json::object();
    std::vector<std::string> notes;
    bool sampled = false;
    double runtime_ms = 0;
};

struct Report {
    std::string command;
    nlohmann::json header = nlohmann::json::object();  // order, mode, seed, input digest
    std::vector<StageResult> stages;
    std::string verdict;  // "pass", "fail" or "outside-hypotheses"

    const StageResult* find(const std::string& id) const;
    const StageResult* first_failure() const;
    int exit_code() const { return verdict == "fail" ? 1 : 0; }
    nlohmann::json to_json(bool timings) const;
    /// Fixed-width table; identical for identical inputs unless timings are on.
    std::string to_text(bool timings) const;
};

Report report_from_json(const nlohmann::json& j);

/// Stage ids accepted by run_verify, in execution order.
const std::vector<std::string>& verify_checks();

/// Runs the selected checks (empty = all) on any loaded design; throws
/// std::invalid_argument for unknown ids.
Report run_verify(const unital::Unital& u, const std::vector<std::string>& checks, const PipelineConfig& c);

struct Certificate {
    Report report;
    nlohmann::json json;
};

/// The whole chain from the conditions to the embedding in PG(2,n^2). Stage
/// failures end the chain; the remaining rows are marked skipped.
Certificate certify_classical(const unital::Unital& u, const PipelineConfig& c);

std::string sha256_hex(const std::string& data);
/// SHA-256 of the compact serialization.
std::string digest_of(const nlohmann::json& j);
/// Digest over the certificate without its "certificate_digest" member.
std::string certificate_digest(const nlohmann::json& cert);

/// Field tables and PG(2,n^2) with the unital embedding.
nlohmann::json pg_tables(int n);

}  // namespace hermit::pipeline
