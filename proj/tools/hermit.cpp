#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "hermit/pipeline.hpp"
#include "hermit/unital.hpp"

namespace fs = std::filesystem;
using namespace hermit;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

unital::Unital load_unital(const std::string& path)
{
    const auto j = read_json(path);
    try {
        return unital::unital_from_json(j);
    } catch (const std::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

int order_to_degree(int n)
{
    pipeline::PipelineConfig c;
    c.order = n;
    pipeline::validate(c);
    int e = 0;
    while ((1 << e) < n) ++e;
    return e;
}

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hermit: classical unitals of even order and their classicality certificates"};
    app.require_subcommand(1);

    int order = 4;
    std::string out_dir = ".";
    std::string input;
    std::string mode = "exhaustive";
    std::uint32_t seed = 0;
    std::string line = "auto";
    std::string checks;
    int mutate = -1;
    int samples = 0;
    bool full_flock = false;
    bool timings = false;

    auto* build = app.add_subcommand("build", "write the classical unital of order n and the PG(2,n^2) tables");
    build->add_option("--order", order, "even order n in {2, 4, 8}")->required();
    build->add_option("--out", out_dir, "output directory");
    build->add_option("--mutate", mutate, "also write a copy with one line damaged, from this seed");

    auto* verify = app.add_subcommand("verify", "run the condition checks on any design file");
    verify->add_option("input", input, "unital JSON")->required();
    verify->add_option("--checks", checks, "comma separated subset of: design, onan, condition-II, "
                                           "inversive-planes, special-spreads, condition-P, triangles, triply-ruled");
    verify->add_option("--mode", mode, "exhaustive or sampled");
    verify->add_option("--seed", seed, "seed for sampled stages");
    verify->add_option("--samples", samples, "sample size per sampled stage");
    verify->add_option("--out", out_dir, "directory for verify-report.json and .txt");

    auto* certify = app.add_subcommand("certify-classical", "run the whole pipeline and write a certificate");
    certify->add_option("input", input, "unital JSON; the classical unital of --order when omitted");
    certify->add_option("--order", order, "even order n in {2, 4, 8}");
    certify->add_option("--line", line, "base line id or auto");
    certify->add_option("--mode", mode, "exhaustive or sampled");
    certify->add_option("--seed", seed, "seed for sampled stages");
    certify->add_option("--samples", samples, "sample size per sampled stage");
    certify->add_option("--out", out_dir, "output directory");
    certify->add_flag("--full-flock", full_flock, "check the secant flock condition at every z_1");
    certify->add_flag("--timings", timings, "record stage runtimes");

    std::string cert_path;
    std::string export_out;
    auto* exp = app.add_subcommand("export-certificate", "check a certificate digest and print its report");
    exp->add_option("certificate", cert_path, "certificate JSON")->required();
    exp->add_option("--out", export_out, "write the text report to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kInputError;
    }

    try {
        pipeline::PipelineConfig cfg;
        cfg.mode = pipeline::parse_mode(mode);
        cfg.seed = seed;
        cfg.full_flock = full_flock;
        cfg.timings = timings;
        if (samples > 0) cfg.sample_size = cfg.triangle_sample = samples;

        if (*build) {
            const int e = order_to_degree(order);
            const auto h = unital::hermitian_unital(e);
            const fs::path dir(out_dir);
            const auto name = "unital-" + std::to_string(order) + ".json";
            write_file(dir / name, unital::to_json(h.unital).dump() + "\n");
            write_file(dir / ("pg-tables-" + std::to_string(order) + ".json"), pipeline::pg_tables(order).dump() + "\n");
            std::cout << "wrote " << (dir / name).string() << " (" << h.unital.v() << " points, " << h.unital.b()
                      << " lines)\n";
            if (mutate >= 0) {
                const auto bad = unital::single_line_mutation(h.unital, static_cast<std::uint32_t>(mutate));
                const auto mname = "unital-" + std::to_string(order) + "-mutated.json";
                write_file(dir / mname, unital::to_json(bad).dump() + "\n");
                std::cout << "wrote " << (dir / mname).string() << "\n";
            }
            return kPass;
        }

        if (*verify) {
            const auto u = load_unital(input);
            const auto report = pipeline::run_verify(u, split(checks), cfg);
            const auto text = report.to_text(false);
            std::cout << text;
            if (verify->count("--out")) {
                write_file(fs::path(out_dir) / "verify-report.json", report.to_json(false).dump(2) + "\n");
                write_file(fs::path(out_dir) / "verify-report.txt", text);
            }
            return report.exit_code();
        }

        if (*certify) {
            unital::Unital u;
            if (input.empty()) {
                u = unital::hermitian_unital(order_to_degree(order)).unital;
            } else {
                u = load_unital(input);
                if (!certify->count("--order")) order = u.order();
            }
            cfg.order = order;
            if (line != "auto") {
                try {
                    cfg.line = std::stoi(line);
                } catch (const std::exception&) {
                    throw InputError("--line must be a line id or auto");
                }
                if (cfg.line < 0) throw InputError("--line must be nonnegative");
            }
            const auto cert = pipeline::certify_classical(u, cfg);
            const fs::path dir(out_dir);
            const auto n = std::to_string(u.order());
            write_file(dir / ("certificate-" + n + ".json"), cert.json.dump(2) + "\n");
            const auto text = cert.report.to_text(timings);
            write_file(dir / ("report-" + n + ".txt"), text);
            std::cout << text;
            return cert.report.exit_code();
        }

        if (*exp) {
            const auto cert = read_json(cert_path);
            pipeline::Report report;
            try {
                if (cert.at("format").get<std::string>() != pipeline::kCertificateFormat)
                    throw InputError("not a classicality certificate");
                report = pipeline::report_from_json(cert.at("report"));
            } catch (const json::exception& e) {
                throw InputError(cert_path + ": " + e.what());
            }
            const bool digest_ok = cert.contains("certificate_digest") &&
                                   cert["certificate_digest"] == pipeline::certificate_digest(cert);
            bool timed = false;
            for (const auto& s : cert["report"]["stages"]) timed = timed || s.contains("runtime_ms");
            const auto text = report.to_text(timed) + "certificate digest: " + (digest_ok ? "ok" : "MISMATCH") + "\n";
            if (!export_out.empty()) write_file(export_out, text);
            std::cout << text;
            return digest_ok ? report.exit_code() : kFail;
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFail;
    }
    return kInputError;
}
