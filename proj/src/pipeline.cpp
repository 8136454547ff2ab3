#include "hermit/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hermit/bridge.hpp"
#include "hermit/bruckbose.hpp"

namespace hermit::pipeline {

using nlohmann::json;
using unital::LineId;
using unital::LineSet;
using unital::PointId;
using unital::Unital;

const char* to_string(Mode m) { return m == Mode::exhaustive ? "exhaustive" : "sampled"; }

Mode parse_mode(const std::string& s)
{
    if (s == "exhaustive") return Mode::exhaustive;
    if (s == "sampled") return Mode::sampled;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

void validate(const PipelineConfig& c)
{
    if (c.order < 2 || c.order > 8 || (c.order & (c.order - 1)) != 0)
        throw std::invalid_argument("order " + std::to_string(c.order) + " is not one of 2, 4, 8");
    if (c.triangle_samples <= 0 || c.sample_size <= 0 || c.triangle_sample <= 0)
        throw std::invalid_argument("sample sizes must be positive");
}

const char* to_string(Status s)
{
    switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skipped: return "skipped";
    case Status::outside_hypotheses: return "outside-hypotheses";
    }
    return "?";
}

namespace {

Status parse_status(const std::string& s)
{
    for (Status st : {Status::pass, Status::fail, Status::skipped, Status::outside_hypotheses})
        if (s == to_string(st)) return st;
    throw std::invalid_argument("unknown status '" + s + "'");
}

std::string str(long long v) { return std::to_string(v); }

json stage_json(const StageResult& s, bool timings)
{
    json j{{"id", s.id},
           {"anchor", s.anchor},
           {"status", to_string(s.status)},
           {"checks_passed", s.checks_passed},
           {"sampled", s.sampled},
           {"counts", s.counts},
           {"witnesses", s.witnesses},
           {"notes", s.notes}};
    if (timings) j["runtime_ms"] = s.runtime_ms;
    return j;
}

std::string scalar_text(const json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        if (v.size() > 8) return "[" + str(static_cast<long long>(v.size())) + " items]";
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + scalar_text(v[i]);
        return out + "]";
    }
    if (v.is_object()) return "{" + str(static_cast<long long>(v.size())) + " keys}";
    return v.dump();
}

}  // namespace

const StageResult* Report::find(const std::string& id) const
{
    for (const auto& s : stages)
        if (s.id == id) return &s;
    return nullptr;
}

const StageResult* Report::first_failure() const
{
    for (const auto& s : stages)
        if (s.status == Status::fail) return &s;
    return nullptr;
}

json Report::to_json(bool timings) const
{
    json st = json::array();
    for (const auto& s : stages) st.push_back(stage_json(s, timings));
    return {{"command", command}, {"header", header}, {"stages", st}, {"verdict", verdict}};
}

std::string Report::to_text(bool timings) const
{
    std::ostringstream os;
    os << "hermit " << command << "\n";
    for (auto it = header.begin(); it != header.end(); ++it) os << "  " << it.key() << ": " << scalar_text(it.value()) << "\n";
    os << "\n";
    os << std::left << std::setw(4) << "#" << std::setw(18) << "stage" << std::setw(20) << "status";
    if (timings) os << std::setw(12) << "ms";
    os << "anchor\n";
    int row = 0;
    for (const auto& s : stages) {
        os << std::left << std::setw(4) << ++row << std::setw(18) << s.id << std::setw(20) << to_string(s.status);
        if (timings) {
            std::ostringstream ms;
            ms << std::fixed << std::setprecision(1) << s.runtime_ms;
            os << std::setw(12) << ms.str();
        }
        os << s.anchor << "\n";
        std::string line;
        for (auto it = s.counts.begin(); it != s.counts.end(); ++it) {
            std::string item = it.key() + "=" + scalar_text(it.value());
            if (!line.empty() && line.size() + item.size() > 90) {
                os << "      " << line << "\n";
                line.clear();
            }
            line += (line.empty() ? "" : " ") + item;
        }
        if (!line.empty()) os << "      " << line << "\n";
        if (s.status == Status::fail)
            for (auto it = s.witnesses.begin(); it != s.witnesses.end(); ++it)
                os << "      witness " << it.key() << ": " << scalar_text(it.value()) << "\n";
        if (s.sampled) os << "      sampled: see counts for the sample sizes\n";
        for (const auto& n : s.notes) os << "      note: " << n << "\n";
    }
    os << "\nverdict: " << verdict << "\n";
    if (const auto* f = first_failure()) os << "first failing stage: " << f->id << "\n";
    return os.str();
}

Report report_from_json(const json& j)
{
    Report r;
    r.command = j.at("command").get<std::string>();
    r.header = j.at("header");
    r.verdict = j.at("verdict").get<std::string>();
    for (const auto& s : j.at("stages")) {
        StageResult st;
        st.id = s.at("id").get<std::string>();
        st.anchor = s.at("anchor").get<std::string>();
        st.status = parse_status(s.at("status").get<std::string>());
        st.checks_passed = s.at("checks_passed").get<bool>();
        st.sampled = s.at("sampled").get<bool>();
        st.counts = s.at("counts");
        st.witnesses = s.at("witnesses");
        st.notes = s.at("notes").get<std::vector<std::string>>();
        if (s.contains("runtime_ms")) st.runtime_ms = s["runtime_ms"].get<double>();
        r.stages.push_back(std::move(st));
    }
    return r;
}

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string digest_of(const json& j) { return sha256_hex(j.dump()); }

std::string certificate_digest(const json& cert)
{
    json body = cert;
    body.erase("certificate_digest");
    return digest_of(body);
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

// Stages that test the hypotheses; the claims of the others need n >= 4.
const std::set<std::string> kHypothesisStages = {"design", "onan", "condition-II"};

struct Run {
    const PipelineConfig& cfg;
    const Unital& u;
    unital::Workspace w;
    Report report;
    bool certify = false;
    bool stopped = false;
    LineId line = 0;
    json digests = json::object();

    std::optional<bridge::Frame> frame;
    std::optional<bridge::SpreadWitness> spread;
    std::optional<bruckbose::BBPlane> bb;
    std::optional<bruckbose::PlaneIdentification> ident;
    std::optional<bruckbose::BuekenhoutUnital> bu;
    std::optional<bruckbose::PhiPrime> phi_prime;
    std::optional<bruckbose::Embedding> embedding;

    Run(const PipelineConfig& c, const Unital& un) : cfg(c), u(un), w(un) {}

    bool sampled() const { return cfg.mode == Mode::sampled; }
    bool below_range() const { return u.order() < 4; }

    std::mt19937 rng_for(const std::string& id) const
    {
        std::vector<std::uint32_t> s{cfg.seed};
        for (char ch : id) s.push_back(static_cast<unsigned char>(ch));
        std::seed_seq seq(s.begin(), s.end());
        return std::mt19937(seq);
    }
};

// nullopt from a body means the stage did not apply.
using Body = std::function<std::optional<bool>(StageResult&)>;

void stage(Run& r, const std::string& id, const std::string& anchor, const Body& body)
{
    StageResult s;
    s.id = id;
    s.anchor = anchor;
    if (r.stopped) {
        s.status = Status::skipped;
        s.notes.push_back("not run: an earlier stage failed");
        r.report.stages.push_back(std::move(s));
        return;
    }
    const auto t0 = Clock::now();
    std::optional<bool> ok;
    try {
        ok = body(s);
    } catch (const std::exception& e) {
        ok = false;
        s.witnesses["error"] = e.what();
    }
    s.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (!ok) {
        s.status = Status::skipped;
    } else {
        s.checks_passed = *ok;
        if (r.below_range() && !kHypothesisStages.count(id)) {
            s.status = Status::outside_hypotheses;
            s.notes.push_back(std::string("outside hypotheses (n >= 4); computed outcome: ") + (*ok ? "pass" : "fail"));
        } else {
            s.status = *ok ? Status::pass : Status::fail;
            if (!*ok && r.certify) r.stopped = true;
        }
    }
    r.report.stages.push_back(std::move(s));
}

// All ids in exhaustive mode, else k of them sorted.
std::vector<int> choose(const Run& r, const std::string& id, int total, int k, bool& sampled)
{
    std::vector<int> all(total);
    for (int i = 0; i < total; ++i) all[i] = i;
    sampled = r.sampled() && k < total;
    if (!sampled) return all;
    std::vector<int> out;
    auto rng = r.rng_for(id);
    std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
    return out;
}

// ---------------------------------------------------------------------------
// Conditions and the structures they give

void stage_design(Run& r)
{
    stage(r, "design", "unital parameters 2-(n^3+1, n+1, 1)", [&](StageResult& s) -> std::optional<bool> {
        const int n = r.u.order();
        const auto chk = r.u.design_check();
        int lo = r.u.b(), hi = 0;
        for (PointId p = 0; p < r.u.v(); ++p) {
            const int d = static_cast<int>(r.u.lines_through(p).size());
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        s.counts = {{"order", n}, {"v", r.u.v()}, {"b", r.u.b()}, {"k", n + 1}, {"min_lines_per_point", lo},
                    {"max_lines_per_point", hi}};
        if (!chk.ok) s.witnesses["failure"] = chk.failure;
        return chk.ok && lo == n * n && hi == n * n && r.u.b() == n * n * (n * n - n + 1);
    });
}

void stage_onan(Run& r)
{
    stage(r, "onan", "condition (I): no O'Nan configuration", [&](StageResult& s) -> std::optional<bool> {
        const auto ids = choose(r, "onan", r.u.b(), r.cfg.sample_size, s.sampled);
        std::vector<LineId> first;
        if (s.sampled) first.assign(ids.begin(), ids.end());
        const auto res = unital::check_onan(r.u, 10, first);
        s.counts = {{"configurations", res.total}, {"triangles", res.triangles},
                    {"least_lines_searched", static_cast<int>(ids.size())}};
        if (s.sampled) s.notes.push_back("configurations searched only with a sampled least line");
        if (!res.found.empty()) {
            const auto& c = res.found.front();
            s.witnesses["lines"] = c.lines;
            s.witnesses["points"] = c.points;
            s.witnesses["confirmed"] = unital::is_onan_configuration(r.u, c.lines);
        }
        return res.total == 0;
    });
}

void stage_condition_ii(Run& r)
{
    stage(r, "condition-II", "condition (II): unique parallel line", [&](StageResult& s) -> std::optional<bool> {
        const auto ids = choose(r, "condition-II", r.u.v(), r.cfg.sample_size, s.sampled);
        std::vector<PointId> pts;
        if (s.sampled) pts.assign(ids.begin(), ids.end());
        const auto c = unital::check_condition_II(r.u, pts);
        s.counts = {{"instances", c.instances}, {"points_checked", c.points_checked}, {"always_unique", c.always_unique}};
        if (!c.ok) s.witnesses = {{"x", c.x}, {"l", c.l}, {"m", c.m}, {"y", c.y}};
        return c.ok;
    });
}

void stage_inversive(Run& r)
{
    stage(r, "inversive-planes", "inversive plane I(x) at every point", [&](StageResult& s) -> std::optional<bool> {
        const int n = r.u.order();
        const auto ids = choose(r, "inversive-planes", r.u.v(), r.cfg.sample_size, s.sampled);
        int upper = -1, lower = -1;
        for (int x : ids) {
            try {
                const auto& lp = r.w.plane(x);
                bool placed = true;
                for (int c = 0; c < lp.circles().b(); ++c)
                    if (lp.circles().contains(c, lp.infinity) != (lp.circle_class[c] < 0)) placed = false;
                if (!placed || lp.upper_circles + lp.lower_circles != n * (n * n + 1)) {
                    s.witnesses = {{"point", x}, {"error", "circle counts or infinity placement"}};
                    return false;
                }
                upper = lp.upper_circles;
                lower = lp.lower_circles;
            } catch (const std::exception& e) {
                s.witnesses = {{"point", x}, {"error", e.what()}};
                return false;
            }
        }
        s.counts = {{"planes", static_cast<int>(ids.size())}, {"points_per_plane", n * n + 1},
                    {"parallel_class_circles", upper}, {"circles_through_infinity", lower}};
        s.notes.push_back("infinity_x lies exactly on the circles C_x(L,L') built from lines through x");
        return true;
    });
}

void stage_spreads(Run& r)
{
    stage(r, "special-spreads", "special spread m_L of every line", [&](StageResult& s) -> std::optional<bool> {
        const int n = r.u.order();
        const auto ids = choose(r, "special-spreads", r.u.b(), r.cfg.sample_size, s.sampled);
        for (int l : ids) {
            try {
                const auto& sp = r.w.spread(l);
                if (static_cast<int>(sp.lines.size()) != n * n - n + 1 || !sp.base_independent) {
                    s.witnesses = {{"line", l}, {"error", "wrong size or depends on the base point"}};
                    return false;
                }
            } catch (const std::exception& e) {
                s.witnesses = {{"line", l}, {"error", e.what()}};
                return false;
            }
        }
        s.counts = {{"spreads", static_cast<int>(ids.size())}, {"lines_per_spread", n * n - n + 1},
                    {"base_points_per_spread", n + 1}};
        return true;
    });
}

void stage_condition_p(Run& r)
{
    stage(r, "condition-P", "condition (P) on special spreads", [&](StageResult& s) -> std::optional<bool> {
        if (r.sampled()) {
            s.notes.push_back("needs every special spread; not run in sampled mode");
            return std::nullopt;
        }
        const auto c = unital::check_condition_P(r.w);
        s.counts = {{"symmetric_pairs", c.symmetric_pairs}, {"disjoint_pairs", c.disjoint_pairs},
                    {"max_common_lines", c.max_common}};
        if (!c.ok) s.witnesses["failure"] = c.failure;
        return c.ok;
    });
}

// Triangles {L < M < N}, all or a sample.
std::vector<std::array<LineId, 3>> triangles(Run& r, const std::string& id, int k, bool& sampled)
{
    std::vector<std::array<LineId, 3>> out;
    sampled = r.sampled();
    if (!sampled) {
        for (LineId l = 0; l < r.u.b(); ++l)
            for (LineId m : r.w.spread(l).s_star) {
                if (m < l) continue;
                const LineId n = unital::polar_triple(r.w, l, m);
                if (n > m) out.push_back({l, m, n});
            }
        return out;
    }
    auto rng = r.rng_for(id);
    std::set<std::array<LineId, 3>> seen;
    std::uniform_int_distribution<LineId> pick(0, r.u.b() - 1);
    for (int tries = 0; static_cast<int>(seen.size()) < k && tries < 20 * k; ++tries) {
        const LineId l = pick(rng);
        const auto& star = r.w.spread(l).s_star;
        const LineId m = star[std::uniform_int_distribution<std::size_t>(0, star.size() - 1)(rng)];
        std::array<LineId, 3> t{l, m, unital::polar_triple(r.w, l, m)};
        std::sort(t.begin(), t.end());
        seen.insert(t);
    }
    return {seen.begin(), seen.end()};
}

void stage_triangles(Run& r)
{
    stage(r, "triangles", "self-polar triangles and their criteria", [&](StageResult& s) -> std::optional<bool> {
        const Unital& u = r.u;
        const auto ids = choose(r, "triangles", u.b(), r.cfg.sample_size, s.sampled);
        std::int64_t pairs = 0;
        std::set<std::array<LineId, 3>> found;
        for (int l : ids)
            for (LineId m : r.w.spread(l).s_star) {
                const LineId n = unital::polar_triple(r.w, l, m);
                ++pairs;
                if (!unital::is_self_polar(r.w, l, m, n)) {
                    s.witnesses = {{"l", l}, {"m", m}, {"n", n}};
                    return false;
                }
                std::array<LineId, 3> t{l, m, n};
                std::sort(t.begin(), t.end());
                found.insert(t);
            }

        auto rng = r.rng_for("triangles/criteria");
        std::uniform_int_distribution<LineId> pick(0, u.b() - 1);
        const int samples = r.sampled() ? r.cfg.sample_size : r.cfg.triangle_samples;
        int positives = 0, star_pairs = 0;
        for (int k = 0; k < samples; ++k) {
            const LineId l = pick(rng);
            LineId m, n;
            const bool from_star = k % 2 == 0;
            if (from_star) {
                const auto& star = r.w.spread(l).s_star;
                m = star[std::uniform_int_distribution<std::size_t>(0, star.size() - 1)(rng)];
                n = unital::polar_triple(r.w, l, m);
            } else {
                do m = pick(rng); while (u.meets(l, m));
                do n = pick(rng); while (u.meets(l, n) || u.meets(m, n));
            }
            const auto tc = unital::check_triangle_criteria(r.w, l, m, n);
            if (!tc.agree()) {
                s.witnesses = {{"l", l}, {"m", m}, {"n", n}, {"by_spreads", tc.by_spreads},
                               {"parallel_on_third", tc.parallel_on_third}, {"transversals", tc.transversals},
                               {"star_and_two_points", tc.star_and_two_points}};
                return false;
            }
            positives += tc.by_spreads;
            if (from_star) {
                const auto sp = unital::s_star_via_parallelism(r.w, l, m);
                ++star_pairs;
                if (!sp.equals_s_star) {
                    s.witnesses = {{"l", l}, {"m", m}, {"error", "S*_M differs from the lines parallel to L on M"}};
                    return false;
                }
            }
        }
        s.counts = {{"star_pairs", pairs}, {"triangles_found", static_cast<int>(found.size())},
                    {"criteria_samples", samples}, {"positives", positives}, {"negatives", samples - positives},
                    {"parallelism_pairs", star_pairs}};
        if (s.sampled) s.notes.push_back("polar triples computed for a sample of first lines");
        return true;
    });
}

void stage_triply_ruled(Run& r)
{
    stage(r, "triply-ruled", "partition into three lines and triply ruled sets", [&](StageResult& s) -> std::optional<bool> {
        const Unital& u = r.u;
        const int n = u.order();
        const auto tris = triangles(r, "triply-ruled", r.cfg.triangle_sample, s.sampled);
        const auto union_of = [&](const LineSet& ls) {
            std::vector<PointId> pts;
            for (LineId l : ls) pts.insert(pts.end(), u.line(l).begin(), u.line(l).end());
            std::sort(pts.begin(), pts.end());
            return pts;
        };
        for (const auto& t : tris) {
            const auto trp = unital::triply_ruled_partition(r.w, t[0], t[1], t[2]);
            std::vector<int> cover(u.v(), 0);
            for (LineId l : t)
                for (PointId p : u.line(l)) ++cover[p];
            bool ok = static_cast<int>(trp.sets.size()) == n - 2;
            for (const auto& set : trp.sets) {
                ok = ok && static_cast<int>(set.points.size()) == (n + 1) * (n + 1);
                ok = ok && union_of(set.l_ruling) == set.points && union_of(set.m_ruling) == set.points &&
                     union_of(set.n_ruling) == set.points;
                for (PointId p : set.points) ++cover[p];
            }
            ok = ok && std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; });
            if (!ok) {
                s.witnesses = {{"triangle", t}};
                return false;
            }
        }
        s.counts = {{"triangles", static_cast<int>(tris.size())}, {"sets_per_triangle", n - 2},
                    {"points_per_set", (n + 1) * (n + 1)}};
        if (s.sampled) s.notes.push_back("triangles drawn at random from the polar triples");
        return true;
    });
}

// ---------------------------------------------------------------------------
// The quadrangle and the spread

void stage_gq(Run& r)
{
    stage(r, "gq", "quadrangle GQ(L) from the A_ij table", [&](StageResult& s) -> std::optional<bool> {
        const int n = r.u.order();
        r.frame = bridge::start_frame(r.w, r.line);
        const auto& gq = r.frame->gq;
        const auto chk = bridge::check_gq_axioms(gq.inc, n, n);
        s.counts = {{"line", r.line}, {"points", gq.inc.v()}, {"lines", gq.inc.b()}, {"cells", gq.num_cells()},
                    {"antiflags", chk.antiflags}};
        s.witnesses["points_of_L"] = r.frame->aij.points;
        if (!chk.ok) s.witnesses["failure"] = chk.failure;
        r.digests["gq"] = digest_of(design::to_json(gq.inc));
        r.digests["quadric_gq"] = digest_of(design::to_json(r.frame->q4.inc));
        return chk.ok;
    });
}

void stage_phi(Run& r)
{
    stage(r, "phi", "isomorphism GQ(L) to Q(4,n)", [&](StageResult& s) -> std::optional<bool> {
        if (!r.frame) throw std::runtime_error("requires gq");
        auto& f = *r.frame;
        bridge::attach_phi(f);
        design::IsoMap map = f.phi.map;
        bool ok = design::verify_isomorphism(f.gq.inc, f.q4.inc, map);
        for (int l = 0; l < f.gq.inc.b() && ok; ++l) {
            projgeom::PointSet img;
            for (int p : f.gq.inc.block(l)) img.push_back(f.phi.point[p]);
            std::sort(img.begin(), img.end());
            ok = std::binary_search(f.q4.quadric.lines.begin(), f.q4.quadric.lines.end(), img);
        }
        s.counts = {{"quadric_points", static_cast<int>(f.q4.quadric.points.size())},
                    {"quadric_lines", static_cast<int>(f.q4.quadric.lines.size())},
                    {"search_nodes", f.phi.stats.nodes}, {"search_backtracks", f.phi.stats.backtracks}};
        s.witnesses["point_map"] = f.phi.point;
        r.digests["phi"] = digest_of(json(f.phi.point));
        return ok;
    });
}

void stage_sigma(Run& r)
{
    stage(r, "sigma", "hyperplane Sigma, hyperbolic section, polarity", [&](StageResult& s) -> std::optional<bool> {
        if (!r.frame || r.frame->phi.point.empty()) throw std::runtime_error("requires phi");
        const int n = r.u.order();
        const auto sc = bridge::attach_sigma(*r.frame);
        s.counts = {{"section_points", sc.section_points}, {"section_is_cells", sc.section_is_cells},
                    {"reguli_match", sc.reguli_match}, {"involution", sc.involution},
                    {"tangent_planes", sc.tangent_planes}, {"sigma_points", r.frame->local().num_points()}};
        s.witnesses["nucleus"] = r.frame->nucleus;
        return sc.ok() && sc.section_points == (n + 1) * (n + 1);
    });
}

bool frame_ready(const Run& r) { return r.frame && r.frame->alpha; }

void stage_cones(Run& r)
{
    stage(r, "cones", "tangent cones under the nucleus projection", [&](StageResult& s) -> std::optional<bool> {
        if (!frame_ready(r)) throw std::runtime_error("requires sigma");
        const auto c = bridge::verify_cones(*r.frame);
        s.counts = {{"points", c.points}};
        if (!c.ok) s.witnesses = {{"point", c.failing}, {"failure", c.failure}};
        return c.ok;
    });
}

void stage_spread(Run& r)
{
    stage(r, "spread", "spread S of Sigma from R_0 and mu phi(S*_L)", [&](StageResult& s) -> std::optional<bool> {
        if (!frame_ready(r)) throw std::runtime_error("requires sigma");
        const int n = r.u.order();
        r.spread = bridge::build_spread(*r.frame, r.w);
        const auto& sp = *r.spread;
        s.counts = {{"lines", static_cast<int>(sp.lines.size())}, {"misses_section", sp.misses_section},
                    {"is_spread", sp.is_spread}};
        s.witnesses["lines"] = sp.lines;
        s.witnesses["unital_line"] = sp.unital_line;
        r.digests["spread"] = digest_of(json(sp.lines));
        return sp.is_spread && sp.misses_section && static_cast<int>(sp.lines.size()) == n * n + 1;
    });
}

void stage_tube(Run& r)
{
    stage(r, "tube", "tube and regularity of S", [&](StageResult& s) -> std::optional<bool> {
        if (!r.spread) throw std::runtime_error("requires spread");
        const auto& f = *r.frame;
        const auto& sp = *r.spread;
        const LineId m = r.w.spread(r.line).s_star.front();
        const LineId n = unital::polar_triple(r.w, r.line, m);
        const auto t = bridge::verify_tube_and_regularity(f, r.w, sp, m, n);

        // regulus reversal: again a spread, regular only over GF(2)
        auto reversed = sp.lines;
        for (std::size_t i = 0; i < f.r0.size(); ++i) reversed[i] = f.r0_opposite[i];
        const bool rev_spread = projgeom::is_spread(f.local(), reversed);
        const bool rev_regular = projgeom::is_regular_spread(f.local(), reversed).ok;
        const bool control_ok = rev_spread && rev_regular == (r.u.order() == 2);

        s.counts = {{"triangle", {r.line, m, n}}, {"tube_planes", static_cast<int>(t.tube.planes.size())},
                    {"knarr_matches", t.knarr_matches}, {"triples_checked", t.regular.triples_checked},
                    {"opposite_reguli", t.opposite_reguli}, {"reversed_spread_regular", rev_regular}};
        if (!t.tube.ok) s.witnesses = {{"plane", t.tube.failing_plane}, {"failure", t.tube.failure}};
        if (!t.regular.ok) s.witnesses["triple"] = t.regular.failing_triple;
        s.notes.push_back("negative control: reversing R_0 gives a spread that is regular only for n = 2");
        return t.ok() && control_ok;
    });
}

void stage_reguli(Run& r)
{
    stage(r, "reguli", "regulus classification and I_1 = I_2", [&](StageResult& s) -> std::optional<bool> {
        if (!r.spread) throw std::runtime_error("requires spread");
        const int n = r.u.order();
        const auto rc = bridge::classify_reguli(*r.frame, r.w, *r.spread, r.cfg.full_flock);
        using bridge::RegulusType;
        s.counts = {{"reguli", static_cast<int>(rc.reguli.size())},
                    {"base", rc.counts[static_cast<int>(RegulusType::base)]},
                    {"disjoint", rc.counts[static_cast<int>(RegulusType::disjoint)]},
                    {"tangent", rc.counts[static_cast<int>(RegulusType::tangent)]},
                    {"secant", rc.counts[static_cast<int>(RegulusType::secant)]},
                    {"i1_design", rc.i1_design}, {"i2_design", rc.i2_design},
                    {"c0_equals_star", rc.c0_equals_star}, {"partners_pair", rc.partners_pair}};
        for (const auto& g : rc.reguli)
            if (!g.witness_ok) {
                s.witnesses = {{"regulus", g.members}, {"type", bridge::to_string(g.type)}};
                break;
            }
        s.notes.push_back(r.cfg.full_flock ? "secant flock condition checked at every z_1"
                                           : "secant flock condition checked at one z_1 per regulus");
        return rc.ok() && static_cast<int>(rc.reguli.size()) == n * (n * n + 1);
    });
}

void stage_flock(Run& r)
{
    stage(r, "flock", "flock criterion for (K1, K2, M)", [&](StageResult& s) -> std::optional<bool> {
        if (!r.spread) throw std::runtime_error("requires spread");
        auto rng = r.rng_for("flock");
        const auto b = bridge::verify_flock_batch(*r.frame, r.w, r.sampled() ? r.cfg.sample_size : 0, rng());
        s.sampled = b.sampled;
        s.counts = {{"admissible_pairs", b.admissible_pairs}, {"pairs", b.pairs}, {"instances", b.instances},
                    {"positives", b.positives}, {"upper_count_ok", b.upper_count_ok}};
        if (b.failing.m >= 0) s.witnesses = {{"k1", b.failing.k1}, {"k2", b.failing.k2}, {"m", b.failing.m}};
        return b.ok;
    });
}

void stage_pencil(Run& r)
{
    stage(r, "pencil", "pencil of quadrics through the ruled images", [&](StageResult& s) -> std::optional<bool> {
        if (!r.spread) throw std::runtime_error("requires spread");
        const int n = r.u.order();
        const LineId m = r.w.spread(r.line).s_star.front();
        const LineId nn = unital::polar_triple(r.w, r.line, m);
        const auto trp = unital::triply_ruled_partition(r.w, r.line, m, nn);
        const auto p = bridge::verify_pencil(*r.frame, *r.spread, trp);
        int ruled = 0, lines = 0;
        json members = json::array();
        for (const auto& mem : p.members) {
            (mem.role == "line" ? lines : ruled) += 1;
            members.push_back({{"role", mem.role}, {"pencil_index", mem.pencil_index}, {"form", mem.form.to_string()},
                               {"points", static_cast<int>(mem.points.size())}});
        }
        s.counts = {{"members", static_cast<int>(p.members.size())}, {"quadrics", ruled}, {"line_pairs", lines},
                    {"partition", p.partition}, {"blocks_are_reguli", p.blocks_are_reguli},
                    {"spread_decomposes", p.spread_decomposes}};
        s.witnesses["members"] = members;
        return p.ok() && static_cast<int>(p.members.size()) == n + 1 && lines == 2;
    });
}

void stage_coplanar(Run& r)
{
    stage(r, "coplanar", "images of lines missing L are coplanar", [&](StageResult& s) -> std::optional<bool> {
        if (!r.spread) throw std::runtime_error("requires spread");
        const auto c = bridge::verify_j_coplanar(*r.frame, r.w, *r.spread);
        s.counts = {{"lines", c.lines}, {"predicted", c.predicted}, {"star_lines", c.star_lines}};
        if (!c.ok) s.witnesses["line"] = c.failing;
        return c.ok;
    });
}

// ---------------------------------------------------------------------------
// Reconstruction

void stage_bruck_bose(Run& r)
{
    stage(r, "bruck-bose", "Bruck-Bose plane of S", [&](StageResult& s) -> std::optional<bool> {
        if (!r.spread) throw std::runtime_error("requires spread");
        r.bb = bruckbose::bruck_bose_plane(*r.frame, *r.spread);
        s.counts = {{"order", r.bb->order}, {"points", r.bb->inc.v()}, {"lines", r.bb->inc.b()}};
        r.digests["bruck_bose_plane"] = digest_of(design::to_json(r.bb->inc));
        return true;
    });
}

void stage_pg2(Run& r)
{
    stage(r, "pg2", "Bruck-Bose plane is PG(2,n^2)", [&](StageResult& s) -> std::optional<bool> {
        if (!r.bb) throw std::runtime_error("requires bruck-bose");
        r.ident = bruckbose::identify_with_pg2(*r.bb);
        s.counts = {{"search_nodes", r.ident->stats.nodes}, {"search_backtracks", r.ident->stats.backtracks}};
        if (!r.ident->map) return false;
        design::IsoMap m = *r.ident->map;
        const bool ok = design::verify_isomorphism(r.bb->inc, r.ident->pg2_inc, m);
        r.digests["pg2_map"] = digest_of(json(r.ident->map->points));
        return ok;
    });
}

void stage_buekenhout(Run& r)
{
    stage(r, "buekenhout", "Buekenhout unital U'", [&](StageResult& s) -> std::optional<bool> {
        if (!r.bb) throw std::runtime_error("requires bruck-bose");
        const int n = r.u.order();
        r.bu = bruckbose::buekenhout_unital(*r.frame, *r.bb);
        s.counts = {{"v", r.bu->unital.v()}, {"b", r.bu->unital.b()}, {"generators_ok", r.bu->generators_ok}};
        s.witnesses["points_at_infinity"] = r.bu->a;
        r.digests["buekenhout"] = digest_of(unital::to_json(r.bu->unital));
        return r.bu->generators_ok && r.bu->unital.v() == n * n * n + 1 && r.bu->unital.b() == r.u.b();
    });
}

void stage_phi_prime(Run& r)
{
    stage(r, "phi-prime", "isomorphism U to U'", [&](StageResult& s) -> std::optional<bool> {
        if (!r.bu) throw std::runtime_error("requires buekenhout");
        r.phi_prime = bruckbose::build_phi_prime(*r.frame, *r.bb, *r.bu);
        const auto& pp = *r.phi_prime;
        s.counts = {{"bijective", pp.bijective}, {"lines_to_blocks", pp.lines_to_blocks},
                    {"line_to_infinity", pp.line_to_infinity}, {"verified", pp.verified}};
        if (pp.failing >= 0) {
            s.witnesses["line"] = pp.failing;
            s.witnesses["points"] = r.u.line(pp.failing);
        }
        return pp.ok();
    });
}

void stage_classical(Run& r)
{
    stage(r, "classical", "U is classical", [&](StageResult& s) -> std::optional<bool> {
        if (!r.phi_prime || !r.ident) throw std::runtime_error("requires phi-prime and pg2");
        if (!r.ident->map) throw std::runtime_error("requires an identification with PG(2,n^2)");
        r.embedding = bruckbose::embed_in_pg2(r.u, *r.bu, *r.phi_prime, *r.ident);
        const auto& e = *r.embedding;
        s.counts = {{"lines_collinear", e.lines_collinear}, {"unital_set", e.unital_set},
                    {"hermitian_isomorphic", e.hermitian_iso}, {"search_nodes", e.stats.nodes}};
        return e.ok();
    });
}

json embedding_json(const Run& r)
{
    const auto& pg2 = *r.ident->pg2;
    json pts = json::array();
    for (auto p : r.embedding->point) {
        const auto c = pg2.coords(p);
        pts.push_back(std::vector<galois::Elem>(c.begin(), c.end()));
    }
    return {{"field", {{"degree", pg2.field().degree()}, {"modulus", pg2.field().modulus()}}},
            {"point_ids", r.embedding->point},
            {"points", pts}};
}

void finish(Run& r)
{
    bool outside = false;
    r.report.verdict = "pass";
    for (const auto& s : r.report.stages) {
        if (s.status == Status::fail) r.report.verdict = "fail";
        outside = outside || s.status == Status::outside_hypotheses;
    }
    if (r.report.verdict == "pass" && outside) r.report.verdict = "outside-hypotheses";
}

void header(Run& r, const std::string& command)
{
    r.report.command = command;
    r.report.header = {{"order", r.u.order()}, {"mode", to_string(r.cfg.mode)}, {"seed", r.cfg.seed},
                       {"input_sha256", digest_of(unital::to_json(r.u))}, {"version", kVersion}};
}

const std::vector<std::pair<std::string, void (*)(Run&)>>& verify_stages()
{
    static const std::vector<std::pair<std::string, void (*)(Run&)>> v = {
        {"design", stage_design},         {"onan", stage_onan},           {"condition-II", stage_condition_ii},
        {"inversive-planes", stage_inversive}, {"special-spreads", stage_spreads}, {"condition-P", stage_condition_p},
        {"triangles", stage_triangles},   {"triply-ruled", stage_triply_ruled}};
    return v;
}

}  // namespace

const std::vector<std::string>& verify_checks()
{
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& [id, fn] : verify_stages()) out.push_back(id);
        return out;
    }();
    return ids;
}

Report run_verify(const Unital& u, const std::vector<std::string>& checks, const PipelineConfig& c)
{
    for (const auto& id : checks)
        if (std::find(verify_checks().begin(), verify_checks().end(), id) == verify_checks().end())
            throw std::invalid_argument("unknown check '" + id + "'");
    Run r(c, u);
    header(r, "verify");
    for (const auto& [id, fn] : verify_stages())
        if (checks.empty() || std::find(checks.begin(), checks.end(), id) != checks.end()) fn(r);
    finish(r);
    return r.report;
}

Certificate certify_classical(const Unital& u, const PipelineConfig& c)
{
    validate(c);
    if (u.order() != c.order)
        throw std::invalid_argument("input has order " + str(u.order()) + ", expected " + str(c.order));
    const LineId line = c.line < 0 ? 0 : c.line;
    if (line >= u.b()) throw std::invalid_argument("line " + str(line) + " out of range");

    Run r(c, u);
    r.certify = true;
    r.line = line;
    header(r, "certify-classical");
    r.report.header["line"] = line;
    r.digests["unital"] = r.report.header["input_sha256"];

    for (const auto& [id, fn] : verify_stages()) fn(r);
    for (auto fn : {stage_gq, stage_phi, stage_sigma, stage_cones, stage_spread, stage_tube, stage_reguli, stage_flock,
                    stage_pencil, stage_coplanar, stage_bruck_bose, stage_pg2, stage_buekenhout, stage_phi_prime,
                    stage_classical})
        fn(r);
    finish(r);

    Certificate cert;
    json stages = json::array();
    for (const auto& s : r.report.stages) stages.push_back(stage_json(s, c.timings));
    cert.json = {{"format", kCertificateFormat},
                 {"version", kVersion},
                 {"input",
                  {{"order", u.order()},
                   {"construction", u.construction()},
                   {"v", u.v()},
                   {"b", u.b()},
                   {"sha256", r.digests["unital"]}}},
                 {"config",
                  {{"line", line},
                   {"mode", to_string(c.mode)},
                   {"seed", c.seed},
                   {"full_flock", c.full_flock},
                   {"triangle_samples", c.triangle_samples},
                   {"sample_size", c.sample_size},
                   {"triangle_sample", c.triangle_sample}}},
                 {"report", r.report.to_json(c.timings)},
                 {"verdict", r.report.verdict},
                 {"digests", r.digests}};
    if (r.phi_prime) cert.json["phi_prime"] = {{"points", r.phi_prime->point}, {"lines", r.phi_prime->line}};
    if (r.embedding && r.embedding->ok()) cert.json["embedding"] = embedding_json(r);
    cert.json["certificate_digest"] = certificate_digest(cert.json);
    cert.report = std::move(r.report);
    return cert;
}

json pg_tables(int n)
{
    PipelineConfig c;
    c.order = n;
    validate(c);
    int e = 0;
    while ((1 << e) < n) ++e;
    const auto h = unital::hermitian_unital(e);
    const auto& pg2 = *h.plane;
    const auto& fld = pg2.field();
    std::vector<galois::Elem> exp;
    for (std::uint32_t k = 0; k < fld.order_of_group(); ++k) exp.push_back(fld.antilog(k));
    json pts = json::array();
    for (projgeom::PointId p = 0; p < pg2.num_points(); ++p) {
        const auto cs = pg2.coords(p);
        pts.push_back(std::vector<galois::Elem>(cs.begin(), cs.end()));
    }
    return {{"field", {{"degree", fld.degree()}, {"modulus", fld.modulus()}, {"generator", fld.generator()}, {"antilog", exp}}},
            {"subfield_order", fld.subfield_order()},
            {"plane", {{"dim", 2}, {"points", pts}, {"lines", pg2.lines()}}},
            {"unital_points", h.pg_point},
            {"unital_lines", h.pg_line}};
}

}  // namespace hermit::pipeline
