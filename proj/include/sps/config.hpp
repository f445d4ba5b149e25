#pragma once

#include <chrono>
#include <ctime>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sps/io.hpp"

namespace sps {

using json = nlohmann::json;

inline constexpr const char* tool_version = "0.1.0";

class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : Error(ErrorCode::config_error, path + ": " + message), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct MultistartConfig {
    int n_centers = 12;
    DedupeTolerances tolerances;
};

struct RunConfig {
    DomainSpec domain = DomainSpec::ball(1.0);
    int resolution = 33;
    ProblemParams params;
    std::optional<double> r;  // default: 0.3 x inradius
    SolveOptions solver;
    std::vector<double> p_list{4.2, 4.6, 5.0, 5.4, 5.8};
    MultistartConfig multistart;
    std::string output = "sps-out";

    double transplant_radius() const { return r ? *r : default_transplant_radius(domain); }

    /// Cross-module preconditions; throws ConfigError naming the field.
    void validate() const {
        auto check = [](bool ok, const std::string& path, const std::string& msg) {
            if (!ok) throw ConfigError(path, msg);
        };
        check(resolution >= 8, "resolution", "must be >= 8");
        check(std::isfinite(params.p) && params.p > 4.0 && params.p < 6.0, "p", "must lie in (4, 6)");
        check(std::isfinite(params.lambda) && params.lambda >= 0.0, "lambda", "must be >= 0");
        check(params.poisson_tol > 0.0, "poisson_tol", "must be > 0");
        for (std::size_t i = 0; i < p_list.size(); ++i)
            check(p_list[i] > 4.0 && p_list[i] < 6.0, "sweep.p_list[" + std::to_string(i) + "]", "must lie in (4, 6)");
        check(!p_list.empty(), "sweep.p_list", "must not be empty");
        const double rr = transplant_radius();
        check(std::isfinite(rr) && rr > 0.0 && rr < domain.inradius(), "r",
              "must satisfy 0 < r < inradius of the domain");
        check(multistart.n_centers >= 1, "multistart.n_centers", "must be >= 1");
        check(multistart.tolerances.energy_rel > 0.0, "multistart.energy_rel", "must be > 0");
        check(multistart.tolerances.l2_rel > 0.0, "multistart.l2_rel", "must be > 0");
        check(!output.empty(), "output", "must not be empty");
        try {
            solver.validate();
        } catch (const Error& e) {
            throw ConfigError("solver", e.what());
        }
    }
};

namespace detail {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& raw(const std::string& key) const { return j_.at(key); }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        return v.get<double>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }

    Point point(const std::string& key) const {
        if (!has(key)) throw ConfigError(at(key), "required");
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != 3) throw ConfigError(at(key), "expected an array of three numbers");
        Point out{};
        for (int k = 0; k < 3; ++k) {
            if (!v[k].is_number()) throw ConfigError(at(key) + "[" + std::to_string(k) + "]", "expected a number");
            out[k] = v[k].get<double>();
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(at(k), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

inline DomainSpec parse_domain(const json& j) {
    Reader rd(j, "domain");
    const std::string kind = rd.string("kind", "");
    auto build = [&](auto&& fn) {
        try {
            return fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("domain", e.what());
        }
    };
    DomainSpec d = DomainSpec::ball(1.0);
    if (kind == "ball") {
        d = build([&] { return DomainSpec::ball(rd.number("radius", 1.0)); });
    } else if (kind == "box") {
        d = build([&] { return DomainSpec::box(rd.point("half_widths")); });
    } else if (kind == "shell") {
        d = build([&] { return DomainSpec::shell(rd.number("inner", 0.5), rd.number("outer", 1.0)); });
    } else if (kind == "ball-union") {
        if (!rd.has("pieces") || !rd.raw("pieces").is_array()) throw ConfigError("domain.pieces", "expected an array");
        std::vector<BallPiece> pieces;
        const json& arr = rd.raw("pieces");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Reader pr(arr[i], "domain.pieces[" + std::to_string(i) + "]");
            pieces.push_back({pr.point("center"), pr.number("radius", 0.0)});
            pr.reject_unknown();
        }
        d = build([&] { return DomainSpec::ball_union(pieces); });
    } else {
        throw ConfigError("domain.kind", "expected one of ball, box, shell, ball-union");
    }
    rd.reject_unknown();
    return d;
}

inline json domain_json(const DomainSpec& d) {
    switch (d.kind()) {
        case DomainKind::ball: return {{"kind", "ball"}, {"radius", d.radius()}};
        case DomainKind::box: return {{"kind", "box"}, {"half_widths", d.half_widths()}};
        case DomainKind::shell: return {{"kind", "shell"}, {"inner", d.inner_radius()}, {"outer", d.outer_radius()}};
        case DomainKind::ball_union: {
            json pieces = json::array();
            for (const auto& b : d.pieces()) pieces.push_back({{"center", b.center}, {"radius", b.radius}});
            return {{"kind", "ball-union"}, {"pieces", pieces}};
        }
    }
    return {};
}

} // namespace detail

/// Parses a JSON run configuration. Missing fields take defaults; unknown
/// fields and type mismatches raise ConfigError with the offending path.
inline RunConfig parse_config(const json& j) {
    RunConfig c;
    detail::Reader rd(j, "");
    if (rd.has("domain")) c.domain = detail::parse_domain(rd.raw("domain"));
    c.resolution = static_cast<int>(rd.integer("resolution", c.resolution));
    c.params.p = rd.number("p", c.params.p);
    c.params.lambda = rd.number("lambda", c.params.lambda);
    c.params.positive_part = rd.boolean("positive_part", c.params.positive_part);
    c.params.poisson_tol = rd.number("poisson_tol", c.params.poisson_tol);
    if (rd.has("r")) c.r = rd.number("r", 0.0);
    c.output = rd.string("output", c.output);
    c.solver.seed = static_cast<std::uint64_t>(rd.integer("seed", static_cast<std::int64_t>(c.solver.seed)));
    c.solver.threads = static_cast<int>(rd.integer("threads", c.solver.threads));

    if (rd.has("solver")) {
        detail::Reader s(rd.raw("solver"), "solver");
        auto& o = c.solver;
        o.max_iterations = static_cast<int>(s.integer("max_iterations", o.max_iterations));
        o.gradient_tolerance = s.number("gradient_tolerance", o.gradient_tolerance);
        o.relative_tolerance = s.number("relative_tolerance", o.relative_tolerance);
        o.initial_step = s.number("initial_step", o.initial_step);
        o.backtrack_shrink = s.number("backtrack_shrink", o.backtrack_shrink);
        o.max_backtracks = static_cast<int>(s.integer("max_backtracks", o.max_backtracks));
        o.restarts = static_cast<int>(s.integer("restarts", o.restarts));
        o.riesz_tol = s.number("riesz_tol", o.riesz_tol);
        s.reject_unknown();
    }
    if (rd.has("sweep")) {
        detail::Reader s(rd.raw("sweep"), "sweep");
        if (s.has("p_list")) {
            const json& arr = s.raw("p_list");
            if (!arr.is_array()) throw ConfigError("sweep.p_list", "expected an array of numbers");
            c.p_list.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                if (!arr[i].is_number()) throw ConfigError("sweep.p_list[" + std::to_string(i) + "]", "expected a number");
                c.p_list.push_back(arr[i].get<double>());
            }
        }
        s.reject_unknown();
    }
    if (rd.has("multistart")) {
        detail::Reader s(rd.raw("multistart"), "multistart");
        c.multistart.n_centers = static_cast<int>(s.integer("n_centers", c.multistart.n_centers));
        c.multistart.tolerances.energy_rel = s.number("energy_rel", c.multistart.tolerances.energy_rel);
        c.multistart.tolerances.l2_rel = s.number("l2_rel", c.multistart.tolerances.l2_rel);
        s.reject_unknown();
    }
    rd.reject_unknown();
    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

/// Complete configuration with every default made explicit.
inline json serialize_config(const RunConfig& c) {
    const auto& o = c.solver;
    json j = {
        {"domain", detail::domain_json(c.domain)},
        {"resolution", c.resolution},
        {"p", c.params.p},
        {"lambda", c.params.lambda},
        {"positive_part", c.params.positive_part},
        {"poisson_tol", c.params.poisson_tol},
        {"r", c.r ? json(*c.r) : json(nullptr)},
        {"output", c.output},
        {"seed", o.seed},
        {"threads", o.threads},
        {"solver",
         {{"max_iterations", o.max_iterations},
          {"gradient_tolerance", o.gradient_tolerance},
          {"relative_tolerance", o.relative_tolerance},
          {"initial_step", o.initial_step},
          {"backtrack_shrink", o.backtrack_shrink},
          {"max_backtracks", o.max_backtracks},
          {"restarts", o.restarts},
          {"riesz_tol", o.riesz_tol}}},
        {"sweep", {{"p_list", c.p_list}}},
        {"multistart",
         {{"n_centers", c.multistart.n_centers},
          {"energy_rel", c.multistart.tolerances.energy_rel},
          {"l2_rel", c.multistart.tolerances.l2_rel}}},
    };
    return j;
}

// ---------------------------------------------------------------------------
// Run manifest

class RunManifest {
public:
    RunManifest(std::string command, const RunConfig& config) : command_(std::move(command)) {
        doc_ = {{"tool", "sps"},
                {"version", tool_version},
                {"timestamp", utc_timestamp()},
                {"command", command_},
                {"config", serialize_config(config)},
                {"results", json::object()},
                {"errors", json::array()},
                {"files", json::array()}};
    }

    json& results() { return doc_["results"]; }
    const json& document() const { return doc_; }

    void add_error(const Error& e) {
        doc_["errors"].push_back({{"code", std::string(to_string(e.code()))}, {"message", e.what()}});
    }

    /// Writes `content` atomically under `dir` and records its hash.
    void add_file(const io::fs::path& dir, const std::string& name, const std::string& content) {
        io::write_atomic(dir / name, content);
        doc_["files"].push_back({{"path", name}, {"fnv1a64", io::hash_bytes(content)}});
    }

    void write(const io::fs::path& dir) const { io::write_atomic(dir / "manifest.json", doc_.dump(2) + "\n"); }

    static std::string utc_timestamp() {
        const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

private:
    std::string command_;
    json doc_;
};

/// Checks that every file listed in a manifest exists under `dir` and still
/// matches its recorded hash.
inline bool verify_manifest_files(const json& manifest, const io::fs::path& dir) {
    for (const auto& f : manifest.at("files")) {
        const auto path = dir / f.at("path").get<std::string>();
        if (!io::fs::exists(path) || io::hash_file(path) != f.at("fnv1a64").get<std::string>()) return false;
    }
    return true;
}

} // namespace sps
