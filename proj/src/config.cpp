#include "ldplab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "toml.hpp"

namespace ldplab {

using nlohmann::json;

namespace {

std::string join_messages(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& m : v) s += "\n  " + m;
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_messages(violations)), violations_(std::move(violations)) {}

// ------------------------------------------------------------------ demo model

Model demo_model() {
    const std::size_t modes = 4;
    EigenSystem eig = fractional_laplacian_system(2.0, modes, std::numbers::pi, 1.0);
    DiffusionCoefficient dc(std::vector<PiecewiseConstant>(modes, PiecewiseConstant(0.5)),
                            std::vector<double>(modes, 0.2), 2.0);
    SpectralField h2(modes);
    h2[1] = h2[2] = std::sqrt(0.5);
    JumpCoefficient jc({JumpLaw{PiecewiseConstant({0.0, 0.5, 1.0}, {1.0, 0.8}), 0.5, 0.2, SpectralField::unit(modes, 0)},
                        JumpLaw{PiecewiseConstant(1.0), -0.4, 0.1, h2}});
    MarkMeasure mm(std::vector<double>{1.0, 0.5});
    const double horizon = 1.0;
    PiecewiseConstant k = default_majorant(dc, jc, mm, horizon);
    return Model{std::move(eig), std::move(dc), std::move(jc), std::move(mm),
                 SpectralField(std::vector<double>(modes, 1.0)), horizon, std::move(k)};
}

// ------------------------------------------------------------ duplicate keys

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Drops a trailing comment; quotes are respected.
std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == '\\' && quote == '"') ++i;
            else if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

int bracket_balance(const std::string& s) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quote) {
            if (c == '\\' && quote == '"') ++i;
            else if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '[' || c == '{') {
            ++depth;
        } else if (c == ']' || c == '}') {
            --depth;
        }
    }
    return depth;
}

std::size_t find_equals(const std::string& s) {
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '=') {
            return i;
        }
    }
    return std::string::npos;
}

}  // namespace

std::string resolve_duplicate_keys(const std::string& text, std::vector<std::string>& warnings) {
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }
    struct Span {
        std::size_t first;
        std::size_t last;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Span>> entries;
    std::map<std::string, std::size_t> aot_count;
    std::map<std::string, std::string> display;  // scope -> readable name
    std::string scope;
    display[""] = "";
    for (std::size_t i = 0; i < lines.size();) {
        const std::string body = trim(strip_comment(lines[i]));
        if (body.empty()) {
            ++i;
            continue;
        }
        if (body.rfind("[[", 0) == 0) {
            const std::string name = trim(body.substr(2, body.find("]]") - 2));
            const std::size_t idx = aot_count[name]++;
            scope = name + "#" + std::to_string(idx);
            display[scope] = name + "[" + std::to_string(idx) + "]";
            ++i;
            continue;
        }
        if (body.front() == '[') {
            scope = trim(body.substr(1, body.find(']') - 1));
            display[scope] = scope;
            ++i;
            continue;
        }
        const std::size_t eq = find_equals(body);
        if (eq == std::string::npos) {
            ++i;
            continue;
        }
        const std::string key = trim(body.substr(0, eq));
        int depth = bracket_balance(body.substr(eq + 1));
        std::size_t end = i;
        while (depth > 0 && end + 1 < lines.size()) {
            ++end;
            depth += bracket_balance(strip_comment(lines[end]));
        }
        entries[{scope, key}].push_back({i, end});
        i = end + 1;
    }
    std::vector<bool> drop(lines.size(), false);
    for (const auto& [id, spans] : entries) {
        if (spans.size() < 2) continue;
        const std::string& name = display[id.first];
        std::string where;
        for (const auto& s : spans) where += (where.empty() ? "" : ", ") + std::to_string(s.first + 1);
        warnings.push_back("duplicate key '" + (name.empty() ? id.second : name + "." + id.second) +
                           "' on lines " + where + "; the last value wins");
        for (std::size_t k = 0; k + 1 < spans.size(); ++k)
            for (std::size_t l = spans[k].first; l <= spans[k].last; ++l) drop[l] = true;
    }
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (!drop[i]) out += lines[i] + "\n";
    return out;
}

// ------------------------------------------------------------- TOML <-> JSON

namespace {

json to_json(const toml::node& n) {
    if (const auto* t = n.as_table()) {
        json obj = json::object();
        for (auto&& [k, v] : *t) obj[std::string(k.str())] = to_json(v);
        return obj;
    }
    if (const auto* a = n.as_array()) {
        json arr = json::array();
        for (auto&& v : *a) arr.push_back(to_json(v));
        return arr;
    }
    if (const auto* v = n.as_integer()) return json(v->get());
    if (const auto* v = n.as_floating_point()) return json(v->get());
    if (const auto* v = n.as_boolean()) return json(v->get());
    if (const auto* v = n.as_string()) return json(v->get());
    std::ostringstream os;
    n.visit([&](auto&& x) { os << x; });
    return json(os.str());
}

void append_toml(toml::array& arr, const json& j);

void insert_toml(toml::table& t, const std::string& key, const json& j) {
    if (j.is_object()) {
        toml::table sub;
        for (auto it = j.begin(); it != j.end(); ++it) insert_toml(sub, it.key(), it.value());
        t.insert_or_assign(key, std::move(sub));
    } else if (j.is_array()) {
        toml::array arr;
        for (const auto& e : j) append_toml(arr, e);
        t.insert_or_assign(key, std::move(arr));
    } else if (j.is_boolean()) {
        t.insert_or_assign(key, j.get<bool>());
    } else if (j.is_number_integer()) {
        t.insert_or_assign(key, j.get<std::int64_t>());
    } else if (j.is_number()) {
        t.insert_or_assign(key, j.get<double>());
    } else if (j.is_string()) {
        t.insert_or_assign(key, j.get<std::string>());
    }
}

void append_toml(toml::array& arr, const json& j) {
    if (j.is_object()) {
        toml::table sub;
        for (auto it = j.begin(); it != j.end(); ++it) insert_toml(sub, it.key(), it.value());
        arr.push_back(std::move(sub));
    } else if (j.is_array()) {
        toml::array sub;
        for (const auto& e : j) append_toml(sub, e);
        arr.push_back(std::move(sub));
    } else if (j.is_boolean()) {
        arr.push_back(j.get<bool>());
    } else if (j.is_number_integer()) {
        arr.push_back(j.get<std::int64_t>());
    } else if (j.is_number()) {
        arr.push_back(j.get<double>());
    } else if (j.is_string()) {
        arr.push_back(j.get<std::string>());
    }
}

// ---------------------------------------------------------------- validation

class Checker {
public:
    std::vector<std::string> errors;
    double horizon = 0.0;  // closes the last piece of step functions

    void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

    static std::string at(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }
    static std::string at(const std::string& path, std::size_t idx) { return path + "[" + std::to_string(idx) + "]"; }

    const json* find(const json& obj, const std::string& key) const {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    const json* table(const json& obj, const std::string& path, const std::string& key, bool required) {
        const json* v = find(obj, key);
        if (!v) {
            if (required) fail(at(path, key), "missing required table");
            return nullptr;
        }
        if (!v->is_object()) {
            fail(at(path, key), "must be a table");
            return nullptr;
        }
        return v;
    }

    std::optional<double> number(const json& v, const std::string& path) {
        if (!v.is_number()) {
            fail(path, "must be a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    std::optional<double> number(const json& obj, const std::string& path, const std::string& key, bool required,
                                 std::optional<double> fallback = std::nullopt) {
        const json* v = find(obj, key);
        if (!v) {
            if (required) fail(at(path, key), "missing required field");
            return fallback;
        }
        return number(*v, at(path, key));
    }

    std::optional<std::int64_t> integer(const json& obj, const std::string& path, const std::string& key,
                                        bool required, std::optional<std::int64_t> fallback = std::nullopt) {
        const json* v = find(obj, key);
        if (!v) {
            if (required) fail(at(path, key), "missing required field");
            return fallback;
        }
        if (!v->is_number_integer()) {
            fail(at(path, key), "must be an integer");
            return std::nullopt;
        }
        return v->get<std::int64_t>();
    }

    std::optional<std::size_t> count(const json& obj, const std::string& path, const std::string& key, bool required,
                                     std::optional<std::size_t> fallback, std::size_t min_value) {
        auto v = integer(obj, path, key, required,
                         fallback ? std::optional<std::int64_t>(static_cast<std::int64_t>(*fallback)) : std::nullopt);
        if (!v) return std::nullopt;
        if (*v < static_cast<std::int64_t>(min_value)) {
            fail(at(path, key), "must be >= " + std::to_string(min_value) + " (got " + std::to_string(*v) + ")");
            return std::nullopt;
        }
        return static_cast<std::size_t>(*v);
    }

    std::optional<bool> boolean(const json& obj, const std::string& path, const std::string& key, bool fallback) {
        const json* v = find(obj, key);
        if (!v) return fallback;
        if (!v->is_boolean()) {
            fail(at(path, key), "must be true or false");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<std::string> string(const json& obj, const std::string& path, const std::string& key, bool required,
                                      std::optional<std::string> fallback = std::nullopt) {
        const json* v = find(obj, key);
        if (!v) {
            if (required) fail(at(path, key), "missing required field");
            return fallback;
        }
        if (!v->is_string()) {
            fail(at(path, key), "must be a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json& v, const std::string& path) {
        if (!v.is_array()) {
            fail(path, "must be an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto x = number(v[i], at(path, i));
            if (x) out.push_back(*x);
            else ok = false;
        }
        if (!ok) return std::nullopt;
        return out;
    }

    std::optional<std::vector<double>> numbers(const json& obj, const std::string& path, const std::string& key,
                                               bool required) {
        const json* v = find(obj, key);
        if (!v) {
            if (required) fail(at(path, key), "missing required field");
            return std::nullopt;
        }
        return numbers(*v, at(path, key));
    }

    /// A number (constant) or a table {knots = [...], values = [...]}.
    std::optional<PiecewiseConstant> step_function(const json& v, const std::string& path) {
        if (v.is_number()) return PiecewiseConstant(v.get<double>());
        if (!v.is_object()) {
            fail(path, "must be a number or a table with knots and values");
            return std::nullopt;
        }
        auto knots = numbers(v, path, "knots", true);
        auto values = numbers(v, path, "values", true);
        if (!knots || !values) return std::nullopt;
        if (knots->size() != values->size()) {
            fail(path, "knots and values must have equal length (each value starts at its knot)");
            return std::nullopt;
        }
        if (knots->empty() || knots->front() != 0.0) {
            fail(at(path, "knots"), "must start at 0");
            return std::nullopt;
        }
        for (std::size_t i = 1; i < knots->size(); ++i)
            if (!((*knots)[i] > (*knots)[i - 1])) {
                fail(at(path, "knots"), "must be strictly increasing");
                return std::nullopt;
            }
        // internal representation closes the last piece with a sentinel knot at the horizon (or beyond the last knot)
        std::vector<double> kn = *knots;
        kn.push_back(horizon > kn.back() ? horizon : kn.back() + 1.0);
        if (values->size() == 1) return PiecewiseConstant((*values)[0]);
        return PiecewiseConstant(std::move(kn), *values);
    }
};

std::optional<EigenSystem> read_eigen(Checker& c, const json& model, std::optional<std::size_t>& modes) {
    const json* e = c.table(model, "model", "eigen", true);
    if (!e) return std::nullopt;
    const std::string p = "model.eigen";
    auto kind = c.string(*e, p, "kind", false, std::string("fractional"));
    auto lambda0 = c.number(*e, p, "lambda0", false, 1.0);
    if (lambda0 && !(*lambda0 > 0.0)) {
        c.fail(Checker::at(p, "lambda0"), "must be > 0");
        lambda0.reset();
    }
    if (!kind) return std::nullopt;
    if (*kind == "fractional") {
        auto order = c.number(*e, p, "order", false, 2.0);
        auto k = c.count(*e, p, "modes", true, std::nullopt, 1);
        auto len = c.number(*e, p, "domain_length", false, std::numbers::pi);
        if (order && !(*order > 0.0 && *order <= 2.0)) {
            c.fail(Checker::at(p, "order"), "must lie in (0, 2]");
            order.reset();
        }
        if (len && !(*len > 0.0)) {
            c.fail(Checker::at(p, "domain_length"), "must be > 0");
            len.reset();
        }
        if (k) modes = k;
        if (!order || !k || !len || !lambda0) return std::nullopt;
        return fractional_laplacian_system(*order, *k, *len, *lambda0);
    }
    if (*kind == "explicit") {
        auto z = c.numbers(*e, p, "zetas", true);
        if (!z) return std::nullopt;
        if (z->empty()) {
            c.fail(Checker::at(p, "zetas"), "needs at least one eigenvalue");
            return std::nullopt;
        }
        bool ok = true;
        for (std::size_t i = 0; i < z->size(); ++i) {
            if (!((*z)[i] >= 0.0)) {
                c.fail(Checker::at(Checker::at(p, "zetas"), i), "must be >= 0");
                ok = false;
            }
            if (i > 0 && (*z)[i] < (*z)[i - 1]) {
                c.fail(Checker::at(Checker::at(p, "zetas"), i), "eigenvalues must be nondecreasing");
                ok = false;
            }
        }
        modes = z->size();
        if (!ok || !lambda0) return std::nullopt;
        return EigenSystem(*z, *lambda0);
    }
    c.fail(Checker::at(p, "kind"), "must be \"fractional\" or \"explicit\" (got \"" + *kind + "\")");
    return std::nullopt;
}

std::optional<TerminalTarget> read_target(Checker& c, const json& t, const std::string& p, std::size_t modes,
                                          bool event_only) {
    auto kind = c.string(t, p, "kind", true);
    if (!kind) return std::nullopt;
    auto centre = [&]() -> std::optional<SpectralField> {
        auto z = c.numbers(t, p, "centre", true);
        if (!z) return std::nullopt;
        if (z->size() != modes) {
            c.fail(Checker::at(p, "centre"), "must have " + std::to_string(modes) + " entries");
            return std::nullopt;
        }
        return SpectralField(*z);
    };
    auto radius = [&]() -> std::optional<double> {
        auto r = c.number(t, p, "radius", true);
        if (r && !(*r >= 0.0)) {
            c.fail(Checker::at(p, "radius"), "must be >= 0");
            return std::nullopt;
        }
        return r;
    };
    if (*kind == "half_space") {
        auto level = c.number(t, p, "level", true);
        auto mode = c.count(t, p, "mode", false, 1, 1);
        if (mode && *mode > modes) {
            c.fail(Checker::at(p, "mode"), "must be <= " + std::to_string(modes));
            mode.reset();
        }
        if (!level || !mode) return std::nullopt;
        return TerminalTarget::half_space(*level, *mode - 1);
    }
    if (*kind == "ball_complement") {
        auto z = centre();
        auto r = radius();
        if (!z || !r) return std::nullopt;
        return TerminalTarget::ball_complement(*z, *r);
    }
    if (!event_only && *kind == "point") {
        auto z = centre();
        if (!z) return std::nullopt;
        return TerminalTarget::point(*z);
    }
    if (!event_only && *kind == "ball") {
        auto z = centre();
        auto r = radius();
        if (!z || !r) return std::nullopt;
        return TerminalTarget::ball(*z, *r);
    }
    c.fail(Checker::at(p, "kind"), event_only ? "must be \"half_space\" or \"ball_complement\""
                                              : "must be \"point\", \"ball\", \"half_space\" or \"ball_complement\"");
    return std::nullopt;
}

std::optional<ControlSpec> read_control(Checker& c, const json& t, const std::string& p, std::size_t modes,
                                        std::size_t marks) {
    ControlSpec spec;
    auto intervals = c.count(t, p, "intervals", false, 1, 1);
    if (!intervals) return std::nullopt;
    spec.intervals = *intervals;
    auto rows = [&](const std::string& key, std::size_t width, double fill,
                    std::vector<std::vector<double>>& out) -> bool {
        const json* v = c.find(t, key);
        const std::string kp = Checker::at(p, key);
        if (!v) {
            out.assign(1, std::vector<double>(width, fill));
            return true;
        }
        if (!v->is_array()) {
            c.fail(kp, "must be an array");
            return false;
        }
        const bool nested = !v->empty() && (*v)[0].is_array();
        std::vector<json> items = nested ? std::vector<json>(v->begin(), v->end()) : std::vector<json>{*v};
        if (nested && items.size() != spec.intervals && items.size() != 1) {
            c.fail(kp, "needs one row per interval (" + std::to_string(spec.intervals) + ") or a single row");
            return false;
        }
        bool ok = true;
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto r = c.numbers(items[i], nested ? Checker::at(kp, i) : kp);
            if (!r) {
                ok = false;
                continue;
            }
            if (r->size() != width) {
                c.fail(nested ? Checker::at(kp, i) : kp, "must have " + std::to_string(width) + " entries");
                ok = false;
                continue;
            }
            out.push_back(*r);
        }
        return ok;
    };
    bool ok = rows("f", modes, 0.0, spec.f);
    ok = rows("g", marks, 1.0, spec.g) && ok;
    for (std::size_t i = 0; ok && i < spec.g.size(); ++i)
        for (std::size_t j = 0; j < spec.g[i].size(); ++j)
            if (!(spec.g[i][j] >= ControlPair::kDefaultGMin && spec.g[i][j] <= ControlPair::kDefaultGMax)) {
                c.fail(Checker::at(p, "g"), "values must lie in [1e-6, 1e6]");
                ok = false;
                break;
            }
    if (!ok) return std::nullopt;
    return spec;
}

std::vector<double> read_eps_list(Checker& c, const json& e, const std::string& p, bool required) {
    auto v = c.numbers(e, p, "eps_list", required);
    if (!v) return {};
    for (std::size_t i = 0; i < v->size(); ++i)
        if (!((*v)[i] > 0.0)) c.fail(Checker::at(Checker::at(p, "eps_list"), i), "must be > 0");
    return *v;
}

}  // namespace

ControlPair ControlSpec::build(const Model& model) const {
    std::vector<SpectralField> fs;
    std::vector<std::vector<double>> gs;
    for (std::size_t i = 0; i < intervals; ++i) {
        fs.emplace_back(f.size() == 1 ? f[0] : f[i]);
        gs.push_back(g.size() == 1 ? g[0] : g[i]);
    }
    if (fs.front().size() != model.modes() || gs.front().size() != model.marks.size())
        throw std::invalid_argument("ControlSpec: dimensions do not match the model");
    return ControlPair(TimeGrid::uniform(model.horizon, intervals), std::move(fs), std::move(gs));
}

std::string ExperimentConfig::hash() const {
    const std::string canon = tree.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
    ExperimentConfig cfg;
    const std::string cleaned = resolve_duplicate_keys(text, cfg.warnings);
    toml::table doc;
    try {
        doc = toml::parse(cleaned, source);
    } catch (const toml::parse_error& err) {
        std::ostringstream os;
        os << source << ":" << err.source().begin.line << ": " << err.description();
        throw ConfigError({os.str()});
    }
    cfg.tree = to_json(doc);
    const json& root = cfg.tree;
    Checker c;

    // ---- model
    const json* model = c.table(root, "", "model", true);
    std::optional<std::size_t> modes;
    std::optional<EigenSystem> eig;
    std::optional<double> horizon;
    std::optional<std::vector<double>> x0;
    std::optional<DiffusionCoefficient> diff;
    std::vector<JumpLaw> laws;
    std::size_t mark_count = 0;  // declared marks, valid or not
    std::vector<std::string> labels;
    std::vector<double> weights;
    bool marks_ok = true;
    std::optional<PiecewiseConstant> majorant;
    if (model) {
        eig = read_eigen(c, *model, modes);
        horizon = c.number(*model, "model", "horizon", true);
        if (horizon && !(*horizon > 0.0)) {
            c.fail("model.horizon", "must be > 0");
            horizon.reset();
        }
        if (horizon) c.horizon = *horizon;
        x0 = c.numbers(*model, "model", "x0", true);
        if (x0 && modes && x0->size() != *modes) {
            c.fail("model.x0", "must have " + std::to_string(*modes) + " entries (one per mode)");
            x0.reset();
        }

        if (const json* d = c.table(*model, "model", "diffusion", true)) {
            const std::string p = "model.diffusion";
            std::vector<PiecewiseConstant> a;
            bool ok = true;
            if (const json* av = c.find(*d, "a")) {
                if (!av->is_array()) {
                    c.fail(p + ".a", "must be an array with one entry per mode");
                    ok = false;
                } else {
                    for (std::size_t k = 0; k < av->size(); ++k) {
                        auto f = c.step_function((*av)[k], Checker::at(p + ".a", k));
                        if (f) a.push_back(*f);
                        else ok = false;
                    }
                }
            } else {
                c.fail(p + ".a", "missing required field");
                ok = false;
            }
            auto b = c.numbers(*d, p, "b", false);
            if (!b && !c.find(*d, "b")) b = std::vector<double>(a.size(), 0.0);
            auto clip = c.number(*d, p, "clip", false, std::numeric_limits<double>::infinity());
            if (clip && !(*clip > 0.0)) {
                c.fail(p + ".clip", "must be > 0");
                clip.reset();
            }
            if (ok && modes && a.size() != *modes) {
                c.fail(p + ".a", "must have " + std::to_string(*modes) + " entries");
                ok = false;
            }
            if (ok && b && b->size() != a.size()) {
                c.fail(p + ".b", "must have " + std::to_string(a.size()) + " entries");
                ok = false;
            }
            if (ok && b && clip) diff = DiffusionCoefficient(a, *b, *clip);
        }

        const json* mk = c.find(*model, "marks");
        if (!mk) {
            c.fail("model.marks", "missing required array of mark tables");
            marks_ok = false;
        } else if (!mk->is_array() || mk->empty()) {
            c.fail("model.marks", "must be a non-empty array of tables");
            marks_ok = false;
        } else {
            mark_count = mk->size();
            for (std::size_t j = 0; j < mk->size(); ++j) {
                const std::string p = Checker::at("model.marks", j);
                const json& m = (*mk)[j];
                if (!m.is_object()) {
                    c.fail(p, "must be a table");
                    marks_ok = false;
                    continue;
                }
                auto label = c.string(m, p, "label", false, "v" + std::to_string(j + 1));
                auto w = c.number(m, p, "weight", true);
                if (w && !(*w > 0.0 && std::isfinite(*w))) {
                    c.fail(p + ".weight", "must be positive and finite (got " + std::to_string(*w) + ")");
                    w.reset();
                }
                auto alpha = c.number(m, p, "alpha", false, 0.0);
                auto beta = c.number(m, p, "beta", false, 0.0);
                std::optional<PiecewiseConstant> scale = PiecewiseConstant(1.0);
                if (const json* s = c.find(m, "scale")) scale = c.step_function(*s, p + ".scale");
                std::optional<std::vector<double>> dir;
                if (c.find(m, "direction")) {
                    dir = c.numbers(m, p, "direction", true);
                    if (dir && modes && dir->size() != *modes) {
                        c.fail(p + ".direction", "must have " + std::to_string(*modes) + " entries");
                        dir.reset();
                    } else if (dir && alpha && *alpha != 0.0) {
                        double n2 = 0.0;
                        for (double v : *dir) n2 += v * v;
                        if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) {
                            c.fail(p + ".direction", "must be a unit vector when alpha != 0");
                            dir.reset();
                        }
                    }
                } else if (modes) {
                    if (alpha && *alpha != 0.0) c.fail(p + ".direction", "missing required field (alpha != 0)");
                    dir = std::vector<double>(*modes, 0.0);
                }
                if (!label || !w || !alpha || !beta || !scale || !dir) {
                    marks_ok = false;
                    continue;
                }
                labels.push_back(*label);
                weights.push_back(*w);
                laws.push_back(JumpLaw{*scale, *alpha, *beta, SpectralField(*dir)});
            }
        }
        if (const json* k = c.find(*model, "majorant")) {
            majorant = c.step_function(*k, "model.majorant");
            if (majorant)
                for (double v : majorant->values())
                    if (v < 0.0) {
                        c.fail("model.majorant", "K(t) must be >= 0");
                        majorant.reset();
                        break;
                    }
        }
    }

    // ---- grid
    if (const json* g = c.table(root, "", "grid", true)) {
        auto steps = c.count(*g, "grid", "steps", true, std::nullopt, 2);
        if (steps) cfg.steps = *steps;
        if (auto t = c.number(*g, "grid", "T", false))
            if (horizon && std::abs(*t - *horizon) > 1e-12 * *horizon)
                c.fail("grid.T", "inconsistent with model.horizon");
        if (auto k = c.count(*g, "grid", "K", false, std::nullopt, 1))
            if (modes && *k != *modes) c.fail("grid.K", "inconsistent with the eigen-system mode count");
    }

    // ---- output
    if (const json* o = c.table(root, "", "output", false))
        if (auto d = c.string(*o, "output", "dir", false)) cfg.output_dir = *d;

    // ---- model assembly
    const bool model_ok = model && eig && horizon && x0 && diff && marks_ok && c.errors.empty();
    if (model_ok) {
        try {
            JumpCoefficient jc(laws);
            MarkMeasure mm(labels, weights);
            PiecewiseConstant k = majorant ? *majorant : default_majorant(*diff, jc, mm, *horizon);
            cfg.model = Model{*eig, *diff, std::move(jc), std::move(mm), SpectralField(*x0), *horizon, std::move(k)};
            cfg.model.validate();
        } catch (const std::exception& e) {
            c.fail("model", e.what());
        }
    }

    // ---- experiment
    const json* ex = c.table(root, "", "experiment", true);
    if (ex) {
        const std::string p = "experiment";
        ExperimentParams& xp = cfg.experiment;
        auto kind = c.string(*ex, p, "kind", true);
        static const std::vector<std::string> kinds{"skeleton",  "simulate",  "rate",            "validate-ldp",
                                                    "converge",  "tightness", "check-conditions"};
        if (kind && std::find(kinds.begin(), kinds.end(), *kind) == kinds.end())
            c.fail(p + ".kind", "unknown experiment \"" + *kind + "\"");
        if (kind) xp.kind = *kind;
        if (auto s = c.integer(*ex, p, "seed", false, 0)) {
            if (*s < 0) c.fail(p + ".seed", "must be >= 0");
            else cfg.seed = static_cast<std::uint64_t>(*s);
        }
        const std::size_t K = modes.value_or(0);
        const std::size_t m = mark_count;

        if (auto v = c.number(*ex, p, "tol", false, 0.0)) xp.tol = *v;
        if (auto v = c.count(*ex, p, "max_iter", false, 100, 1)) xp.max_iter = *v;
        if (auto v = c.number(*ex, p, "epsilon", false, 0.01)) {
            if (!(*v > 0.0)) c.fail(p + ".epsilon", "must be > 0");
            xp.epsilon = *v;
        }
        xp.eps_list = read_eps_list(c, *ex, p, false);
        if (auto v = c.count(*ex, p, "paths", false, 1000, 1)) xp.paths = *v;
        if (auto v = c.count(*ex, p, "sim_steps", false, 0, 0)) xp.sim_steps = *v;
        if (auto v = c.boolean(*ex, p, "dump_noise", false)) xp.dump_noise = *v;
        if (auto v = c.count(*ex, p, "intervals", false, 10, 1)) xp.intervals = *v;
        if (auto v = c.count(*ex, p, "rate_steps", false, 200, 2)) xp.rate_steps = *v;
        if (auto v = c.count(*ex, p, "rate_max_iter", false, 300, 1)) xp.rate_max_iter = *v;
        if (c.find(*ex, "penalties"))
            if (auto v = c.numbers(*ex, p, "penalties", true)) {
                if (v->empty()) c.fail(p + ".penalties", "needs at least one value");
                xp.penalties = *v;
            }
        if (auto v = c.count(*ex, p, "target_hits", false, 20, 1)) xp.target_hits = *v;
        if (auto v = c.count(*ex, p, "max_paths", false, 1000000, 100)) xp.max_paths = *v;
        if (auto v = c.boolean(*ex, p, "compare_rate", true)) xp.compare_rate = *v;
        if (auto v = c.boolean(*ex, p, "importance", false)) xp.importance = *v;
        if (auto v = c.string(*ex, p, "variant", false, std::string("both"))) {
            if (*v != "a" && *v != "b" && *v != "both") c.fail(p + ".variant", "must be \"a\", \"b\" or \"both\"");
            xp.variant = *v;
        }
        if (const json* nl = c.find(*ex, "n_list")) {
            if (auto v = c.numbers(*nl, p + ".n_list"))
                for (std::size_t i = 0; i < v->size(); ++i) {
                    if (!((*v)[i] >= 1.0) || (*v)[i] != std::floor((*v)[i])) {
                        c.fail(Checker::at(p + ".n_list", i), "must be a positive integer");
                        continue;
                    }
                    xp.n_list.push_back(static_cast<std::size_t>((*v)[i]));
                }
        }
        if (auto v = c.number(*ex, p, "t0", false, 0.2)) xp.t0 = *v;
        if (const json* kl = c.find(*ex, "k_list")) {
            if (auto v = c.numbers(*kl, p + ".k_list"))
                for (std::size_t i = 0; i < v->size(); ++i) {
                    const double k = (*v)[i];
                    if (!(k >= 1.0) || k != std::floor(k) || (K && k > static_cast<double>(K + 1))) {
                        c.fail(Checker::at(p + ".k_list", i), "must be an integer in [1, K+1]");
                        continue;
                    }
                    xp.k_list.push_back(static_cast<std::size_t>(k));
                }
        }
        if (auto v = c.count(*ex, p, "samples", false, 2000, 1)) xp.samples = *v;
        if (auto v = c.number(*ex, p, "delta", false, 1.0)) xp.delta = *v;
        if (auto v = c.number(*ex, p, "budget", false, 1.0)) {
            if (!(*v >= 0.0)) c.fail(p + ".budget", "must be >= 0");
            xp.budget = *v;
        }
        if (auto v = c.number(*ex, p, "sigma", false, 1.0)) {
            if (!(*v > 0.0)) c.fail(p + ".sigma", "must be > 0");
            xp.sigma = *v;
        }

        if (K && m) {
            if (const json* t = c.table(*ex, p, "control", false)) xp.control = read_control(c, *t, p + ".control", K, m);
            if (const json* cl = c.find(*ex, "controls")) {
                if (!cl->is_array()) c.fail(p + ".controls", "must be an array of control tables");
                else
                    for (std::size_t i = 0; i < cl->size(); ++i) {
                        const std::string cp = Checker::at(p + ".controls", i);
                        if (!(*cl)[i].is_object()) {
                            c.fail(cp, "must be a table");
                            continue;
                        }
                        if (auto s = read_control(c, (*cl)[i], cp, K, m)) xp.controls.push_back(*s);
                    }
            }
        }
        if (K) {
            if (const json* t = c.table(*ex, p, "target", xp.kind == "rate")) xp.target = read_target(c, *t, p + ".target", K, false);
            if (const json* t = c.table(*ex, p, "event", xp.kind == "validate-ldp")) {
                if (auto tt = read_target(c, *t, p + ".event", K, true)) {
                    xp.event = tt->kind == TerminalTarget::Kind::half_space ? EventSpec::half_space(tt->level, tt->mode)
                                                                            : EventSpec::ball_complement(tt->centre, tt->radius);
                }
            }
        }
        if (xp.kind == "validate-ldp" && xp.eps_list.empty() && !c.find(*ex, "eps_list"))
            c.fail(p + ".eps_list", "missing required field");
        if (xp.kind == "tightness" && horizon && !(xp.t0 > 0.0 && xp.t0 < *horizon))
            c.fail(p + ".t0", "must lie in (0, T)");
    }

    if (!c.errors.empty()) throw ConfigError(c.errors);
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open config file"});
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    toml::table t;
    for (auto it = cfg.tree.begin(); it != cfg.tree.end(); ++it) insert_toml(t, it.key(), it.value());
    std::ostringstream os;
    os << toml::toml_formatter(t) << "\n";
    return os.str();
}

}  // namespace ldplab
