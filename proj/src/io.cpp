#include "gmpflow/io.hpp"

#include <cstdio>

#include "json.hpp"

namespace gmpflow::io {

namespace {

using nk::Vec;

using json = nlohmann::ordered_json;

json parse(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // locate the byte offset as line:column
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON: " + e.what());
    }
}

const json& field(const json& j, const char* key, const std::string& source) {
    if (!j.is_object()) throw ValidationError(source + ": expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError(source + ": missing field '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ValidationError(where + ": expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer");
    return j.get<int>();
}

Vec numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ValidationError(where + ": expected an array of numbers");
    Vec v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

gmp::GmpBlock block_of(const json& j, const std::string& where) {
    gmp::GmpBlock b{numbers(field(j, "p", where), where + ".p"), numbers(field(j, "q", where), where + ".q")};
    try {
        b.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
    return b;
}

json block_json(const gmp::GmpBlock& b) { return json{{"p", b.p}, {"q", b.q}}; }

fg::DeltaData delta_of(const json& j, const std::string& source) {
    fg::DeltaData d;
    d.lambda0 = number(field(j, "lambda0", source), source + ".lambda0");
    d.c0 = number(field(j, "c0", source), source + ".c0");
    const json& poles = field(j, "poles", source);
    if (!poles.is_array()) throw ValidationError(source + ".poles: expected an array");
    for (std::size_t k = 0; k < poles.size(); ++k) {
        const std::string w = source + ".poles[" + std::to_string(k) + "]";
        d.poles.push_back({number(field(poles[k], "c", w), w + ".c"), number(field(poles[k], "lambda", w), w + ".lambda")});
    }
    d.validate();
    return d;
}

json delta_json(const fg::DeltaData& d) {
    json poles = json::array();
    for (const auto& p : d.poles) poles.push_back(json{{"c", p.c}, {"lambda", p.lambda}});
    return json{{"lambda0", d.lambda0}, {"c0", d.c0}, {"poles", poles}};
}

}  // namespace

fg::GapSet gapset_from_json(const std::string& text, const std::string& source) {
    const json j = parse(text, source);
    fg::GapSet e;
    e.b0 = number(field(j, "b0", source), source + ".b0");
    e.a0 = number(field(j, "a0", source), source + ".a0");
    const json& gaps = field(j, "gaps", source);
    if (!gaps.is_array()) throw ValidationError(source + ".gaps: expected an array of pairs");
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        const std::string w = source + ".gaps[" + std::to_string(k) + "]";
        const Vec pr = numbers(gaps[k], w);
        if (pr.size() != 2) throw ValidationError(w + ": expected [a, b]");
        e.gaps.emplace_back(pr[0], pr[1]);
    }
    e.validate();
    return e;
}

fg::DeltaData delta_from_json(const std::string& text, const std::string& source) { return delta_of(parse(text, source), source); }

gmp::GmpBlock block_from_json(const std::string& text, const std::string& source) {
    const json j = parse(text, source);
    // accept either a bare block or an object with a "block" field
    if (j.is_object() && j.contains("block")) return block_of(j["block"], source + ".block");
    return block_of(j, source);
}

gmp::GmpWindow window_from_json(const std::string& text, const std::string& source) {
    const json j = parse(text, source);
    gmp::GmpWindow w;
    w.g = integer(field(j, "g", source), source + ".g");
    w.C = numbers(field(j, "C", source), source + ".C");
    w.j_min = integer(field(j, "j_min", source), source + ".j_min");
    const json& blocks = field(j, "blocks", source);
    if (!blocks.is_array()) throw ValidationError(source + ".blocks: expected an array");
    for (std::size_t k = 0; k < blocks.size(); ++k) w.blocks.push_back(block_of(blocks[k], source + ".blocks[" + std::to_string(k) + "]"));
    w.validate();
    return w;
}

gmp::GmpWindow window_or_point_from_json(const std::string& text, int width, const std::string& source) {
    if (width < 1) throw ValidationError(source + ": width must be positive");
    const json j = parse(text, source);
    if (j.is_object() && j.contains("block") && !j.contains("blocks")) {
        const gmp::GmpBlock b = block_of(j["block"], source + ".block");
        Vec C = numbers(field(j, "C", source), source + ".C");
        if (static_cast<int>(C.size()) != b.g()) throw ValidationError(source + ".C: expected " + std::to_string(b.g()) + " poles");
        return gmp::periodic_window(b, C, -width, width);
    }
    gmp::GmpWindow w = window_from_json(text, source);
    if (w.size() == 1) return gmp::periodic_window(w.blocks.front(), w.C, -width, width);
    return w;
}

jac::JacobiWindow jacobi_from_json(const std::string& text, const std::string& source) {
    const json j = parse(text, source);
    jac::JacobiWindow w;
    w.n_min = integer(field(j, "n_min", source), source + ".n_min");
    w.a = numbers(field(j, "a", source), source + ".a");
    w.b = numbers(field(j, "b", source), source + ".b");
    w.validate();
    return w;
}

jac::DiscreteMeasure measure_from_json(const std::string& text, const std::string& source) {
    const json j = parse(text, source);
    jac::DiscreteMeasure m{numbers(field(j, "points", source), source + ".points"),
                           numbers(field(j, "weights", source), source + ".weights")};
    m.validate();
    return m;
}

std::string to_json(const fg::GapSet& e) {
    json gaps = json::array();
    for (const auto& [a, b] : e.gaps) gaps.push_back(json::array({a, b}));
    return json{{"b0", e.b0}, {"a0", e.a0}, {"gaps", gaps}}.dump(2);
}

std::string to_json(const fg::DeltaData& d) { return delta_json(d).dump(2); }

std::string to_json(const gmp::GmpBlock& b) { return block_json(b).dump(2); }

std::string to_json(const gmp::GmpWindow& w) {
    json blocks = json::array();
    for (const auto& b : w.blocks) blocks.push_back(block_json(b));
    return json{{"g", w.g}, {"C", w.C}, {"j_min", w.j_min}, {"blocks", blocks}}.dump(2);
}

std::string to_json(const jac::JacobiWindow& j) { return json{{"n_min", j.n_min}, {"a", j.a}, {"b", j.b}}.dump(2); }

std::string to_json(const jac::DiscreteMeasure& m) { return json{{"points", m.points}, {"weights", m.weights}}.dump(2); }

std::string to_json(const iso::IsPoint& pt) {
    return json{{"block", block_json(pt.blk)},
                {"C", pt.C},
                {"delta", delta_json(pt.d)},
                {"residual", pt.residual},
                {"residual_max", pt.residual_max},
                {"iterations", pt.iterations}}
        .dump(2);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace gmpflow::io
