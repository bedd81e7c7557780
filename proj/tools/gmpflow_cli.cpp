// Command-line front end; uses only the C interface.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gmpflow.h"

namespace {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

Level log_level() {
    const char* v = std::getenv("GMPFLOW_LOG");
    if (v == nullptr) return Level::Info;
    const std::string s = v;
    if (s == "quiet" || s == "0" || s == "error") return Level::Quiet;
    if (s == "debug" || s == "2") return Level::Debug;
    return Level::Info;
}

void log(Level lv, const std::string& msg) {
    if (static_cast<int>(lv) <= static_cast<int>(log_level())) std::cerr << "gmpflow: " << msg << "\n";
}

// Exit code for a failed status: 1 for bad input, 2 for everything else.
int exit_code(gmpf_status st) { return st == GMPF_ERR_VALIDATION ? 1 : 2; }

struct Failure {
    int code;
};

void check(gmpf_status st, const std::string& what) {
    if (st == GMPF_OK) return;
    std::cerr << "gmpflow: error: " << what << ": " << gmpf_last_error() << "\n";
    throw Failure{exit_code(st)};
}

std::string read_input(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "gmpflow: error: cannot open " << path << "\n";
        throw Failure{1};
    }
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        if (!text.empty() && text.back() != '\n') std::fputc('\n', stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "gmpflow: error: cannot write " << path << "\n";
        throw Failure{1};
    }
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    log(Level::Debug, "wrote " + path);
}

std::string take(char* s) {
    std::string r = s ? s : "";
    gmpf_string_free(s);
    return r;
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
};
using Delta = Handle<gmpf_delta, gmpf_delta_free>;
using Window = Handle<gmpf_window, gmpf_window_free>;
using Jacobi = Handle<gmpf_jacobi, gmpf_jacobi_free>;

// A Delta file holds either Delta itself or a gap set.
void load_delta(const std::string& path, Delta& d) {
    const std::string text = read_input(path);
    if (gmpf_delta_parse(text.c_str(), &d.p) == GMPF_OK) return;
    const std::string as_delta = gmpf_last_error();
    const gmpf_status st = gmpf_delta_from_gapset(text.c_str(), &d.p);
    if (st == GMPF_OK) return;
    std::cerr << "gmpflow: error: " << path << " is neither a Delta nor a gap set\n  as Delta: " << as_delta
              << "\n  as gap set: " << gmpf_last_error() << "\n";
    throw Failure{exit_code(st)};
}

std::vector<int> parse_order(const std::string& s) {
    std::vector<int> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            std::cerr << "gmpflow: error: --order expects comma separated integers, got '" << s << "'\n";
            throw Failure{1};
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gmpflow: GMP matrices, their Jacobi flow and the related spectral constructions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", gmpf_version());

    gmpf_options opt;
    gmpf_options_default(&opt);
    std::string out_path, order_text;
    std::vector<int> order;
    const auto common = [&](CLI::App* c) {
        c->add_option("--out,-o", out_path, "output file (default stdout)");
        c->add_option("--seed", opt.seed, "seed recorded in the output")->capture_default_str();
    };
    const auto with_order = [&](CLI::App* c) {
        c->add_option("--order", order_text, "1-based pole ordering, e.g. 2,1");
    };

    std::string in1, in2;
    CLI::App* c_delta = app.add_subcommand("delta", "Delta and its summary from a gap set");
    c_delta->add_option("gapset", in1, "gap set JSON ('-' for stdin)")->required();
    common(c_delta);

    CLI::App* c_flow = app.add_subcommand("flow", "run the Jacobi flow on a GMP window, CSV per step");
    c_flow->add_option("window", in1, "GMP window or point JSON")->required();
    c_flow->add_option("--steps", opt.steps, "flow steps")->capture_default_str()->check(CLI::PositiveNumber);
    c_flow->add_option("--width", opt.width, "periodic extension of a single block")->capture_default_str()->check(CLI::PositiveNumber);
    c_flow->add_option("--eta", opt.eta, "weight of the distance column")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    common(c_flow);

    CLI::App* c_ks = app.add_subcommand("ks", "functional and diagnostics along the flow, CSV per step");
    c_ks->add_option("window", in1, "GMP window or point JSON")->required();
    c_ks->add_option("delta", in2, "Delta or gap set JSON")->required();
    c_ks->add_option("--steps", opt.steps, "flow steps")->capture_default_str()->check(CLI::PositiveNumber);
    c_ks->add_option("--width", opt.width, "periodic extension of a single block")->capture_default_str()->check(CLI::PositiveNumber);
    c_ks->add_option("--margin", opt.margin, "trusted-block margin")->capture_default_str()->check(CLI::Range(2, 1000));
    common(c_ks);

    CLI::App* c_iso = app.add_subcommand("iso-solve", "point on the isospectral set near a seed block");
    c_iso->add_option("delta", in1, "Delta or gap set JSON")->required();
    c_iso->add_option("seed_block", in2, "seed block JSON {\"p\":[...],\"q\":[...]}")->required();
    c_iso->add_option("--tol", opt.tol, "residual tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    with_order(c_iso);
    common(c_iso);

    CLI::App* c_j2g = app.add_subcommand("jacobi2gmp", "GMP window of a Jacobi window");
    c_j2g->add_option("jacobi", in1, "Jacobi window JSON")->required();
    c_j2g->add_option("delta", in2, "Delta or gap set JSON")->required();
    c_j2g->add_option("--blocks", opt.blocks, "output blocks -blocks+1..blocks-1")->capture_default_str()->check(CLI::Range(2, 1000));
    with_order(c_j2g);
    common(c_j2g);

    CLI::App* c_g2j = app.add_subcommand("gmp2jacobi", "Jacobi window of a GMP window via spectral measures");
    c_g2j->add_option("window", in1, "GMP window or point JSON")->required();
    c_g2j->add_option("--width", opt.width, "periodic extension of a single block")->capture_default_str()->check(CLI::PositiveNumber);
    common(c_g2j);

    bool inject = false, no_budget = false;
    CLI::App* c_self = app.add_subcommand("selftest", "run the acceptance criteria");
    c_self->add_flag("--inject-fault", inject, "flip a sign in the flow rotation; the flow criteria must fail");
    c_self->add_flag("--no-budget", no_budget, "do not enforce time budgets");
    common(c_self);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!order_text.empty()) {
            order = parse_order(order_text);
            opt.order = order.data();
            opt.order_len = static_cast<int>(order.size());
        }
        if (*c_delta) {
            Delta d;
            check(gmpf_delta_from_gapset(read_input(in1).c_str(), &d.p), in1);
            char* s = nullptr;
            check(gmpf_delta_summary(d.p, &s), "summary");
            write_output(out_path, take(s));
        } else if (*c_flow || *c_ks || *c_g2j) {
            Window w;
            check(gmpf_window_parse(read_input(in1).c_str(), opt.width, &w.p), in1);
            int valid = 0;
            char* msg = nullptr;
            check(gmpf_window_validate(w.p, &valid, &msg), "validate");
            const std::string m = take(msg);
            if (!valid) log(Level::Info, "warning: input window is not valid: " + m);
            char* s = nullptr;
            if (*c_flow) {
                check(gmpf_flow_csv(w.p, &opt, &s), "flow");
                write_output(out_path, take(s));
            } else if (*c_ks) {
                Delta d;
                load_delta(in2, d);
                check(gmpf_ks_csv(w.p, d.p, &opt, &s), "ks");
                write_output(out_path, take(s));
            } else {
                Jacobi j;
                check(gmpf_gmp_to_jacobi(w.p, &j.p), "gmp2jacobi");
                check(gmpf_jacobi_to_json(j.p, &s), "gmp2jacobi");
                write_output(out_path, take(s));
            }
        } else if (*c_iso) {
            Delta d;
            load_delta(in1, d);
            char* s = nullptr;
            check(gmpf_iso_solve(d.p, read_input(in2).c_str(), &opt, &s), "iso-solve");
            write_output(out_path, take(s));
        } else if (*c_j2g) {
            Jacobi j;
            check(gmpf_jacobi_parse(read_input(in1).c_str(), &j.p), in1);
            Delta d;
            load_delta(in2, d);
            Window w;
            check(gmpf_jacobi_to_gmp(j.p, d.p, &opt, &w.p), "jacobi2gmp");
            char* s = nullptr;
            check(gmpf_window_to_json(w.p, &s), "jacobi2gmp");
            write_output(out_path, take(s));
        } else if (*c_self) {
            std::string report;
            unsigned flags = 0;
            if (inject) flags |= GMPF_SELFTEST_INJECT_ROTATION_FAULT;
            if (no_budget) flags |= GMPF_SELFTEST_NO_BUDGET;
            int failures = 0;
            const auto cb = [](const gmpf_criterion* c, void* user) {
                *static_cast<std::string*>(user) += std::string(c->line) + "\n";
                if (log_level() >= Level::Debug) std::cerr << c->line << "\n";
            };
            check(gmpf_selftest(cb, &report, flags, opt.seed, &failures), "selftest");
            report += std::to_string(failures) + " criteria failed\n";
            write_output(out_path, report);
            if (failures > 0) return 2;
        }
    } catch (const Failure& f) {
        return f.code;
    }
    return 0;
}
