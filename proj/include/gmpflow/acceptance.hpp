#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// The acceptance suite: one entry per criterion, each with a measured value, its tolerance and a time budget.
namespace gmpflow::acceptance {

struct Criterion {
    int id = 0;
    std::string name;
    bool pass = false;
    double value = 0.0;       // worst measured deviation (or a flag value, see detail)
    double tolerance = 0.0;
    double seconds = 0.0;
    double budget = 0.0;      // seconds
    std::string detail;
};

struct Options {
    std::uint64_t seed = 20240607;
    bool inject_rotation_fault = false;   // mutation check: the flow identities must fail
    bool enforce_budget = true;
};

using Callback = std::function<void(const Criterion&)>;

std::vector<Criterion> run_all(const Options& opt = {}, const Callback& cb = {});
Criterion run_one(int id, const Options& opt = {});
int criterion_count();
// "PASS  1 name  value=... tol=... time=...s/...s  detail"
std::string format_line(const Criterion& c);

}  // namespace gmpflow::acceptance
