#include "scg/acceptance.hpp"
#include "scg/types.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <exception>

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria A1-A8"};
    std::vector<std::string> only;
    bool verbose = false;
    app.add_option("--only", only, "run only these criteria (A1..A8)");
    app.add_flag("-v,--verbose", verbose, "print per-point measurements");
    CLI11_PARSE(app, argc, argv);

    if (only.empty())
        for (const auto& c : scg::acceptance_criteria()) only.emplace_back(c.id);

    int failed = 0;
    for (const std::string& id : only) {
        const auto start = std::chrono::steady_clock::now();
        scg::CriterionResult r;
        try {
            r = scg::run_criterion(id);
        } catch (const scg::ConfigError& e) {
            std::fprintf(stderr, "%s\n", e.what());
            return 2;
        } catch (const std::exception& e) {
            r.id = id;
            r.summary = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s  %s  [%.1fs]\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.summary.c_str(), secs);
        if (verbose || !r.pass)
            for (const auto& d : r.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
