#include <cstdio>
#include <cstdlib>
#include <string>

#include "hortonlab/acceptance.hpp"
#include "hortonlab/campaign.hpp"

// acceptance [seed] [scale] [criterion ...]
int main(int argc, char** argv) {
    hortonlab::AcceptanceOptions options;
    options.workers = hortonlab::worker_count();
    if (argc > 1) options.seed = std::stoull(argv[1]);
    if (argc > 2) options.scale = std::stod(argv[2]);
    for (int i = 3; i < argc; ++i) options.only.push_back(std::stoi(argv[i]));

    bool all = true;
    hortonlab::run_acceptance(options, [&](const hortonlab::CriterionResult& r) {
        std::printf("%s\n", hortonlab::summary_line(r).c_str());
        for (const auto& c : r.checks)
            if (!c.pass || std::getenv("HORTONLAB_VERBOSE")) std::printf("%s\n", hortonlab::check_line(c).c_str());
        for (const auto& n : r.notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
        all = all && r.pass;
    });
    return all ? 0 : 1;
}
