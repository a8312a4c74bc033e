// Runs every acceptance criterion and prints one PASS/FAIL line each.

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>

#include "acceptance/harness.hpp"

namespace amazul::acceptance {

std::vector<Entry>& registry()
{
    static std::vector<Entry> entries;
    return entries;
}

}  // namespace amazul::acceptance

int main(int argc, char** argv)
{
    using namespace amazul::acceptance;
    std::string only = argc > 1 ? argv[1] : "";
    int failed = 0, run = 0;
    for (const auto& entry : registry()) {
        if (!only.empty() && entry.name.find(only) == std::string::npos)
            continue;
        ++run;
        Tally tally;
        auto start = std::chrono::steady_clock::now();
        try {
            entry.run(tally);
        } catch (const std::exception& e) {
            tally.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %-34s %4zu checks %7.3fs", tally.passed() ? "PASS" : "FAIL", entry.name.c_str(), tally.checks(),
                    secs);
        auto note = tally.note.str();
        if (!note.empty())
            std::printf("  %s", note.c_str());
        std::printf("\n");
        for (std::size_t i = 0; i < tally.failures().size() && i < 5; ++i)
            std::printf("     - %s\n", tally.failures()[i].c_str());
        if (tally.failures().size() > 5)
            std::printf("     - ... %zu more\n", tally.failures().size() - 5);
        failed += tally.passed() ? 0 : 1;
    }
    std::printf("%d of %d criteria passed\n", run - failed, run);
    return failed == 0 && run > 0 ? 0 : 1;
}
