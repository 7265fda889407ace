#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "sectoral/acceptance.hpp"

// Runs the acceptance criteria and prints one line per criterion.
// With arguments, only the listed criterion ids (1-9) run, without the
// reproducibility pass.
int main(int argc, char** argv) {
    using namespace sectoral;
    SuiteOptions opt;
    opt.on_result = [](const CriterionResult& c) { std::cout << summary_line(c) << std::endl; };

    if (argc > 1) {
        detail::DilatedDecay dd;
        bool ok = true;
        for (int i = 1; i < argc; ++i) {
            const int id = std::atoi(argv[i]);
            std::function<CriterionResult()> body;
            switch (id) {
            case 1: body = criterion_thresholds; break;
            case 2: body = criterion_probe; break;
            case 3: body = criterion_completeness_table; break;
            case 4: body = criterion_eigen_oracles; break;
            case 5: body = [&] { return criterion_decay(dd); }; break;
            case 6: body = [&] { return criterion_transfer(dd); }; break;
            case 7: body = criterion_sector; break;
            case 8: body = [&] { return criterion_inequalities(opt.seed); }; break;
            case 9: body = criterion_identities; break;
            default: std::cerr << "unknown criterion " << argv[i] << "\n"; return 2;
            }
            CriterionResult r = detail::timed(0, body);
            r.id = id;
            std::cout << summary_line(r) << "\n" << r.metrics.dump() << std::endl;
            ok = ok && r.passed;
        }
        return ok ? 0 : 1;
    }

    VerifyArtifacts art;
    const SuiteRun run = run_acceptance(opt, &art);
    const std::filesystem::path out = "acceptance_out";
    std::filesystem::create_directories(out);
    write_text(out / "report.json", art.report);
    write_text(out / "junit.xml", art.junit);
    write_text(out / "manifest.json", art.manifest);
    int passed = 0;
    for (const auto& c : run.results) passed += c.passed ? 1 : 0;
    std::cout << passed << "/" << run.results.size() << " criteria passed" << std::endl;
    return run.passed() ? 0 : 1;
}
