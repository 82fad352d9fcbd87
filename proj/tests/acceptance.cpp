// acceptance.cpp — runs every acceptance criterion through its shipped
// config file and prints one pass/fail line per criterion. The determinism
// criterion re-runs every suite and byte-compares the CSVs (timestamp
// column excluded). Exit status is the number of failed criteria.

#include "fpme/harness.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

#ifndef FPME_CONFIG_DIR
#define FPME_CONFIG_DIR "configs"
#endif

struct Criterion {
    int number;
    std::string name;
    std::string config_file;
};

const std::vector<Criterion> kCriteria = {
    {1, "extension correctness (PDE residual + trace)", "c01_extension_residual.json"},
    {2, "DtN equivalence (Richardson extrapolation)", "c02_dtn_richardson.json"},
    {3, "gradient-energy identity", "c03_gradient_energy.json"},
    {4, "truncation decay bound and rate", "c04_truncation_decay.json"},
    {5, "norm equivalence constants", "c05_norm_equivalence.json"},
    {6, "conservation of mass", "c06_mass_conservation.json"},
    {7, "L1-contraction", "c07_l1_contraction.json"},
    {8, "comparison principle", "c08_comparison.json"},
    {9, "weak maximum principle", "c09_max_principle.json"},
    {10, "exact-solution oracle, m=1", "c10_exact_heat.json"},
    {11, "constant-datum oracle", "c11_constant_datum.json"},
    {12, "regularization limit", "c12_regularization_limit.json"},
    {13, "truncated-to-full solver limit", "c13_truncated_to_full.json"},
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void report(int number, const std::string& name, bool passed, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d: %s (%s, %.1fs)\n", passed ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
}

} // namespace

int main(int argc, char** argv) {
    const std::string config_dir = argc > 1 ? argv[1] : FPME_CONFIG_DIR;
    const std::string out_a = argc > 2 ? argv[2] : "acceptance_out";
    const std::string out_b = out_a + "_rerun";

    int failures = 0;
    using Clock = std::chrono::steady_clock;

    for (const auto& crit : kCriteria) {
        const auto t0 = Clock::now();
        const auto outcome = fpme::harness::run_config_file(
            (std::filesystem::path(config_dir) / crit.config_file).string(), out_a);
        const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        std::string detail;
        bool passed = outcome.code == fpme::harness::ExitCode::Pass;
        if (!outcome.suites.empty()) {
            std::size_t ok = 0;
            for (const auto& r : outcome.suites[0].rows)
                if (r.pass) ++ok;
            std::ostringstream d;
            d << ok << "/" << outcome.suites[0].rows.size() << " checks";
            if (!passed) {
                for (const auto& r : outcome.suites[0].rows) {
                    if (!r.pass) {
                        d << "; first failure: " << r.metric << " value=" << r.value
                          << " threshold=" << r.threshold;
                        break;
                    }
                }
            }
            detail = d.str();
        } else {
            detail = outcome.error;
        }
        if (!passed) ++failures;
        report(crit.number, crit.name, passed, detail, dt);
    }

    // Criterion 14: byte-identical CSV on repeated runs of every suite.
    {
        const auto t0 = Clock::now();
        bool passed = true;
        std::string detail = "all suites byte-identical";
        for (const auto& crit : kCriteria) {
            const auto outcome = fpme::harness::run_config_file(
                (std::filesystem::path(config_dir) / crit.config_file).string(), out_b);
            if (outcome.suites.empty()) {
                passed = false;
                detail = "rerun failed for " + crit.config_file + ": " + outcome.error;
                break;
            }
            const auto name = std::filesystem::path(outcome.suites[0].csv_path).filename();
            const auto a = fpme::harness::csv_without_timestamp(
                slurp((std::filesystem::path(out_a) / name).string()));
            const auto b =
                fpme::harness::csv_without_timestamp(slurp(outcome.suites[0].csv_path));
            if (a.empty() || a != b) {
                passed = false;
                detail = "CSV mismatch for " + crit.config_file;
                break;
            }
        }
        const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        if (!passed) ++failures;
        report(14, "determinism (byte-identical CSV reruns)", passed, detail, dt);
    }

    if (failures == 0)
        std::printf("acceptance: all 14 criteria passed\n");
    else
        std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    return failures;
}
