// harness.hpp — configuration-driven experiment runner: verification suites,
// refinement sweeps, exact-solution comparisons, CSV emission. Configs are
// JSON (schema shipped in configs/schema.json); every run is deterministic
// for a fixed config + seed.

#pragma once

#include "fpme/extension.hpp"
#include "fpme/geometry.hpp"
#include "fpme/manifold.hpp"
#include "fpme/solver.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fpme::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExitCode : int { Pass = 0, ToleranceFailure = 1, ConfigError = 2, SolverFailure = 3 };

struct ResultRow {
    std::string experiment;
    std::string case_id;
    std::string params; // "key=value;key=value"
    std::string metric;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

struct SuiteResult {
    std::string suite;
    std::string csv_path;
    std::vector<ResultRow> rows;
    bool passed() const;
    std::string summary() const;
};

struct RunOutcome {
    ExitCode code = ExitCode::Pass;
    std::vector<SuiteResult> suites;
    std::string error; // populated for config/solver failures
};

/// Run a JSON config file; CSV lands in out_dir. `verb` restricts the
/// accepted experiment kinds ("verify", "solve", "sweep", "compare", or ""
/// for any).
RunOutcome run_config_file(const std::string& config_path, const std::string& out_dir,
                           const std::string& verb = "");
RunOutcome run_config_text(const std::string& config_text, const std::string& out_dir,
                           const std::string& verb = "", const std::string& source_name = "");

struct SuiteInfo {
    std::string name;
    std::string kind;
    std::string config_file;
    std::string description;
};

/// Built-in verification suites (one per shipped config).
const std::vector<SuiteInfo>& builtin_suites();

/// Drop the trailing timestamp column from CSV text (determinism compare).
std::string csv_without_timestamp(const std::string& csv_text);

// ---------------------------------------------------------------------------
// Deterministic random fields (trigonometric polynomials, seeded coefficients)

/// splitmix64; identical across platforms.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; } // [0,1)
    double symmetric() { return 2.0 * uniform() - 1.0; }                           // (-1,1)
};

struct FieldGenSpec {
    int active_modes = 16;
    double decay = 0.5;     // coefficient of mode q scales with decay^q
    double amplitude = 1.0; // sup-norm of the oscillatory part when normalized
    double offset = 0.0;    // constant physical offset
    bool mean_zero = false;
    bool normalize_sup = true;
};

SpectralField random_field(const ManifoldSnapshot& snapshot, std::uint64_t seed,
                           const FieldGenSpec& spec);

// ---------------------------------------------------------------------------
// Rate fitting

struct FitResult {
    double slope = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares on (x, log y); ys must be positive, ≥ 3 points.
FitResult fit_rate(const std::vector<double>& xs, const std::vector<double>& ys);

// ---------------------------------------------------------------------------
// Verification helpers shared by suites and tests

/// Max over a (n_theta × n_y) sample grid, y ∈ [y0, y1], of the cylinder
/// Laplacian of the full extension (spectral tangential part, 4th-order
/// finite differences in y).
double pde_residual_full(const SpectralField& u, int n_theta, int n_y, double y0, double y1);

/// Max coefficient error between the spectral DtN map and the Richardson-
/// extrapolated one-sided difference -(v(h)-v(0))/h at y = 0.
double dtn_richardson_error(const SpectralField& u, double h0 = 0.02);

/// y-quadrature oracle for the truncated gradient energy.
double grad_energy_truncated_quadrature(const SpectralField& u, double R);

/// Gradient energy of the competitor profile e^{-ay}(1 + ε q(y)) per mode,
/// q(y) = Σ_i poly[i] y^{i+1} (so q(0) = 0, trace preserved).
double competitor_energy(const SpectralField& u, double eps, const std::vector<double>& poly);

} // namespace fpme::harness
