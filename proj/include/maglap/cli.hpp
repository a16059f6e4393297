#pragma once

#include "maglap/field.hpp"
#include "maglap/numerics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace maglap::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitThreshold = 1;  // a checked tolerance was missed
inline constexpr int kExitAccuracy = 2;   // precondition or convergence failure
inline constexpr int kExitIo = 3;         // filesystem failure

// Everything a subcommand needs, resolved from flags, an optional key=value
// config file (explicit flags win), and per-subcommand defaults.  The field
// parameter may be given in polar form (--b-mod/--b-arg) or Cartesian
// (--b-re/--b-im); mixing the two forms is rejected at parse time.
struct RunConfig {
    std::string subcommand;

    complexd b{1.0, 0.0};
    complexd lambda{2.0, 0.5};
    std::vector<double> thetas;  // landau-verify sweep
    double theta = 0.0;          // single angle for the complex quasimode

    double d = 0.4;
    double alpha = 1.5;
    int n_lo = 4, n_hi = 12, n_step = 2;
    int kmax = 4, lmax = 4;
    int quad_order = 96;

    int msize = 150;  // basis truncation behind the pseudospectrum map
    double re_lo = 0.0, re_hi = 6.5, im_lo = 0.0, im_hi = 6.5;
    int grid = 41;

    double target_h = 0.01;
    double tol = 1e-6;
    int samples = 50;
    unsigned seed = 4242;
    int threads = 0;  // 0 keeps the runtime default

    std::filesystem::path out_dir;  // --out, else $OUT_DIR, else "."
    std::string csv_name;           // empty picks the subcommand default
    std::string svg_name;
};

// One panel of the overview figure: the classification of the spectrum at a
// representative field value, plus the discrete levels when they exist.
// Continuous components are always drawn cyan, point markers magenta.
struct FigurePanel {
    char id = 'A';
    std::string subtitle;
    complexd b{};
    SpectrumClassification classification;
    std::vector<complexd> markers;
    const char* continuous_color = "cyan";
    const char* marker_color = "magenta";
};

// The five panels at b = 0, 1, e^{i pi/4}, e^{-i pi/4}, i.  Geometry comes
// from classify_spectrum and landau_levels alone; the renderer adds nothing.
std::vector<FigurePanel> make_figure_panels(int kmax = 4);

int cmd_landau_verify(const RunConfig& cfg);
int cmd_quasimode_complex(const RunConfig& cfg);
int cmd_quasimode_imag(const RunConfig& cfg);
int cmd_pseudospectrum(const RunConfig& cfg);
int cmd_filling_scan(const RunConfig& cfg);
int cmd_symmetry_check(const RunConfig& cfg);
int cmd_spectrum_figure(const RunConfig& cfg);

// Parses argv, merges config-file defaults, validates, dispatches, and maps
// failures onto the exit codes above: tolerance misses give 1, domain and
// convergence problems 2, filesystem trouble 3.
int run_cli(int argc, const char* const* argv);

}  // namespace maglap::cli
