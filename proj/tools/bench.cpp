// Wall-clock comparison of the OpenMP kernels against their serial reference
// paths, with a bitwise equality check on the results.  Usage:
//
//   maglap_bench [repeats]
//
// Each kernel runs `repeats` times per policy (default 1) and the best time
// is kept, which filters allocator and cache warm-up noise on small boxes.

#include "maglap/discrete.hpp"
#include "maglap/landau.hpp"
#include "maglap/parallel.hpp"
#include "maglap/quasimode_complex.hpp"
#include "maglap/quasimode_imag.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>

namespace {

using maglap::Exec;

double best_seconds(int repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-28s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   results %s\n",
                name, serial, parallel, serial / parallel,
                identical ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 1;
    const double pi = std::numbers::pi;
    std::printf("threads available: %d, repeats per measurement: %d\n\n",
                maglap::max_threads(), repeats);

    {
        maglap::OperatorMatrix M =
            maglap::rotated_oscillator_hermite(std::polar(1.0, pi / 4), 150);
        maglap::LambdaGrid grid{0.0, 6.5, 0.0, 6.5, 25, 25};
        maglap::SigmaMinMap serial_map, parallel_map;
        double ts = best_seconds(repeats, [&] {
            serial_map = maglap::pseudospectrum_map(M, grid, Exec::Serial);
        });
        double tp = best_seconds(repeats, [&] {
            parallel_map = maglap::pseudospectrum_map(M, grid, Exec::Parallel);
        });
        bool same = serial_map.values.rows() == parallel_map.values.rows();
        for (int i = 0; same && i < serial_map.values.rows(); ++i)
            for (int j = 0; same && j < serial_map.values.cols(); ++j) {
                double a = serial_map.values(i, j), b = parallel_map.values(i, j);
                same = (std::isnan(a) && std::isnan(b)) || a == b;
            }
        report("pseudospectrum_map 25x25", ts, tp, same);
    }

    {
        maglap::ComplexQuasimodeConfig cfg = maglap::make_complex_config(
            pi / 4, 0.4, maglap::complexd(2.0, 0.5), 96, 4, 12);
        std::vector<maglap::QuasimodeReport> rs, rp;
        double ts = best_seconds(repeats, [&] {
            rs = maglap::reports_for_range(cfg, Exec::Serial);
        });
        double tp = best_seconds(repeats, [&] {
            rp = maglap::reports_for_range(cfg, Exec::Parallel);
        });
        bool same = rs.size() == rp.size();
        for (std::size_t i = 0; same && i < rs.size(); ++i)
            same = rs[i].log_norm_sq == rp[i].log_norm_sq &&
                   rs[i].log_residual_sq == rp[i].log_residual_sq;
        report("complex quasimode n=4..12", ts, tp, same);
    }

    {
        maglap::ImagQuasimodeConfig cfg =
            maglap::make_imag_config(maglap::complexd(0.0, 1.0), 1.5, 10, 50);
        std::vector<maglap::ImagReport> rs, rp;
        double ts = best_seconds(repeats, [&] {
            rs = maglap::imag_reports(cfg, Exec::Serial);
        });
        double tp = best_seconds(repeats, [&] {
            rp = maglap::imag_reports(cfg, Exec::Parallel);
        });
        bool same = rs.size() == rp.size();
        for (std::size_t i = 0; same && i < rs.size(); ++i)
            same = rs[i].norm_sq == rp[i].norm_sq && rs[i].residual_sq == rp[i].residual_sq;
        report("imaginary quasimode n=10..50", ts, tp, same);
    }

    {
        std::vector<int> ns = {4, 5, 6};
        maglap::FillingScan ss, sp;
        double ts = best_seconds(repeats, [&] {
            ss = maglap::filling_scan(std::polar(1.0, pi / 4), {-2.0, 0.5}, ns, 0.4, 0.01,
                                      Exec::Serial);
        });
        double tp = best_seconds(repeats, [&] {
            sp = maglap::filling_scan(std::polar(1.0, pi / 4), {-2.0, 0.5}, ns, 0.4, 0.01,
                                      Exec::Parallel);
        });
        bool same = ss.entries.size() == sp.entries.size();
        for (std::size_t i = 0; same && i < ss.entries.size(); ++i)
            same = ss.entries[i].sigma == sp.entries[i].sigma &&
                   ss.entries[i].sigma_coarse == sp.entries[i].sigma_coarse;
        report("filling_scan n=4..6", ts, tp, same);
    }

    return 0;
}
