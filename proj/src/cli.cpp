#include "maglap/cli.hpp"

#include "maglap/discrete.hpp"
#include "maglap/landau.hpp"
#include "maglap/operators.hpp"
#include "maglap/parallel.hpp"
#include "maglap/quasimode_complex.hpp"
#include "maglap/quasimode_imag.hpp"

#include "CLI11.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace maglap::cli {

namespace {

constexpr double kPi = std::numbers::pi;

// 17 significant digits: enough for a double to survive a print/parse
// round trip bit for bit.
std::string format_sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// All file output funnels through here: the content lands in a sibling temp
// file first and is renamed over the target, so readers never see a partial
// file and a failed run never clobbers an existing good one.
void atomic_write_text(const fs::path& path, const std::string& text) {
    const fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out)
            throw fs::filesystem_error("write failed", tmp,
                                       std::make_error_code(std::errc::io_error));
    }
    fs::rename(tmp, path);
}

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string text;
    text.reserve(header.size() + 1 + rows.size() * 96);
    text += header;
    text += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += row[i];
        }
        text += '\n';
    }
    atomic_write_text(path, text);
}

fs::path out_file(const RunConfig& cfg, const std::string& chosen, const char* fallback) {
    return cfg.out_dir / (chosen.empty() ? fallback : chosen.c_str());
}

// ---------------------------------------------------------------- SVG bits

void svg_open(std::string& s, int w, int h) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
         " " + std::to_string(h) + "\" font-family=\"Helvetica, Arial, sans-serif\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void svg_line(std::string& s, double x1, double y1, double x2, double y2,
              const std::string& stroke, double w, const std::string& extra = "") {
    s += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
         "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(w) +
         "\"" + extra + "/>\n";
}

void svg_rect(std::string& s, double x, double y, double w, double h,
              const std::string& fill, const std::string& extra = "") {
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"" + extra + "/>\n";
}

void svg_circle(std::string& s, double cx, double cy, double r,
                const std::string& fill, const std::string& extra = "") {
    s += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
         "\" fill=\"" + fill + "\"" + extra + "/>\n";
}

void svg_text(std::string& s, double x, double y, const std::string& t, int size,
              const std::string& anchor = "start", const std::string& fill = "#333333",
              const std::string& extra = "") {
    s += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\" fill=\"" + fill +
         "\"" + extra + ">" + t + "</text>\n";
}

double nice_step(double range, int target) {
    double raw = range / std::max(1, target);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double r = raw / mag;
    double n = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
    return n * mag;
}

std::vector<double> axis_ticks(double lo, double hi, int target = 5) {
    if (!(hi > lo)) return {lo};
    double step = nice_step(hi - lo, target);
    double t = std::ceil(lo / step - 1e-9) * step;
    std::vector<double> out;
    for (; t <= hi + 1e-9 * (hi - lo); t += step)
        out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    return out;
}

struct Series {
    std::vector<double> x, y;
    std::string color = "#1f6fb4";
    bool markers = true;
    bool dashed = false;
};

std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<Series>& series,
                          const std::vector<std::string>& notes) {
    const int W = 680, H = 470;
    const double L = 86, R = W - 26.0, T = 52, B = H - 60.0;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const Series& sr : series)
        for (std::size_t i = 0; i < sr.x.size(); ++i) {
            xlo = std::min(xlo, sr.x[i]);
            xhi = std::max(xhi, sr.x[i]);
            ylo = std::min(ylo, sr.y[i]);
            yhi = std::max(yhi, sr.y[i]);
        }
    if (!(xhi > xlo)) { xlo -= 1; xhi += 1; }
    if (!(yhi > ylo)) { ylo -= 1; yhi += 1; }
    const double xpad = 0.04 * (xhi - xlo), ypad = 0.06 * (yhi - ylo);
    xlo -= xpad; xhi += xpad; ylo -= ypad; yhi += ypad;

    auto px = [&](double x) { return L + (x - xlo) / (xhi - xlo) * (R - L); };
    auto py = [&](double y) { return B - (y - ylo) / (yhi - ylo) * (B - T); };

    std::string s;
    svg_open(s, W, H);
    for (double t : axis_ticks(xlo, xhi)) {
        svg_line(s, px(t), T, px(t), B, "#e8e8e8", 1);
        svg_text(s, px(t), B + 18, format_g(t), 11, "middle");
    }
    for (double t : axis_ticks(ylo, yhi)) {
        svg_line(s, L, py(t), R, py(t), "#e8e8e8", 1);
        svg_text(s, L - 8, py(t) + 4, format_g(t), 11, "end");
    }
    svg_rect(s, L, T, R - L, B - T, "none", " stroke=\"#555555\" stroke-width=\"1\"");
    svg_text(s, W / 2.0, 26, title, 15, "middle", "#222222");
    svg_text(s, (L + R) / 2, H - 16.0, xlabel, 13, "middle");
    {
        std::string mid = num((T + B) / 2);
        s += "<text x=\"22\" y=\"" + mid +
             "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333333\" "
             "transform=\"rotate(-90 22 " + mid + ")\">" + ylabel + "</text>\n";
    }
    for (std::size_t i = 0; i < notes.size(); ++i)
        svg_text(s, L + 12, T + 20 + 16.0 * i, notes[i], 12, "start", "#444444");

    for (const Series& sr : series) {
        std::string pts;
        for (std::size_t i = 0; i < sr.x.size(); ++i)
            pts += num(px(sr.x[i])) + "," + num(py(sr.y[i])) + " ";
        s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + sr.color +
             "\" stroke-width=\"2\"" +
             (sr.dashed ? std::string(" stroke-dasharray=\"7 5\"") : std::string()) + "/>\n";
        if (sr.markers)
            for (std::size_t i = 0; i < sr.x.size(); ++i)
                svg_circle(s, px(sr.x[i]), py(sr.y[i]), 3.2, sr.color);
    }
    s += "</svg>\n";
    return s;
}

std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    static const double stops[4][3] = {
        {13, 8, 135}, {126, 3, 168}, {224, 93, 56}, {240, 249, 33}};
    double pos = t * 3.0;
    int k = std::min(2, static_cast<int>(pos));
    double f = pos - k;
    char buf[10];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[k][0] + f * (stops[k + 1][0] - stops[k][0]))),
                  static_cast<int>(std::lround(stops[k][1] + f * (stops[k + 1][1] - stops[k][1]))),
                  static_cast<int>(std::lround(stops[k][2] + f * (stops[k + 1][2] - stops[k][2]))));
    return buf;
}

std::string heatmap_svg(const std::string& title, const SigmaMinMap& map,
                        const std::vector<complexd>& eigs) {
    const LambdaGrid& g = map.grid;
    const int W = 680, H = 580;
    const double L = 84, T = 52, plot = 440;
    const double cw = plot / g.re_pts, ch = plot / g.im_pts;

    double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
    for (int i = 0; i < g.im_pts; ++i)
        for (int j = 0; j < g.re_pts; ++j) {
            double v = map.values(i, j);
            if (std::isfinite(v) && v > 0) {
                double lg = std::log10(v);
                vlo = std::min(vlo, lg);
                vhi = std::max(vhi, lg);
            }
        }
    if (!(vhi > vlo)) { vlo = std::isfinite(vlo) ? vlo - 0.5 : -1.0; vhi = vlo + 1.0; }

    std::string s;
    svg_open(s, W, H);
    for (int i = 0; i < g.im_pts; ++i)
        for (int j = 0; j < g.re_pts; ++j) {
            double v = map.values(i, j);
            std::string fill = "#a0a0a0";
            if (std::isfinite(v) && v > 0)
                fill = ramp_color((std::log10(v) - vlo) / (vhi - vlo));
            svg_rect(s, L + j * cw, T + (g.im_pts - 1 - i) * ch, cw + 0.5, ch + 0.5, fill);
        }

    auto px = [&](double re) {
        return g.re_pts > 1 ? L + cw / 2 + (re - g.re_lo) / (g.re_hi - g.re_lo) * (plot - cw)
                            : L + plot / 2;
    };
    auto py = [&](double im) {
        return g.im_pts > 1 ? T + plot - ch / 2 - (im - g.im_lo) / (g.im_hi - g.im_lo) * (plot - ch)
                            : T + plot / 2;
    };
    for (const complexd& e : eigs)
        if (e.real() >= g.re_lo && e.real() <= g.re_hi && e.imag() >= g.im_lo &&
            e.imag() <= g.im_hi)
            s += "<circle cx=\"" + num(px(e.real())) + "\" cy=\"" + num(py(e.imag())) +
                 "\" r=\"4.5\" fill=\"none\" stroke=\"magenta\" stroke-width=\"2\" "
                 "class=\"eigenvalue\"/>\n";

    svg_rect(s, L, T, plot, plot, "none", " stroke=\"#555555\" stroke-width=\"1\"");
    for (double t : axis_ticks(g.re_lo, g.re_hi))
        svg_text(s, px(t), T + plot + 18, format_g(t), 11, "middle");
    for (double t : axis_ticks(g.im_lo, g.im_hi))
        svg_text(s, L - 8, py(t) + 4, format_g(t), 11, "end");
    svg_text(s, W / 2.0, 26, title, 15, "middle", "#222222");
    svg_text(s, L + plot / 2, H - 16.0, "Re lambda", 13, "middle");
    {
        std::string mid = num(T + plot / 2);
        s += "<text x=\"22\" y=\"" + mid +
             "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333333\" "
             "transform=\"rotate(-90 22 " + mid + ")\">Im lambda</text>\n";
    }

    const double bx = L + plot + 28, bw = 16;
    const int segs = 64;
    for (int i = 0; i < segs; ++i) {
        double frac = (i + 0.5) / segs;
        svg_rect(s, bx, T + plot * (1.0 - (i + 1.0) / segs), bw, plot / segs + 0.5,
                 ramp_color(frac));
    }
    svg_rect(s, bx, T, bw, plot, "none", " stroke=\"#555555\" stroke-width=\"1\"");
    svg_text(s, bx + bw + 6, T + 10, format_g(vhi), 11);
    svg_text(s, bx + bw + 6, T + plot, format_g(vlo), 11);
    svg_text(s, bx + bw / 2, T - 10, "log10(sigma_min)", 11, "middle");
    s += "</svg>\n";
    return s;
}

std::string panel_svg(const FigurePanel& p) {
    const double view = 10.0;
    const int side = 380, header = 36, pad = 12;
    const int W = side + 2 * pad, H = header + side + 30;
    auto px = [&](double x) { return pad + (x + view) / (2 * view) * side; };
    auto py = [&](double y) { return header + (view - y) / (2 * view) * side; };

    std::string s;
    svg_open(s, W, H);
    svg_text(s, pad, 24, std::string("(") + p.id + ")  " + p.subtitle, 15, "start", "#222222");
    svg_line(s, px(-view), py(0), px(view), py(0), "#c4c4c4", 1);
    svg_line(s, px(0), py(-view), px(0), py(view), "#c4c4c4", 1);

    switch (p.classification.continuous) {
        case ContinuousPart::HalfLine:
            svg_line(s, px(0), py(0), px(view), py(0), p.continuous_color, 5,
                     " stroke-linecap=\"round\" class=\"continuous\"");
            break;
        case ContinuousPart::WholePlane:
            svg_rect(s, px(-view), py(view), side, side, p.continuous_color,
                     " fill-opacity=\"0.30\" class=\"continuous\"");
            break;
        case ContinuousPart::Empty:
            break;
    }
    for (const complexd& m : p.markers)
        if (std::abs(m.real()) <= view && std::abs(m.imag()) <= view)
            svg_circle(s, px(m.real()), py(m.imag()), 5, p.marker_color,
                       " class=\"marker\"");

    svg_rect(s, px(-view), py(view), side, side, "none",
             " stroke=\"#999999\" stroke-width=\"1\"");
    svg_text(s, pad, H - 10.0, p.classification.note, 11, "start", "#666666");
    s += "</svg>\n";
    return s;
}

}  // namespace

std::vector<FigurePanel> make_figure_panels(int kmax) {
    if (kmax < 0) throw std::domain_error("make_figure_panels: kmax must be >= 0");
    struct Def {
        char id;
        const char* subtitle;
        complexd b;
    };
    const Def defs[] = {
        {'A', "b = 0", complexd(0.0, 0.0)},
        {'B', "b = +-1", complexd(1.0, 0.0)},
        {'C', "b = +-e^{i pi/4}", std::polar(1.0, kPi / 4)},
        {'D', "b = +-e^{-i pi/4}", std::polar(1.0, -kPi / 4)},
        {'E', "b = +-i", complexd(0.0, 1.0)},
    };
    std::vector<FigurePanel> panels;
    for (const Def& d : defs) {
        FigurePanel p;
        p.id = d.id;
        p.subtitle = d.subtitle;
        p.b = d.b;
        p.classification = classify_spectrum(d.b);
        if (p.classification.points == PointPart::LandauSet)
            p.markers = landau_levels(d.b, kmax).values;
        panels.push_back(std::move(p));
    }
    return panels;
}

int cmd_landau_verify(const RunConfig& cfg) {
    std::vector<std::vector<std::string>> rows;
    double worst = 0.0;
    for (double theta : cfg.thetas) {
        complexd b = std::polar(std::abs(cfg.b), theta);
        for (int k = 0; k <= cfg.kmax; ++k)
            for (int l = 0; l <= cfg.lmax; ++l) {
                EigenPairReport rep =
                    landau_eigen_residual(make_landau_mode(k, l, b), cfg.quad_order);
                worst = std::max(worst, rep.residual);
                rows.push_back({format_sci(theta), std::to_string(k), std::to_string(l),
                                format_sci(rep.eigenvalue.real()),
                                format_sci(rep.eigenvalue.imag()),
                                format_sci(rep.residual)});
            }
    }
    fs::path csv = out_file(cfg, cfg.csv_name, "landau_verify.csv");
    write_csv(csv, "theta,k,l,eigen_re,eigen_im,residual", rows);
    std::cout << rows.size() << " modes checked, largest relative residual "
              << format_g(worst) << " against tolerance " << format_g(cfg.tol) << "\n"
              << "wrote " << csv.string() << '\n';
    return worst < cfg.tol ? kExitOk : kExitThreshold;
}

int cmd_quasimode_complex(const RunConfig& cfg) {
    if (cfg.n_hi - cfg.n_lo < 1) {
        std::cerr << "quasimode-complex: the n range [" << cfg.n_lo << ", " << cfg.n_hi
                  << "] has a single point; a decay fit needs at least two\n";
        return kExitAccuracy;
    }
    ComplexQuasimodeConfig qcfg = make_complex_config(cfg.theta, cfg.d, cfg.lambda,
                                                      cfg.quad_order, cfg.n_lo, cfg.n_hi);
    std::vector<QuasimodeReport> reports = reports_for_range(qcfg);

    std::vector<std::vector<std::string>> rows;
    Series measured;
    for (const QuasimodeReport& r : reports) {
        rows.push_back({std::to_string(r.n), format_sci(r.log_norm_sq),
                        format_sci(r.log_residual_sq), format_sci(r.log_ratio),
                        format_sci(r.log_norm_model)});
        measured.x.push_back(static_cast<double>(r.n) * r.n);
        measured.y.push_back(r.log_ratio);
    }
    LineFit fit = fit_line(measured.x, measured.y);

    Series guide;
    guide.color = "#888888";
    guide.markers = false;
    guide.dashed = true;
    guide.x = {measured.x.front(), measured.x.back()};
    guide.y = {fit.intercept + fit.slope * guide.x[0], fit.intercept + fit.slope * guide.x[1]};

    fs::path csv = out_file(cfg, cfg.csv_name, "quasimode_complex.csv");
    write_csv(csv, "n,norm_sq_log,residual_sq_log,ratio_log,bound_model", rows);

    std::vector<std::string> notes = {
        "fitted rate per n^2: " + format_g(fit.slope),
        "admissible rate kappa - p_max: " + format_g(qcfg.kappa - qcfg.p_max),
        "log-ratio drop across the range: " +
            format_g(reports.front().log_ratio - reports.back().log_ratio),
    };
    fs::path svg = out_file(cfg, cfg.svg_name, "quasimode_complex.svg");
    atomic_write_text(
        svg, line_plot_svg("residual-to-norm ratio, theta = " + format_g(cfg.theta) +
                               ", lambda = " + format_g(cfg.lambda.real()) + " + " +
                               format_g(cfg.lambda.imag()) + "i",
                           "n^2", "log(residual^2 / norm^2)", {measured, guide}, notes));

    std::cout << reports.size() << " family members, fitted decay rate " << format_g(fit.slope)
              << " per n^2 (bound " << format_g(qcfg.kappa - qcfg.p_max) << ")\n"
              << "wrote " << csv.string() << " and " << svg.string() << '\n';
    return kExitOk;
}

int cmd_quasimode_imag(const RunConfig& cfg) {
    if (cfg.n_hi - cfg.n_lo < 1) {
        std::cerr << "quasimode-imaginary: the n range [" << cfg.n_lo << ", " << cfg.n_hi
                  << "] has a single point; a decay fit needs at least two\n";
        return kExitAccuracy;
    }
    ImagQuasimodeConfig icfg =
        make_imag_config(cfg.lambda, cfg.alpha, cfg.n_lo, cfg.n_hi, cfg.quad_order);
    ImagScanReport scan = imag_decay_scan(icfg);

    std::vector<std::vector<std::string>> rows;
    Series measured;
    for (const ImagReport& r : scan.reports) {
        rows.push_back({std::to_string(r.n), format_sci(std::log(r.norm_sq)),
                        format_sci(std::log(r.residual_sq)), format_sci(std::log(r.ratio)),
                        format_sci(std::log(r.model))});
        measured.x.push_back(std::log(static_cast<double>(r.n)));
        measured.y.push_back(std::log(r.ratio));
    }

    Series guide;
    guide.color = "#888888";
    guide.markers = false;
    guide.dashed = true;
    guide.x = {measured.x.front(), measured.x.back()};
    guide.y = {measured.y.front(),
               measured.y.front() + scan.model_ratio_slope * (guide.x[1] - guide.x[0])};

    fs::path csv = out_file(cfg, cfg.csv_name, "quasimode_imaginary.csv");
    write_csv(csv, "n,norm_sq_log,residual_sq_log,ratio_log,bound_model", rows);

    char slope_note[96];
    std::snprintf(slope_note, sizeof slope_note, "residual^2 slope: %.4f",
                  scan.residual_slope);
    std::vector<std::string> notes = {
        slope_note,
        "norm^2 slope: " + format_g(scan.norm_slope) + " (model " +
            format_g(scan.model_norm_slope) + ")",
        "ratio slope: " + format_g(scan.ratio_slope) + " (model " +
            format_g(scan.model_ratio_slope) + ", dashed guide)",
    };
    if (icfg.conjugated_from_input)
        notes.push_back("lambda replaced by its conjugate (upper half-plane form)");

    fs::path svg = out_file(cfg, cfg.svg_name, "quasimode_imaginary.svg");
    atomic_write_text(
        svg, line_plot_svg("kernel-family escape, lambda = " + format_g(icfg.lambda.real()) +
                               " + " + format_g(icfg.lambda.imag()) + "i, alpha = " +
                               format_g(icfg.alpha),
                           "log n", "log(residual^2 / norm^2)", {measured, guide}, notes));

    std::cout << scan.reports.size() << " family members, ratio slope "
              << format_g(scan.ratio_slope) << " (model " << format_g(scan.model_ratio_slope)
              << "), residual^2 slope " << format_g(scan.residual_slope) << "\n"
              << "wrote " << csv.string() << " and " << svg.string() << '\n';
    return kExitOk;
}

int cmd_pseudospectrum(const RunConfig& cfg) {
    OperatorMatrix M = rotated_oscillator_hermite(cfg.b, cfg.msize);
    LambdaGrid grid{cfg.re_lo, cfg.re_hi, cfg.im_lo, cfg.im_hi, cfg.grid, cfg.grid};
    SigmaMinMap map = pseudospectrum_map(M, grid);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(grid.re_pts) * grid.im_pts);
    for (int i = 0; i < grid.im_pts; ++i)
        for (int j = 0; j < grid.re_pts; ++j) {
            complexd l = grid.at(i, j);
            rows.push_back({format_sci(l.real()), format_sci(l.imag()),
                            format_sci(map.values(i, j))});
        }
    fs::path csv = out_file(cfg, cfg.csv_name, "pseudospectrum.csv");
    write_csv(csv, "re,im,sigma_min", rows);

    std::vector<complexd> eigs;
    if (M.block_size() <= 1024) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M.dense_block(0));
        if (es.info() == Eigen::Success)
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                eigs.push_back(es.eigenvalues()[i]);
    }
    fs::path svg = out_file(cfg, cfg.svg_name, "pseudospectrum.svg");
    atomic_write_text(svg, heatmap_svg("sigma_min(H - lambda), truncation " +
                                           std::to_string(cfg.msize),
                                       map, eigs));

    std::cout << grid.re_pts << "x" << grid.im_pts << " grid over [" << format_g(grid.re_lo)
              << ", " << format_g(grid.re_hi) << "] x [" << format_g(grid.im_lo) << ", "
              << format_g(grid.im_hi) << "], " << map.missing << " unresolved points\n"
              << "wrote " << csv.string() << " and " << svg.string() << '\n';
    return kExitOk;
}

int cmd_filling_scan(const RunConfig& cfg) {
    std::vector<int> ns;
    for (int n = cfg.n_lo; n <= cfg.n_hi; n += cfg.n_step) ns.push_back(n);
    FillingScan scan = filling_scan(cfg.b, cfg.lambda, ns, cfg.d, cfg.target_h);

    std::vector<std::vector<std::string>> rows;
    for (const FillingEntry& e : scan.entries)
        rows.push_back({std::to_string(e.n), format_sci(e.L), std::to_string(e.N),
                        format_sci(e.h), format_sci(e.sigma), format_sci(e.sigma_coarse),
                        e.resolved ? "1" : "0"});
    fs::path csv = out_file(cfg, cfg.csv_name, "filling_scan.csv");
    write_csv(csv, "n,L,N,h,sigma,sigma_coarse,resolved", rows);

    const bool complex_field = std::arg(cfg.b) > 0.0;
    std::cout << "sigma fell by a factor " << format_g(scan.overall_drop) << " from n = "
              << ns.front() << " to n = " << ns.back() << ", monotone decrease: "
              << (scan.strictly_decreasing ? "yes" : "no") << "\n"
              << "wrote " << csv.string() << '\n';
    if (complex_field && !scan.strictly_decreasing) {
        std::cerr << "filling-scan: sigma failed to decrease for a field with "
                     "positive argument\n";
        return kExitThreshold;
    }
    return kExitOk;
}

int cmd_symmetry_check(const RunConfig& cfg) {
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> mod(0.6, 1.6), ang(-3.0, 3.0), pt(-2.2, 2.2);

    std::vector<complexd> fields;
    for (int i = 0; i < 3; ++i) fields.push_back(std::polar(mod(rng), ang(rng)));
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < cfg.samples; ++i) {
        double a = pt(rng), b = pt(rng);
        samples.emplace_back(a, b);
    }

    std::vector<TestFunction> psis;
    psis.push_back({.value = [](double x1, double x2) {
        return complexd(std::exp(-0.5 * ((x1 - 0.3) * (x1 - 0.3) + (x2 + 0.2) * (x2 + 0.2))),
                        0.0);
    }});
    psis.push_back({.value = [](double x1, double x2) {
        double g = std::exp(-0.5 * (0.8 * (x1 + 0.1) * (x1 + 0.1) + 1.3 * x2 * x2));
        return g * std::exp(complexd(0.0, 0.7 * x1 - 0.4 * x2));
    }});

    struct Entry {
        const char* name;
        complexd b;
        double err;
    };
    std::vector<Entry> entries;
    auto probe = [&](SymmetryRelation rel, const char* name, complexd b) {
        double err = 0.0;
        for (const TestFunction& psi : psis)
            err = std::max(err, symmetry_residual(rel, b, psi, samples));
        entries.push_back({name, b, err});
    };
    for (const complexd& b : fields) {
        probe(SymmetryRelation::Scaling, "scaling", b);
        probe(SymmetryRelation::Reflection, "reflection", b);
        probe(SymmetryRelation::Conjugation, "conjugation", b);
    }
    probe(SymmetryRelation::TimeReversalAtI, "time-reversal", complexd(0.0, 1.0));

    double worst = 0.0;
    std::vector<std::vector<std::string>> rows;
    for (const Entry& e : entries) {
        worst = std::max(worst, e.err);
        char line[128];
        std::snprintf(line, sizeof line, "%-14s b = %+.4f%+.4fi   max error %.3e", e.name,
                      e.b.real(), e.b.imag(), e.err);
        std::cout << line << '\n';
        rows.push_back({e.name, format_sci(e.b.real()), format_sci(e.b.imag()),
                        format_sci(e.err)});
    }
    fs::path csv = out_file(cfg, cfg.csv_name, "symmetry_check.csv");
    write_csv(csv, "relation,b_re,b_im,max_error", rows);

    const bool pass = worst < cfg.tol;
    std::cout << "worst " << format_g(worst) << " against tolerance " << format_g(cfg.tol)
              << ": " << (pass ? "PASS" : "FAIL") << "\n"
              << "wrote " << csv.string() << '\n';
    return pass ? kExitOk : kExitThreshold;
}

int cmd_spectrum_figure(const RunConfig& cfg) {
    std::vector<FigurePanel> panels = make_figure_panels(cfg.kmax);
    std::string written;
    for (const FigurePanel& p : panels) {
        fs::path file = cfg.out_dir / (std::string("figure1_") +
                                       static_cast<char>(std::tolower(p.id)) + ".svg");
        atomic_write_text(file, panel_svg(p));
        written += ' ' + file.string();
    }
    std::cout << "wrote" << written << '\n';
    return kExitOk;
}

// ------------------------------------------------------------ flag parsing

namespace {

struct ParseState {
    RunConfig cfg;
    CLI::App app{"spectral toolkit for the planar Laplacian with a constant complex "
                 "magnetic field",
                 "maglap"};
    CLI::App* active = nullptr;
    double b_mod = 1.0, b_arg = 0.0, b_re = 0.0, b_im = 0.0;
    double lambda_re = 2.0, lambda_im = 0.5;
    std::string out_flag, config_file;
};

void add_output_opts(CLI::App* s, ParseState& st, bool with_csv, bool with_svg) {
    s->add_option("--out", st.out_flag, "output directory; beats $OUT_DIR, default .");
    if (with_csv) s->add_option("--csv", st.cfg.csv_name, "CSV name inside the output directory");
    if (with_svg) s->add_option("--svg", st.cfg.svg_name, "SVG name inside the output directory");
    s->add_option("--threads", st.cfg.threads,
                  "cap on OpenMP threads (0 keeps the runtime default)");
    s->add_option("--config", st.config_file, "key=value defaults file; explicit flags win");
}

void add_field_opts(CLI::App* s, ParseState& st) {
    s->add_option("--b-mod", st.b_mod, "field modulus");
    s->add_option("--b-arg", st.b_arg, "field argument, radians");
    s->add_option("--b-re", st.b_re, "field real part (conflicts with the polar form)");
    s->add_option("--b-im", st.b_im, "field imaginary part (conflicts with the polar form)");
}

void add_lambda_opts(CLI::App* s, ParseState& st) {
    s->add_option("--lambda-re", st.lambda_re, "spectral parameter, real part");
    s->add_option("--lambda-im", st.lambda_im, "spectral parameter, imaginary part");
}

void build_app(ParseState& st) {
    st.app.require_subcommand(1);

    CLI::App* lv = st.app.add_subcommand(
        "landau-verify", "eigen-residuals of the discrete-level modes over a sweep of "
                         "field arguments");
    lv->add_option("--theta", st.cfg.thetas,
                   "field arguments to sweep, radians in (0, pi/2); repeatable");
    lv->add_option("--b-mod", st.b_mod, "field modulus, must exceed sin^2(theta)");
    lv->add_option("--kmax", st.cfg.kmax, "largest fiber index");
    lv->add_option("--lmax", st.cfg.lmax, "largest transverse index");
    lv->add_option("--order", st.cfg.quad_order, "quadrature order");
    lv->add_option("--tol", st.cfg.tol, "residual tolerance deciding the exit code");
    add_output_opts(lv, st, true, false);

    CLI::App* qc = st.app.add_subcommand(
        "quasimode-complex",
        "decay of the residual-to-norm ratio for the ray-concentrated family");
    qc->add_option("--theta", st.cfg.theta, "field argument, radians in (0, pi/2)");
    qc->add_option("--d", st.cfg.d, "cutoff half-width in the ray slope, in (0, tan theta)");
    add_lambda_opts(qc, st);
    qc->add_option("--n-lo", st.cfg.n_lo, "first family index");
    qc->add_option("--n-hi", st.cfg.n_hi, "last family index");
    qc->add_option("--order", st.cfg.quad_order, "quadrature order");
    add_output_opts(qc, st, true, true);

    CLI::App* qi = st.app.add_subcommand(
        "quasimode-imaginary",
        "slow escape of the kernel-element family for the purely imaginary field");
    add_lambda_opts(qi, st);
    qi->add_option("--alpha", st.cfg.alpha, "mass-escape exponent, in (1, 2)");
    qi->add_option("--n-lo", st.cfg.n_lo, "first family index");
    qi->add_option("--n-hi", st.cfg.n_hi, "last family index");
    qi->add_option("--order", st.cfg.quad_order, "quadrature order");
    add_output_opts(qi, st, true, true);

    CLI::App* ps = st.app.add_subcommand(
        "pseudospectrum", "sigma_min(H - lambda) heatmap for the rotated oscillator matrix");
    add_field_opts(ps, st);
    ps->add_option("--n", st.cfg.msize, "matrix truncation, at least 16");
    ps->add_option("--re-lo", st.cfg.re_lo, "window lower edge, real axis");
    ps->add_option("--re-hi", st.cfg.re_hi, "window upper edge, real axis");
    ps->add_option("--im-lo", st.cfg.im_lo, "window lower edge, imaginary axis");
    ps->add_option("--im-hi", st.cfg.im_hi, "window upper edge, imaginary axis");
    ps->add_option("--grid", st.cfg.grid, "points per grid side, 1 to 512");
    add_output_opts(ps, st, true, true);

    CLI::App* fl = st.app.add_subcommand(
        "filling-scan", "sigma_min along the moving fiber well as the window fills");
    add_field_opts(fl, st);
    add_lambda_opts(fl, st);
    fl->add_option("--n-lo", st.cfg.n_lo, "first well position");
    fl->add_option("--n-hi", st.cfg.n_hi, "last well position");
    fl->add_option("--n-step", st.cfg.n_step, "stride through the well positions");
    fl->add_option("--d", st.cfg.d, "window margin per unit n");
    fl->add_option("--target-h", st.cfg.target_h, "grid spacing ceiling");
    add_output_opts(fl, st, true, false);

    CLI::App* sc = st.app.add_subcommand(
        "symmetry-check",
        "intertwining relations probed with Gaussian test functions at random fields");
    sc->add_option("--tol", st.cfg.tol, "max pointwise error deciding the exit code");
    sc->add_option("--samples", st.cfg.samples, "sample points per relation");
    sc->add_option("--seed", st.cfg.seed, "RNG seed for the fields and points");
    add_output_opts(sc, st, true, false);

    CLI::App* fig = st.app.add_subcommand(
        "figure1", "five-panel overview of the spectrum classification");
    fig->add_option("--kmax", st.cfg.kmax, "largest discrete level drawn");
    add_output_opts(fig, st, false, false);
}

// Defaults that differ between subcommands are applied after parsing, only
// where the flag was not given (on the command line or through the file).
void apply_defaults(ParseState& st) {
    CLI::App& s = *st.active;
    const std::string name = s.get_name();
    auto absent = [&](const char* flag) { return s.count(flag) == 0; };
    if (name == "landau-verify") {
        if (st.cfg.thetas.empty()) st.cfg.thetas = {kPi / 6, kPi / 4, kPi / 3};
        if (absent("--order")) st.cfg.quad_order = 160;
    } else if (name == "quasimode-complex") {
        if (absent("--theta")) st.cfg.theta = kPi / 4;
    } else if (name == "quasimode-imaginary") {
        if (absent("--lambda-re")) st.lambda_re = 0.0;
        if (absent("--lambda-im")) st.lambda_im = 1.0;
        if (absent("--n-lo")) st.cfg.n_lo = 10;
        if (absent("--n-hi")) st.cfg.n_hi = 50;
        if (absent("--order")) st.cfg.quad_order = 64;
    } else if (name == "pseudospectrum") {
        if (absent("--b-arg") && absent("--b-re") && absent("--b-im")) st.b_arg = kPi / 4;
    } else if (name == "filling-scan") {
        if (absent("--b-arg") && absent("--b-re") && absent("--b-im")) st.b_arg = kPi / 4;
        if (absent("--lambda-re")) st.lambda_re = -2.0;
        if (absent("--n-hi")) st.cfg.n_hi = 10;
    }
}

void resolve(ParseState& st) {
    CLI::App& s = *st.active;
    auto given = [&](const char* flag) {
        const CLI::Option* opt = s.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    const bool cart = given("--b-re") || given("--b-im");
    const bool polar = given("--b-mod") || given("--b-arg");
    if (cart && polar)
        throw std::invalid_argument(
            "field given twice: --b-re/--b-im conflict with --b-mod/--b-arg");
    st.cfg.b = cart ? complexd(st.b_re, st.b_im) : std::polar(st.b_mod, st.b_arg);
    st.cfg.lambda = complexd(st.lambda_re, st.lambda_im);

    if (!st.out_flag.empty())
        st.cfg.out_dir = st.out_flag;
    else if (const char* env = std::getenv("OUT_DIR"); env && *env)
        st.cfg.out_dir = env;
    else
        st.cfg.out_dir = ".";
}

// Checks owned by the command layer; everything downstream of a kernel
// constructor is validated there and surfaces as a domain error.
void validate(const ParseState& st) {
    const RunConfig& c = st.cfg;
    if (c.threads < 0) throw std::domain_error("--threads must be >= 0");
    if (c.subcommand == "landau-verify") {
        for (double th : c.thetas) {
            if (!(th > 0.0 && th < kPi / 2))
                throw std::domain_error("theta " + format_g(th) +
                                        " outside the open interval (0, pi/2)");
            double s = std::sin(th);
            if (std::abs(c.b) <= s * s)
                throw std::domain_error("field modulus " + format_g(std::abs(c.b)) +
                                        " does not exceed sin^2(theta) at theta " +
                                        format_g(th));
        }
        if (c.kmax < 0 || c.kmax > 10 || c.lmax < 0 || c.lmax > 10)
            throw std::domain_error("mode indices are limited to the range 0..10");
        if (!(c.tol > 0)) throw std::domain_error("--tol must be positive");
    } else if (c.subcommand == "symmetry-check") {
        if (c.samples < 1) throw std::domain_error("--samples must be >= 1");
        if (!(c.tol > 0)) throw std::domain_error("--tol must be positive");
    } else if (c.subcommand == "filling-scan") {
        if (c.n_step < 1) throw std::domain_error("--n-step must be >= 1");
        if (c.n_hi < c.n_lo) throw std::domain_error("--n-hi must not fall below --n-lo");
    } else if (c.subcommand == "figure1") {
        if (c.kmax < 0) throw std::domain_error("--kmax must be >= 0");
    }
}

std::string trim(std::string s) {
    auto issp = [](unsigned char ch) { return std::isspace(ch) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

// Reads key=value lines and returns "--key=value" tokens for every key the
// command line left unset, so explicit flags always win.  Keys must name
// options of the invoked subcommand.
std::vector<std::string> config_tokens(const fs::path& file, CLI::App& sub) {
    std::ifstream in(file);
    if (!in)
        throw fs::filesystem_error("cannot read config file", file,
                                   std::make_error_code(std::errc::no_such_file_or_directory));
    std::vector<std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " is not key=value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " has an empty key");
        std::string flag = "--" + key;
        if (sub.get_option_no_throw(flag) == nullptr)
            throw std::invalid_argument("config key '" + key + "' is not an option of " +
                                        sub.get_name());
        if (sub.count(flag) > 0) continue;
        out.push_back(flag + "=" + value);
    }
    return out;
}

// CLI11 consumes the token vector back to front.
void parse_app(CLI::App& app, const std::vector<std::string>& args) {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc) - 1 : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    try {
        // First pass: learn the subcommand, the flags actually given, and the
        // config file path.  The second pass re-parses with the file-supplied
        // defaults spliced in after the subcommand token.
        ParseState probe;
        build_app(probe);
        try {
            parse_app(probe.app, args);
        } catch (const CLI::ParseError& e) {
            return probe.app.exit(e) == 0 ? kExitOk : kExitAccuracy;
        }
        probe.active = probe.app.get_subcommands().front();

        std::vector<std::string> final_args = args;
        if (!probe.config_file.empty()) {
            std::vector<std::string> extra = config_tokens(probe.config_file, *probe.active);
            auto pos = std::find(final_args.begin(), final_args.end(),
                                 probe.active->get_name());
            pos = pos == final_args.end() ? final_args.begin() : pos + 1;
            final_args.insert(pos, extra.begin(), extra.end());
        }

        ParseState st;
        build_app(st);
        try {
            parse_app(st.app, final_args);
        } catch (const CLI::ParseError& e) {
            return st.app.exit(e) == 0 ? kExitOk : kExitAccuracy;
        }
        st.active = st.app.get_subcommands().front();
        st.cfg.subcommand = st.active->get_name();
        apply_defaults(st);
        resolve(st);
        validate(st);
        if (st.cfg.threads > 0) set_max_threads(st.cfg.threads);

        const std::string& name = st.cfg.subcommand;
        if (name == "landau-verify") return cmd_landau_verify(st.cfg);
        if (name == "quasimode-complex") return cmd_quasimode_complex(st.cfg);
        if (name == "quasimode-imaginary") return cmd_quasimode_imag(st.cfg);
        if (name == "pseudospectrum") return cmd_pseudospectrum(st.cfg);
        if (name == "filling-scan") return cmd_filling_scan(st.cfg);
        if (name == "symmetry-check") return cmd_symmetry_check(st.cfg);
        if (name == "figure1") return cmd_spectrum_figure(st.cfg);
        throw std::invalid_argument("unhandled subcommand " + name);
    } catch (const accuracy_error& e) {
        std::cerr << "accuracy failure: " << e.what() << '\n';
        return kExitAccuracy;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kExitAccuracy;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitAccuracy;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o failure: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o failure: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return kExitAccuracy;
    }
}

}  // namespace maglap::cli
