#pragma once

// Output helpers: RFC-4180 style CSV, SVG 1.1 charts, SHA-256 manifests.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace cbrl::io {

namespace fs = std::filesystem;

/// Shortest representation that parses back to the same double.
inline std::string format_number(double v) { return fmt::format("{}", v); }

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) { row(header); }

    CsvWriter& row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ += ',';
            out_ += quote(fields[i]);
        }
        out_ += '\n';
        return *this;
    }

    const std::string& str() const { return out_; }

    static std::string quote(const std::string& field) {
        if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
        std::string q = "\"";
        for (char c : field) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

private:
    std::string out_;
};

inline std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---------------------------------------------------------------- SVG ----

struct Rgb {
    int r, g, b;
};

inline std::string hex(Rgb c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

/// Light gray at t=0 to dark blue at t=1.
inline Rgb ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    constexpr Rgb lo{240, 240, 240}, hi{8, 48, 107};
    auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    return {mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)};
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string svg_open(int width, int height) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
        width, height);
}

inline std::string svg_text(double x, double y, const std::string& s, const char* anchor = "middle",
                            int size = 11, double rotate = 0.0) {
    std::string transform = rotate != 0.0 ? fmt::format(" transform=\"rotate({} {:.1f} {:.1f})\"", rotate, x, y) : "";
    return fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"{}\" font-size=\"{}\"{}>{}</text>\n", x, y,
                       anchor, size, transform, escape_xml(s));
}

/// Heatmap with rows = y axis (drawn bottom to top) and columns = x axis.
/// values[row][col]; darker cells are larger.
inline std::string heatmap_svg(const std::vector<double>& x_axis, const std::vector<double>& y_axis,
                               const std::vector<std::vector<double>>& values, const std::string& title,
                               const std::string& x_label, const std::string& y_label) {
    const int cell = 28, left = 70, top = 40, bar_w = 18;
    const int grid_w = cell * static_cast<int>(x_axis.size());
    const int grid_h = cell * static_cast<int>(y_axis.size());
    const int width = left + grid_w + 110, height = top + grid_h + 60;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : values)
        for (double v : row) lo = std::min(lo, v), hi = std::max(hi, v);
    const double span = hi > lo ? hi - lo : 1.0;

    std::string svg = svg_open(width, height);
    svg += svg_text(left + grid_w / 2.0, 22, title, "middle", 14);
    for (std::size_t r = 0; r < y_axis.size(); ++r) {
        const double y = top + grid_h - cell * static_cast<double>(r + 1);
        for (std::size_t c = 0; c < x_axis.size(); ++c) {
            const double v = values[r][c];
            svg += fmt::format(
                "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{}={}, {}={}: {}</title></rect>\n",
                left + cell * static_cast<double>(c), y, cell, cell, hex(ramp((v - lo) / span)), y_label,
                format_number(y_axis[r]), x_label, format_number(x_axis[c]), fmt::format("{:.5g}", v));
        }
        svg += svg_text(left - 6, y + cell / 2.0 + 4, fmt::format("{:.2f}", y_axis[r]), "end", 9);
    }
    for (std::size_t c = 0; c < x_axis.size(); ++c) {
        svg += svg_text(left + cell * (c + 0.5), top + grid_h + 14, fmt::format("{:.2f}", x_axis[c]), "middle", 9);
    }
    svg += svg_text(left + grid_w / 2.0, top + grid_h + 36, x_label);
    svg += svg_text(18, top + grid_h / 2.0, y_label, "middle", 11, -90);

    // Colorbar with five numeric ticks.
    const int bx = left + grid_w + 20;
    const int steps = 50;
    for (int i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / (steps - 1);
        const double y = top + grid_h - (i + 1) * static_cast<double>(grid_h) / steps;
        svg += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"{}\" height=\"{:.2f}\" fill=\"{}\"/>\n", bx, y, bar_w,
                           static_cast<double>(grid_h) / steps + 0.5, hex(ramp(t)));
    }
    for (int k = 0; k <= 4; ++k) {
        const double t = k / 4.0;
        const double y = top + grid_h - t * grid_h;
        svg += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", bx + bar_w,
                           y, bx + bar_w + 4, y);
        svg += svg_text(bx + bar_w + 6, y + 4, fmt::format("{:.4g}", lo + t * span), "start", 9);
    }
    svg += "</svg>\n";
    return svg;
}

struct Series {
    std::string name;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band_lo;  // optional min/max band, same length as y
    std::vector<double> band_hi;
    bool markers = false;
};

inline std::string line_chart_svg(const std::vector<Series>& series, const std::string& title,
                                  const std::string& x_label, const std::string& y_label,
                                  const std::vector<std::string>& x_tick_labels = {}) {
    const int width = 720, height = 420, left = 70, right = 150, top = 40, bottom = 50;
    const int pw = width - left - right, ph = height - top - bottom;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
        for (double v : s.band_lo) y0 = std::min(y0, v);
        for (double v : s.band_hi) y1 = std::max(y1, v);
    }
    if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + ph - (v - y0) / (y1 - y0) * ph; };

    std::string svg = svg_open(width, height);
    svg += svg_text(left + pw / 2.0, 22, title, "middle", 14);
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                       top, pw, ph);
    for (int k = 0; k <= 5; ++k) {
        const double v = y0 + (y1 - y0) * k / 5.0;
        svg += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"#dddddd\"/>\n", left, py(v),
                           left + pw, py(v));
        svg += svg_text(left - 6, py(v) + 4, fmt::format("{:.3g}", v), "end", 9);
    }
    if (!x_tick_labels.empty() && !series.empty()) {
        const auto& xs = series.front().x;
        for (std::size_t i = 0; i < xs.size() && i < x_tick_labels.size(); ++i) {
            svg += svg_text(px(xs[i]), top + ph + 14, x_tick_labels[i], "middle", 9);
        }
    } else {
        for (int k = 0; k <= 5; ++k) {
            const double v = x0 + (x1 - x0) * k / 5.0;
            svg += svg_text(px(v), top + ph + 14, fmt::format("{:.4g}", v), "middle", 9);
        }
    }
    svg += svg_text(left + pw / 2.0, height - 12, x_label);
    svg += svg_text(18, top + ph / 2.0, y_label, "middle", 11, -90);

    int legend_y = top + 10;
    for (const auto& s : series) {
        if (!s.band_lo.empty() && s.band_lo.size() == s.x.size() && s.band_hi.size() == s.x.size()) {
            std::string pts;
            for (std::size_t i = 0; i < s.x.size(); ++i) pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.band_hi[i]));
            for (std::size_t i = s.x.size(); i-- > 0;) pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.band_lo[i]));
            svg += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n", pts,
                               s.color);
        }
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
        svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", pts,
                           s.color);
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(s.x[i]),
                                   py(s.y[i]), s.color);
            }
        }
        svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"3\"/>\n",
                           left + pw + 10, legend_y, left + pw + 30, legend_y, s.color);
        svg += svg_text(left + pw + 35, legend_y + 4, s.name, "start", 10);
        legend_y += 16;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace cbrl::io
