#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sectoral/digest.hpp"
#include "sectoral/discretize.hpp"
#include "sectoral/errors.hpp"
#include "sectoral/spectra.hpp"

namespace sectoral {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) { row(header); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) buf_ << ',';
            buf_ << cells[i];
        }
        buf_ << '\n';
    }

    std::string str() const { return buf_.str(); }

  private:
    std::ostringstream buf_;
};

inline std::string eigenvalues_csv(const SpectrumResult& r) {
    CsvWriter w({"re", "im", "converged"});
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
        w.row({format_double(r.eigenvalues[i].real()), format_double(r.eigenvalues[i].imag()),
               r.converged[i] ? "1" : "0"});
    return w.str();
}

inline std::string singular_values_csv(const std::vector<double>& v) {
    CsvWriter w({"index", "value"});
    for (std::size_t i = 0; i < v.size(); ++i) w.row({std::to_string(i + 1), format_double(v[i])});
    return w.str();
}

inline std::string fov_csv(const FieldOfValues& f) {
    CsvWriter w({"angle", "re", "im"});
    for (std::size_t i = 0; i < f.angles.size(); ++i)
        w.row({format_double(f.angles[i]), format_double(f.boundary_points[i].real()),
               format_double(f.boundary_points[i].imag())});
    return w.str();
}

inline std::string pseudospectrum_csv(const PseudospectrumGrid& g) {
    CsvWriter w({"re_z", "im_z", "sigma_min"});
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const complex_t z = g.node(ix, iy);
            w.row({format_double(z.real()), format_double(z.imag()),
                   format_double(g.sigma_min[static_cast<std::size_t>(iy) * g.nx + ix])});
        }
    return w.str();
}

/// Diagonal of an assembled matrix with node coordinates.
inline std::string diagonal_csv(const AssembledOperator& op) {
    std::vector<std::string> header{"index"};
    const char* names[2] = {"x", "y"};
    for (std::size_t a = 0; a < op.grid.dimension(); ++a) header.emplace_back(names[a]);
    header.emplace_back("re");
    header.emplace_back("im");
    CsvWriter w(header);
    for (std::size_t p = 0; p < op.grid.dof(); ++p) {
        std::vector<std::string> row{std::to_string(p)};
        for (double x : op.grid.point(p)) row.push_back(format_double(x));
        const complex_t d = op.matrix(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        row.push_back(format_double(d.real()));
        row.push_back(format_double(d.imag()));
        w.row(row);
    }
    return w.str();
}

// Binary matrix container, little-endian:
//   "SECM" | u32 version | u32 kind | u32 dimension | u64 rows | u64 cols
//   | per axis: f64 lower, f64 upper, f64 n
//   | rows*cols pairs of f64 (re, im), row-major.
namespace detail {

template <class T>
void put(std::string& out, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.append(b, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw Error("truncated SECM container");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

} // namespace detail

inline std::string secm_bytes(const AssembledOperator& op) {
    std::string out = "SECM";
    detail::put<std::uint32_t>(out, 1);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(op.kind));
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(op.grid.dimension()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(op.matrix.rows()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(op.matrix.cols()));
    for (std::size_t a = 0; a < op.grid.dimension(); ++a) {
        detail::put<double>(out, op.grid.lower[a]);
        detail::put<double>(out, op.grid.upper[a]);
        detail::put<double>(out, static_cast<double>(op.grid.n[a]));
    }
    out.reserve(out.size() + static_cast<std::size_t>(op.matrix.size()) * 16);
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < op.matrix.cols(); ++j) {
            detail::put<double>(out, op.matrix(i, j).real());
            detail::put<double>(out, op.matrix(i, j).imag());
        }
    return out;
}

inline AssembledOperator read_secm(const std::string& bytes) {
    if (bytes.size() < 4 || bytes.compare(0, 4, "SECM") != 0) throw Error("not a SECM container");
    std::size_t pos = 4;
    if (detail::get<std::uint32_t>(bytes, pos) != 1) throw Error("unsupported SECM version");
    AssembledOperator op;
    op.kind = static_cast<OperatorKind>(detail::get<std::uint32_t>(bytes, pos));
    const auto d = detail::get<std::uint32_t>(bytes, pos);
    const auto rows = detail::get<std::uint64_t>(bytes, pos);
    const auto cols = detail::get<std::uint64_t>(bytes, pos);
    for (std::uint32_t a = 0; a < d; ++a) {
        op.grid.lower.push_back(detail::get<double>(bytes, pos));
        op.grid.upper.push_back(detail::get<double>(bytes, pos));
        op.grid.n.push_back(static_cast<int>(detail::get<double>(bytes, pos)));
    }
    op.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < op.matrix.cols(); ++j) {
            const double re = detail::get<double>(bytes, pos);
            const double im = detail::get<double>(bytes, pos);
            op.matrix(i, j) = {re, im};
        }
    if (pos != bytes.size()) throw Error("trailing bytes in SECM container");
    return op;
}

inline std::string xml_escape(const std::string& in) {
    std::string out;
    for (char ch : in) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

// Minimal SVG plots: scatter with optional sector rays, and pseudospectrum contours.
class SvgPlot {
  public:
    SvgPlot(double xmin, double xmax, double ymin, double ymax, std::string title)
        : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), title_(std::move(title)) {
        if (!(xmax_ > xmin_)) xmax_ = xmin_ + 1.0;
        if (!(ymax_ > ymin_)) ymax_ = ymin_ + 1.0;
    }

    void points(const std::vector<complex_t>& z, const std::string& color, double r = 2.0) {
        for (complex_t p : z)
            body_ << "<circle cx=\"" << fx(p.real()) << "\" cy=\"" << fy(p.imag()) << "\" r=\"" << r << "\" fill=\""
                  << color << "\"/>\n";
    }

    void segment(complex_t a, complex_t b, const std::string& color, double width = 1.0) {
        body_ << "<line x1=\"" << fx(a.real()) << "\" y1=\"" << fy(a.imag()) << "\" x2=\"" << fx(b.real())
              << "\" y2=\"" << fy(b.imag()) << "\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
    }

    void ray(complex_t vertex, double angle, double length, const std::string& color) {
        segment(vertex, vertex + std::polar(length, angle), color, 1.0);
    }

    /// Marching-squares contours of log10(sigma_min).
    void contours(const PseudospectrumGrid& g, const std::vector<double>& levels) {
        static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
        auto val = [&](int ix, int iy) {
            return std::log10(std::max(g.sigma_min[static_cast<std::size_t>(iy) * g.nx + ix], 1e-300));
        };
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const double lv = levels[li];
            const std::string color = palette[li % 6];
            for (int iy = 0; iy + 1 < g.ny; ++iy)
                for (int ix = 0; ix + 1 < g.nx; ++ix) {
                    const complex_t c[4] = {g.node(ix, iy), g.node(ix + 1, iy), g.node(ix + 1, iy + 1), g.node(ix, iy + 1)};
                    const double v[4] = {val(ix, iy), val(ix + 1, iy), val(ix + 1, iy + 1), val(ix, iy + 1)};
                    std::vector<complex_t> hits;
                    for (int e = 0; e < 4; ++e) {
                        const double a = v[e] - lv, b = v[(e + 1) % 4] - lv;
                        if ((a < 0.0) != (b < 0.0)) hits.push_back(c[e] + (c[(e + 1) % 4] - c[e]) * (a / (a - b)));
                    }
                    for (std::size_t h = 0; h + 1 < hits.size(); h += 2) segment(hits[h], hits[h + 1], color, 1.0);
                }
        }
    }

    std::string str() const {
        std::ostringstream s;
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
          << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
          << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
          << xml_escape(title_) << "</text>\n";
        // axes through the origin when visible
        if (xmin_ <= 0.0 && xmax_ >= 0.0)
            s << "<line x1=\"" << fx(0) << "\" y1=\"" << M << "\" x2=\"" << fx(0) << "\" y2=\"" << H - M
              << "\" stroke=\"#bbb\"/>\n";
        if (ymin_ <= 0.0 && ymax_ >= 0.0)
            s << "<line x1=\"" << M << "\" y1=\"" << fy(0) << "\" x2=\"" << W - M << "\" y2=\"" << fy(0)
              << "\" stroke=\"#bbb\"/>\n";
        s << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        s << "<text x=\"" << M << "\" y=\"" << H - M + 16 << "\" font-size=\"10\">" << format_double(xmin_) << "</text>\n"
          << "<text x=\"" << W - M << "\" y=\"" << H - M + 16 << "\" font-size=\"10\" text-anchor=\"end\">"
          << format_double(xmax_) << "</text>\n"
          << "<text x=\"" << M - 4 << "\" y=\"" << H - M << "\" font-size=\"10\" text-anchor=\"end\">"
          << format_double(ymin_) << "</text>\n"
          << "<text x=\"" << M - 4 << "\" y=\"" << M + 10 << "\" font-size=\"10\" text-anchor=\"end\">"
          << format_double(ymax_) << "</text>\n";
        s << body_.str() << "</svg>\n";
        return s.str();
    }

  private:
    static constexpr double W = 640, H = 640, M = 48;
    double fx(double x) const { return M + (x - xmin_) / (xmax_ - xmin_) * (W - 2 * M); }
    double fy(double y) const { return H - M - (y - ymin_) / (ymax_ - ymin_) * (H - 2 * M); }

    double xmin_, xmax_, ymin_, ymax_;
    std::string title_;
    std::ostringstream body_;
};

/// Bounding box of a point set padded by 5%.
inline std::array<double, 4> padded_bounds(const std::vector<complex_t>& z) {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    bool first = true;
    for (complex_t p : z) {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) continue;
        if (first) {
            x0 = x1 = p.real();
            y0 = y1 = p.imag();
            first = false;
        }
        x0 = std::min(x0, p.real());
        x1 = std::max(x1, p.real());
        y0 = std::min(y0, p.imag());
        y1 = std::max(y1, p.imag());
    }
    const double px = 0.05 * std::max(x1 - x0, 1e-9), py = 0.05 * std::max(y1 - y0, 1e-9);
    return {x0 - px, x1 + px, y0 - py, y1 + py};
}

/// Files written by one invocation, with digests.
class Manifest {
  public:
    Manifest(std::filesystem::path dir, nlohmann::json header) : dir_(std::move(dir)), header_(std::move(header)) {}

    void add(const std::string& name, const std::string& kind, const std::string& bytes) {
        write_text(dir_ / name, bytes);
        files_.push_back({{"path", name}, {"kind", kind}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }

    void mark_partial(const std::string& reason) {
        header_["partial"] = true;
        header_["partial_reason"] = reason;
    }

    std::string str() const {
        nlohmann::json j = header_;
        j["files"] = files_;
        return j.dump(2) + "\n";
    }

    void write() const { write_text(dir_ / "manifest.json", str()); }

  private:
    std::filesystem::path dir_;
    nlohmann::json header_;
    nlohmann::json files_ = nlohmann::json::array();
};

} // namespace sectoral
