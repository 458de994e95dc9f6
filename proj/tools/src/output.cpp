#include "output.hpp"

#include <naqmd/types.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <sstream>

namespace naqmd::app {

void Table::add_row(std::vector<double> row)
{
    if (row.size() != columns.size()) {
        throw ValidationError(fmt::format("row has {} values for {} columns", row.size(), columns.size()));
    }
    rows.push_back(std::move(row));
}

std::vector<double> Table::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw ValidationError(fmt::format("table has no column '{}'", name));
    }
    const auto j = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r[j]);
    }
    return out;
}

std::string format_number(double v)
{
    if (v == std::trunc(v) && std::abs(v) < 1e15) {
        return fmt::format("{:.0f}", v == 0.0 ? 0.0 : v);
    }
    return fmt::format("{:.16e}", v);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    const std::filesystem::path tmp = path.string() + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        }
        out << contents;
        if (!out) {
            throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string to_csv(const Table& table)
{
    std::string out;
    for (const auto& c : table.comments) {
        out += "# " + c + "\n";
    }
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        out += (j ? "," : "") + table.columns[j];
    }
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) {
                out += ",";
            }
            out += format_number(row[j]);
        }
        out += "\n";
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const Table& table)
{
    write_file_atomic(path, to_csv(table));
}

Table read_csv(const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    Table t;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!header) {
            t.columns = cells;
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size()) {
            throw ValidationError(fmt::format("'{}': ragged row", path.string()));
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw ValidationError(fmt::format("'{}': non-numeric cell '{}'", path.string(), c));
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (!header) {
        throw ValidationError(fmt::format("'{}' has no header row", path.string()));
    }
    return t;
}

Table trajectory_table(const TrajectoryRecord& record)
{
    Table t;
    t.comments = {"naqmd trajectory; atomic units: time a.u., energy hartree, distance bohr, field a.u.",
                  "N_j: spin-orbital norms; N: total norm; Delta_abs: absorber energy rate; "
                  "dE_dt_rhs: field work plus Delta_abs"};
    t.columns.push_back("t");
    for (std::size_t j = 0; j < record.orbital_norms.size(); ++j) {
        t.columns.push_back(fmt::format("N_{}", j + 1));
    }
    for (const char* c : {"N", "E", "R", "Delta_abs", "dN_dt", "dE_dt_rhs", "field"}) {
        t.columns.emplace_back(c);
    }
    for (std::size_t i = 0; i < record.size(); ++i) {
        std::vector<double> row{record.time[i]};
        for (const auto& o : record.orbital_norms) {
            row.push_back(o[i]);
        }
        auto at = [i](const std::vector<double>& v) { return v.empty() ? 0.0 : v[i]; };
        row.push_back(at(record.norm));
        row.push_back(at(record.energy));
        row.push_back(at(record.distance));
        row.push_back(at(record.absorption));
        row.push_back(at(record.norm_rate));
        row.push_back(at(record.energy_rate));
        row.push_back(at(record.field));
        t.add_row(std::move(row));
    }
    return t;
}

TrajectoryRecord trajectory_from_table(const Table& table)
{
    TrajectoryRecord r;
    r.time = table.column("t");
    for (std::size_t j = 1;; ++j) {
        const std::string name = fmt::format("N_{}", j);
        if (std::find(table.columns.begin(), table.columns.end(), name) == table.columns.end()) {
            break;
        }
        r.orbital_norms.push_back(table.column(name));
    }
    r.norm = table.column("N");
    r.energy = table.column("E");
    r.distance = table.column("R");
    r.absorption = table.column("Delta_abs");
    r.norm_rate = table.column("dN_dt");
    r.energy_rate = table.column("dE_dt_rhs");
    r.field = table.column("field");
    r.validate();
    return r;
}

void Summary::set(const std::string& key, double value)
{
    set(key, format_number(value));
}

void Summary::set(const std::string& key, const std::string& value)
{
    for (auto& kv : entries_) {
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

std::string Summary::text() const
{
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k + ": " + v + "\n";
    }
    return out;
}

Summary Summary::parse(const std::string& text)
{
    Summary s;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto p = line.find(": ");
        if (line.empty() || line[0] == '#' || p == std::string::npos) {
            continue;
        }
        s.entries_.emplace_back(line.substr(0, p), line.substr(p + 2));
    }
    return s;
}

bool Summary::has(const std::string& key) const
{
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& kv) { return kv.first == key; });
}

std::string Summary::string(const std::string& key) const
{
    for (const auto& kv : entries_) {
        if (kv.first == key) {
            return kv.second;
        }
    }
    throw ValidationError(fmt::format("summary has no key '{}'", key));
}

double Summary::number(const std::string& key) const
{
    const std::string s = string(key);
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ValidationError(fmt::format("summary key '{}' is not numeric", key));
    }
}

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

/// Round step 1, 2 or 5 times a power of ten giving about `target` intervals.
double nice_step(double span, int target)
{
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0}) {
        if (m * mag >= raw) {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

} // namespace

std::string render_svg(const PlotSpec& spec)
{
    constexpr double W = 720;
    constexpr double H = 480;
    constexpr double left = 80;
    constexpr double right = 170;
    constexpr double top = 40;
    constexpr double bottom = 60;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    for (const auto& s : spec.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (spec.log_y && !(s.y[i] > 0.0)) {
                continue;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    }
    if (!std::isfinite(x0)) {
        x0 = 0;
        x1 = 1;
        y0 = 0;
        y1 = 1;
    }
    if (x1 == x0) {
        x1 = x0 + 1;
    }
    if (y1 == y0) {
        y1 = y0 + 1;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
    auto py = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        W, H);
    out += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"15\">{}</text>\n", left, escape(spec.title));
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                       top, W - left - right, H - top - bottom);
    const double xs = nice_step(x1 - x0, 6);
    for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-9 * xs; x += xs) {
        out += fmt::format("<line x1=\"{0:.2f}\" x2=\"{0:.2f}\" y1=\"{1}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", px(x), top,
                           H - bottom);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", px(x), H - bottom + 16,
                           std::abs(x) < 1e-12 * xs ? 0.0 : x);
    }
    const double ys = nice_step(y1 - y0, 6);
    for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-9 * ys; y += ys) {
        out += fmt::format("<line x1=\"{}\" x2=\"{}\" y1=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", left,
                           W - right, py(y), py(y));
        const double label = std::abs(y) < 1e-12 * ys ? 0.0 : y;
        const std::string text = spec.log_y ? fmt::format("1e{:g}", label) : fmt::format("{:g}", label);
        out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 6, py(y) + 4, text);
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + (W - left - right) / 2,
                       H - 18, escape(spec.x_label));
    out += fmt::format("<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                       top + (H - top - bottom) / 2, escape(spec.y_label));
    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& s = spec.series[k];
        const char* color = colors[k % std::size(colors)];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (spec.log_y && !(s.y[i] > 0.0)) {
                continue;
            }
            if (s.markers) {
                out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(s.x[i]),
                                   py(ty(s.y[i])), color);
            } else {
                pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(ty(s.y[i])));
            }
        }
        if (!s.markers) {
            out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color,
                               pts);
        }
        const double ly = top + 14 + 18 * static_cast<double>(k);
        out += fmt::format("<line x1=\"{0}\" x2=\"{1}\" y1=\"{2}\" y2=\"{2}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                           W - right + 10, W - right + 30, ly, color);
        out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", W - right + 36, ly + 4, escape(s.label));
    }
    out += "</svg>\n";
    return out;
}

} // namespace naqmd::app
