#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "stratshrink/report.hpp"

namespace stratshrink {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '"') out += "&quot;";
        else out += c;
    }
    return out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

struct Point {
    double x, y, lo, hi;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

}  // namespace

bool ExperimentResult::passed() const {
    if (refused) return false;
    return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.passed; });
}

std::string csv_header() {
    return "model,rule_a,rule_b,loss,m,branching,Lambda,theta_desc,mean,stderr,reps,seed,exact,trunc_bound";
}

std::string csv_line(const CsvRow& r) {
    auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    auto opti = [](const std::optional<unsigned long long>& v) { return v ? std::to_string(*v) : std::string(); };
    std::ostringstream os;
    os << csv_escape(r.model) << ',' << csv_escape(r.rule_a) << ',' << csv_escape(r.rule_b) << ','
       << csv_escape(r.loss) << ',' << r.m << ',' << csv_escape(r.branching) << ',' << opt(r.Lambda) << ','
       << csv_escape(r.theta_desc) << ',' << opt(r.mean) << ',' << opt(r.std_error) << ',' << opti(r.reps) << ','
       << opti(r.seed) << ',' << opt(r.exact) << ',' << opt(r.trunc_bound);
    return os.str();
}

std::string rows_csv(const ExperimentResult& r, const std::string& stamp) {
    std::ostringstream os;
    os << "# stratshrink " << r.experiment << " generated " << stamp << '\n' << csv_header() << '\n';
    for (const auto& row : r.rows) os << csv_line(row) << '\n';
    return os.str();
}

std::string claims_csv(const ExperimentResult& r) {
    std::ostringstream os;
    os << "kind,name,detail,passed\n";
    for (const auto& rep : r.conditions)
        for (const auto& c : rep.checks)
            os << "condition," << csv_escape(rep.subject + ": " + c.name) << ',' << csv_escape(c.detail) << ','
               << (c.holds ? "true" : "false") << '\n';
    for (const auto& w : r.warnings) os << "warning,," << csv_escape(w) << ",\n";
    if (r.overridden) os << "override,conditions,run despite failed hypothesis checks,\n";
    for (const auto& c : r.claims)
        os << "claim," << csv_escape(c.name) << ',' << csv_escape(c.detail) << ',' << (c.passed ? "true" : "false")
           << '\n';
    return os.str();
}

std::string render_svg(const ExperimentResult& r) {
    // model -> series label -> points
    std::map<std::string, std::map<std::string, std::vector<Point>>> panels;
    std::map<std::string, bool> use_log;
    for (const auto& row : r.rows) {
        const auto x = row.plot_x ? row.plot_x : row.Lambda;
        const auto y = row.mean ? row.mean : row.exact;
        if (!x || !y || !std::isfinite(*y)) continue;
        double lo = *y, hi = *y;
        if (row.mean && row.std_error) {
            lo = *y - 1.96 * *row.std_error;
            hi = *y + 1.96 * *row.std_error;
        }
        std::string label = row.rule_a;
        if (!row.rule_b.empty()) label += " - " + row.rule_b;
        label += " [" + row.loss + ", m=" + std::to_string(row.m);
        if (!row.branching.empty()) label += ", n=" + row.branching;
        if (!row.theta_desc.empty()) label += ", " + row.theta_desc;
        label += row.mean ? ", MC]" : "]";
        panels[row.model][label].push_back({*x, *y, lo, hi});
        use_log[row.model] = true;
    }
    for (auto& [model, series] : panels)
        for (auto& [label, pts] : series) {
            std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
            for (const auto& p : pts)
                if (p.x <= 0) use_log[model] = false;
        }

    const double W = 760, H = 420, left = 70, right = 20, top = 40, bottom = 50;
    std::ostringstream os;
    double y0 = 0;
    std::ostringstream body;
    for (const auto& [model, series] : panels) {
        const bool logx = use_log[model];
        double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
        for (const auto& [label, pts] : series)
            for (const auto& p : pts) {
                const double xv = logx ? std::log10(p.x) : p.x;
                xmin = std::min(xmin, xv);
                xmax = std::max(xmax, xv);
                ymin = std::min(ymin, p.lo);
                ymax = std::max(ymax, p.hi);
            }
        if (xmax <= xmin) xmax = xmin + 1;
        if (ymax <= ymin) ymax = ymin + 1;
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
        auto X = [&](double x) { return left + (W - left - right) * ((logx ? std::log10(x) : x) - xmin) / (xmax - xmin); };
        auto Y = [&](double y) { return y0 + top + (H - top - bottom) * (1 - (y - ymin) / (ymax - ymin)); };

        body << "<text x=\"" << W / 2 << "\" y=\"" << y0 + 22 << "\" text-anchor=\"middle\" font-size=\"15\">"
             << escape(r.experiment + ": " + model) << "</text>\n";
        body << "<rect x=\"" << left << "\" y=\"" << y0 + top << "\" width=\"" << W - left - right << "\" height=\""
             << H - top - bottom << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double yv = ymin + (ymax - ymin) * i / 4.0;
            body << "<text x=\"" << left - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
                 << short_num(yv) << "</text>\n";
            const double xv = xmin + (xmax - xmin) * i / 4.0;
            const double xl = logx ? std::pow(10.0, xv) : xv;
            body << "<text x=\"" << X(xl) << "\" y=\"" << y0 + H - bottom + 16
                 << "\" text-anchor=\"middle\" font-size=\"11\">" << short_num(xl) << "</text>\n";
        }
        if (ymin < 0 && ymax > 0)
            body << "<line x1=\"" << left << "\" x2=\"" << W - right << "\" y1=\"" << Y(0) << "\" y2=\"" << Y(0)
                 << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
        body << "<text x=\"" << W / 2 << "\" y=\"" << y0 + H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
             << (logx ? "x (log scale)" : "x") << "</text>\n";

        std::size_t idx = 0;
        double ly = y0 + H + 4;
        for (const auto& [label, pts] : series) {
            const char* colour = kPalette[idx++ % 10];
            bool band = false;
            for (const auto& p : pts) band = band || p.hi > p.lo;
            if (band && pts.size() > 1) {
                body << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
                for (const auto& p : pts) body << X(p.x) << ',' << Y(p.hi) << ' ';
                for (auto it = pts.rbegin(); it != pts.rend(); ++it) body << X(it->x) << ',' << Y(it->lo) << ' ';
                body << "\"/>\n";
            }
            body << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.6\" points=\"";
            for (const auto& p : pts) body << X(p.x) << ',' << Y(p.y) << ' ';
            body << "\"/>\n";
            for (const auto& p : pts)
                body << "<circle cx=\"" << X(p.x) << "\" cy=\"" << Y(p.y) << "\" r=\"2.5\" fill=\"" << colour
                     << "\"/>\n";
            body << "<rect x=\"" << left << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << colour
                 << "\"/><text x=\"" << left + 16 << "\" y=\"" << ly + 9 << "\" font-size=\"11\">" << escape(label)
                 << "</text>\n";
            ly += 16;
        }
        y0 = ly + 10;
    }
    const double total_h = std::max(y0, 60.0);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << total_h
       << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (panels.empty())
        os << "<text x=\"20\" y=\"30\" font-size=\"14\">" << escape(r.experiment) << ": nothing to plot</text>\n";
    os << body.str() << "</svg>\n";
    return os.str();
}

}  // namespace stratshrink
