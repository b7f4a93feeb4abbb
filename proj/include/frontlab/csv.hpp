#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/grid.hpp"

namespace frontlab {

/// All floats are printed with 17 significant digits so that a written
/// value reloads to the identical double.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void comment(const std::string& line) { out_ << "# " << line << "\n"; }
    void header(const std::string& line) { out_ << line << "\n"; }

    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt17(vals[i]);
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

/// State snapshot format: metadata comments, then `x,u,ut` rows.
inline void write_state_csv(const std::string& path, const WaveState& s) {
    CsvWriter w(path);
    w.comment("t=" + fmt17(s.t) + " far_left=" + fmt17(s.far_left) +
              " far_right=" + fmt17(s.far_right));
    w.header("x,u,ut");
    for (int i = 0; i < s.grid.n; ++i)
        w.row({s.grid.x(i), s.u[static_cast<std::size_t>(i)], s.ut[static_cast<std::size_t>(i)]});
}

inline WaveState read_state_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    double t = 0.0, fl = 1.0, fr = 0.0;
    std::vector<double> xs, us, uts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string tok;
            while (meta >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const double val = std::stod(tok.substr(eq + 1));
                if (key == "t") t = val;
                else if (key == "far_left") fl = val;
                else if (key == "far_right") fr = val;
            }
            continue;
        }
        if (line.rfind("x,", 0) == 0) continue; // header
        std::istringstream row(line);
        std::string cell;
        double vals[3] = {0, 0, 0};
        for (int k = 0; k < 3 && std::getline(row, cell, ','); ++k) vals[k] = std::stod(cell);
        xs.push_back(vals[0]);
        us.push_back(vals[1]);
        uts.push_back(vals[2]);
    }
    if (xs.size() < 3) throw std::runtime_error("state csv too short: " + path);
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    WaveState s(Grid1D(xs.front(), dx, static_cast<int>(xs.size())), t);
    s.u = std::move(us);
    s.ut = std::move(uts);
    s.far_left = fl;
    s.far_right = fr;
    return s;
}

} // namespace frontlab
