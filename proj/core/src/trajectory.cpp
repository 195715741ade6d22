#include "tracker/trajectory.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "tracker/errors.hpp"

namespace tracker {

namespace {

void append_full_precision(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
}

}  // namespace

void write_csv(const RunLog& log, std::ostream& out) {
    const int n = log.state_dim();
    std::string header = "t,u,y,y_d";
    for (int i = 0; i < n; ++i) header += ",x" + std::to_string(i);
    out << header << '\n';
    for (int t = 0; t < log.size(); ++t) {
        std::string line = std::to_string(t);
        for (double v : {log.u[t], log.y[t], log.y_d[t]}) {
            line += ',';
            append_full_precision(line, v);
        }
        for (int i = 0; i < n; ++i) {
            line += ',';
            append_full_precision(line, log.x[static_cast<size_t>(t)](i));
        }
        out << line << '\n';
    }
}

void write_csv(const RunLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractViolation("cannot open for writing: " + path);
    write_csv(log, out);
}

RunLog read_run_csv(std::istream& in, double period) {
    RunLog log;
    log.u.period = log.y.period = log.y_d.period = period;
    std::string line;
    if (!std::getline(in, line)) throw ContractViolation("empty CSV");
    int n = -4;
    for (char ch : line)
        if (ch == ',') ++n;
    n += 1;  // columns minus t,u,y,y_d
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<int>(vals.size()) != 4 + n)
            throw ContractViolation("CSV row width mismatch");
        log.u.values.push_back(vals[1]);
        log.y.values.push_back(vals[2]);
        log.y_d.values.push_back(vals[3]);
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = vals[static_cast<size_t>(4 + i)];
        log.x.push_back(std::move(x));
    }
    return log;
}

}  // namespace tracker
