#include "magbloch/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "magbloch/errors.hpp"

namespace magbloch {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericError("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw NumericError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw NumericError("rename to " + target.string() + " failed: " + ec.message());
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header) : width_(header.size()) {
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) text_ += ',';
        text_ += header[i];
    }
    text_ += '\n';
}

void CsvBuilder::row(const std::vector<double>& values) {
    if (values.size() != width_) throw NumericError("csv row has the wrong number of columns");
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) text_ += ',';
        text_ += fmt(values[i]);
    }
    text_ += '\n';
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) throw NumericError("line fit needs at least two matching points");
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

LineFit fit_loglog(const std::vector<double>& eps, const std::vector<double>& err) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0) || !(err[i] > 0)) throw NumericError("log-log fit needs positive data");
        lx.push_back(std::log(eps[i]));
        ly.push_back(std::log(err[i]));
    }
    return fit_line(lx, ly);
}

}  // namespace magbloch
