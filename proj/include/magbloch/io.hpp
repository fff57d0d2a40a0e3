#pragma once

#include <string>
#include <vector>

namespace magbloch {

// 17 significant digits, scientific; round-trips every double.
std::string fmt(double x);

// Writes via a temporary file in the same directory, then renames over path.
void write_file_atomic(const std::string& path, const std::string& contents);

class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    const std::string& str() const { return text_; }

private:
    size_t width_;
    std::string text_;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
// Least-squares y = slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Fit of log(err) against log(eps).
LineFit fit_loglog(const std::vector<double>& eps, const std::vector<double>& err);

}  // namespace magbloch
