#include "npivqb/sample_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "npivqb/error.hpp"

namespace npivqb {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

bool parse_field(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

Sample load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::kCsvEmpty, path + ": file is empty");
    if (strip_cr(line) != "y,x,w") {
        throw Error(ErrorCode::kCsvMissingHeader, path + ": expected header 'y,x,w', found '" + strip_cr(line) + "'");
    }

    Sample sample;
    std::vector<std::size_t> out_of_range;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        ++row;
        std::string fields[3];
        std::size_t count = 0;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (count < 3) fields[count] = line.substr(start, comma - start);
            ++count;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        double v[3];
        if (count != 3 || !parse_field(fields[0], v[0]) || !parse_field(fields[1], v[1]) ||
            !parse_field(fields[2], v[2]) || !std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) {
            throw Error(ErrorCode::kCsvMalformedRow, path + ": malformed row " + std::to_string(row) + ": '" + line + "'");
        }
        if (!(v[1] >= 0.0 && v[1] <= 1.0 && v[2] >= 0.0 && v[2] <= 1.0)) out_of_range.push_back(row);
        sample.y.push_back(v[0]);
        sample.x.push_back(v[1]);
        sample.w.push_back(v[2]);
    }
    if (row == 0) throw Error(ErrorCode::kCsvEmpty, path + ": no data rows");
    if (!out_of_range.empty()) {
        std::ostringstream msg;
        msg << path << ": x or w outside [0,1] in row(s)";
        for (std::size_t k = 0; k < std::min<std::size_t>(out_of_range.size(), 20); ++k) msg << ' ' << out_of_range[k];
        if (out_of_range.size() > 20) msg << " ...";
        throw Error(ErrorCode::kCsvOutOfRange, msg.str());
    }
    return sample;
}

void save_csv(const Sample& sample, const std::string& path) {
    std::ostringstream out;
    out << "y,x,w\n";
    for (std::size_t i = 0; i < sample.size(); ++i) {
        out << format_double(sample.y[i]) << ',' << format_double(sample.x[i]) << ',' << format_double(sample.w[i])
            << '\n';
    }
    write_text_file(path, out.str());
}

void save_draws_csv(const Eigen::MatrixXd& draws, const std::string& path) {
    std::ostringstream out;
    for (Eigen::Index j = 0; j < draws.cols(); ++j) out << (j ? ",b" : "b") << j + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < draws.rows(); ++i) {
        for (Eigen::Index j = 0; j < draws.cols(); ++j) out << (j ? "," : "") << format_double(draws(i, j));
        out << '\n';
    }
    write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
    out << contents;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace npivqb
