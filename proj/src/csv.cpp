#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace arq {

std::string fnv1a64_hex(const std::string &bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    static const char *hexd = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hexd[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

namespace {

std::vector<std::string> split_line(const std::string &line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t'))
            cell.pop_back();
        size_t b = 0;
        while (b < cell.size() && (cell[b] == ' ' || cell[b] == '\t'))
            ++b;
        out.push_back(cell.substr(b));
    }
    if (!line.empty() && line.back() == delim)
        out.emplace_back();
    return out;
}

double parse_cell(const std::string &cell, int row, const std::string &col) {
    const auto fail = [&](const char *what) {
        throw Error(ErrCode::invalid, std::string("row ") + std::to_string(row) +
                                          ", column '" + col + "': " + what + " '" +
                                          cell + "'");
    };
    if (cell.empty())
        fail("blank cell");
    double v = 0.0;
    const char *first = cell.data();
    const char *last = first + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        fail("non-numeric cell");
    if (!std::isfinite(v))
        fail("non-finite value");
    return v;
}

} // namespace

CsvLoad load_csv(const std::string &path, const std::string &response,
                 const std::vector<std::string> &covariates, bool intercept,
                 char delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrCode::invalid, "cannot open input file '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::string> lines;
    {
        std::stringstream ss(bytes);
        std::string line;
        while (std::getline(ss, line)) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (!line.empty())
                lines.push_back(line);
        }
    }
    if (lines.empty())
        throw Error(ErrCode::invalid, "input file '" + path + "' is empty");

    const std::vector<std::string> header = split_line(lines[0], delimiter);
    auto column_of = [&](const std::string &name) {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return static_cast<int>(i);
        throw Error(ErrCode::invalid, "missing column '" + name + "' in '" + path + "'");
    };
    const int ycol = column_of(response);
    std::vector<int> xcols;
    for (const auto &name : covariates)
        xcols.push_back(column_of(name));

    const int N = static_cast<int>(lines.size()) - 1;
    const int M = static_cast<int>(xcols.size()) + (intercept ? 1 : 0);
    CsvLoad out;
    out.response_name = response;
    if (intercept)
        out.covariate_names.push_back("(intercept)");
    out.covariate_names.insert(out.covariate_names.end(), covariates.begin(),
                               covariates.end());
    out.data.y.resize(N);
    out.data.X.resize(N, M);
    for (int r = 0; r < N; ++r) {
        const std::vector<std::string> cells = split_line(lines[r + 1], delimiter);
        if (cells.size() != header.size())
            throw Error(ErrCode::invalid,
                        "row " + std::to_string(r + 2) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        out.data.y(r) = parse_cell(cells[ycol], r + 2, response);
        int c = 0;
        if (intercept)
            out.data.X(r, c++) = 1.0;
        for (size_t j = 0; j < xcols.size(); ++j)
            out.data.X(r, c++) = parse_cell(cells[xcols[j]], r + 2, covariates[j]);
    }
    out.digest = "fnv1a64:" + fnv1a64_hex(bytes);
    return out;
}

} // namespace arq
