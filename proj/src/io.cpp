#include <tisp/io.hpp>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <tisp/errors.hpp>

namespace tisp {
namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, const std::string& where)
{
    const std::string t = trim(cell);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw DataError(where + ": cannot parse '" + cell + "' as a number");
    }
    return v;
}

} // namespace

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::string format_number(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

Dataset parse_dataset(const std::string& text, const std::string& source)
{
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        if (!trim(line).empty()) header = split_csv_line(line);
    }
    if (header.empty()) throw DataError(source + ": empty file");
    for (auto& h : header) h = trim(h);

    std::size_t ycol = header.size() - 1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") ycol = c;
    }
    if (header.size() < 2) throw DataError(source + ": need at least one feature column and a response");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            row[c] = parse_double(cells[c], source + ":" + std::to_string(lineno));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(source + ": no data rows");

    Dataset d;
    const auto n = static_cast<Index>(rows.size());
    const auto p = static_cast<Index>(header.size() - 1);
    d.X.resize(n, p);
    d.y.resize(n);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != ycol) d.feature_names.push_back(header[c]);
    }
    for (Index i = 0; i < n; ++i) {
        Index j = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const double v = rows[static_cast<std::size_t>(i)][c];
            if (c == ycol) d.y(i) = v;
            else d.X(i, j++) = v;
        }
    }
    return d;
}

Dataset read_dataset(const std::string& path)
{
    return parse_dataset(read_text(path), path);
}

std::string format_dataset(const Matrix& X, const Vector& y)
{
    if (X.rows() != y.size()) throw ParameterError("design and response sizes differ");
    std::string out;
    for (Index j = 0; j < X.cols(); ++j) out += "x" + std::to_string(j + 1) + ",";
    out += "y\n";
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            out += format_number(X(i, j), 17);
            out += ',';
        }
        out += format_number(y(i), 17);
        out += '\n';
    }
    return out;
}

void write_dataset(const std::string& path, const Matrix& X, const Vector& y)
{
    write_text(path, format_dataset(X, y));
}

GroupSpec parse_groups(const std::string& text, Index p, const std::string& source)
{
    GroupSpec g;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string tok;
        std::vector<Index> block;
        while (ls >> tok) {
            long long v = 0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) {
                throw DataError(source + ":" + std::to_string(lineno) + ": '" + tok + "' is not a column index");
            }
            block.push_back(static_cast<Index>(v - 1));
        }
        if (!block.empty()) g.blocks.push_back(std::move(block));
    }
    try {
        g.validate(p);
    } catch (const ParameterError& e) {
        throw DataError(source + ": " + e.what());
    }
    return g;
}

GroupSpec read_groups(const std::string& path, Index p)
{
    return parse_groups(read_text(path), p, path);
}

std::string format_groups(const GroupSpec& groups)
{
    std::string out;
    for (const auto& block : groups.blocks) {
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(block[i] + 1);
        }
        out += '\n';
    }
    return out;
}

} // namespace tisp
