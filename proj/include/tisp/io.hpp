#pragma once

#include <string>
#include <vector>

#include <tisp/solver.hpp>
#include <tisp/types.hpp>

namespace tisp {

struct Dataset
{
    Matrix X;
    Vector y;
    std::vector<std::string> feature_names;
};

/*
 * Comma-separated, header row first. The column named "y" is the response
 * (the last column when none is named y); every other column is a feature.
 */
Dataset read_dataset(const std::string& path);
Dataset parse_dataset(const std::string& text, const std::string& source = "<input>");

// Header x1..xp,y; 17 significant digits.
void write_dataset(const std::string& path, const Matrix& X, const Vector& y);
std::string format_dataset(const Matrix& X, const Vector& y);

// One group per line, whitespace-separated 1-based column indices.
GroupSpec read_groups(const std::string& path, Index p);
GroupSpec parse_groups(const std::string& text, Index p, const std::string& source = "<input>");
std::string format_groups(const GroupSpec& groups);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Shortest decimal with the given significant digits.
std::string format_number(double v, int digits);

} // namespace tisp
