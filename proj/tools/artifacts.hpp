#pragma once

#include "scg/green.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scg::cli {

// Shortest decimal text that reads back to the same binary64.
std::string shortest(double v);

std::uint64_t fnv1a64(std::string_view bytes);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::string_view text);
    CsvWriter& cells(const Vec& v);
    CsvWriter& cell(cplx z) { return cell(z.real()).cell(z.imag()); }
    void end_row();

private:
    void separator();

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_ = 0, filled_ = 0;
};

// x_1..x_n style column names
std::vector<std::string> indexed(std::string_view stem, int count);
std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b);

// key = value text with the config hash first.
class Manifest {
public:
    Manifest(std::string subcommand, const std::string& config_text);
    void add(const std::string& key, double value);
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, std::span<const double> values);
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Little-endian grid dump:
//   "SCGF", u32 version = 1, u32 dim, u32 n_h, u32 counts[dim], f64 lo[dim], f64 hi[dim], f64 h[n_h],
//   then for each h and each node (last axis fastest) four (re, im) f64 pairs: total, boundary, transient, wave.
void write_field_binary(const std::filesystem::path& path, std::span<const FieldGrid> fields);

}  // namespace scg::cli
