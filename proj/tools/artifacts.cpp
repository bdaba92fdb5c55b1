#include "artifacts.hpp"

#include <bit>
#include <charconv>
#include <cstring>

namespace scg::cli {

std::string shortest(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size())
{
    if (!out_) throw ConfigError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::separator()
{
    if (filled_++) out_ << ',';
}

CsvWriter& CsvWriter::cell(double v)
{
    separator();
    out_ << shortest(v);
    return *this;
}

CsvWriter& CsvWriter::cell(long long v)
{
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view text)
{
    separator();
    if (text.find_first_of(",\"\n") == std::string_view::npos) {
        out_ << text;
        return *this;
    }
    out_ << '"';
    for (char c : text) out_ << (c == '"' ? "\"\"" : std::string(1, c));
    out_ << '"';
    return *this;
}

CsvWriter& CsvWriter::cells(const Vec& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) cell(v(i));
    return *this;
}

void CsvWriter::end_row()
{
    if (filled_ != columns_)
        throw std::logic_error(path_.string() + ": row has " + std::to_string(filled_) + " cells, header has " +
                               std::to_string(columns_));
    out_ << '\n';
    filled_ = 0;
    if (!out_) throw ConfigError("write failed: " + path_.string());
}

std::vector<std::string> indexed(std::string_view stem, int count)
{
    std::vector<std::string> out;
    for (int i = 1; i <= count; ++i) out.push_back(std::string(stem) + "_" + std::to_string(i));
    return out;
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

Manifest::Manifest(std::string subcommand, const std::string& config_text)
{
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(config_text)));
    entries_.emplace_back("config_fnv1a64", hex);
    entries_.emplace_back("subcommand", std::move(subcommand));
}

void Manifest::add(const std::string& key, double value) { entries_.emplace_back(key, shortest(value)); }

void Manifest::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }

void Manifest::add(const std::string& key, std::span<const double> values)
{
    std::string text;
    for (double v : values) text += (text.empty() ? "" : " ") + shortest(v);
    entries_.emplace_back(key, text);
}

void Manifest::write(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

namespace {

class LittleEndianWriter {
public:
    explicit LittleEndianWriter(const std::filesystem::path& path) : out_(path, std::ios::binary)
    {
        if (!out_) throw ConfigError("cannot write " + path.string());
    }
    void u32(std::uint32_t v) { put(v); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    void raw(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

private:
    template <class U>
    void put(U v)
    {
        char bytes[sizeof(U)];
        for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out_.write(bytes, sizeof bytes);
    }
    std::ofstream out_;
};

}  // namespace

void write_field_binary(const std::filesystem::path& path, std::span<const FieldGrid> fields)
{
    if (fields.empty()) throw ConfigError("no fields to write");
    const GridSpec& grid = fields.front().grid;
    LittleEndianWriter w(path);
    w.raw("SCGF");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(grid.counts.size()));
    w.u32(static_cast<std::uint32_t>(fields.size()));
    for (int c : grid.counts) w.u32(static_cast<std::uint32_t>(c));
    for (Eigen::Index i = 0; i < grid.lo.size(); ++i) w.f64(grid.lo(i));
    for (Eigen::Index i = 0; i < grid.hi.size(); ++i) w.f64(grid.hi(i));
    for (const FieldGrid& f : fields) w.f64(f.h);
    for (const FieldGrid& f : fields)
        for (const FieldValue& v : f.values)
            for (cplx z : {v.total, v.boundary, v.transient, v.wave}) {
                w.f64(z.real());
                w.f64(z.imag());
            }
}

}  // namespace scg::cli
