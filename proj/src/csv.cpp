#include "isac/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace isac::io {

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

} // namespace

void write_table(const std::string& path, const std::vector<std::string>& headers,
                 const std::vector<std::vector<double>>& columns)
{
    if (headers.size() != columns.size() || columns.empty())
        throw std::invalid_argument("write_table: need one header per column");
    const std::size_t n = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n)
            throw std::invalid_argument("write_table: ragged columns");

    auto out = open_out(path);
    for (std::size_t j = 0; j < headers.size(); ++j)
        out << (j ? "," : "") << headers[j];
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << fmt(columns[j][i]);
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

void write_sample_stream(const std::string& path, const waveform::SampleStream& stream)
{
    std::vector<double> t(stream.x.size()), re(stream.x.size()), im(stream.x.size());
    for (std::size_t i = 0; i < stream.x.size(); ++i) {
        t[i] = stream.t0 + double(i) / stream.fs;
        re[i] = stream.x[i].real();
        im[i] = stream.x[i].imag();
    }
    write_table(path, {"t_s", "re", "im"}, {t, re, im});
}

void write_rd_map_db(const std::string& path, const rx::RangeDopplerMap& map)
{
    auto out = open_out(path);
    out << "range_m";
    for (std::size_t c = 0; c < map.z.cols; ++c)
        out << ',' << fmt(map.velocity_at(int(c)));
    out << '\n';
    for (std::size_t r = 0; r < map.z.rows; ++r) {
        out << fmt(map.range_at(int(r)));
        for (std::size_t c = 0; c < map.z.cols; ++c)
            out << ',' << fmt(mag_db(std::max(std::abs(map.z(r, c)), 1e-300)));
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

} // namespace isac::io
