#pragma once

#include <string>
#include <vector>

#include "isac/radar_rx.hpp"
#include "isac/waveform.hpp"

namespace isac::io {

/// Writes equal-length columns as CSV with one header row. Values are printed
/// with %.12g so reruns are byte-identical. Throws std::invalid_argument on
/// ragged input and std::runtime_error when the file cannot be written.
void write_table(const std::string& path, const std::vector<std::string>& headers,
                 const std::vector<std::vector<double>>& columns);

/// Columns: t_s, re, im.
void write_sample_stream(const std::string& path, const waveform::SampleStream& stream);

/// Grid of map magnitudes in dB: header row carries velocities (m/s), the
/// first column carries ranges (m), body cells are 20*log10|z|.
void write_rd_map_db(const std::string& path, const rx::RangeDopplerMap& map);

} // namespace isac::io
