#pragma once

#include <filesystem>
#include <iosfwd>

#include "bbm/bbm.hpp"

namespace bbm {

/// Columnar little-endian dump of a run: magic "BBMRUN", a format version,
/// the config, the particle table, then the time column and the coordinate
/// block. Reading back yields a run equal to the original.
void write_run(std::ostream& out, const BbmRun& run);
BbmRun read_run(std::istream& in);

void save_run(const std::filesystem::path& file, const BbmRun& run);
BbmRun load_run(const std::filesystem::path& file);

}  // namespace bbm
