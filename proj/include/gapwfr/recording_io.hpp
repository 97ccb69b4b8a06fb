#ifndef GAPWFR_RECORDING_IO_HPP
#define GAPWFR_RECORDING_IO_HPP

#include "gapwfr/network.hpp"

#include <filesystem>
#include <functional>
#include <ostream>

namespace gapwfr {

/// Columns: time,neuron,V
void write_recording_csv(std::ostream& os, const Recording& rec);
/// Columns: time,neuron
void write_spikes_csv(std::ostream& os, const Recording& rec);

/// Opens `path` for writing (creating parent directories) and hands the stream to `body`.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

}  // namespace gapwfr

#endif  // GAPWFR_RECORDING_IO_HPP
