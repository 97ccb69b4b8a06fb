#include "gapwfr/recording_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>

namespace gapwfr {

void write_recording_csv(std::ostream& os, const Recording& rec) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "time,neuron,V\n";
  for (std::size_t k = 0; k < rec.samples(); ++k)
    for (std::size_t r = 0; r < rec.neurons.size(); ++r)
      os << rec.time(k) << ',' << rec.neurons[r] << ',' << rec.V[r][k] << '\n';
}

void write_spikes_csv(std::ostream& os, const Recording& rec) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "time,neuron\n";
  for (std::size_t r = 0; r < rec.neurons.size(); ++r)
    for (double t : rec.spikes[r]) os << t << ',' << rec.neurons[r] << '\n';
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  body(os);
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

}  // namespace gapwfr
