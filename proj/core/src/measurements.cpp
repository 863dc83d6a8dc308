#include "moldflux/measurements.hpp"

#include <cmath>
#include <random>

#include "moldflux/csv.hpp"

namespace moldflux {

void MeasurementSeries::validate() const {
  if (readings.empty()) throw InvalidArgument("MeasurementSeries: no readings");
  if (times.size() != readings.size()) {
    throw InvalidArgument("MeasurementSeries: times/readings size mismatch");
  }
  for (const auto& row : readings) {
    if (row.size() != sensors.size()) {
      throw InvalidArgument("MeasurementSeries: sensor count mismatch");
    }
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw InvalidArgument("MeasurementSeries: times must be strictly increasing");
    }
  }
  if (!(f_samp > 0.0)) throw InvalidArgument("MeasurementSeries: f_samp must be positive");
}

namespace {

// SplitMix64, used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

MeasurementSeries add_noise(const MeasurementSeries& series, const NoiseSpec& noise) {
  series.validate();
  if (noise.omega < 0.0) throw InvalidArgument("add_noise: omega must be >= 0");
  if (noise.omega == 0.0) return series;
  MeasurementSeries out = series;
  std::mt19937_64 rng(mix64(noise.seed ^ mix64(noise.stream + 1)));
  std::normal_distribution<double> gauss(0.0, noise.omega);
  for (auto& row : out.readings) {
    for (double& v : row) v += gauss(rng);
  }
  return out;
}

void write_measurement_csv(const std::string& path, const MeasurementSeries& series,
                           const std::vector<std::string>& header_comments) {
  series.validate();
  CsvWriter w(path, header_comments, {"k", "tau_s", "sensor_id", "temperature_K"});
  for (std::size_t k = 0; k < series.readings.size(); ++k) {
    for (std::size_t s = 0; s < series.readings[k].size(); ++s) {
      w.begin_row();
      w.add(static_cast<long long>(k + 1));
      w.add(series.times[k]);
      w.add(static_cast<long long>(s + 1));
      w.add(series.readings[k][s]);
      w.end_row();
    }
  }
}

MeasurementSeries read_measurement_csv(const std::string& path, const SensorArray& sensors,
                                       double f_samp) {
  const CsvTable table = read_csv(path);
  const std::size_t col_k = table.column_index("k");
  const std::size_t col_tau = table.column_index("tau_s");
  const std::size_t col_id = table.column_index("sensor_id");
  const std::size_t col_temp = table.column_index("temperature_K");

  MeasurementSeries series;
  series.sensors = sensors;
  series.f_samp = f_samp;
  const std::size_t P = sensors.size();

  std::size_t max_k = 0;
  for (const auto& row : table.rows) {
    max_k = std::max(max_k, static_cast<std::size_t>(std::stoll(row[col_k])));
  }
  if (max_k == 0) throw InvalidArgument("read_measurement_csv: empty table in " + path);
  series.times.assign(max_k, 0.0);
  series.readings.assign(max_k, std::vector<double>(P, std::nan("")));
  for (const auto& row : table.rows) {
    const auto k = static_cast<std::size_t>(std::stoll(row[col_k]));
    const auto sid = static_cast<std::size_t>(std::stoll(row[col_id]));
    if (k < 1 || k > max_k || sid < 1 || sid > P) {
      throw InvalidArgument("read_measurement_csv: index outside the declared ranges");
    }
    series.times[k - 1] = std::stod(row[col_tau]);
    series.readings[k - 1][sid - 1] = std::stod(row[col_temp]);
  }
  for (const auto& row : series.readings) {
    for (double v : row) {
      if (std::isnan(v)) {
        throw InvalidArgument("read_measurement_csv: missing (k, sensor) entries");
      }
    }
  }
  series.validate();
  return series;
}

}  // namespace moldflux
