#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moldflux/rbf.hpp"

namespace moldflux {

// Interior temperature readings, one row of P sensor values per measurement
// instant tau_k = k/f_samp, k = 1..num_meas.
struct MeasurementSeries {
  SensorArray sensors;
  double f_samp = 1.0;
  std::vector<double> times;                  // tau_1 .. tau_Pt
  std::vector<std::vector<double>> readings;  // [num_meas][P]

  std::size_t num_meas() const { return readings.size(); }
  std::size_t num_sensors() const { return sensors.size(); }
  void validate() const;
};

struct NoiseSpec {
  double omega = 0.0;       // standard deviation [K]
  std::uint64_t seed = 0;
  std::uint64_t stream = 0; // per-sample/per-combination substream index
};

// Additive i.i.d. zero-mean Gaussian noise, deterministic for a given
// (seed, stream) pair; omega = 0 returns the input unchanged.
MeasurementSeries add_noise(const MeasurementSeries& series, const NoiseSpec& noise);

// Long-format CSV (k, tau_s, sensor_id, temperature_K); sensor ids are
// 1-based.  Header comment lines start with '#'.
void write_measurement_csv(const std::string& path, const MeasurementSeries& series,
                           const std::vector<std::string>& header_comments = {});
MeasurementSeries read_measurement_csv(const std::string& path, const SensorArray& sensors,
                                       double f_samp);

}  // namespace moldflux
