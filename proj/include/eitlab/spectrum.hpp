#pragma once

#include <Eigen/Core>
#include <string>

namespace eitlab {

// Ordered detuning/transmission samples, the exchange format between the
// simulators and the fit engine. Detunings are angular (rad/s) in memory;
// the CSV surface is cyclic (delta_hz).
struct Spectrum {
  enum class Source { ClosedForm, MonteCarlo, File };

  Eigen::VectorXd detunings;      // rad/s, strictly increasing
  Eigen::VectorXd transmissions;  // dimensionless, in [0, 1 + eps]
  Eigen::VectorXd std_errors;     // optional (size 0 or same as detunings)
  Source source = Source::File;

  Eigen::Index size() const { return detunings.size(); }
};

// Allowed transmission overshoot above 1 (Monte-Carlo noise headroom).
inline constexpr double kTransmissionEps = 0.05;

// Throws std::invalid_argument on any invariant violation: length mismatch,
// non-finite entries, non-increasing detunings, out-of-range transmissions.
void validate(const Spectrum& spectrum);

std::string source_name(Spectrum::Source source);

// CSV surface: comment line `# manifest_hash=...` (optional on read),
// header `delta_hz,transmission[,std_error]`, then one row per sample.
std::string spectrum_to_csv(const Spectrum& spectrum,
                            const std::string& manifest_hash = "");
Spectrum spectrum_from_csv(const std::string& text);
Spectrum load_spectrum(const std::string& path);
void save_spectrum(const Spectrum& spectrum, const std::string& path,
                   const std::string& manifest_hash = "");

}  // namespace eitlab
