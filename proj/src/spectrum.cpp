#include "eitlab/spectrum.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "eitlab/units.hpp"

namespace eitlab {

namespace {

// Shortest round-trip formatting so identical inputs give identical bytes.
std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

void validate(const Spectrum& s) {
  if (s.detunings.size() != s.transmissions.size()) {
    throw std::invalid_argument("spectrum: detuning/transmission length mismatch");
  }
  if (s.std_errors.size() != 0 && s.std_errors.size() != s.detunings.size()) {
    throw std::invalid_argument("spectrum: std_errors length mismatch");
  }
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s.detunings[i]) || !std::isfinite(s.transmissions[i])) {
      throw std::invalid_argument("spectrum: non-finite entry");
    }
    if (i > 0 && s.detunings[i] <= s.detunings[i - 1]) {
      throw std::invalid_argument("spectrum: detunings must be strictly increasing");
    }
    if (s.transmissions[i] < 0.0 || s.transmissions[i] > 1.0 + kTransmissionEps) {
      throw std::invalid_argument("spectrum: transmission outside [0, 1+eps]");
    }
  }
}

std::string source_name(Spectrum::Source source) {
  switch (source) {
    case Spectrum::Source::ClosedForm: return "closed-form";
    case Spectrum::Source::MonteCarlo: return "monte-carlo";
    case Spectrum::Source::File: return "file";
  }
  return "file";
}

std::string spectrum_to_csv(const Spectrum& s, const std::string& manifest_hash) {
  validate(s);
  std::ostringstream os;
  if (!manifest_hash.empty()) os << "# manifest_hash=" << manifest_hash << "\n";
  const bool errs = s.std_errors.size() != 0;
  os << (errs ? "delta_hz,transmission,std_error" : "delta_hz,transmission") << "\n";
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    os << fmt(rad_to_hz(s.detunings[i])) << "," << fmt(s.transmissions[i]);
    if (errs) os << "," << fmt(s.std_errors[i]);
    os << "\n";
  }
  return os.str();
}

Spectrum spectrum_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> delta, trans, errs;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("delta_hz", 0) != 0) {
        throw std::invalid_argument("spectrum CSV: missing delta_hz header");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 2) throw std::invalid_argument("spectrum CSV: short row");
    delta.push_back(hz_to_rad(vals[0]));
    trans.push_back(vals[1]);
    if (vals.size() > 2) errs.push_back(vals[2]);
  }
  Spectrum s;
  s.source = Spectrum::Source::File;
  s.detunings = Eigen::Map<Eigen::VectorXd>(delta.data(), delta.size());
  s.transmissions = Eigen::Map<Eigen::VectorXd>(trans.data(), trans.size());
  if (errs.size() == delta.size()) {
    s.std_errors = Eigen::Map<Eigen::VectorXd>(errs.data(), errs.size());
  }
  validate(s);
  return s;
}

Spectrum load_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spectrum file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return spectrum_from_csv(buf.str());
}

void save_spectrum(const Spectrum& s, const std::string& path,
                   const std::string& manifest_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write spectrum file '" + path + "'");
  out << spectrum_to_csv(s, manifest_hash);
}

}  // namespace eitlab
