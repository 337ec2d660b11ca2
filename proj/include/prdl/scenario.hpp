#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>

#include "prdl/problem.hpp"

namespace prdl {

struct ScenarioParams {
  int mixing_case = 1;  // 1: B = I, 2: STFT temporal mixing, 3: per-snapshot A_i
  Index N = 16;
  Index P = 8;
  Index I = 256;
  Index M1 = 64;
  Index L = 1;
  double snr_db = 15.0;  // +inf for noiseless measurements
  std::uint64_t seed = 0;
  bool normalize_dictionary = false;

  void validate() const;
};

struct Scenario {
  ScenarioParams params;
  ProblemInstance inst;
  CMatrix D_true;
  CMatrix Z_true;
  CMatrix X_true;
  RMatrix noise;  // realized additive noise before clamping
};

// Windowed DFT atoms: frames start at -I/4, 0, I/4, I/2, 3I/4, rectangular
// window of length I/2, I-point DFT; column f I + k is frame f, frequency k.
CMatrix stft_matrix(Index I);

Scenario generate_scenario(const ScenarioParams& params);

// Empirical 10 log10(||F(X_true)||^2 / ||noise||^2); +inf without noise.
double realized_snr_db(const Scenario& s);

// JSON container: complex matrices as {rows, cols, data: [re, im, ...]} in row-major order.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace prdl
