#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nvsim/spin_core.hpp"

namespace nvsim {

// ---------------------------------------------------------------------------
// measurement protocols
// ---------------------------------------------------------------------------

enum class ProtocolKind { ramsey, hahn_echo };

// which pair of core eigenstates forms the qubit. ms0_to_lower_branch picks
// the lower of the two middle (by energy) states of the ms = +-1 dominant
// manifold -- at an avoided crossing that is the protected pair -- and the
// ms0-dominant partner with the strongest Sx matrix element to it.
struct QubitSelector {
  enum class Mode { ms0_to_lower_branch, ms0_to_upper_branch, explicit_levels };
  Mode mode = Mode::ms0_to_lower_branch;
  int level_a = -1;  // absolute eigenstate indices for explicit_levels
  int level_b = -1;
};

struct PulseProtocol {
  ProtocolKind kind = ProtocolKind::ramsey;
  QubitSelector qubit;
};

struct QubitLevels {
  int index_a = -1;  // ms0-side eigenstate index in the core eigensystem
  int index_b = -1;  // branch eigenstate index
  Vector state_a;
  Vector state_b;
  double freq_mhz = 0.0;  // E_b - E_a
};

// electron-character weights of each eigenstate: column k of the return value
// holds (w_{+1}, w_0, w_{-1}) for eigenvector k; electron is the first tensor
// factor with basis ordered m = +1, 0, -1
Eigen::MatrixXd electron_weights(const EigenSystem& es, int electron_dim);

QubitLevels select_qubit_levels(const EigenSystem& core_es, int electron_dim,
                                const QubitSelector& selector);

// ---------------------------------------------------------------------------
// decay-time extraction
// ---------------------------------------------------------------------------

enum class DecayMethod { one_over_e, stretched_fit };

struct DecayFit {
  DecayMethod method = DecayMethod::one_over_e;
  bool resolved = false;
  double t_char_us = 0.0;
  double exponent = 1.0;   // stretch parameter, meaningful for stretched_fit
  double residual = 0.0;   // rms residual of the envelope fit
  std::string note;        // reason when unresolved
};

// envelope of |L|: monotone non-increasing upper hull of the local maxima
// (falls back to all samples for non-oscillatory curves)
std::vector<std::pair<double, double>> coherence_envelope(
    const std::vector<double>& times, const std::vector<Complex>& values);

DecayFit extract_decay_time(const std::vector<double>& times,
                            const std::vector<Complex>& values, DecayMethod method);

}  // namespace nvsim
