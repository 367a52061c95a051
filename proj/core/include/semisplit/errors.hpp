#pragma once

#include <stdexcept>
#include <string>

namespace semisplit {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A bound constant was requested for a potential whose derivative sup-norm is infinite.
struct UnboundedDerivative : Error { using Error::Error; };

// The adaptive reference integrator stalled below the minimum admissible step.
struct StepSizeUnderflow : Error { using Error::Error; };

// State mass would be (or became) non-negligible near the periodic boundary.
struct BoundaryClipping : Error { using Error::Error; };

// Spectral mass reached the top of the wavenumber band: the spatial grid is too coarse.
struct SpectralUnderresolution : Error { using Error::Error; };

// A transform expected to be real came back with a large imaginary residue.
struct ImaginaryResidueTooLarge : Error { using Error::Error; };

// Smoothing produced negative values beyond the roundoff tolerance.
struct NegativeAfterSmoothing : Error { using Error::Error; };

// Converting a density to a discrete measure discarded too much mass.
struct ExcessiveTruncation : Error { using Error::Error; };

// Two ensembles that must share provenance (same particles/weights) do not.
struct ProvenanceMismatch : Error { using Error::Error; };

// An iterative solver failed to reach its certified tolerance within the iteration cap.
struct NonConvergence : Error { using Error::Error; };

// An exhaustive oracle was asked to handle an instance above its hard cap.
struct TooLarge : Error { using Error::Error; };

// A log-log rate fit was requested on degenerate data.
struct DegenerateFit : Error { using Error::Error; };

// Filesystem failure while emitting reports.
struct IoError : Error { using Error::Error; };

// Malformed or inconsistent experiment configuration.
struct ConfigError : Error { using Error::Error; };

}  // namespace semisplit
