#pragma once

#include "fiberlink/channels.hpp"
#include "fiberlink/quantum.hpp"

namespace fiberlink::tomography {

/// Ancilla-assisted process tomography of the channel on photon 2.
///
/// Solves ρ_joint = Σ_mn χ_mn (I⊗σ_m) ρ_ref (I⊗σ_n) for χ in the least-squares
/// sense, then projects the Choi matrix onto the PSD cone and renormalizes.
/// Throws InvalidArgument if the photon-2 marginal of the reference is
/// singular or the reference does not determine the channel.
ChiMatrix ancilla_process_tomography(const DensityMatrix& rho_joint, const DensityMatrix& reference_input);

}  // namespace fiberlink::tomography
