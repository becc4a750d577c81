// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cpm/ofdm.hpp"

namespace cpm {

/// Mean square error of two equal-size complex arrays (matrices flattened
/// row-major): mean of |x - y|^2 over all L*M elements.
double mse(std::span<const std::complex<double>> x,
           std::span<const std::complex<double>> y);

/// How complex vectors are flattened before the Pearson correlation:
/// real parts then imaginary parts (default), or magnitudes only.
enum class PccMode { reim, magnitude };

/// Pearson correlation coefficient of two complex vectors over the chosen
/// flattening. Throws std::domain_error when either flattened vector has
/// zero variance.
double pcc(std::span<const std::complex<double>> x,
           std::span<const std::complex<double>> y, PccMode mode = PccMode::reim);

enum class Verdict { accept, drop };
enum class UpdatePolicy { on_accept, always };

/// One decision, kept for reporting. `truth` is evaluation metadata only.
struct ErrorRecord {
    std::uint64_t k = 0;
    Origin truth = Origin::unknown;
    double e = 0.0;
    double pcc = 0.0;
    Verdict verdict = Verdict::accept;
    bool sync_ok = true;
};

/// Labeled calibration errors: e_ab_ref from the legitimate link,
/// e_ae_ref from the attacker link, both against the running Bob reference.
struct ReferenceSet {
    std::vector<double> e_ab_ref;
    std::vector<double> e_ae_ref;
};

/// Decision threshold: half the absolute gap between the two reference
/// means. Rejects empty or unequal-length sets.
double calibrate_threshold(const ReferenceSet& refset);

/// Alternative rule (config switch, not the default): midpoint of the two
/// reference means.
double midpoint_threshold(const ReferenceSet& refset);

enum class ThresholdRule { half_gap, midpoint };

double threshold_from_rule(const ReferenceSet& refset, ThresholdRule rule);

/// Per-link decision state: last accepted snapshot plus threshold. The
/// first observed snapshot seeds the reference and is accepted by fiat.
/// Single-owner mutable state.
class DetectorState {
  public:
    DetectorState(double e_th, UpdatePolicy policy, PccMode pcc_mode = PccMode::reim);

    /// Uncalibrated state; decide() throws until set_threshold().
    explicit DetectorState(UpdatePolicy policy, PccMode pcc_mode = PccMode::reim);

    void set_threshold(double e_th);
    bool calibrated() const { return e_th_.has_value(); }
    double threshold() const;
    UpdatePolicy policy() const { return policy_; }
    const std::optional<ChannelSnapshot>& reference() const { return reference_; }

    /// Error of a snapshot against the current reference (no state change).
    double packet_error(const ChannelSnapshot& snapshot) const;

    /// Accept iff e < e_th (boundary e == e_th drops). Updates the
    /// reference per the policy; seeds it from the first snapshot.
    ErrorRecord decide(const ChannelSnapshot& snapshot);

  private:
    std::optional<double> e_th_;
    UpdatePolicy policy_;
    PccMode pcc_mode_;
    std::optional<ChannelSnapshot> reference_;
};

}  // namespace cpm
