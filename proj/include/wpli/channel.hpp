// SPDX-License-Identifier: Apache-2.0
//
// Propagation: polarized antennas over a ray-traced multipath channel, and the
// statistical flat-fading abstraction with log-distance path loss.

#ifndef WPLI_CHANNEL_HPP
#define WPLI_CHANNEL_HPP

#include "wpli/common.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace wpli::channel {

/// Polarization projection. The default is a vertically polarized antenna.
struct AntennaModel {
    double h_gain = 0.0;
    double v_gain = 1.0;
    double h_phase = 0.0;
    double v_phase = 0.0;
    void validate() const;
};

struct RayPath {
    cplx h_loss{1.0, 0.0};
    cplx v_loss{1.0, 0.0};
    double delay_s = 0.0;
    void validate() const;
};

enum class FadingKind { AWGN, Rayleigh, Rician, Nakagami };

struct FadingModel {
    FadingKind kind = FadingKind::AWGN;
    double omega = 1.0; // E[alpha^2]
    double m = 1.0;     // Nakagami
    double K = 0.0;     // Rician
    void validate() const;
};

struct PathLossModel {
    double ref_loss_db = 0.0;   // alpha_pl(d0), signed gain in dB
    double ref_distance_m = 1.0;
    double exponent = 2.0;
    double shadowing_sigma_db = 0.0; // 0 disables log-normal shadowing
    void validate() const;
};

/// Complex AWGN with one-sided density psd_dbm_per_hz over the simulated bandwidth.
struct NoiseModel {
    double psd_dbm_per_hz = -std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;

    bool enabled() const { return std::isfinite(psd_dbm_per_hz); }
    /// Per-sample complex variance N0 * fs into 1 ohm.
    double variance(double sample_rate_hz) const;
};

/// Windowed-sinc fractional delay; integer delays are exact shifts.
std::vector<cplx> fractional_delay(const std::vector<cplx>& x, double delay_samples, std::size_t out_len,
                                   int taps = 64);

ComplexSignal polarize_and_raytrace(const ComplexSignal& w, const AntennaModel& tx, const AntennaModel& rx,
                                    const std::vector<RayPath>& paths, const NoiseModel& noise);

/// alpha_pl(d0) - 10 eta log10(d / d0) in dB.
double path_loss_db(double d, const PathLossModel& model);

/// Same plus a log-normal shadowing draw when enabled.
double path_loss_db(double d, const PathLossModel& model, Rng& rng);

/// Density of the fading amplitude. AWGN is a point mass at 1 and returns nullopt.
std::optional<double> fading_pdf(double alpha, const FadingModel& model);

double fading_sample(const FadingModel& model, Rng& rng);
double fading_sample(const FadingModel& model, std::uint64_t seed);

/// Block-fading channel: input * 10^(PL/20) * alpha + noise. The realized fade is
/// written to `alpha_out` when given.
ComplexSignal apply_statistical_channel(const ComplexSignal& w, double d, const PathLossModel& pl,
                                        const FadingModel& fm, const NoiseModel& noise, std::uint64_t seed,
                                        double* alpha_out = nullptr);

FadingKind parse_fading(const std::string& name);
std::string fading_name(FadingKind k);

} // namespace wpli::channel

#endif
