// Lambda-system storage physics. Storage and retrieval follow the adiabatic
// dark-state-polariton picture: the coupling switch-off freezes the slice of
// the probe pulse that is inside the cloud into a collective spin excitation
// whose transverse pattern copies the probe envelope and whose grating
// wavevector is the probe/coupling wavevector difference. EIT transmission
// is provided separately to validate the linear-response regime; it does not
// drive the storage bookkeeping.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/fft.hpp"
#include "eitmem/grid.hpp"

namespace eitmem {

inline constexpr double speed_of_light = 299792458.0;

/// Three-level Lambda system parameters. Rates in rad/s.
struct LambdaSystem {
    double omega_c = 1.2566e7;        // coupling Rabi frequency
    double g_sqrt_n = 9.111e8;        // collective coupling g*sqrt(N)
    double gamma_e = 3.613e7;         // excited-state decay
    double gamma_gs = 5.0e4;          // ground-state dephasing
    double optical_depth = 50.0;

    void validate() const
    {
        if (omega_c < 0.0 || g_sqrt_n < 0.0 || gamma_e < 0.0 || gamma_gs < 0.0)
            throw std::invalid_argument("LambdaSystem: rates must be nonnegative");
        if (optical_depth < 0.0)
            throw std::invalid_argument("LambdaSystem: optical depth must be nonnegative");
    }
};

/// Cigar-shaped cold cloud. rms_speed is the rms transverse atomic speed
/// driving ballistic diffusion of the stored pattern.
struct AtomicCloud {
    double length = 30e-3;
    double transverse_size = 2e-3;
    double atom_count = 9.1e8;
    double rms_speed = 0.0;

    void validate() const
    {
        if (!(length > 0.0))
            throw std::invalid_argument("AtomicCloud: length must be positive");
        if (!(atom_count > 0.0))
            throw std::invalid_argument("AtomicCloud: atom count must be positive");
        if (rms_speed < 0.0)
            throw std::invalid_argument("AtomicCloud: rms speed must be nonnegative");
    }
};

/// One probe beam direction with its write/read efficiencies.
struct StorageChannel {
    std::string label = "probe1";
    double angle = 3.3 * std::numbers::pi / 180.0; // to the coupling axis, in the x-z plane
    double write_efficiency = 1.0;
    double read_efficiency = 1.0;

    void validate() const
    {
        if (write_efficiency < 0.0 || write_efficiency > 1.0
            || read_efficiency < 0.0 || read_efficiency > 1.0)
            throw std::invalid_argument("StorageChannel: efficiencies must be within [0,1]");
    }

    /// Transverse projection of (k_probe - k_coupling) for this geometry.
    double k_transverse(double wavelength) const
    {
        return 2.0 * std::numbers::pi / wavelength * std::sin(angle);
    }
};

/// Stored collective spin excitation. Amplitudes are sqrt-excitations per
/// sample. Diffusion blur is accumulated in blur_sigma and applied at
/// readout: atoms move ballistically, so the blur width grows linearly in
/// time and two evolution steps compose exactly like a single longer one.
struct SpinWave {
    TransverseGrid grid;
    std::vector<complexd> amplitude;
    double k_transverse_x = 0.0;
    double k_transverse_y = 0.0;
    double created_at = 0.0;
    double tau_coherence = 20e-6;
    double wavelength = 795e-9;
    double blur_sigma = 0.0;
    std::string label;
};

/// Excitation number of a stored wave.
inline double excitation_number(const SpinWave& wave)
{
    double sum = 0.0;
    for (const auto& a : wave.amplitude)
        sum += std::norm(a);
    return sum;
}

/// Dark-state polariton mixing angle, tan(theta) = g*sqrt(N)/Omega_c.
inline double dark_state_mixing(const LambdaSystem& sys)
{
    if (sys.omega_c == 0.0 && sys.g_sqrt_n == 0.0)
        throw std::invalid_argument("dark_state_mixing: undefined polariton (omega_c = g_sqrt_n = 0)");
    return std::atan2(sys.g_sqrt_n, sys.omega_c);
}

/// Polariton group velocity c*cos^2(theta).
inline double group_velocity(double mixing_angle, double c = speed_of_light)
{
    const double ct = std::cos(mixing_angle);
    return c * ct * ct;
}

/// Weak-probe complex amplitude transmittance of the Lambda medium at
/// two-photon detuning delta. Normalized so that the bare two-level medium
/// (omega_c = 0) transmits exp(-OD/2) on resonance and the ideal EIT window
/// (gamma_gs = 0, delta = 0) transmits 1.
inline complexd eit_transmission(double delta, const LambdaSystem& sys)
{
    sys.validate();
    const complexd i(0.0, 1.0);
    complexd absorption;
    if (sys.omega_c == 0.0) {
        // two-level limit; the shared (gamma_gs - i delta) factor cancels
        if (sys.gamma_e == 0.0 && delta == 0.0)
            absorption = complexd(1.0, 0.0);
        else
            absorption = sys.gamma_e / (sys.gamma_e - i * delta);
    } else {
        const complexd num = sys.gamma_e * (sys.gamma_gs - i * delta);
        const complexd den = (sys.gamma_e - i * delta) * (sys.gamma_gs - i * delta)
                             + sys.omega_c * sys.omega_c / 4.0;
        absorption = num / den;
    }
    return std::exp(-0.5 * sys.optical_depth * absorption);
}

/// Piecewise-linear nonnegative pulse envelope; integrals are exact.
class PulseEnvelope {
public:
    PulseEnvelope(std::vector<double> times, std::vector<double> values)
        : times_(std::move(times)), values_(std::move(values))
    {
        if (times_.size() < 2 || times_.size() != values_.size())
            throw std::invalid_argument("PulseEnvelope: need at least two (time, value) samples");
        for (std::size_t k = 1; k < times_.size(); ++k)
            if (!(times_[k] > times_[k - 1]))
                throw std::invalid_argument("PulseEnvelope: times must be strictly increasing");
        for (double v : values_)
            if (v < 0.0 || !std::isfinite(v))
                throw std::invalid_argument("PulseEnvelope: values must be finite and nonnegative");
    }

    static PulseEnvelope square(double start, double width)
    {
        return PulseEnvelope({start, start + width}, {1.0, 1.0});
    }

    static PulseEnvelope triangle(double start, double width)
    {
        return PulseEnvelope({start, start + width / 2.0, start + width}, {0.0, 1.0, 0.0});
    }

    double start() const { return times_.front(); }
    double end() const { return times_.back(); }

    double value(double t) const
    {
        if (t <= times_.front() || t >= times_.back()) {
            if (t == times_.front())
                return values_.front();
            if (t == times_.back())
                return values_.back();
            return 0.0;
        }
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - times_.begin());
        const double f = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
        return values_[k - 1] + f * (values_[k] - values_[k - 1]);
    }

    /// Exact integral over [a, b] (clipped to the envelope support).
    double integral(double a, double b) const
    {
        if (b <= a)
            return 0.0;
        double sum = 0.0;
        for (std::size_t k = 1; k < times_.size(); ++k) {
            const double lo = std::max(a, times_[k - 1]);
            const double hi = std::min(b, times_[k]);
            if (hi <= lo)
                continue;
            sum += 0.5 * (value(lo) + value(hi)) * (hi - lo);
        }
        return sum;
    }

    double total() const { return integral(times_.front(), times_.back()); }

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Outcome of a coupling switch-off. committed_energy is the pulse fraction
/// inside the cloud at switch-off (stored_energy / eta_w); absorbed_energy is
/// the residual input - leakage - committed, zero in this ideal-window model
/// but carried so the budget is stated explicitly.
struct WriteResult {
    double leakage_energy = 0.0;
    double committed_energy = 0.0;
    double stored_energy = 0.0;
    double absorbed_energy = 0.0;
    ComplexFieldGrid leakage_field;
    SpinWave wave;
    double window_start = 0.0; // pulse slice stored: emission times in [window_start, window_end]
    double window_end = 0.0;
};

/// Convert the pulse slice that is inside the cloud at switch-off into a spin
/// wave. A slice emitted at time t sits at depth v_g*(T - t) at switch-off
/// time T, so the stored window is [T - L/v_g, T]; everything outside it is
/// leakage. The budget leakage + stored/eta_w + absorbed = input closes
/// exactly: the write loss (1 - eta_w) lives in the gap between stored and
/// committed energy.
inline WriteResult write_spinwave(const PulseEnvelope& envelope, const ComplexFieldGrid& image,
                                  const StorageChannel& channel, double v_g,
                                  const AtomicCloud& cloud, double switch_off_time,
                                  double tau_coherence)
{
    if (!(v_g > 0.0))
        throw std::invalid_argument("write_spinwave: group velocity must be positive");
    channel.validate();
    cloud.validate();
    const double total = envelope.total();
    if (!(total > 0.0))
        throw std::invalid_argument("write_spinwave: envelope has zero area");

    const double input = energy(image);
    const double transit = cloud.length / v_g;
    const double stored_fraction =
        std::min(1.0, std::max(0.0, envelope.integral(switch_off_time - transit, switch_off_time) / total));

    WriteResult result;
    result.window_start = switch_off_time - transit;
    result.window_end = switch_off_time;
    result.committed_energy = stored_fraction * input;
    result.stored_energy = channel.write_efficiency * result.committed_energy;
    result.leakage_energy = (1.0 - stored_fraction) * input;
    result.absorbed_energy = input - result.leakage_energy - result.committed_energy;

    result.leakage_field = scaled(image, std::sqrt(1.0 - stored_fraction));
    result.leakage_field.tilt_x = channel.k_transverse(image.wavelength);
    result.leakage_field.tilt_y = 0.0;

    SpinWave& wave = result.wave;
    wave.grid = image.grid;
    wave.amplitude = image.amplitude;
    const double amp_scale = std::sqrt(channel.write_efficiency * stored_fraction);
    for (auto& a : wave.amplitude)
        a *= amp_scale;
    wave.k_transverse_x = channel.k_transverse(image.wavelength);
    wave.k_transverse_y = 0.0;
    wave.created_at = switch_off_time;
    wave.tau_coherence = tau_coherence;
    wave.wavelength = image.wavelength;
    wave.label = channel.label;
    return result;
}

/// Free evolution for dt: amplitude decay exp(-dt/(2 tau)) (excitation number
/// decays as exp(-dt/tau)) and ballistic diffusion blur accumulation
/// sigma += v_rms * dt. The wavevector grating is unaffected.
inline SpinWave evolve_spinwave(const SpinWave& wave, double dt, const AtomicCloud& cloud)
{
    if (dt < 0.0)
        throw std::invalid_argument("evolve_spinwave: dt must be nonnegative");
    cloud.validate();
    SpinWave out = wave;
    if (dt == 0.0)
        return out;
    const double decay = std::exp(-dt / (2.0 * wave.tau_coherence));
    for (auto& a : out.amplitude)
        a *= decay;
    out.blur_sigma = wave.blur_sigma + cloud.rms_speed * dt;
    return out;
}

namespace medium_detail {

inline void gaussian_blur_inplace(std::vector<complexd>& data, const TransverseGrid& grid, double sigma)
{
    if (sigma <= 0.0)
        return;
    fft2(data.data(), grid.nx, grid.ny, false);
    const double two_pi2 = 2.0 * std::numbers::pi * std::numbers::pi;
    for (int j = 0; j < grid.ny; ++j) {
        const double fy = fft_frequency(j, grid.ny, grid.dy);
        for (int i = 0; i < grid.nx; ++i) {
            const double fx = fft_frequency(i, grid.nx, grid.dx);
            data[static_cast<std::size_t>(j) * grid.nx + i] *=
                std::exp(-two_pi2 * sigma * sigma * (fx * fx + fy * fy));
        }
    }
    fft2(data.data(), grid.nx, grid.ny, true);
}

} // namespace medium_detail

/// Convert a stored wave back into light: pattern scaled by sqrt(eta_r) with
/// the accumulated diffusion blur applied, emitted along the direction stored
/// in the grating (tilt metadata reattached).
inline ComplexFieldGrid read_spinwave(const SpinWave& wave, const StorageChannel& channel)
{
    channel.validate();
    ComplexFieldGrid field;
    field.grid = wave.grid;
    field.wavelength = wave.wavelength;
    field.amplitude = wave.amplitude;
    medium_detail::gaussian_blur_inplace(field.amplitude, field.grid, wave.blur_sigma);
    const double scale = std::sqrt(channel.read_efficiency);
    for (auto& a : field.amplitude)
        a *= scale;
    field.tilt_x = wave.k_transverse_x;
    field.tilt_y = wave.k_transverse_y;
    return field;
}

/// Normalized overlap of the stored grating with a readout direction:
/// |< exp(i (k_read - k_wave) . r) >| weighted by the stored excitation
/// density and the readout beam intensity profile, times the longitudinal
/// phase-mismatch factor |sinc(dk_z L / 2)| over the cloud length. Equals 1
/// for a matched readout. Pass beam_waist = infinity for a flat readout beam.
inline double crosstalk_coefficient(const SpinWave& wave, double readout_kx, double readout_ky,
                                    double beam_waist, const AtomicCloud& cloud)
{
    if (!(beam_waist > 0.0))
        throw std::invalid_argument("crosstalk_coefficient: beam waist must be positive");
    cloud.validate();

    const double dkx = readout_kx - wave.k_transverse_x;
    const double dky = readout_ky - wave.k_transverse_y;
    const bool flat = std::isinf(beam_waist);

    complexd overlap(0.0, 0.0);
    double weight_sum = 0.0;
    for (int j = 0; j < wave.grid.ny; ++j) {
        const double y = wave.grid.y(j);
        for (int i = 0; i < wave.grid.nx; ++i) {
            const double x = wave.grid.x(i);
            double w = std::norm(wave.amplitude[static_cast<std::size_t>(j) * wave.grid.nx + i]);
            if (w == 0.0)
                continue;
            if (!flat)
                w *= std::exp(-2.0 * (x * x + y * y) / (beam_waist * beam_waist));
            const double phase = dkx * x + dky * y;
            overlap += w * complexd(std::cos(phase), std::sin(phase));
            weight_sum += w;
        }
    }
    if (weight_sum <= 0.0)
        return 0.0;
    const double transverse = std::abs(overlap) / weight_sum;

    const double k = 2.0 * std::numbers::pi / wave.wavelength;
    auto kz = [k](double ktx, double kty) {
        const double kt2 = ktx * ktx + kty * kty;
        return std::sqrt(std::max(0.0, k * k - kt2));
    };
    const double dkz = kz(readout_kx, readout_ky) - kz(wave.k_transverse_x, wave.k_transverse_y);
    const double arg = 0.5 * dkz * cloud.length;
    const double longitudinal = (arg == 0.0) ? 1.0 : std::abs(std::sin(arg) / arg);

    return std::min(1.0, transverse * longitudinal);
}

} // namespace eitmem
