#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vatscope {

/// Mono samples in [-1, 1] at `rate` samples per second.
struct AudioClip {
    std::vector<double> samples;
    double rate = 0.0;

    double duration() const noexcept { return rate > 0.0 ? static_cast<double>(samples.size()) / rate : 0.0; }
};

enum class MelScale { slaney, htk };
enum class LogMode { natural, decibel };

struct AudioConfig {
    double target_rate = 22050.0;
    std::size_t n_fft = 2048;
    std::size_t hop = 512;
    std::size_t n_mels = 128;
    double fmin = 0.0;
    std::optional<double> fmax;  // defaults to target_rate / 2
    double log_floor = 1e-10;    // power units
    bool centered = true;        // reflect-padded frames
    MelScale mel_scale = MelScale::slaney;
    LogMode log_mode = LogMode::natural;

    double resolved_fmax() const noexcept { return fmax.value_or(target_rate / 2.0); }
    void validate() const;
    /// Stable text form of every field; feeds feature-cache keys.
    std::string fingerprint() const;
};

// -- WAV ---------------------------------------------------------------------

/// RIFF/WAVE with PCM 16/24/32-bit integer or 32/64-bit float samples
/// (WAVE_FORMAT_EXTENSIBLE accepted). Channels are averaged to mono.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);
AudioClip read_wav(const std::filesystem::path& path);

enum class WavSampleFormat { pcm16, pcm24, pcm32, float32 };

/// Interleaves `channels` (equal lengths) into a canonical 44-byte-header WAV.
std::vector<std::uint8_t> encode_wav(std::span<const std::vector<double>> channels, std::uint32_t rate,
                                     WavSampleFormat format);

// -- DSP ---------------------------------------------------------------------

/// Kaiser-windowed sinc interpolation, low-passed at the lower Nyquist rate.
/// Output length is round(len * target / native); same-rate input is copied.
AudioClip resample(const AudioClip& clip, double target_rate);

struct PowerSpectrogram {
    std::size_t frames = 0;
    std::size_t bins = 0;        // n_fft / 2 + 1
    std::vector<double> power;   // frames x bins, row-major

    double at(std::size_t frame, std::size_t bin) const noexcept { return power[frame * bins + bin]; }
};

/// Hann-windowed |FFT|^2 every `hop` samples. In centered mode the signal is
/// reflect-padded by n_fft/2 on both sides and frames = 1 + floor(len / hop).
PowerSpectrogram stft_power(const AudioClip& clip, const AudioConfig& cfg);

double hz_to_mel(double hz, MelScale scale);
double mel_to_hz(double mel, MelScale scale);

struct MelFilterbank {
    std::size_t n_mels = 0;
    std::size_t bins = 0;
    std::vector<double> weights;     // n_mels x bins, row-major
    std::vector<double> centers_hz;  // n_mels
};

/// Triangular filters on n_mels + 2 mel-spaced edges between fmin and fmax,
/// each scaled to unit area. Throws InputError if any filter covers no FFT bin.
MelFilterbank mel_filterbank(const AudioConfig& cfg);

/// Filterbank applied to every power frame, frames x n_mels, before any log.
std::vector<double> mel_power(const AudioClip& clip, const AudioConfig& cfg, std::size_t* frames = nullptr);

/// Log-compressed mel energies averaged over time: one value per band.
std::vector<double> log_mel_mean(const AudioClip& clip, const AudioConfig& cfg);

/// read_wav -> resample to target_rate -> log_mel_mean.
std::vector<double> extract_features(const std::filesystem::path& wav, const AudioConfig& cfg);

}  // namespace vatscope
