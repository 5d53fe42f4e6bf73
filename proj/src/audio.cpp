#include "vatscope/audio.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "vatscope/error.hpp"

namespace vatscope {

void AudioConfig::validate() const {
    if (!(target_rate > 0.0)) throw InputError("audio: target_rate must be > 0");
    if (n_fft < 2 || hop < 1 || hop > n_fft) throw InputError("audio: need 1 <= hop <= n_fft and n_fft >= 2");
    if (n_mels < 1) throw InputError("audio: n_mels must be >= 1");
    const double top = resolved_fmax();
    if (!(fmin >= 0.0) || !(fmin < top) || top > target_rate / 2.0)
        throw InputError("audio: need 0 <= fmin < fmax <= target_rate / 2");
    if (!(log_floor > 0.0)) throw InputError("audio: log_floor must be > 0");
}

std::string AudioConfig::fingerprint() const {
    std::ostringstream s;
    s.precision(17);
    s << "rate=" << target_rate << ";n_fft=" << n_fft << ";hop=" << hop << ";n_mels=" << n_mels << ";fmin=" << fmin
      << ";fmax=" << resolved_fmax() << ";floor=" << log_floor << ";centered=" << centered
      << ";mel=" << (mel_scale == MelScale::slaney ? "slaney" : "htk")
      << ";log=" << (log_mode == LogMode::natural ? "ln" : "db");
    return s.str();
}

// -- resampling ---------------------------------------------------------------

namespace {

constexpr double kZeroCrossings = 32.0;
constexpr double kRolloff = 0.95;
constexpr double kKaiserBeta = 8.6;

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace

AudioClip resample(const AudioClip& clip, double target_rate) {
    if (!(clip.rate > 0.0) || !(target_rate > 0.0)) throw InputError("resample: rates must be > 0");
    if (clip.rate == target_rate) return clip;

    const double ratio = target_rate / clip.rate;
    const auto in_len = static_cast<std::ptrdiff_t>(clip.samples.size());
    const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(in_len) * ratio));
    const double cutoff = std::min(1.0, ratio) * kRolloff;  // in units of the native Nyquist
    const double half_width = kZeroCrossings / cutoff;      // native samples
    const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

    auto kernel = [&](double t) {
        const double x = t / half_width;
        if (std::abs(x) >= 1.0) return 0.0;
        return cutoff * sinc(cutoff * t) * std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - x * x)) / i0_beta;
    };

    struct Phase {
        std::ptrdiff_t lo = 0;
        std::vector<double> taps;
        double gain = 0.0;
    };
    auto make_phase = [&](double center) {
        Phase ph;
        ph.lo = static_cast<std::ptrdiff_t>(std::ceil(center - half_width));
        const auto hi = static_cast<std::ptrdiff_t>(std::floor(center + half_width));
        for (std::ptrdiff_t k = ph.lo; k <= hi; ++k) {
            const double w = kernel(center - static_cast<double>(k));
            ph.taps.push_back(w);
            ph.gain += w;
        }
        return ph;
    };
    auto apply = [&](const Phase& ph, std::ptrdiff_t shift) {
        double acc = 0.0;
        for (std::size_t t = 0; t < ph.taps.size(); ++t) {
            const auto k = ph.lo + shift + static_cast<std::ptrdiff_t>(t);
            if (k >= 0 && k < in_len) acc += ph.taps[t] * clip.samples[static_cast<std::size_t>(k)];
        }
        // Unit DC gain; samples beyond the edges count as zeros.
        return ph.gain != 0.0 ? acc / ph.gain : 0.0;
    };

    AudioClip out{std::vector<double>(out_len, 0.0), target_rate};

    // Integer rates repeat their fractional phases every target/gcd outputs.
    const bool integral = clip.rate == std::floor(clip.rate) && target_rate == std::floor(target_rate) &&
                          clip.rate < 1e9 && target_rate < 1e9;
    if (integral) {
        const auto native = static_cast<std::int64_t>(clip.rate);
        const auto target = static_cast<std::int64_t>(target_rate);
        const auto g = std::gcd(native, target);
        const auto p = target / g, q = native / g;
        if (p <= 4096) {
            std::vector<Phase> phases;
            phases.reserve(static_cast<std::size_t>(p));
            for (std::int64_t r = 0; r < p; ++r)
                phases.push_back(make_phase(static_cast<double>(r * q) / static_cast<double>(p)));
            for (std::size_t m = 0; m < out_len; ++m) {
                const auto a = static_cast<std::int64_t>(m) / p, r = static_cast<std::int64_t>(m) % p;
                out.samples[m] = apply(phases[static_cast<std::size_t>(r)], static_cast<std::ptrdiff_t>(a * q));
            }
            return out;
        }
    }
    for (std::size_t m = 0; m < out_len; ++m) out.samples[m] = apply(make_phase(static_cast<double>(m) / ratio), 0);
    return out;
}

// -- STFT -----------------------------------------------------------------------

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        std::lock_guard lock(fftw_planner_mutex());
        in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        if (!in_ || !out_) throw std::bad_alloc();
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
        if (!plan_) throw NumericError("FFTW could not plan a " + std::to_string(n) + "-point transform");
    }
    ~RealFft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::span<double> input() noexcept { return {in_, n_}; }
    void execute() noexcept { fftw_execute(plan_); }
    double power(std::size_t bin) const noexcept { return out_[bin][0] * out_[bin][0] + out_[bin][1] * out_[bin][1]; }

private:
    std::size_t n_;
    double* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

// Index into a signal mirrored about its end samples (numpy "reflect").
std::size_t reflect_index(std::ptrdiff_t j, std::size_t len) {
    if (len == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (len - 1));
    j = std::abs(j) % period;
    if (j >= static_cast<std::ptrdiff_t>(len)) j = period - j;
    return static_cast<std::size_t>(j);
}

}  // namespace

PowerSpectrogram stft_power(const AudioClip& clip, const AudioConfig& cfg) {
    cfg.validate();
    const std::size_t len = clip.samples.size();
    if (len == 0) throw InputError("stft_power: empty clip");
    if (!cfg.centered && len < cfg.n_fft)
        throw InputError("stft_power: uncentered mode needs at least n_fft samples");

    const std::size_t n_fft = cfg.n_fft;
    const std::size_t frames = cfg.centered ? 1 + len / cfg.hop : 1 + (len - n_fft) / cfg.hop;
    const auto pad = cfg.centered ? static_cast<std::ptrdiff_t>(n_fft / 2) : 0;

    std::vector<double> window(n_fft);  // periodic Hann
    for (std::size_t t = 0; t < n_fft; ++t)
        window[t] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n_fft));

    PowerSpectrogram out{frames, n_fft / 2 + 1, {}};
    out.power.resize(frames * out.bins);
    RealFft fft(n_fft);
    auto in = fft.input();
    for (std::size_t f = 0; f < frames; ++f) {
        const auto start = static_cast<std::ptrdiff_t>(f * cfg.hop) - pad;
        for (std::size_t t = 0; t < n_fft; ++t)
            in[t] = clip.samples[reflect_index(start + static_cast<std::ptrdiff_t>(t), len)] * window[t];
        fft.execute();
        for (std::size_t b = 0; b < out.bins; ++b) out.power[f * out.bins + b] = fft.power(b);
    }
    return out;
}

// -- mel ------------------------------------------------------------------------

namespace {

constexpr double kSlaneyLinearStep = 200.0 / 3.0;  // Hz per mel below 1 kHz
constexpr double kSlaneyBreakHz = 1000.0;
constexpr double kSlaneyBreakMel = kSlaneyBreakHz / kSlaneyLinearStep;  // 15
const double kSlaneyLogStep = std::log(6.4) / 27.0;

}  // namespace

double hz_to_mel(double hz, MelScale scale) {
    if (scale == MelScale::htk) return 2595.0 * std::log10(1.0 + hz / 700.0);
    if (hz < kSlaneyBreakHz) return hz / kSlaneyLinearStep;
    return kSlaneyBreakMel + std::log(hz / kSlaneyBreakHz) / kSlaneyLogStep;
}

double mel_to_hz(double mel, MelScale scale) {
    if (scale == MelScale::htk) return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
    if (mel < kSlaneyBreakMel) return mel * kSlaneyLinearStep;
    return kSlaneyBreakHz * std::exp(kSlaneyLogStep * (mel - kSlaneyBreakMel));
}

MelFilterbank mel_filterbank(const AudioConfig& cfg) {
    cfg.validate();
    const std::size_t bins = cfg.n_fft / 2 + 1;
    const std::size_t n_mels = cfg.n_mels;

    const double mel_lo = hz_to_mel(cfg.fmin, cfg.mel_scale);
    const double mel_hi = hz_to_mel(cfg.resolved_fmax(), cfg.mel_scale);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1);
        edges[i] = mel_to_hz(mel, cfg.mel_scale);
    }

    MelFilterbank fb{n_mels, bins, std::vector<double>(n_mels * bins, 0.0), std::vector<double>(n_mels)};
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
        fb.centers_hz[m] = center;
        const double area_norm = 2.0 / (right - left);
        bool any = false;
        for (std::size_t b = 0; b < bins; ++b) {
            const double f = static_cast<double>(b) * cfg.target_rate / static_cast<double>(cfg.n_fft);
            const double rise = (f - left) / (center - left);
            const double fall = (right - f) / (right - center);
            const double w = std::max(0.0, std::min(rise, fall));
            if (w > 0.0) {
                fb.weights[m * bins + b] = w * area_norm;
                any = true;
            }
        }
        if (!any)
            throw InputError("mel filter " + std::to_string(m) + " (center " + std::to_string(center) +
                             " Hz) covers no FFT bin; reduce n_mels or raise n_fft");
    }
    return fb;
}

std::vector<double> mel_power(const AudioClip& clip, const AudioConfig& cfg, std::size_t* frames_out) {
    const auto spec = stft_power(clip, cfg);
    const auto fb = mel_filterbank(cfg);
    std::vector<double> mel(spec.frames * fb.n_mels, 0.0);
    for (std::size_t f = 0; f < spec.frames; ++f)
        for (std::size_t m = 0; m < fb.n_mels; ++m) {
            double acc = 0.0;
            for (std::size_t b = 0; b < fb.bins; ++b) acc += fb.weights[m * fb.bins + b] * spec.at(f, b);
            mel[f * fb.n_mels + m] = acc;
        }
    if (frames_out) *frames_out = spec.frames;
    return mel;
}

std::vector<double> log_mel_mean(const AudioClip& clip, const AudioConfig& cfg) {
    std::size_t frames = 0;
    const auto mel = mel_power(clip, cfg, &frames);
    std::vector<double> mean(cfg.n_mels, 0.0);
    for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t m = 0; m < cfg.n_mels; ++m) {
            const double p = mel[f * cfg.n_mels + m];
            mean[m] += cfg.log_mode == LogMode::natural ? std::log(p + cfg.log_floor)
                                                        : 10.0 * std::log10(std::max(p, cfg.log_floor));
        }
    for (auto& v : mean) v /= static_cast<double>(frames);
    return mean;
}

std::vector<double> extract_features(const std::filesystem::path& wav, const AudioConfig& cfg) {
    auto clip = read_wav(wav);
    if (clip.rate != cfg.target_rate) clip = resample(clip, cfg.target_rate);
    return log_mel_mean(clip, cfg);
}

}  // namespace vatscope
