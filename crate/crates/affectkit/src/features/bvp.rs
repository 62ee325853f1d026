//! Pulse peak detection on the BVP waveform and the derived interbeat
//! statistics.

use crate::error::{Error, Result};
use crate::features::stats::rolling_mean_std;

/// Minimum peaks needed before interbeat statistics mean anything.
pub const MIN_PEAKS: usize = 3;
/// Refractory spacing between accepted peaks (caps heart rate at ~180 bpm).
pub const MIN_PEAK_SPACING_S: f64 = 0.33;
/// Interbeat intervals longer than this are physiologically implausible
/// (~30 bpm floor) and are left out of the HRV statistics.
pub const MAX_IBI_S: f64 = 2.0;

/// Detect pulse peaks in a preprocessed BVP slice.
///
/// A peak is a strict local maximum exceeding an adaptive threshold (rolling
/// mean plus half a rolling standard deviation over a 2 s window). Peaks
/// closer together than the refractory spacing collapse onto the higher one,
/// so accepted indices are strictly increasing and at least
/// [`MIN_PEAK_SPACING_S`] apart. Expects `rate >= 32` Hz.
pub fn detect_bvp_peaks(x: &[f64], rate: f64) -> Result<Vec<usize>> {
    assert!(rate >= 32.0, "BVP peak detection requires rate >= 32 Hz");
    let window = (2.0 * rate).round() as usize;
    let (means, stds) = rolling_mean_std(x, window.max(1));
    let refractory = (MIN_PEAK_SPACING_S * rate).round() as usize;

    let mut peaks: Vec<usize> = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        if !(x[i - 1] < x[i] && x[i] >= x[i + 1]) {
            continue;
        }
        if x[i] <= means[i] + 0.5 * stds[i] {
            continue;
        }
        match peaks.last() {
            Some(&last) if i - last < refractory => {
                // Within the refractory period keep whichever apex is higher.
                if x[i] > x[last] {
                    *peaks.last_mut().unwrap() = i;
                }
            }
            _ => peaks.push(i),
        }
    }

    if peaks.len() < MIN_PEAKS {
        return Err(Error::TooFewPeaks { found: peaks.len(), need: MIN_PEAKS });
    }
    Ok(peaks)
}

/// Interbeat intervals in seconds between consecutive peak indices.
pub fn ibi_from_peaks(peaks: &[usize], rate: f64) -> Result<Vec<f64>> {
    if peaks.len() < 2 {
        return Err(Error::TooFewPeaks { found: peaks.len(), need: 2 });
    }
    Ok(peaks.windows(2).map(|w| (w[1] - w[0]) as f64 / rate).collect())
}

/// Time-domain heart-rate-variability block:
/// mean HR, HR std, mean IBI, SDNN, RMSSD, pNN50.
#[derive(Debug, Clone, Copy)]
pub struct HrvBlock {
    pub hr_mean: f64,
    pub hr_std: f64,
    pub ibi_mean: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub pnn50: f64,
}

impl HrvBlock {
    pub fn missing() -> Self {
        Self {
            hr_mean: f64::NAN,
            hr_std: f64::NAN,
            ibi_mean: f64::NAN,
            sdnn: f64::NAN,
            rmssd: f64::NAN,
            pnn50: f64::NAN,
        }
    }
}

/// HRV statistics over plausible interbeat intervals. Intervals outside
/// `[MIN_PEAK_SPACING_S, MAX_IBI_S]` are discarded; with fewer than two
/// plausible intervals the whole block is missing (NaN) and is imputed
/// downstream from training-set medians.
pub fn hrv_block(ibis: &[f64]) -> HrvBlock {
    use crate::features::stats::{mean, std_dev};

    let valid: Vec<f64> = ibis
        .iter()
        .copied()
        .filter(|&v| (MIN_PEAK_SPACING_S..=MAX_IBI_S).contains(&v))
        .collect();
    if valid.len() < 2 {
        return HrvBlock::missing();
    }

    let hr: Vec<f64> = valid.iter().map(|&v| 60.0 / v).collect();
    let diffs: Vec<f64> = valid.windows(2).map(|w| w[1] - w[0]).collect();
    let rmssd = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let pnn50 = diffs.iter().filter(|d| d.abs() > 0.050).count() as f64 / diffs.len() as f64;

    HrvBlock {
        hr_mean: mean(&hr),
        hr_std: std_dev(&hr),
        ibi_mean: mean(&valid),
        sdnn: std_dev(&valid),
        rmssd,
        pnn50,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(f: f64, rate: f64, secs: f64) -> Vec<f64> {
        let n = (rate * secs).round() as usize;
        (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect()
    }

    #[test]
    fn sine_peak_count_matches_cycle_count() {
        // floor(f * T) maxima, +-1 for edge effects.
        let peaks = detect_bvp_peaks(&sine(1.2, 64.0, 60.0), 64.0).unwrap();
        assert!((71..=73).contains(&peaks.len()), "found {}", peaks.len());
        assert!(peaks.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn peak_count_tracks_frequency_over_the_physiological_band() {
        for f in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            let peaks = detect_bvp_peaks(&sine(f, 64.0, 60.0), 64.0).unwrap();
            let expect = (f * 60.0).floor() as i64;
            let got = peaks.len() as i64;
            assert!((got - expect).abs() <= 1, "f={f}: {got} vs {expect}");
        }
    }

    #[test]
    fn constant_signal_has_no_peaks() {
        let err = detect_bvp_peaks(&vec![0.5; 3840], 64.0).unwrap_err();
        assert!(matches!(err, Error::TooFewPeaks { .. }));
    }

    #[test]
    fn one_hz_sine_gives_one_second_intervals() {
        let peaks = detect_bvp_peaks(&sine(1.0, 64.0, 60.0), 64.0).unwrap();
        let ibis = ibi_from_peaks(&peaks, 64.0).unwrap();
        let mean_ibi = ibis.iter().sum::<f64>() / ibis.len() as f64;
        assert!((mean_ibi - 1.0).abs() <= 1.0 / 64.0, "mean IBI {mean_ibi}");
    }

    #[test]
    fn uniform_peaks_give_uniform_intervals() {
        // 72 uniformly spaced peaks over 60 s: every interval is 60/71 s.
        let rate = 64.0;
        let peaks: Vec<usize> = (0..72).map(|k| (k as f64 * 60.0 / 71.0 * rate).round() as usize).collect();
        let ibis = ibi_from_peaks(&peaks, rate).unwrap();
        let expect = 60.0 / 71.0;
        for ibi in ibis {
            assert!((ibi - expect).abs() <= 1.5 / rate, "{ibi} vs {expect}");
        }
    }

    #[test]
    fn evenly_spaced_samples_give_exact_intervals() {
        assert_eq!(ibi_from_peaks(&[0, 64, 128], 64.0).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn single_peak_is_too_few() {
        assert!(matches!(ibi_from_peaks(&[10], 64.0), Err(Error::TooFewPeaks { .. })));
    }

    #[test]
    fn hrv_block_on_steady_rhythm() {
        let ibis = vec![0.8; 40];
        let block = hrv_block(&ibis);
        assert!((block.hr_mean - 75.0).abs() < 1e-9);
        assert!(block.sdnn.abs() < 1e-12);
        assert_eq!(block.rmssd, 0.0);
        assert_eq!(block.pnn50, 0.0);
    }

    #[test]
    fn hrv_block_missing_when_intervals_are_implausible() {
        let block = hrv_block(&[3.0, 2.8, 2.9]);
        assert!(block.hr_mean.is_nan());
    }
}
