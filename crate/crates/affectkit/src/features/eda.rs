//! Electrodermal activity decomposition into slow (tonic) and fast (phasic)
//! components, plus skin-conductance-response peak detection on the phasic
//! part.

use crate::features::stats::moving_average;

/// Width of the moving-average window defining the tonic component.
pub const TONIC_WINDOW_S: f64 = 4.0;

/// One detected skin conductance response: index of the phasic apex and its
/// amplitude above the preceding trough.
#[derive(Debug, Clone, Copy)]
pub struct ScrPeak {
    pub index: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct EdaDecomposition {
    pub tonic: Vec<f64>,
    pub phasic: Vec<f64>,
    pub scr_peaks: Vec<ScrPeak>,
}

/// Split an EDA slice into tonic + phasic and detect SCR peaks.
///
/// Tonic is a centered 4 s moving average; phasic is the residual, so
/// `tonic + phasic` reconstructs the input exactly. An SCR is a strict local
/// maximum of the phasic component rising at least `threshold` above its
/// preceding trough, the lowest local minimum since the previous local
/// maximum. A maximum with no preceding trough (e.g. a monotone ramp out of
/// the window edge) is not a response.
pub fn eda_decompose(x: &[f64], rate: f64, threshold: f64) -> EdaDecomposition {
    let window = (TONIC_WINDOW_S * rate).round().max(1.0) as usize;
    let tonic = moving_average(x, window);
    let phasic: Vec<f64> = x.iter().zip(&tonic).map(|(&v, &t)| v - t).collect();

    let mut scr_peaks = Vec::new();
    let mut trough: Option<f64> = None;
    for i in 1..phasic.len().saturating_sub(1) {
        if phasic[i - 1] > phasic[i] && phasic[i] <= phasic[i + 1] {
            trough = Some(trough.map_or(phasic[i], |t: f64| t.min(phasic[i])));
        } else if phasic[i - 1] < phasic[i] && phasic[i] >= phasic[i + 1] {
            if let Some(t) = trough {
                let amplitude = phasic[i] - t;
                if amplitude >= threshold {
                    scr_peaks.push(ScrPeak { index: i, amplitude });
                }
            }
            trough = None;
        }
    }

    EdaDecomposition { tonic, phasic, scr_peaks }
}
