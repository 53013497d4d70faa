//! Curve summaries used by the sweeps and the acceptance checks.

/// First SNR at which the BER crosses `target` downward, interpolating
/// `log10(BER)` linearly between grid points.
pub fn crossing_snr(snr_db: &[f64], ber: &[f64], target: f64) -> Option<f64> {
    let lt = target.log10();
    let l = |b: f64| b.max(1e-300).log10();
    if let Some(&b0) = ber.first() {
        if b0 <= target {
            return Some(snr_db[0]);
        }
    }
    for i in 1..snr_db.len().min(ber.len()) {
        let (b0, b1) = (ber[i - 1], ber[i]);
        if b0.is_nan() || b1.is_nan() {
            continue;
        }
        if b0 > target && b1 <= target {
            let t = (lt - l(b0)) / (l(b1) - l(b0));
            return Some(snr_db[i - 1] + t * (snr_db[i] - snr_db[i - 1]));
        }
    }
    None
}

/// SNR of the steepest single-step BER drop (in decades per dB) and its size.
pub fn steepest_drop(snr_db: &[f64], ber: &[f64]) -> Option<(f64, f64)> {
    let l = |b: f64| b.max(1e-300).log10();
    (1..snr_db.len())
        .map(|i| (snr_db[i - 1], (l(ber[i - 1]) - l(ber[i])) / (snr_db[i] - snr_db[i - 1])))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}
