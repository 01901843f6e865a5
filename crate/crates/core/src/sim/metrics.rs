use crate::{Error, Result};

/// PSNR for 8-bit samples; capped at 100 dB for a lossless frame.
pub fn psnr(mse: f64) -> f64 {
    if mse <= 0.0 {
        100.0
    } else {
        (10.0 * (255.0 * 255.0 / mse).log10()).min(100.0)
    }
}

/// `|actual - target| / target * 100`.
pub fn bit_err(target_bps: f64, actual_bps: f64) -> Result<f64> {
    if !(target_bps > 0.0) {
        return Err(Error::domain(format!("target must be positive, got {target_bps}")));
    }
    Ok((actual_bps - target_bps).abs() / target_bps * 100.0)
}
