use crate::error::{Error, Result};
use crate::frame::Histogram;

/// One-dimensional Earth Mover's Distance, averaged over channels.
///
/// Per channel this is `Σ|CDF₁ − CDF₂| / (bins − 1)`, so moving all mass
/// across the full range costs 1.
pub fn emd_1d(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    if h1.bin_count() != h2.bin_count() || h1.channels() != h2.channels() {
        return Err(Error::BinMismatch);
    }
    let bins = h1.bin_count();
    if bins < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for c in 0..h1.channels() {
        let (a, b) = (h1.channel(c), h2.channel(c));
        let (mut ca, mut cb, mut acc) = (0.0, 0.0, 0.0);
        // the last CDF entry is 1 for both; it contributes nothing
        for k in 0..bins - 1 {
            ca += a[k];
            cb += b[k];
            acc += (ca - cb).abs();
        }
        total += acc / (bins - 1) as f64;
    }
    Ok(total / h1.channels() as f64)
}
