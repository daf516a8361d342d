//! Hot loops shared by the estimators.
//!
//! Sums run in a fixed lane order so results are reproducible bit for bit.

use crate::kernels::KernelFamily;

#[inline(always)]
fn weight(family: KernelFamily, r2: f64, u: f64) -> f64 {
    if r2 == 0.0 {
        family.value_1d(u)
    } else {
        family.adjusted_1d(r2, u)
    }
}

/// `Σ_i w((x - z_i) / h)` for one-dimensional inputs.
pub(crate) fn weight_sum_1d(zs: &[f64], x: f64, inv_h: f64, family: KernelFamily, r2: f64) -> f64 {
    let mut lanes = [0.0f64; 4];
    let chunks = zs.chunks_exact(4);
    let tail = chunks.remainder();
    for c in chunks {
        for k in 0..4 {
            lanes[k] += weight(family, r2, (x - c[k]) * inv_h);
        }
    }
    let mut total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for &z in tail {
        total += weight(family, r2, (x - z) * inv_h);
    }
    total
}

/// `(Σ_i w_i, Σ_i w_i y_i)` with `w_i = w((x - z_i) / h)`, one-dimensional.
pub(crate) fn weighted_sums_1d(
    zs: &[f64],
    ys: &[f64],
    x: f64,
    inv_h: f64,
    family: KernelFamily,
    r2: f64,
) -> (f64, f64) {
    debug_assert_eq!(zs.len(), ys.len());
    let mut den = [0.0f64; 4];
    let mut num = [0.0f64; 4];
    let zc = zs.chunks_exact(4);
    let yc = ys.chunks_exact(4);
    let (zt, yt) = (zc.remainder(), yc.remainder());
    for (z, y) in zc.zip(yc) {
        for k in 0..4 {
            let w = weight(family, r2, (x - z[k]) * inv_h);
            den[k] += w;
            num[k] += w * y[k];
        }
    }
    let mut d = (den[0] + den[1]) + (den[2] + den[3]);
    let mut s = (num[0] + num[1]) + (num[2] + num[3]);
    for (&z, &y) in zt.iter().zip(yt) {
        let w = weight(family, r2, (x - z) * inv_h);
        d += w;
        s += w * y;
    }
    (d, s)
}
