//! Small numeric helpers shared across modules.

use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256, used to fingerprint inputs in run metadata.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Compensated (Kahan) summation. Order-dependent but far more accurate
/// than naive accumulation for long probability vectors.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Incremental form of [`kahan_sum`] for accumulation across batches.
/// Feeding the same values in the same order gives bitwise-equal totals.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanAccumulator {
    sum: f64,
    c: f64,
}

impl KahanAccumulator {
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}
