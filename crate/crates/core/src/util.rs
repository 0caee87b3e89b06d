//! Small shared helpers: deterministic float formatting and seeding.

/// Format a float with 9 significant digits.
///
/// Used by every on-disk format so that repeated save/load cycles are
/// byte-stable: `fmt_sig9(parse(fmt_sig9(x))) == fmt_sig9(x)`.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0" leaking into canonical output.
        return "0.00000000e0".to_string();
    }
    format!("{:.8e}", x)
}

/// Round a float to 9 significant decimal digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fmt_sig9(x).parse().unwrap_or(x)
}

/// FNV-1a hash of a byte string; used to derive per-tensor RNG streams
/// from a single configured seed.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive a stream seed from a base seed and a label.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ fnv1a(label.as_bytes())
}
