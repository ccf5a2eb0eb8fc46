//! Per-site deterministic random streams.
//!
//! The generator is SplitMix64 and the range reduction is plain rejection
//! sampling, both fixed here so that the same seed yields the same output on
//! every platform and in any reimplementation.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a, used as the stable hash of file identifiers.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Source of uniform integers. The hiding procedures draw through this trait
/// so tests can script the draws.
pub trait Uniform {
    /// A value drawn uniformly from `lo..=hi`. Requires `lo <= hi`.
    fn uniform(&mut self, lo: i64, hi: i64) -> i64;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteRng {
    state: u64,
}

impl SiteRng {
    pub fn from_state(state: u64) -> Self {
        SiteRng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `0..n`, `n > 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

impl Uniform for SiteRng {
    fn uniform(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        let width = hi.abs_diff(lo) + 1;
        if width == 0 {
            // full 64-bit range
            return self.next_u64() as i64;
        }
        lo.wrapping_add(self.below(width) as i64)
    }
}

/// The stream for one literal site: `seed`, the file identifier and the site
/// index are folded through the mixer in that order.
pub fn derive_site_rng(seed: u64, file_id: &str, site_index: u64) -> SiteRng {
    let mut h = mix64(seed);
    h = mix64(h ^ fnv1a64(file_id.as_bytes()));
    h = mix64(h ^ site_index);
    SiteRng::from_state(h)
}
