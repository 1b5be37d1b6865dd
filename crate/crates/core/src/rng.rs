//! Counter-based random numbers.
//!
//! Site states are drawn from Philox4x32-10 evaluated at a counter built from
//! the site coordinates and the trial index, under a key derived from the
//! master seed and the experiment id. The state of a site is therefore a pure
//! function of `(master_seed, experiment_id, trial_index, site)`, which makes
//! sampling independent of iteration order, box shape and worker count.

use crate::lattice::Site;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
#[inline]
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one independent configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TrialKey {
    pub master_seed: u64,
    pub experiment_id: u32,
    pub trial_index: u64,
}

impl TrialKey {
    pub const fn new(master_seed: u64, experiment_id: u32, trial_index: u64) -> Self {
        TrialKey { master_seed, experiment_id, trial_index }
    }

    pub const fn with_trial(self, trial_index: u64) -> Self {
        TrialKey { trial_index, ..self }
    }

    fn philox_key(&self) -> [u32; 2] {
        let k = splitmix64(self.master_seed ^ splitmix64(0x5157_u64 ^ self.experiment_id as u64));
        [k as u32, (k >> 32) as u32]
    }

    pub fn site_stream(&self) -> SiteStream {
        SiteStream {
            key: self.philox_key(),
            trial: [self.trial_index as u32, (self.trial_index >> 32) as u32],
        }
    }
}

/// Per-trial site randomness. Two horizontally paired sites share one
/// Philox block, 64 bits each.
#[derive(Debug, Clone, Copy)]
pub struct SiteStream {
    key: [u32; 2],
    trial: [u32; 2],
}

impl SiteStream {
    /// 53 uniform bits for `s`.
    #[inline]
    pub fn bits53(&self, s: Site) -> u64 {
        let pair = s.x.div_euclid(2) as u32;
        let w = philox4x32_10([pair, s.y as u32, self.trial[0], self.trial[1]], self.key);
        let word = if s.x.rem_euclid(2) == 0 {
            (w[0] as u64) << 32 | w[1] as u64
        } else {
            (w[2] as u64) << 32 | w[3] as u64
        };
        word >> 11
    }

    /// Both sites of the horizontal pair starting at the even column `2*pair`.
    #[inline]
    pub fn pair_bits53(&self, pair: i32, y: i32) -> (u64, u64) {
        let w = philox4x32_10([pair as u32, y as u32, self.trial[0], self.trial[1]], self.key);
        (
            ((w[0] as u64) << 32 | w[1] as u64) >> 11,
            ((w[2] as u64) << 32 | w[3] as u64) >> 11,
        )
    }
}

/// `p` expressed against 53-bit uniforms: a site is open iff its bits are
/// strictly below the threshold, which happens with probability `p` exactly
/// whenever `p · 2^53` is an integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenThreshold(f64);

impl OpenThreshold {
    pub fn new(p: f64) -> Self {
        OpenThreshold(p * (1u64 << 53) as f64)
    }

    #[inline(always)]
    pub fn is_open(&self, bits53: u64) -> bool {
        (bits53 as f64) < self.0
    }
}

/// Sequential generator over Philox blocks, used for bootstrap resampling
/// and synthetic data.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: [u32; 2],
    counter: u64,
    buf: [u32; 4],
    used: usize,
    spare_normal: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        let k = splitmix64(seed);
        CounterRng { key: [k as u32, (k >> 32) as u32], counter: 0, buf: [0; 4], used: 4, spare_normal: None }
    }

    pub fn next_u32(&mut self) -> u32 {
        if self.used == 4 {
            let c = self.counter;
            self.counter += 1;
            self.buf = philox4x32_10([c as u32, (c >> 32) as u32, 0x6c62_6f6f, 0x7473_7274], self.key);
            self.used = 0;
        }
        let v = self.buf[self.used];
        self.used += 1;
        v
    }

    pub fn next_u64(&mut self) -> u64 {
        (self.next_u32() as u64) << 32 | self.next_u32() as u64
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n` (Lemire's method with rejection).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        loop {
            let x = self.next_u64();
            let m = x as u128 * n as u128;
            let lo = m as u64;
            if lo >= n.wrapping_neg() % n {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let t = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(r * libm::sin(t));
        r * libm::cos(t)
    }
}
