//! Counter-based random streams for reproducible parallel sampling.
//!
//! Every Gaussian draw is a pure function of a `(seed, stream, step, chain,
//! dim)` key mixed through splitmix64-style finalizers. Chains can therefore
//! be processed in any order and on any number of threads without changing
//! the drawn values, and a probe can re-derive exactly the noise a sampler
//! consumed at a given site.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifies the draw site within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Chain initialization from the stationary distribution.
    StationaryInit,
    /// Draws from the perturbation kernel at a fixed time.
    PerturbationInit,
    /// The Ornstein-Uhlenbeck sub-step of a composed update.
    Ou,
    /// The diffusion increment of an Euler-Maruyama update.
    Em,
}

impl Stream {
    #[inline]
    fn id(self) -> u64 {
        match self {
            Stream::StationaryInit => 1,
            Stream::PerturbationInit => 2,
            Stream::Ou => 3,
            Stream::Em => 4,
        }
    }
}

#[inline]
fn site_key(seed: u64, stream: Stream, step: u64, chain: u64, dim: u64) -> u64 {
    let mut k = mix(seed ^ GOLDEN);
    k = mix(k.wrapping_add(GOLDEN ^ stream.id()));
    k = mix(k.wrapping_add(GOLDEN ^ step));
    k = mix(k.wrapping_add(GOLDEN ^ chain));
    k = mix(k.wrapping_add(GOLDEN ^ dim));
    k
}

/// Uniform in `(0, 1]` from the high 53 bits; never zero, so `ln` is safe.
#[inline]
fn to_unit_positive(v: u64) -> f64 {
    ((v >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform in `[0, 1)` from the high 53 bits.
#[inline]
fn to_unit(v: u64) -> f64 {
    (v >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// One pair of independent standard normals for a draw site (Box-Muller).
#[inline]
pub fn normal_pair_at(seed: u64, stream: Stream, step: u64, chain: u64, dim: u64) -> (f64, f64) {
    let k = site_key(seed, stream, step, chain, dim);
    let u1 = to_unit_positive(mix(k ^ 0x243f_6a88_85a3_08d3));
    let u2 = to_unit(mix(k ^ 0x1319_8a2e_0370_7344));
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Source of the standard normal pairs consumed by stochastic sub-steps.
///
/// `ZeroNoise` is a degenerate source used by analysis probes: with every
/// increment zeroed, the sampler propagates first moments exactly through
/// the affine updates of the Gaussian oracle.
pub trait NoiseSource: Sync {
    fn normal_pair(&self, stream: Stream, step: u64, chain: u64, dim: u64) -> (f64, f64);
}

/// The default seeded counter stream.
#[derive(Debug, Clone, Copy)]
pub struct CounterNoise {
    seed: u64,
}

impl CounterNoise {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl NoiseSource for CounterNoise {
    #[inline]
    fn normal_pair(&self, stream: Stream, step: u64, chain: u64, dim: u64) -> (f64, f64) {
        normal_pair_at(self.seed, stream, step, chain, dim)
    }
}

/// Returns `(0, 0)` at every site.
#[derive(Debug, Clone, Copy)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    #[inline]
    fn normal_pair(&self, _stream: Stream, _step: u64, _chain: u64, _dim: u64) -> (f64, f64) {
        (0.0, 0.0)
    }
}
