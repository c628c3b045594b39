//! Counter-based pseudo-random generator with splittable streams.
//!
//! Output n of a stream is `mix64(key + n·GOLDEN)` where `mix64` is the
//! SplitMix64 finalizer (Steele, Lea & Flood 2014), i.e. the SplitMix64
//! sequence with random access. Streams are split by deriving a child key
//! from the parent key and a stream index through the same mixer, so
//! `(seed, stream, counter)` fully determines every draw — trajectories get
//! independent, reproducible streams regardless of scheduling.
//!
//! Gaussian variates use the Marsaglia polar method (documented below); it
//! relies only on `ln` and `sqrt`, and a given (seed, stream) reproduces the
//! same doubles on every run.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xA3EC_6475_9359_ACD5;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitRng {
    key: u64,
    counter: u64,
    spare_gaussian: Option<f64>,
}

impl SplitRng {
    pub fn new(seed: u64) -> Self {
        SplitRng {
            key: mix64(seed.wrapping_add(GOLDEN)),
            counter: 0,
            spare_gaussian: None,
        }
    }

    /// Derive an independent child stream. Children of the same parent with
    /// distinct indices never share a key sequence.
    pub fn stream(&self, index: u64) -> SplitRng {
        SplitRng {
            key: mix64(self.key ^ mix64(index.wrapping_mul(GOLDEN) ^ STREAM_SALT)),
            counter: 0,
            spare_gaussian: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter = self.counter.wrapping_add(1);
        v
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64) / DEN
    }

    /// Standard normal via the Marsaglia polar method: draw (u, v) uniform on
    /// [-1, 1)², reject unless 0 < s = u² + v² < 1, return u·√(-2 ln s / s)
    /// and cache the v-companion for the next call.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare_gaussian.take() {
            return g;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare_gaussian = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// Wiener increment over a step of length `dt`: N(0, dt).
    #[inline]
    pub fn wiener_increment(&mut self, dt: f64) -> f64 {
        dt.sqrt() * self.next_gaussian()
    }
}
