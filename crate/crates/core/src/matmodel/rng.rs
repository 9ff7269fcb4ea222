//! Counter-based random numbers: every draw is a pure function of
//! (seed, stream, counter), so parallel chains seeded with distinct stream
//! ids are reproducible and independent of scheduling. No wall-clock
//! seeding anywhere.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z
}

#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> CounterRng {
        let key = mix(seed ^ mix(stream.wrapping_mul(GOLDEN).wrapping_add(1)));
        CounterRng { key, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0) + f64::MIN_POSITIVE
    }

    /// Standard normal by the 128-layer ziggurat; one mixed word serves
    /// both the layer index (low bits) and the uniform (high bits), and
    /// the rare wedge/tail branches draw fresh words.
    pub fn normal(&mut self) -> f64 {
        let zig = ziggurat_tables();
        loop {
            let bits = self.next_u64();
            let i = (bits & 0x7f) as usize;
            let u = ((bits >> 11) as f64) * (2.0 / 9_007_199_254_740_992.0) - 1.0;
            if u.abs() < zig.ratio[i] {
                return u * zig.x[i];
            }
            if i == 0 {
                return self.normal_tail(ZIGGURAT_R, u < 0.0);
            }
            let x = u * zig.x[i];
            let f0 = (-0.5 * (zig.x[i] * zig.x[i] - x * x)).exp();
            let f1 = (-0.5 * (zig.x[i + 1] * zig.x[i + 1] - x * x)).exp();
            if f1 + self.uniform() * (f0 - f1) < 1.0 {
                return x;
            }
        }
    }

    fn normal_tail(&mut self, min: f64, negative: bool) -> f64 {
        loop {
            let x = self.uniform().ln() / min;
            let y = self.uniform().ln();
            if -2.0 * y >= x * x {
                return if negative { x - min } else { min - x };
            }
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.normal();
        }
    }
}

const ZIGGURAT_LAYERS: usize = 128;
const ZIGGURAT_R: f64 = 3.442619855899;
const ZIGGURAT_V: f64 = 9.91256303526217e-3;

struct ZigguratTables {
    x: [f64; ZIGGURAT_LAYERS + 1],
    ratio: [f64; ZIGGURAT_LAYERS],
}

fn ziggurat_tables() -> &'static ZigguratTables {
    use std::sync::OnceLock;
    static TABLES: OnceLock<ZigguratTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut x = [0.0; ZIGGURAT_LAYERS + 1];
        let f = (-0.5 * ZIGGURAT_R * ZIGGURAT_R).exp();
        x[0] = ZIGGURAT_V / f;
        x[1] = ZIGGURAT_R;
        for i in 2..ZIGGURAT_LAYERS {
            let prev = x[i - 1];
            x[i] = (-2.0 * (ZIGGURAT_V / prev + (-0.5 * prev * prev).exp()).ln()).sqrt();
        }
        x[ZIGGURAT_LAYERS] = 0.0;
        let mut ratio = [0.0; ZIGGURAT_LAYERS];
        for i in 0..ZIGGURAT_LAYERS {
            ratio[i] = x[i + 1] / x[i];
        }
        ZigguratTables { x, ratio }
    })
}
