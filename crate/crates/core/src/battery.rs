//! Seeded random problem instances for property checks and benchmarks.
//!
//! Coefficients are polynomials of degree at most two or `c0 + c1 exp(c2 u)`
//! in the rescaled time `u = t / horizon`, with every `c_i` uniform in
//! `[-2, 2]`. Each instance has one impulse factor `1 + c_n`, uniform in
//! `[0.25, 2]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::problem::{Direction, ImpulseSpec, ProblemSpec};

pub const DEFAULT_SEED: u64 = 0x5e_ed0f_05c1;
pub const DEFAULT_COUNT: usize = 100;
pub const DEFAULT_HORIZON: i64 = 60;
pub const COEFF_RANGE: (f64, f64) = (-2.0, 2.0);
pub const FACTOR_RANGE: (f64, f64) = (0.25, 2.0);
pub const MAX_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatteryConfig {
    pub seed: u64,
    pub count: usize,
    pub horizon: i64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            seed: DEFAULT_SEED,
            count: DEFAULT_COUNT,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl BatteryConfig {
    /// Default configuration with the seed taken from `OSC_SEED` when it is
    /// set to a decimal or `0x`-prefixed integer.
    pub fn from_env() -> Self {
        let seed = std::env::var("OSC_SEED").ok().and_then(|s| parse_seed(&s));
        BatteryConfig {
            seed: seed.unwrap_or(DEFAULT_SEED),
            ..Self::default()
        }
    }
}

pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

fn bin(op: BinaryOp, l: Expr, r: Expr) -> Expr {
    Expr::Binary(op, Box::new(l), Box::new(r))
}

fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(COEFF_RANGE.0..=COEFF_RANGE.1)
}

/// Random coefficient function of `t` on `[0, horizon]`.
pub fn random_coefficient(rng: &mut ChaCha8Rng, horizon: i64) -> Expr {
    let u = bin(BinaryOp::Div, Expr::Var, Expr::Const(horizon as f64));
    if rng.gen_bool(0.5) {
        let degree = rng.gen_range(0..=2);
        let mut e = Expr::Const(coeff(rng));
        for p in 1..=degree {
            let c = coeff(rng);
            let term = if p == 1 {
                bin(BinaryOp::Mul, Expr::Const(c), u.clone())
            } else {
                bin(
                    BinaryOp::Mul,
                    Expr::Const(c),
                    bin(BinaryOp::Pow, u.clone(), Expr::Const(p as f64)),
                )
            };
            e = bin(BinaryOp::Add, e, term);
        }
        e
    } else {
        let (c0, c1, c2) = (coeff(rng), coeff(rng), coeff(rng));
        let growth = Expr::Unary(UnaryOp::Exp, Box::new(bin(BinaryOp::Mul, Expr::Const(c2), u)));
        bin(
            BinaryOp::Add,
            Expr::Const(c0),
            bin(BinaryOp::Mul, Expr::Const(c1), growth),
        )
    }
}

/// One random instance; `index` only feeds the stream selection so each
/// instance is reproducible on its own.
pub fn instance(seed: u64, index: usize, horizon: i64) -> ProblemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let direction = if rng.gen_bool(0.5) {
        Direction::Delayed
    } else {
        Direction::Advanced
    };
    let k = rng.gen_range(1..=MAX_K);
    let a = random_coefficient(&mut rng, horizon);
    let b = random_coefficient(&mut rng, horizon);
    let impulse = ImpulseSpec::ConstantFactor(rng.gen_range(FACTOR_RANGE.0..=FACTOR_RANGE.1));
    let initial_window = (0..=k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    ProblemSpec::new(a, b, direction, k, impulse, initial_window, 0, horizon)
}

pub fn generate(config: BatteryConfig) -> Vec<ProblemSpec> {
    (0..config.count)
        .map(|i| instance(config.seed, i, config.horizon))
        .collect()
}

/// The same instance with impulses switched off.
pub fn without_impulses(spec: &ProblemSpec) -> ProblemSpec {
    ProblemSpec {
        impulse: ImpulseSpec::None,
        ..spec.clone()
    }
}
