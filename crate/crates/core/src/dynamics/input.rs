use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matcore::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Uniform draws on `[-amplitude, amplitude]` held for `hold` samples.
    RandomSteps,
    /// Random signs times `amplitude`, held for `hold` samples.
    Prbs,
    /// `amplitude * sin(2 pi j / hold)`, channel `c` shifted by `c * pi / m`.
    Sine,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSignal {
    pub kind: InputKind,
    pub amplitude: f64,
    pub hold: usize,
    pub seed: u64,
}

impl Default for InputSignal {
    fn default() -> Self {
        Self {
            kind: InputKind::RandomSteps,
            amplitude: super::DEFAULT_AMPLITUDE,
            hold: super::DEFAULT_HOLD,
            seed: 0,
        }
    }
}

impl InputSignal {
    pub fn random_steps(amplitude: f64, hold: usize, seed: u64) -> Self {
        Self {
            kind: InputKind::RandomSteps,
            amplitude,
            hold,
            seed,
        }
    }

    pub fn zero() -> Self {
        Self {
            kind: InputKind::Zero,
            amplitude: 0.0,
            hold: 1,
            seed: 0,
        }
    }
}

/// `steps x m` input table; deterministic given the signal's seed.
pub fn make_input(signal: &InputSignal, steps: usize, m: usize) -> Mat {
    let amp = signal.amplitude.max(0.0);
    let hold = signal.hold.max(1);
    let mut out = Mat::zeros(steps, m);
    match signal.kind {
        InputKind::Zero => {}
        InputKind::RandomSteps | InputKind::Prbs => {
            let mut rng = ChaCha8Rng::seed_from_u64(signal.seed);
            let mut level = vec![0.0; m];
            for j in 0..steps {
                if j % hold == 0 {
                    for v in level.iter_mut() {
                        *v = if signal.kind == InputKind::Prbs {
                            if rng.gen::<bool>() { amp } else { -amp }
                        } else if amp > 0.0 {
                            rng.gen_range(-amp..=amp)
                        } else {
                            0.0
                        };
                    }
                }
                for (c, v) in level.iter().enumerate() {
                    out[(j, c)] = *v;
                }
            }
        }
        InputKind::Sine => {
            for j in 0..steps {
                for c in 0..m {
                    let phase = 2.0 * PI * j as f64 / hold as f64 + c as f64 * PI / m as f64;
                    out[(j, c)] = amp * phase.sin();
                }
            }
        }
    }
    out
}
