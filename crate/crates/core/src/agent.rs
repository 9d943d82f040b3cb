//! One agent: a perceptual map, a motor map, and the Hebbian weight matrix
//! coupling them.
//!
//! An agent produces vocalizations by activating 2-4 randomly chosen motor
//! neurons in sequence; their preferred vectors become articulatory targets,
//! interpolated into a trajectory whose perceptual trace is what anyone
//! (including the producer) actually hears. Perceiving a trace runs the full
//! learning cascade per trace point: perceptual activation, perceptual
//! plasticity, Hebbian weight learning (own vocalizations only, at commanded
//! target points where a direct motor pattern exists), propagation to the
//! motor map, and motor winner adaptation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::neural_map::{Activation, NeuralMap};
use crate::vocal_tract::{interpolate_trajectory, MappingSpec, STEPS_PER_SEGMENT};

pub const DEFAULT_HEBB_RATE: f64 = 0.001;
pub const DEFAULT_MEAN_DECAY: f64 = 0.99;
/// Initial weights are uniform in `[0, INITIAL_WEIGHT_SCALE]`.
pub const INITIAL_WEIGHT_SCALE: f64 = 0.001;

/// How perceptual activation drives the motor map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotorPropagation {
    /// `raw[j] = sum_i w[i][j] * g[i]`, normalized by its maximum.
    /// Monotone increasing in correlated input; the default.
    WeightedSum,
    /// `g[j] = peak * exp(-sum_i w[i][j] * g[i] / sigma^2)`.
    /// Decreasing in correlated input; kept selectable for auditing the
    /// alternative reading, not used by default.
    PaperExp,
}

/// Perceptual-to-motor connection weights with running mean activations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    percept_n: usize,
    motor_n: usize,
    /// Row-major: `w[i * motor_n + j]` connects perceptual neuron `i`
    /// to motor neuron `j`.
    w: Vec<f64>,
    mean_percept: Vec<f64>,
    mean_motor: Vec<f64>,
    hebb_rate: f64,
    mean_decay: f64,
}

impl WeightMatrix {
    /// Weights drawn uniformly from `[0, INITIAL_WEIGHT_SCALE]`, row-major.
    pub fn new_random<R: Rng>(
        percept_n: usize,
        motor_n: usize,
        hebb_rate: f64,
        mean_decay: f64,
        rng: &mut R,
    ) -> Self {
        let w = (0..percept_n * motor_n)
            .map(|_| INITIAL_WEIGHT_SCALE * rng.random::<f64>())
            .collect();
        WeightMatrix {
            percept_n,
            motor_n,
            w,
            mean_percept: vec![0.0; percept_n],
            mean_motor: vec![0.0; motor_n],
            hebb_rate,
            mean_decay,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.motor_n + j]
    }

    pub fn weights_flat(&self) -> &[f64] {
        &self.w
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, i: usize, j: usize, value: f64) {
        self.w[i * self.motor_n + j] = value;
    }
}

/// Articulatory targets, interpolated trajectory and perceptual trace of one
/// vocalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocalization {
    /// Indices of the commanded motor neurons, in activation order.
    pub motor_neurons: Vec<usize>,
    /// Interpolated articulatory trajectory.
    pub trajectory: Vec<Vec<f64>>,
    /// Perceptual image of each trajectory point.
    pub trace: Vec<[f64; 2]>,
    /// `(trace index, motor neuron)` for each commanded target point.
    pub targets_at: Vec<(usize, usize)>,
}

impl Vocalization {
    fn commanded_neuron_at(&self, trace_idx: usize) -> Option<usize> {
        self.targets_at
            .iter()
            .find(|(idx, _)| *idx == trace_idx)
            .map(|(_, neuron)| *neuron)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AgentParams {
    pub neurons_per_map: usize,
    pub motor_dim: usize,
    pub sigma: f64,
    pub learning_rate: f64,
    pub hebb_rate: f64,
    pub mean_decay: f64,
    pub propagation: MotorPropagation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: usize,
    pub perceptual: NeuralMap,
    pub motor: NeuralMap,
    pub weights: WeightMatrix,
    propagation: MotorPropagation,
}

impl Agent {
    /// Draw order: perceptual map vectors, motor map vectors, weights.
    pub fn new<R: Rng>(id: usize, params: &AgentParams, rng: &mut R) -> Result<Self> {
        let perceptual = NeuralMap::new_random(
            params.neurons_per_map,
            2,
            params.sigma,
            params.learning_rate,
            rng,
        )?;
        let motor = NeuralMap::new_random(
            params.neurons_per_map,
            params.motor_dim,
            params.sigma,
            params.learning_rate,
            rng,
        )?;
        let weights = WeightMatrix::new_random(
            params.neurons_per_map,
            params.neurons_per_map,
            params.hebb_rate,
            params.mean_decay,
            rng,
        );
        Ok(Agent {
            id,
            perceptual,
            motor,
            weights,
            propagation: params.propagation,
        })
    }

    /// Pick 2-4 motor neurons uniformly with replacement (draw order: k,
    /// then the indices), interpolate their preferred vectors and compute
    /// the perceptual trace. Does not mutate the agent.
    pub fn produce_vocalization<R: Rng>(
        &self,
        mapping: &MappingSpec,
        rng: &mut R,
    ) -> Result<Vocalization> {
        let k = rng.random_range(2..=4usize);
        let motor_neurons: Vec<usize> = (0..k)
            .map(|_| rng.random_range(0..self.motor.neurons()))
            .collect();
        let targets: Vec<Vec<f64>> = motor_neurons
            .iter()
            .map(|&j| self.motor.vector(j).to_vec())
            .collect();
        let trajectory = interpolate_trajectory(&targets, STEPS_PER_SEGMENT)?;
        let mut trace = Vec::with_capacity(trajectory.len());
        for ar in &trajectory {
            trace.push(mapping.to_perceptual(ar)?);
        }
        let targets_at = motor_neurons
            .iter()
            .enumerate()
            .map(|(m, &neuron)| (m * STEPS_PER_SEGMENT, neuron))
            .collect();
        Ok(Vocalization {
            motor_neurons,
            trajectory,
            trace,
            targets_at,
        })
    }

    /// Motor activation induced by a perceptual activation through the
    /// weight matrix.
    pub fn propagate_to_motor(&self, g_percept: &Activation) -> Activation {
        let motor_n = self.weights.motor_n;
        let mut raw = vec![0.0; motor_n];
        for (row, &g) in self
            .weights
            .w
            .chunks_exact(motor_n)
            .zip(g_percept.values())
        {
            if g == 0.0 {
                continue;
            }
            for (r, &wij) in raw.iter_mut().zip(row) {
                *r += wij * g;
            }
        }
        match self.propagation {
            MotorPropagation::WeightedSum => {
                // Hebbian weights can turn negative, so raw sums can too;
                // activations are nonnegative by definition, so anything
                // below zero is floored before normalizing by the maximum.
                let max = raw.iter().cloned().fold(0.0f64, f64::max);
                if max > 0.0 {
                    for r in &mut raw {
                        *r = r.max(0.0) / max;
                    }
                } else {
                    raw.fill(0.0);
                }
                Activation::from_values(raw)
            }
            MotorPropagation::PaperExp => {
                let sigma = self.motor.sigma();
                let peak = self.motor.tuning_peak();
                let inv_sigma_sq = 1.0 / (sigma * sigma);
                Activation::from_values(
                    raw.iter().map(|&x| peak * (-x * inv_sigma_sq).exp()).collect(),
                )
            }
        }
    }

    /// Correlation-rule weight update followed by the running-mean update.
    /// Only meaningful during self-perception at commanded target points,
    /// where a direct motor pattern exists.
    pub fn hebbian_update(&mut self, g_percept: &Activation, g_motor_direct: &Activation) {
        let wm = &mut self.weights;
        let c2 = wm.hebb_rate;
        let dm: Vec<f64> = g_motor_direct
            .values()
            .iter()
            .zip(&wm.mean_motor)
            .map(|(&g, &m)| g - m)
            .collect();
        for ((row, &gp), &mp) in wm
            .w
            .chunks_exact_mut(wm.motor_n)
            .zip(g_percept.values())
            .zip(&wm.mean_percept)
        {
            let dp = c2 * (gp - mp);
            if dp == 0.0 {
                continue;
            }
            for (wij, &dmj) in row.iter_mut().zip(&dm) {
                *wij += dp * dmj;
            }
        }
        let decay = wm.mean_decay;
        for (m, &g) in wm.mean_percept.iter_mut().zip(g_percept.values()) {
            *m = decay * *m + (1.0 - decay) * g;
        }
        for (m, &g) in wm.mean_motor.iter_mut().zip(g_motor_direct.values()) {
            *m = decay * *m + (1.0 - decay) * g;
        }
    }

    /// Run the learning cascade over every point of a perceived trace.
    ///
    /// Per point: (1) perceptual activation, (2) perceptual map adapts
    /// toward the stimulus, (3) own vocalizations only, at commanded target
    /// points: Hebbian update against the direct motor pattern, (4)
    /// propagation to the motor map, (5) motor map adapts toward its winner.
    ///
    /// For step (5) the unit-normalized propagated pattern is rescaled to
    /// the Gaussian activation range `[0, tuning peak]`: induced motor
    /// activations live on the same scale as direct tuning responses, so
    /// both maps adapt at the same per-event rate.
    pub fn perceive(&mut self, voc: &Vocalization, is_own: bool) {
        let motor_n = self.motor.neurons();
        let motor_peak = self.motor.tuning_peak();
        for (idx, point) in voc.trace.iter().enumerate() {
            let g_p = self
                .perceptual
                .activate(point)
                .expect("perceptual traces are 2-d");
            self.perceptual
                .adapt_toward_stimulus(point, &g_p)
                .expect("dimensions fixed at construction");
            if is_own {
                if let Some(neuron) = voc.commanded_neuron_at(idx) {
                    let mut direct = vec![0.0; motor_n];
                    direct[neuron] = 1.0;
                    self.hebbian_update(&g_p, &Activation::from_values(direct));
                }
            }
            let g_m = self.propagate_to_motor(&g_p);
            let scaled = match self.propagation {
                MotorPropagation::WeightedSum => Activation::from_values(
                    g_m.values().iter().map(|&v| v * motor_peak).collect(),
                ),
                MotorPropagation::PaperExp => g_m,
            };
            self.motor
                .adapt_toward_winner(&scaled)
                .expect("dimensions fixed at construction");
        }
    }
}
