//! The interaction loop: a seeded world of agents, random speaker/hearer
//! pairing, and run orchestration with periodic measurement.
//!
//! One step is one event: a randomly chosen speaker produces a vocalization,
//! perceives it itself (babbling, the only occasion on which the weight
//! matrix learns), and exactly one randomly chosen other agent hears it.
//! There is no reply, no imitation and no feedback channel; the only
//! agent-to-agent contact is the perceptual trace of the vocalization.
//!
//! All randomness flows from a single ChaCha8 stream seeded from the config.
//! Draw order at initialization: abstract mapping coefficients (if any),
//! then per agent its perceptual map, motor map and weights. Draw order per
//! step: speaker, hearer (absent for a single agent), target count k, then
//! k motor neuron indices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::agent::{Agent, AgentParams, MotorPropagation, DEFAULT_HEBB_RATE, DEFAULT_MEAN_DECAY};
use crate::analysis::{
    self, classify_vowel_system, max_pairwise_hausdorff, preferred_vector_entropy, EntropySample,
    VowelSystemSignature, DEFAULT_ENTROPY_BINS, DEFAULT_PLATEAU_EPS_BITS,
    DEFAULT_PLATEAU_WINDOW_STEPS,
};
use crate::error::{Error, Result};
use crate::neural_map::{
    DEFAULT_CATEGORIZE_MAX_ITER, DEFAULT_CATEGORIZE_TOL, DEFAULT_GRID_RESOLUTION,
    DEFAULT_LEARNING_RATE, DEFAULT_MERGE_TOL, DEFAULT_SIGMA,
};
use crate::vocal_tract::MappingSpec;

/// Which articulatory-to-perceptual physics a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingVariant {
    Abstract,
    DeBoer,
}

impl std::fmt::Display for MappingVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MappingVariant::Abstract => write!(f, "abstract"),
            MappingVariant::DeBoer => write!(f, "deboer"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_agents: usize,
    pub neurons_per_map: usize,
    pub sigma: f64,
    pub learning_rate: f64,
    pub hebb_rate: f64,
    pub mean_decay: f64,
    pub mapping: MappingVariant,
    pub steps: u64,
    pub seed: u64,
    pub measurement_interval: u64,
    pub grid_resolution: usize,
    pub merge_tol: f64,
    pub motor_propagation: MotorPropagation,
}

impl SimulationConfig {
    /// Defaults with an explicit seed; `seed` has no default anywhere.
    pub fn with_seed(seed: u64) -> Self {
        SimulationConfig {
            n_agents: 20,
            neurons_per_map: 500,
            sigma: DEFAULT_SIGMA,
            learning_rate: DEFAULT_LEARNING_RATE,
            hebb_rate: DEFAULT_HEBB_RATE,
            mean_decay: DEFAULT_MEAN_DECAY,
            mapping: MappingVariant::Abstract,
            steps: 2000,
            seed,
            measurement_interval: 50,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            merge_tol: DEFAULT_MERGE_TOL,
            motor_propagation: MotorPropagation::WeightedSum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::Config("n_agents must be >= 1".into()));
        }
        if self.neurons_per_map < 1 {
            return Err(Error::Config("neurons_per_map must be >= 1".into()));
        }
        if self.steps < 1 {
            return Err(Error::Config("steps must be >= 1".into()));
        }
        if self.sigma <= 0.0 {
            return Err(Error::Config(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if self.measurement_interval < 1 {
            return Err(Error::Config("measurement_interval must be >= 1".into()));
        }
        if self.grid_resolution < 2 {
            return Err(Error::Config("grid_resolution must be >= 2".into()));
        }
        if self.merge_tol <= 0.0 {
            return Err(Error::Config("merge_tol must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.mean_decay) {
            return Err(Error::Config("mean_decay must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Per-run result: everything needed to reproduce, plot and aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub config: SimulationConfig,
    pub config_hash: String,
    pub seed: u64,
    /// The mapping actually used, including drawn abstract coefficients or
    /// calibrated bounds.
    pub mapping: MappingSpec,
    pub entropy_trace: Vec<EntropySample>,
    pub plateau_step: Option<u64>,
    /// Perceptual attractor prototypes per agent, agent order.
    pub agent_attractors: Vec<Vec<[f64; 2]>>,
    /// Run-level inventory size: lower median of the per-agent counts.
    pub attractor_count: usize,
    /// Largest pairwise Hausdorff distance between agents' attractor sets;
    /// absent for a single agent.
    pub max_pairwise_hausdorff: Option<f64>,
    /// Height/backness signature of the run-level inventory; realistic
    /// mapping only.
    pub signature: Option<VowelSystemSignature>,
    pub wall_clock_secs: f64,
}

pub struct Society {
    pub config: SimulationConfig,
    pub mapping: MappingSpec,
    pub agents: Vec<Agent>,
    rng: ChaCha8Rng,
    pub step_counter: u64,
}

impl Society {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mapping = match config.mapping {
            MappingVariant::Abstract => MappingSpec::abstract_random(&mut rng),
            MappingVariant::DeBoer => MappingSpec::deboer_calibrated(),
        };
        let params = AgentParams {
            neurons_per_map: config.neurons_per_map,
            motor_dim: mapping.motor_dim(),
            sigma: config.sigma,
            learning_rate: config.learning_rate,
            hebb_rate: config.hebb_rate,
            mean_decay: config.mean_decay,
            propagation: config.motor_propagation,
        };
        let agents = (0..config.n_agents)
            .map(|id| Agent::new(id, &params, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Society {
            config,
            mapping,
            agents,
            rng,
            step_counter: 0,
        })
    }

    /// One interaction: speaker produces and self-perceives; one other
    /// agent (if any) hears.
    pub fn step(&mut self) -> Result<()> {
        use rand::Rng;
        let n = self.agents.len();
        let speaker = self.rng.random_range(0..n);
        let hearer = if n > 1 {
            let h = self.rng.random_range(0..n - 1);
            Some(if h >= speaker { h + 1 } else { h })
        } else {
            None
        };
        let voc = self.agents[speaker].produce_vocalization(&self.mapping, &mut self.rng)?;
        self.agents[speaker].perceive(&voc, true);
        if let Some(h) = hearer {
            self.agents[h].perceive(&voc, false);
        }
        self.step_counter += 1;
        Ok(())
    }

    /// Pooled perceptual-map entropy of the current state, in bits.
    pub fn entropy(&self) -> Result<f64> {
        let maps: Vec<_> = self.agents.iter().map(|a| &a.perceptual).collect();
        preferred_vector_entropy(&maps, DEFAULT_ENTROPY_BINS)
    }

    /// Perceptual attractor set of each agent at the current state.
    pub fn extract_all_attractors(&self) -> Result<Vec<Vec<[f64; 2]>>> {
        self.agents
            .iter()
            .map(|a| {
                let raw = a.perceptual.extract_attractors(
                    self.config.grid_resolution,
                    self.config.merge_tol,
                    DEFAULT_CATEGORIZE_TOL,
                    DEFAULT_CATEGORIZE_MAX_ITER,
                )?;
                Ok(raw.into_iter().map(|p| [p[0], p[1]]).collect())
            })
            .collect()
    }

    /// Execute `config.steps` interactions, sampling entropy at step 0 and
    /// every `measurement_interval` steps, then take final measurements.
    pub fn run(&mut self) -> Result<RunRecord> {
        self.run_steps_with_hook(self.config.steps, |_, _| {})
    }

    /// As [`Society::run`] with an explicit step count (0 yields a record
    /// of initial-state measurements only).
    pub fn run_steps(&mut self, steps: u64) -> Result<RunRecord> {
        self.run_steps_with_hook(steps, |_, _| {})
    }

    /// As [`Society::run`], invoking `hook` at every measurement point.
    pub fn run_with_hook<F: FnMut(u64, &Society)>(&mut self, hook: F) -> Result<RunRecord> {
        self.run_steps_with_hook(self.config.steps, hook)
    }

    fn run_steps_with_hook<F: FnMut(u64, &Society)>(
        &mut self,
        steps: u64,
        mut hook: F,
    ) -> Result<RunRecord> {
        let start = Instant::now();
        let interval = self.config.measurement_interval;
        let mut entropy_trace = Vec::with_capacity((steps / interval + 2) as usize);
        entropy_trace.push(EntropySample {
            step: self.step_counter,
            entropy_bits: self.entropy()?,
        });
        hook(self.step_counter, self);
        let target = self.step_counter + steps;
        while self.step_counter < target {
            self.step()?;
            if self.step_counter % interval == 0 || self.step_counter == target {
                entropy_trace.push(EntropySample {
                    step: self.step_counter,
                    entropy_bits: self.entropy()?,
                });
                hook(self.step_counter, self);
            }
        }
        self.finish_record(entropy_trace, start)
    }

    fn finish_record(
        &self,
        entropy_trace: Vec<EntropySample>,
        start: Instant,
    ) -> Result<RunRecord> {
        let agent_attractors = self.extract_all_attractors()?;
        let mut counts: Vec<usize> = agent_attractors.iter().map(|a| a.len()).collect();
        counts.sort_unstable();
        let attractor_count = counts[(counts.len() - 1) / 2];
        let max_pairwise_hausdorff = if self.agents.len() >= 2 {
            Some(max_pairwise_hausdorff(&agent_attractors)?)
        } else {
            None
        };
        // classify the inventory of the first agent whose count equals the
        // run-level count
        let signature = if self.config.mapping == MappingVariant::DeBoer {
            let representative = agent_attractors
                .iter()
                .find(|a| a.len() == attractor_count)
                .expect("median count is attained by some agent");
            Some(classify_vowel_system(representative)?)
        } else {
            None
        };
        let plateau_step = analysis::detect_plateau(
            &entropy_trace,
            DEFAULT_PLATEAU_WINDOW_STEPS,
            DEFAULT_PLATEAU_EPS_BITS,
        );
        Ok(RunRecord {
            version: crate::VERSION.to_string(),
            config: self.config.clone(),
            config_hash: crate::config_text::config_hash(&self.config),
            seed: self.config.seed,
            mapping: self.mapping.clone(),
            entropy_trace,
            plateau_step,
            agent_attractors,
            attractor_count,
            max_pairwise_hausdorff,
            signature,
            wall_clock_secs: start.elapsed().as_secs_f64(),
        })
    }
}
