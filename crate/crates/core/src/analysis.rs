//! Measurement and statistics: preferred-vector entropy, plateau detection,
//! cross-agent code agreement, inventory classification and batch reports.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::agent::Agent;
use crate::error::{Error, Result};
use crate::neural_map::NeuralMap;
use crate::society::{MappingVariant, RunRecord};

pub const DEFAULT_ENTROPY_BINS: usize = 20;
pub const DEFAULT_PLATEAU_WINDOW_STEPS: u64 = 500;
pub const DEFAULT_PLATEAU_EPS_BITS: f64 = 0.01;
pub const HEIGHT_LEVELS: u8 = 4;
pub const BACKNESS_LEVELS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub step: u64,
    pub entropy_bits: f64,
}

/// Shannon entropy (bits) of the pooled preferred vectors of 2-d maps,
/// over a fixed `bins x bins` histogram of the unit square.
pub fn preferred_vector_entropy(maps: &[&NeuralMap], bins: usize) -> Result<f64> {
    if maps.is_empty() {
        return Err(Error::Config("entropy of an empty map list".into()));
    }
    if bins == 0 {
        return Err(Error::Config("entropy needs at least one bin".into()));
    }
    if let Some(m) = maps.iter().find(|m| m.dim() != 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: m.dim(),
        });
    }
    let mut counts = vec![0u64; bins * bins];
    let mut total = 0u64;
    for map in maps {
        for v in map.iter_vectors() {
            let bx = ((v[0] * bins as f64) as usize).min(bins - 1);
            let by = ((v[1] * bins as f64) as usize).min(bins - 1);
            counts[bx * bins + by] += 1;
            total += 1;
        }
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Earliest sampled step whose trailing `window_steps` of the trace spans
/// at most `eps_bits`; `None` if the trace never settles.
pub fn detect_plateau(
    trace: &[EntropySample],
    window_steps: u64,
    eps_bits: f64,
) -> Option<u64> {
    let first_step = trace.first()?.step;
    for (i, sample) in trace.iter().enumerate() {
        if sample.step < first_step + window_steps {
            continue; // no full trailing window yet
        }
        let lo = sample.step - window_steps;
        let window = trace[..=i].iter().filter(|s| s.step >= lo);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for s in window {
            min = min.min(s.entropy_bits);
            max = max.max(s.entropy_bits);
        }
        if max - min <= eps_bits {
            return Some(sample.step);
        }
    }
    None
}

/// Symmetric Hausdorff distance between two nonempty point sets.
pub fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    fn directed(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
    directed(a, b).max(directed(b, a))
}

/// Largest pairwise Hausdorff distance among per-agent attractor sets.
pub fn max_pairwise_hausdorff(sets: &[Vec<[f64; 2]>]) -> Result<f64> {
    if sets.len() < 2 {
        return Err(Error::Config(
            "shared-code distance needs at least two agents".into(),
        ));
    }
    if sets.iter().any(|s| s.is_empty()) {
        return Err(Error::Config("empty attractor set".into()));
    }
    let mut worst = 0.0f64;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            worst = worst.max(hausdorff(&sets[i], &sets[j]));
        }
    }
    Ok(worst)
}

/// Extract each agent's perceptual attractors and return the largest
/// pairwise Hausdorff distance between the sets.
pub fn shared_code_distance(
    agents: &[Agent],
    grid_resolution: usize,
    merge_tol: f64,
) -> Result<f64> {
    use crate::neural_map::{DEFAULT_CATEGORIZE_MAX_ITER, DEFAULT_CATEGORIZE_TOL};
    let sets = agents
        .iter()
        .map(|a| {
            let raw = a.perceptual.extract_attractors(
                grid_resolution,
                merge_tol,
                DEFAULT_CATEGORIZE_TOL,
                DEFAULT_CATEGORIZE_MAX_ITER,
            )?;
            Ok(raw.into_iter().map(|p| [p[0], p[1]]).collect())
        })
        .collect::<Result<Vec<Vec<[f64; 2]>>>>()?;
    max_pairwise_hausdorff(&sets)
}

/// Inventory size plus the sorted, deduplicated quantized cells the
/// attractors occupy in a height x backness grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VowelSystemSignature {
    pub size: usize,
    /// `(height_level, backness_level)` cells, sorted, deduplicated.
    pub cells: Vec<(u8, u8)>,
    /// True when two attractors fell into the same cell.
    pub collapsed_cells: bool,
}

impl VowelSystemSignature {
    /// Canonical cell-list string `h:b|h:b|...`.
    pub fn signature_string(&self) -> String {
        self.cells
            .iter()
            .map(|(h, b)| format!("{h}:{b}"))
            .collect::<Vec<_>>()
            .join("|")
    }
}

fn quantize(x: f64, levels: u8) -> u8 {
    ((x * levels as f64) as u8).min(levels - 1)
}

/// Quantize attractors into 4 height levels (first axis, normalized F1)
/// by 3 backness levels (second axis, normalized F2').
pub fn classify_vowel_system(attractors: &[[f64; 2]]) -> Result<VowelSystemSignature> {
    if attractors.is_empty() {
        return Err(Error::Config("cannot classify an empty inventory".into()));
    }
    let mut cells: Vec<(u8, u8)> = attractors
        .iter()
        .map(|a| (quantize(a[0], HEIGHT_LEVELS), quantize(a[1], BACKNESS_LEVELS)))
        .collect();
    cells.sort_unstable();
    cells.dedup();
    Ok(VowelSystemSignature {
        size: attractors.len(),
        collapsed_cells: cells.len() < attractors.len(),
        cells,
    })
}

/// Reference inventory-structure distribution, e.g. from a cross-linguistic
/// database, as `signature -> relative frequency`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub frequencies: BTreeMap<String, f64>,
}

impl ReferenceDistribution {
    /// Parse CSV lines `signature,frequency`. `#` comments and an optional
    /// `signature,frequency` header are skipped; frequencies are
    /// renormalized to sum to 1.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut frequencies = BTreeMap::new();
        let mut total = 0.0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "signature,frequency" {
                continue;
            }
            let (sig, freq) = line.split_once(',').ok_or_else(|| {
                Error::Config(format!(
                    "reference line {}: expected `signature,frequency`, got `{line}`",
                    lineno + 1
                ))
            })?;
            let freq: f64 = freq.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "reference line {}: bad frequency `{freq}`",
                    lineno + 1
                ))
            })?;
            if freq < 0.0 {
                return Err(Error::Config(format!(
                    "reference line {}: negative frequency",
                    lineno + 1
                )));
            }
            total += freq;
            frequencies.insert(sig.trim().to_string(), freq);
        }
        if total <= 0.0 {
            return Err(Error::Config("reference distribution is empty".into()));
        }
        for f in frequencies.values_mut() {
            *f /= total;
        }
        Ok(ReferenceDistribution { frequencies })
    }
}

/// Batch statistics over run records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub n_runs: usize,
    /// Inventory size -> run count.
    pub size_histogram: BTreeMap<usize, usize>,
    /// Signature string -> relative frequency (sums to 1 over runs that
    /// carry a signature).
    pub structure_frequencies: BTreeMap<String, f64>,
    /// Reference frequencies, when supplied.
    pub reference_frequencies: Option<BTreeMap<String, f64>>,
    /// Total-variation distance between observed and reference structure
    /// frequencies.
    pub total_variation: Option<f64>,
}

/// Histogram and structure frequencies over a homogeneous batch.
pub fn aggregate_runs(
    records: &[RunRecord],
    reference: Option<&ReferenceDistribution>,
) -> Result<DistributionReport> {
    if records.is_empty() {
        return Err(Error::Config("cannot aggregate zero runs".into()));
    }
    let variant = records[0].config.mapping;
    if records.iter().any(|r| r.config.mapping != variant) {
        return Err(Error::Config(
            "cannot aggregate runs with mixed mapping variants".into(),
        ));
    }
    if reference.is_some() && variant != MappingVariant::DeBoer {
        return Err(Error::Config(
            "reference comparison requires realistic-mapping runs".into(),
        ));
    }
    let mut size_histogram = BTreeMap::new();
    let mut structure_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut signed = 0usize;
    for record in records {
        *size_histogram.entry(record.attractor_count).or_insert(0) += 1;
        if let Some(sig) = &record.signature {
            *structure_counts.entry(sig.signature_string()).or_insert(0) += 1;
            signed += 1;
        }
    }
    let structure_frequencies: BTreeMap<String, f64> = structure_counts
        .into_iter()
        .map(|(k, v)| (k, v as f64 / signed.max(1) as f64))
        .collect();
    let (reference_frequencies, total_variation) = match reference {
        Some(reference) => {
            let tv = total_variation_distance(&structure_frequencies, &reference.frequencies);
            (Some(reference.frequencies.clone()), Some(tv))
        }
        None => (None, None),
    };
    Ok(DistributionReport {
        n_runs: records.len(),
        size_histogram,
        structure_frequencies,
        reference_frequencies,
        total_variation,
    })
}

/// `0.5 * sum |p - q|` over the union of keys.
pub fn total_variation_distance(
    p: &BTreeMap<String, f64>,
    q: &BTreeMap<String, f64>,
) -> f64 {
    let keys: std::collections::BTreeSet<&String> = p.keys().chain(q.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural_map::NeuralMap;
    use crate::society::{SimulationConfig, Society};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn map_from(points: &[[f64; 2]]) -> NeuralMap {
        let flat: Vec<f64> = points.iter().flatten().copied().collect();
        NeuralMap::from_vectors(2, 0.05, 0.001, flat).unwrap()
    }

    #[test]
    fn entropy_of_single_bin_is_zero() {
        let map = map_from(&[[0.51, 0.51], [0.52, 0.52], [0.515, 0.515]]);
        assert_eq!(preferred_vector_entropy(&[&map], 20).unwrap(), 0.0);
    }

    #[test]
    fn entropy_of_equal_occupancy_is_log2_bins() {
        // one vector in the center of each of the 400 bins
        let mut points = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                points.push([(i as f64 + 0.5) / 20.0, (j as f64 + 0.5) / 20.0]);
            }
        }
        let map = map_from(&points);
        let h = preferred_vector_entropy(&[&map], 20).unwrap();
        assert!((h - 400f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn clustered_entropy_below_uniform_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let uniform: Vec<[f64; 2]> = (0..500)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let clustered: Vec<[f64; 2]> = (0..500)
            .map(|i| {
                let c = if i % 2 == 0 { 0.2 } else { 0.8 };
                [
                    c + 0.02 * (rng.random::<f64>() - 0.5),
                    c + 0.02 * (rng.random::<f64>() - 0.5),
                ]
            })
            .collect();
        let hu = preferred_vector_entropy(&[&map_from(&uniform)], 20).unwrap();
        let hc = preferred_vector_entropy(&[&map_from(&clustered)], 20).unwrap();
        assert!(hc < hu);
    }

    #[test]
    fn entropy_is_permutation_invariant_and_pools_maps() {
        let a = map_from(&[[0.1, 0.1], [0.9, 0.9]]);
        let b = map_from(&[[0.5, 0.5], [0.3, 0.7]]);
        let h_ab = preferred_vector_entropy(&[&a, &b], 20).unwrap();
        let h_ba = preferred_vector_entropy(&[&b, &a], 20).unwrap();
        assert_eq!(h_ab, h_ba);
        let pooled = map_from(&[[0.5, 0.5], [0.3, 0.7], [0.1, 0.1], [0.9, 0.9]]);
        assert_eq!(
            preferred_vector_entropy(&[&pooled], 20).unwrap(),
            h_ab
        );
    }

    #[test]
    fn entropy_rejects_empty_input() {
        assert!(preferred_vector_entropy(&[], 20).is_err());
    }

    fn trace_from(steps: &[u64], values: &[f64]) -> Vec<EntropySample> {
        steps
            .iter()
            .zip(values)
            .map(|(&step, &entropy_bits)| EntropySample { step, entropy_bits })
            .collect()
    }

    #[test]
    fn plateau_constant_trace_detected_at_first_full_window() {
        let steps: Vec<u64> = (0..=20).map(|i| i * 50).collect();
        let values = vec![3.0; steps.len()];
        let trace = trace_from(&steps, &values);
        assert_eq!(detect_plateau(&trace, 500, 0.01), Some(500));
    }

    #[test]
    fn plateau_strictly_decreasing_is_none() {
        let steps: Vec<u64> = (0..=20).map(|i| i * 50).collect();
        let values: Vec<f64> = (0..=20).map(|i| 10.0 - 0.1 * i as f64).collect();
        let trace = trace_from(&steps, &values);
        assert_eq!(detect_plateau(&trace, 500, 0.01), None);
    }

    #[test]
    fn plateau_after_sharp_drop() {
        let steps: Vec<u64> = (0..=40).map(|i| i * 50).collect();
        let values: Vec<f64> = (0..=40)
            .map(|i| if i < 10 { 8.0 - 0.5 * i as f64 } else { 3.0 })
            .collect();
        let trace = trace_from(&steps, &values);
        // flat from step 500; first full flat window ends at step 1000
        assert_eq!(detect_plateau(&trace, 500, 0.01), Some(1000));
    }

    #[test]
    fn plateau_step_is_monotone_in_eps() {
        let steps: Vec<u64> = (0..=40).map(|i| i * 50).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..=40)
            .map(|i| 8.0 * (-(i as f64) / 6.0).exp() + 0.005 * rng.random::<f64>())
            .collect();
        let trace = trace_from(&steps, &values);
        let mut last = u64::MAX;
        for eps in [0.005, 0.01, 0.05, 0.2, 1.0, 10.0] {
            let step = detect_plateau(&trace, 500, eps).unwrap_or(u64::MAX - 1);
            assert!(step <= last, "eps {eps} gave later plateau");
            last = step;
        }
    }

    #[test]
    fn hausdorff_identical_and_translated_sets() {
        let a = vec![[0.2, 0.2], [0.8, 0.8]];
        assert_eq!(hausdorff(&a, &a), 0.0);
        let b: Vec<[f64; 2]> = a.iter().map(|p| [p[0] + 0.03, p[1]]).collect();
        assert!((hausdorff(&a, &b) - 0.03).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
    }

    #[test]
    fn shared_code_distance_zero_for_identical_agents() {
        let config = SimulationConfig {
            n_agents: 2,
            neurons_per_map: 30,
            steps: 10,
            grid_resolution: 9,
            ..SimulationConfig::with_seed(21)
        };
        let mut society = Society::new(config).unwrap();
        // copy agent 0 onto agent 1: distance must be exactly zero
        society.agents[1] = society.agents[0].clone();
        let d = shared_code_distance(&society.agents, 9, 0.02).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn classify_corner_inventory() {
        let attractors = [[0.05, 0.1], [0.95, 0.05], [0.9, 0.95]];
        let sig = classify_vowel_system(&attractors).unwrap();
        assert_eq!(sig.size, 3);
        assert_eq!(sig.cells.len(), 3);
        assert!(!sig.collapsed_cells);
        assert_eq!(sig.cells, vec![(0, 0), (3, 0), (3, 2)]);
        assert_eq!(sig.signature_string(), "0:0|3:0|3:2");
    }

    #[test]
    fn classify_single_and_collapsed() {
        let sig = classify_vowel_system(&[[0.5, 0.5]]).unwrap();
        assert_eq!(sig.size, 1);
        assert_eq!(sig.cells.len(), 1);

        let sig = classify_vowel_system(&[[0.1, 0.1], [0.12, 0.12]]).unwrap();
        assert_eq!(sig.size, 2);
        assert_eq!(sig.cells.len(), 1);
        assert!(sig.collapsed_cells);
        assert!(classify_vowel_system(&[]).is_err());
    }

    #[test]
    fn classification_stable_away_from_cell_boundaries() {
        let attractors = [[0.1, 0.15], [0.6, 0.5], [0.9, 0.9]];
        let base = classify_vowel_system(&attractors).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let jittered: Vec<[f64; 2]> = attractors
                .iter()
                .map(|a| {
                    [
                        a[0] + 0.02 * (rng.random::<f64>() - 0.5),
                        a[1] + 0.02 * (rng.random::<f64>() - 0.5),
                    ]
                })
                .collect();
            assert_eq!(classify_vowel_system(&jittered).unwrap().cells, base.cells);
        }
    }

    fn stub_mapping(variant: MappingVariant) -> crate::vocal_tract::MappingSpec {
        match variant {
            MappingVariant::Abstract => {
                crate::vocal_tract::MappingSpec::abstract_with_coeffs([[0.5, 0.5], [0.5, 0.5]])
            }
            MappingVariant::DeBoer => crate::vocal_tract::MappingSpec::deboer(),
        }
    }

    fn record_with(count: usize, variant: MappingVariant, seed: u64) -> RunRecord {
        let config = SimulationConfig {
            mapping: variant,
            ..SimulationConfig::with_seed(seed)
        };
        let attractors: Vec<[f64; 2]> = (0..count)
            .map(|i| [i as f64 / count as f64 + 0.01, 0.5])
            .collect();
        let signature = match variant {
            MappingVariant::DeBoer => Some(classify_vowel_system(&attractors).unwrap()),
            MappingVariant::Abstract => None,
        };
        RunRecord {
            version: crate::VERSION.to_string(),
            config: config.clone(),
            config_hash: crate::config_text::config_hash(&config),
            seed,
            mapping: stub_mapping(variant),
            entropy_trace: vec![EntropySample {
                step: 0,
                entropy_bits: 8.0,
            }],
            plateau_step: None,
            agent_attractors: vec![attractors.clone()],
            attractor_count: count,
            max_pairwise_hausdorff: None,
            signature,
            wall_clock_secs: 0.0,
        }
    }

    #[test]
    fn aggregate_single_run_histogram() {
        let records = [record_with(5, MappingVariant::DeBoer, 1)];
        let report = aggregate_runs(&records, None).unwrap();
        assert_eq!(report.size_histogram, BTreeMap::from([(5, 1)]));
        assert_eq!(report.structure_frequencies.len(), 1);
    }

    #[test]
    fn aggregate_rejects_mixed_variants() {
        let records = [
            record_with(5, MappingVariant::DeBoer, 1),
            record_with(4, MappingVariant::Abstract, 2),
        ];
        assert!(aggregate_runs(&records, None).is_err());
    }

    #[test]
    fn reference_equal_to_observed_has_zero_total_variation() {
        let records = [
            record_with(3, MappingVariant::DeBoer, 1),
            record_with(3, MappingVariant::DeBoer, 2),
            record_with(4, MappingVariant::DeBoer, 3),
        ];
        let no_ref = aggregate_runs(&records, None).unwrap();
        let csv: String = no_ref
            .structure_frequencies
            .iter()
            .map(|(sig, freq)| format!("{sig},{freq}\n"))
            .collect();
        let reference = ReferenceDistribution::from_csv(&csv).unwrap();
        let report = aggregate_runs(&records, Some(&reference)).unwrap();
        assert!(report.total_variation.unwrap() < 1e-12);
    }

    #[test]
    fn reference_csv_rejects_garbage() {
        assert!(ReferenceDistribution::from_csv("no commas here\n").is_err());
        assert!(ReferenceDistribution::from_csv("0:0|1:2,not_a_number\n").is_err());
        assert!(ReferenceDistribution::from_csv("# only a comment\n").is_err());
    }
}
