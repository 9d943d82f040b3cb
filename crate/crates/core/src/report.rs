//! File formats: CSV dumps, run-record JSON and society snapshots.
//!
//! Every emitted file carries a `# config_hash=.. version=..` provenance
//! comment (line 2 in CSVs, fields in JSON). CSV schemas:
//! attractor field `x0,x1,y0,y1`; single-map attractors `attractor_id,c0,c1`;
//! per-agent attractors `agent_id,attractor_id,c0,c1`; entropy trace
//! `step,entropy_bits`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::agent::Agent;
use crate::analysis::EntropySample;
use crate::error::{Error, Result};
use crate::society::{RunRecord, SimulationConfig, Society};

fn provenance_line(config_hash: &str) -> String {
    format!("# config_hash={} version={}\n", config_hash, crate::VERSION)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Attractor-field CSV for a 2-d map: one `(grid point, one-step image)`
/// row per grid point, row-major.
pub fn field_csv(field: &[(Vec<f64>, Vec<f64>)], config_hash: &str) -> Result<String> {
    let mut out = String::from("x0,x1,y0,y1\n");
    out.push_str(&provenance_line(config_hash));
    for (x, y) in field {
        if x.len() != 2 || y.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: x.len().max(y.len()),
            });
        }
        writeln!(out, "{},{},{},{}", x[0], x[1], y[0], y[1]).expect("string write");
    }
    Ok(out)
}

pub fn write_field_csv(
    path: &Path,
    field: &[(Vec<f64>, Vec<f64>)],
    config_hash: &str,
) -> Result<()> {
    write_file(path, &field_csv(field, config_hash)?)
}

/// Attractor list of a single map: `attractor_id,c0,c1`.
pub fn map_attractors_csv(attractors: &[[f64; 2]], config_hash: &str) -> String {
    let mut out = String::from("attractor_id,c0,c1\n");
    out.push_str(&provenance_line(config_hash));
    for (id, a) in attractors.iter().enumerate() {
        writeln!(out, "{},{},{}", id, a[0], a[1]).expect("string write");
    }
    out
}

/// Per-agent attractor CSV: `agent_id,attractor_id,c0,c1`.
pub fn agent_attractors_csv(per_agent: &[Vec<[f64; 2]>], config_hash: &str) -> String {
    let mut out = String::from("agent_id,attractor_id,c0,c1\n");
    out.push_str(&provenance_line(config_hash));
    for (agent_id, attractors) in per_agent.iter().enumerate() {
        for (id, a) in attractors.iter().enumerate() {
            writeln!(out, "{},{},{},{}", agent_id, id, a[0], a[1]).expect("string write");
        }
    }
    out
}

/// Entropy trace CSV: `step,entropy_bits`.
pub fn entropy_csv(trace: &[EntropySample], config_hash: &str) -> String {
    let mut out = String::from("step,entropy_bits\n");
    out.push_str(&provenance_line(config_hash));
    for s in trace {
        writeln!(out, "{},{}", s.step, s.entropy_bits).expect("string write");
    }
    out
}

/// Write the standard per-run files into `dir`: `run_record.json`,
/// `entropy.csv`, `attractors.csv`.
pub fn write_run_outputs(dir: &Path, record: &RunRecord) -> Result<()> {
    write_file(
        &dir.join("run_record.json"),
        &serde_json::to_string_pretty(record)?,
    )?;
    write_file(
        &dir.join("entropy.csv"),
        &entropy_csv(&record.entropy_trace, &record.config_hash),
    )?;
    write_file(
        &dir.join("attractors.csv"),
        &agent_attractors_csv(&record.agent_attractors, &record.config_hash),
    )?;
    Ok(())
}

pub fn read_run_record(path: &Path) -> Result<RunRecord> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

/// Full agent state keyed by agent id, for checkpointing and post-hoc
/// analysis (e.g. attractor-field dumps).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SocietySnapshot {
    pub version: String,
    pub config_hash: String,
    pub config: SimulationConfig,
    pub agents: BTreeMap<String, Agent>,
}

impl SocietySnapshot {
    pub fn from_society(society: &Society) -> Self {
        SocietySnapshot {
            version: crate::VERSION.to_string(),
            config_hash: crate::config_text::config_hash(&society.config),
            config: society.config.clone(),
            agents: society
                .agents
                .iter()
                .map(|a| (a.id.to_string(), a.clone()))
                .collect(),
        }
    }

    pub fn agent(&self, id: usize) -> Result<&Agent> {
        self.agents.get(&id.to_string()).ok_or_else(|| {
            Error::Config(format!(
                "unknown agent id {id} (snapshot has agents {})",
                self.agents.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

pub fn write_snapshot(path: &Path, snapshot: &SocietySnapshot) -> Result<()> {
    write_file(path, &serde_json::to_string(snapshot)?)
}

pub fn read_snapshot(path: &Path) -> Result<SocietySnapshot> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::society::SimulationConfig;

    fn tiny_society() -> Society {
        let config = SimulationConfig {
            n_agents: 2,
            neurons_per_map: 12,
            steps: 5,
            measurement_interval: 5,
            grid_resolution: 5,
            ..SimulationConfig::with_seed(33)
        };
        Society::new(config).unwrap()
    }

    #[test]
    fn field_csv_schema() {
        let society = tiny_society();
        let field = society.agents[0].perceptual.attractor_field(5).unwrap();
        let csv = field_csv(&field, "deadbeef").unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x0,x1,y0,y1"));
        let provenance = lines.next().unwrap();
        assert!(provenance.starts_with("# config_hash=deadbeef version="));
        assert_eq!(lines.count(), 25);
    }

    #[test]
    fn entropy_csv_schema() {
        let trace = vec![
            EntropySample {
                step: 0,
                entropy_bits: 8.5,
            },
            EntropySample {
                step: 50,
                entropy_bits: 7.25,
            },
        ];
        let csv = entropy_csv(&trace, "cafe");
        assert!(csv.starts_with("step,entropy_bits\n# config_hash=cafe"));
        assert!(csv.ends_with("0,8.5\n50,7.25\n"));
    }

    #[test]
    fn agent_attractor_csv_rows() {
        let per_agent = vec![vec![[0.1, 0.2]], vec![[0.3, 0.4], [0.5, 0.6]]];
        let csv = agent_attractors_csv(&per_agent, "h");
        let data: Vec<&str> = csv.lines().skip(2).collect();
        assert_eq!(data, vec!["0,0,0.1,0.2", "1,0,0.3,0.4", "1,1,0.5,0.6"]);
        let single = map_attractors_csv(&per_agent[1], "h");
        assert!(single.starts_with("attractor_id,c0,c1\n"));
        assert!(single.ends_with("0,0.3,0.4\n1,0.5,0.6\n"));
    }

    #[test]
    fn snapshot_roundtrip_is_bit_exact() {
        let society = tiny_society();
        let snapshot = SocietySnapshot::from_society(&society);
        let json = serde_json::to_string(&snapshot).unwrap();
        let back: SocietySnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back.agent(0).unwrap(), &society.agents[0]);
        assert_eq!(back.agent(1).unwrap(), &society.agents[1]);
        assert!(back.agent(7).is_err());
        // serializing again yields identical bytes
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn run_outputs_land_on_disk() {
        let mut society = tiny_society();
        let record = society.run().unwrap();
        let dir = std::env::temp_dir().join(format!("babble_report_test_{}", std::process::id()));
        write_run_outputs(&dir, &record).unwrap();
        let parsed = read_run_record(&dir.join("run_record.json")).unwrap();
        assert_eq!(parsed.seed, record.seed);
        assert!(dir.join("entropy.csv").exists());
        assert!(dir.join("attractors.csv").exists());
        std::fs::remove_dir_all(&dir).ok();
    }
}
