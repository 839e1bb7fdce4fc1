//! Deterministic writers for the CSV logs, comparison reports, and the
//! heatmap sidecar metadata.

use serde::{Deserialize, Serialize};

use crate::marl::{EvalLog, TrainingLog};
use crate::{Error, Result};

pub const TRAINING_CSV_HEADER: &str =
    "episode,agent_id,mean_cumulative_reward,actor_loss,critic_loss";
pub const SNAPSHOTS_CSV_HEADER: &str = "episode,mean_rssi_dbm";
pub const SUMMARY_CSV_HEADER: &str = "algo,seed,mean_rssi_dbm,std_rssi_dbm,final_reward";

/// Shortest representation that parses back to the identical bit pattern;
/// reruns of a deterministic pipeline therefore produce identical bytes.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// One training row per (episode, agent): the episode's cumulative scaled
/// reward and the losses of the update that covered it.
pub fn training_csv(log: &TrainingLog) -> String {
    let mut out = String::from(TRAINING_CSV_HEADER);
    out.push('\n');
    for r in &log.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.episode,
            r.agent,
            format_f64(r.cumulative_reward),
            format_f64(r.actor_loss),
            format_f64(r.critic_loss)
        ));
    }
    out
}

/// Periodic greedy-policy probes taken during training.
pub fn snapshots_csv(log: &TrainingLog) -> String {
    let mut out = String::from(SNAPSHOTS_CSV_HEADER);
    out.push('\n');
    for s in &log.snapshots {
        out.push_str(&format!("{},{}\n", s.episode, format_f64(s.mean_rssi_dbm)));
    }
    out
}

pub fn eval_csv_header(num_users: usize) -> String {
    let mut header = String::from("step");
    for k in 0..num_users {
        header.push_str(&format!(",user_{k}_rssi_dbm"));
    }
    header.push_str(",mean_rssi_dbm");
    header
}

/// Per-step receive power per user plus the mean, one row per step.
pub fn eval_csv(log: &EvalLog, num_users: usize) -> Result<String> {
    let mut out = eval_csv_header(num_users);
    out.push('\n');
    for r in &log.rows {
        if r.rssi_per_user.len() != num_users {
            return Err(Error::ContractViolation(format!(
                "evaluation row has {} users, expected {num_users}",
                r.rssi_per_user.len()
            )));
        }
        out.push_str(&r.step.to_string());
        for &v in &r.rssi_per_user {
            out.push(',');
            out.push_str(&format_f64(v));
        }
        out.push(',');
        out.push_str(&format_f64(r.mean_rssi_dbm));
        out.push('\n');
    }
    Ok(out)
}

/// One comparison arm outcome. A failed arm keeps its row with NaN metrics.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub algo: String,
    pub seed: u64,
    pub failed: bool,
    pub mean_rssi_dbm: f64,
    pub std_rssi_dbm: f64,
    pub final_reward: f64,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.algo,
            r.seed,
            format_f64(r.mean_rssi_dbm),
            format_f64(r.std_rssi_dbm),
            format_f64(r.final_reward)
        ));
    }
    out
}

/// Human-readable companion to `summary.csv`.
pub fn summary_md(rows: &[SummaryRow], episodes: usize, eval_steps: usize) -> String {
    let mut out = String::new();
    out.push_str("# Comparison summary\n\n");
    out.push_str(&format!(
        "Training budget: {episodes} episodes per trained arm. \
         Evaluation: {eval_steps} greedy steps, fixed user homes, no sensing noise.\n\n"
    ));
    out.push_str("| algo | seed | mean RSSI (dBm) | std RSSI (dB) | final reward |\n");
    out.push_str("|---|---|---|---|---|\n");
    for r in rows {
        if r.failed {
            out.push_str(&format!("| {} | {} | failed | failed | failed |\n", r.algo, r.seed));
        } else {
            out.push_str(&format!(
                "| {} | {} | {:.2} | {:.2} | {:.4} |\n",
                r.algo, r.seed, r.mean_rssi_dbm, r.std_rssi_dbm, r.final_reward
            ));
        }
    }
    let mut algos: Vec<&str> = rows.iter().map(|r| r.algo.as_str()).collect();
    algos.dedup();
    out.push('\n');
    for algo in algos {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.algo == algo && !r.failed)
            .map(|r| r.mean_rssi_dbm)
            .collect();
        if !vals.is_empty() {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            out.push_str(&format!(
                "- `{algo}`: seed-average mean RSSI {mean:.2} dBm over {} seed(s)\n",
                vals.len()
            ));
        }
    }
    out
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Circle footprint of a cylinder obstacle, for plotting over the heatmap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FootprintCircle {
    pub name: String,
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
}

/// Ground-plan rectangle of a wall slab.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FootprintRect {
    pub name: String,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Sidecar describing a rendered heatmap: sampling grid, colour ramp range,
/// and scene annotations (user homes, blocker footprints).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapMeta {
    pub source: String,
    pub resolution: usize,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub rx_height: f64,
    pub ramp_min_dbm: f64,
    pub ramp_max_dbm: f64,
    pub users: Vec<[f64; 3]>,
    #[serde(default)]
    pub cylinders: Vec<FootprintCircle>,
    #[serde(default)]
    pub walls: Vec<FootprintRect>,
}
