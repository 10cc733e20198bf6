//! Run-record persistence: JSON documents for audits and optional trajectory
//! CSV streams.

use std::path::Path;

use nqovi_core::nqovi::RunRecord;

use crate::config::HarnessError;

pub fn save_record(record: &RunRecord, path: &Path) -> Result<(), HarnessError> {
    let text = serde_json::to_string(record)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_record(path: &Path) -> Result<RunRecord, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let record: RunRecord = serde_json::from_str(&text)?;
    Ok(record)
}

/// Trajectory CSV: one row per (episode, step), with per-agent reward columns.
pub fn write_trajectories(record: &RunRecord, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "episode".to_string(),
        "step".to_string(),
        "state".to_string(),
        "joint_action_index".to_string(),
    ];
    for i in 0..record.num_agents {
        header.push(format!("reward_{i}"));
    }
    header.push("bonus".to_string());
    w.write_record(&header)?;
    for (k0, traj) in record.trajectories.iter().enumerate() {
        for h in 0..record.horizon {
            let mut row = vec![
                (k0 + 1).to_string(),
                (h + 1).to_string(),
                traj.states[h].to_string(),
                traj.joint_actions[h].to_string(),
            ];
            for i in 0..record.num_agents {
                row.push(format!("{}", traj.rewards[h][i]));
            }
            row.push(format!("{}", traj.bonuses[h]));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nqovi_core::linear_mg::random_tabular_mg;
    use nqovi_core::nqovi::{run, LearnerConfig};

    fn small_record() -> RunRecord {
        let (mg, _) = random_tabular_mg(4, 2, &[2, 2], 2, 2).unwrap();
        let cfg = LearnerConfig {
            episodes: 3,
            seed: 9,
            ..Default::default()
        };
        run(&mg, &cfg).unwrap()
    }

    #[test]
    fn record_json_round_trip() {
        let record = small_record();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("record.json");
        save_record(&record, &path).unwrap();
        let back = load_record(&path).unwrap();
        assert_eq!(record, back);
    }

    #[test]
    fn trajectory_csv_shape() {
        let record = small_record();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        write_trajectories(&record, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 3 * record.horizon);
        assert!(lines[0].starts_with("episode,step,state,joint_action_index,reward_0,reward_1,bonus"));
    }
}
