use std::io::Write;

use serde::Serialize;

use super::StepResult;

/// One CSV row per environment step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: u32,
    pub action_x: f64,
    pub action_y: f64,
    pub action_z: f64,
    pub distance: f64,
    pub error_x: f64,
    pub error_y: f64,
    pub r_distance: f64,
    pub r_success: f64,
    pub r_collision: f64,
    pub r_time: f64,
    pub r_total: f64,
    pub collided: bool,
    pub terminated: bool,
    pub truncated: bool,
}

/// Step-by-step record of an episode, shared by learned and scripted policies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeTrace {
    pub rows: Vec<TraceRow>,
}

impl EpisodeTrace {
    pub fn record(&mut self, action: &[f64; 3], result: &StepResult) {
        let r = &result.reward;
        self.rows.push(TraceRow {
            step: self.rows.len() as u32 + 1,
            action_x: action[0],
            action_y: action[1],
            action_z: action[2],
            distance: result.info.distance,
            error_x: result.info.xy_error.x,
            error_y: result.info.xy_error.y,
            r_distance: r.distance,
            r_success: r.success,
            r_collision: r.collision,
            r_time: r.time,
            r_total: r.total,
            collided: result.info.collided,
            terminated: result.terminated,
            truncated: result.truncated,
        });
    }

    pub fn total_return(&self) -> f64 {
        self.rows.iter().map(|r| r.r_total).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}
