use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::model::Phase;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub iteration: usize,
    pub phase: Phase,
    pub loss: f64,
    pub st1_acc: Option<f64>,
    pub st2_acc: Option<f64>,
    pub st3_acc: Option<f64>,
    pub millis: u128,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<LogRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl TrainLog {
    pub fn losses(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.loss).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,phase,loss,st1_acc,st2_acc,st3_acc,millis\n");
        for r in &self.rows {
            let phase = match r.phase {
                Phase::Coarse => "coarse",
                Phase::Fine => "fine",
            };
            let _ = writeln!(
                out,
                "{},{phase},{:.9},{},{},{},{}",
                r.iteration,
                r.loss,
                cell(r.st1_acc),
                cell(r.st2_acc),
                cell(r.st3_acc),
                r.millis
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}
