//! Central finite-difference verification of tape gradients.

use std::fmt::Write as _;

use rand::seq::index::sample;

use super::params::ParamStore;
use super::tape::{Graph, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Ok,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Ok => "ok",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub name: String,
    pub coords_checked: usize,
    pub max_rel_err: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub params: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.params
            .iter()
            .filter(|p| p.status != CheckStatus::Skipped)
            .map(|p| p.max_rel_err)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.params.iter().all(|p| p.status != CheckStatus::Fail)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("param_name\tmax_rel_err\tstatus\n");
        for p in &self.params {
            let _ = writeln!(out, "{}\t{:.3e}\t{}", p.name, p.max_rel_err, p.status.as_str());
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheckConfig {
    pub eps: f64,
    pub tolerance: f64,
    pub coords_per_param: usize,
    /// Denominator floor in the relative error, so gradients that are
    /// numerically zero on both sides compare as equal.
    pub abs_floor: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            tolerance: 1e-3,
            coords_per_param: 32,
            abs_floor: 1e-6,
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

fn eval_loss<F>(store: &ParamStore, loss_fn: &F) -> Result<(f64, u64)>
where
    F: Fn(&mut Graph<'_>) -> Result<Var>,
{
    let mut g = Graph::new(store);
    let loss = loss_fn(&mut g)?;
    Ok((g.scalar(loss), g.kink_signature()))
}

/// How many times the step is divided by ten when a perturbation crosses a kink.
const KINK_RETRIES: usize = 3;

/// Compares tape gradients with central differences on a sampled subset of
/// coordinates of every trainable parameter. Frozen parameters are reported as
/// skipped. The perturbation actually applied (after `f32` rounding) is used as
/// the denominator. When either side of a difference switches a ReLU or a
/// max-pool winner, the step for that coordinate shrinks tenfold, up to
/// [`KINK_RETRIES`] times.
pub fn finite_diff_check<F>(store: &mut ParamStore, loss_fn: F, cfg: GradCheckConfig) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<'_>) -> Result<Var>,
{
    let (first, base_sig) = eval_loss(store, &loss_fn)?;
    let (second, _) = eval_loss(store, &loss_fn)?;
    if first.to_bits() != second.to_bits() {
        return Err(Error::NonDeterministic { first, second });
    }

    let analytic = {
        let mut g = Graph::new(store);
        let loss = loss_fn(&mut g)?;
        g.backward(loss)?
    };

    let mut rng = store.rng_for(0x6772_6164);
    let mut report = GradCheckReport {
        tolerance: cfg.tolerance,
        params: Vec::new(),
    };
    let names: Vec<(String, bool, usize)> = store
        .iter()
        .map(|p| (p.name.clone(), p.trainable, p.value.len()))
        .collect();

    for (idx, (name, trainable, len)) in names.into_iter().enumerate() {
        if !trainable {
            report.params.push(ParamCheck {
                name,
                coords_checked: 0,
                max_rel_err: 0.0,
                status: CheckStatus::Skipped,
            });
            continue;
        }
        let coords: Vec<usize> = if len <= cfg.coords_per_param {
            (0..len).collect()
        } else {
            let mut c = sample(&mut rng, len, cfg.coords_per_param).into_vec();
            c.sort_unstable();
            c
        };
        let mut max_err: f64 = 0.0;
        for &c in &coords {
            let original = store.get(&name)?.value.data()[c];
            let mut eps = cfg.eps;
            let mut numeric = 0.0;
            for attempt in 0..=KINK_RETRIES {
                let plus = (original as f64 + eps) as f32;
                let minus = (original as f64 - eps) as f32;
                store.get_mut(&name)?.value.data_mut()[c] = plus;
                let lp = eval_loss(store, &loss_fn);
                store.get_mut(&name)?.value.data_mut()[c] = minus;
                let lm = eval_loss(store, &loss_fn);
                store.get_mut(&name)?.value.data_mut()[c] = original;
                let ((lp, sp), (lm, sm)) = (lp?, lm?);
                numeric = (lp - lm) / (plus as f64 - minus as f64);
                if (sp == base_sig && sm == base_sig) || attempt == KINK_RETRIES {
                    break;
                }
                eps /= 10.0;
            }
            let a = analytic[idx].as_ref().map_or(0.0, |g| g[c]) as f32 as f64;
            max_err = max_err.max(relative_error(a, numeric, cfg.abs_floor));
        }
        report.params.push(ParamCheck {
            name,
            coords_checked: coords.len(),
            max_rel_err: max_err,
            status: if max_err < cfg.tolerance {
                CheckStatus::Ok
            } else {
                CheckStatus::Fail
            },
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor;

    #[test]
    fn quadratic_norm_matches() {
        let mut s = ParamStore::new(3);
        let w = s
            .add("w", Tensor::vector(vec![0.5, -1.25, 2.0, 0.75]).unwrap(), true)
            .unwrap();
        s.add("frozen", Tensor::vector(vec![1.0]).unwrap(), false).unwrap();
        let report = finite_diff_check(
            &mut s,
            |g| {
                let wv = g.param(w)?;
                let sq = g.mul(wv, wv)?;
                let ones = g.input(4, 1, vec![1.0; 4])?;
                g.matmul(sq, ones)
            },
            GradCheckConfig {
                eps: 1e-3,
                tolerance: 1e-6,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.passed(), "{}", report.to_tsv());
        assert_eq!(report.params[1].status, CheckStatus::Skipped);
        assert!(report.to_tsv().starts_with("param_name\tmax_rel_err\tstatus\n"));
    }

    #[test]
    fn step_shrinks_when_a_relu_switches() {
        let mut s = ParamStore::new(3);
        let w = s.add("w", Tensor::vector(vec![5e-4, -2.0]).unwrap(), true).unwrap();
        let report = finite_diff_check(
            &mut s,
            |g| {
                let wv = g.param(w)?;
                let r = g.relu(wv)?;
                let ones = g.input(2, 1, vec![1.0; 2])?;
                g.matmul(r, ones)
            },
            GradCheckConfig {
                eps: 1e-3,
                tolerance: 1e-6,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.passed(), "{}", report.to_tsv());
    }

    #[test]
    fn nondeterministic_loss_is_detected() {
        use std::cell::Cell;
        let mut s = ParamStore::new(3);
        let w = s.add("w", Tensor::vector(vec![1.0]).unwrap(), true).unwrap();
        let calls = Cell::new(0.0);
        let result = finite_diff_check(
            &mut s,
            |g| {
                calls.set(calls.get() + 1.0);
                let wv = g.param(w)?;
                g.scale(wv, calls.get())
            },
            GradCheckConfig::default(),
        );
        assert!(matches!(result, Err(Error::NonDeterministic { .. })));
    }
}
