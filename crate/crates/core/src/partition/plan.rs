//! Per-box tolerance allocation on `[η, u]^d` and the schedule diagnostics.

use serde::Serialize;

use super::schedule::{geometric_schedule, EtaSchedule};
use crate::constants::u_threshold;
use crate::geometry::Rect;
use crate::{Error, Result};

/// `S = Σ_{i=0}^{l} (η_{i+1} - η_i)^{d/(2q+d)} / η_i^{dq/(p(2q+d))}` for the
/// full level list `η_0, …, η_{l+1}`.
pub fn level_sum(levels: &[f64], d: usize, p: f64, q: f64) -> Result<f64> {
    if levels.len() < 2 {
        return Err(Error::InvalidArgument("need at least eta_0 and eta_1".into()));
    }
    if levels.windows(2).any(|w| !(0.0 < w[0] && w[0] < w[1])) {
        return Err(Error::InvalidArgument("levels must be positive and increasing".into()));
    }
    let (a, b) = exponents(d, p, q);
    Ok(levels
        .windows(2)
        .map(|w| (w[1] - w[0]).powf(a) / w[0].powf(b))
        .sum())
}

/// `(d/(2q+d), dq/(p(2q+d)))`.
fn exponents(d: usize, p: f64, q: f64) -> (f64, f64) {
    let d = d as f64;
    (d / (2.0 * q + d), d * q / (p * (2.0 * q + d)))
}

/// One box `∏ [η_{i_k}, η_{i_k+1}]` of the plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanBox {
    pub index: Vec<usize>,
    /// Uses the unclipped top level.
    pub rect: Rect,
    /// `u_i = ∏ η_{i_k}^{1/p} / ∏ (η_{i_k+1} - η_{i_k})^{1/q}`.
    pub weight: f64,
    /// Allocated tolerance `α(i)`.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionPlan {
    pub schedule: EtaSchedule,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub eps: f64,
    pub boxes: Vec<PlanBox>,
    #[serde(rename = "S")]
    pub s: f64,
    /// `ζ_i = η_{i+1}^{d/(2q+d)} / η_i^{dq/(p(2q+d))}`.
    pub zetas: Vec<f64>,
    /// `Σ_i u_i^{-dq/(2q+d)}`, equal to `S^d`.
    pub weight_sum: f64,
}

impl PartitionPlan {
    /// `Σ α(i)^q`.
    pub fn alpha_budget(&self) -> f64 {
        self.boxes.iter().map(|b| b.alpha.powf(self.q)).sum()
    }

    /// Box bound `ε^{-d/2} S^{d(2q+d)/(2q)}` with unit constant.
    pub fn bound(&self) -> f64 {
        let d = self.d as f64;
        self.eps.powf(-d / 2.0) * self.s.powf(d * (2.0 * self.q + d) / (2.0 * self.q))
    }

    /// Materialized box `index`, its top cell clipped to `u`.
    pub fn clipped_rect(&self, index: &[usize]) -> Rect {
        let cells = self.schedule.cells();
        let lo = index.iter().map(|&i| cells[i].0).collect();
        let hi = index.iter().map(|&i| cells[i].1).collect();
        Rect::new(lo, hi).expect("cells are nondegenerate")
    }
}

/// Every multi-index in `{0, …, n-1}^d`, last coordinate fastest.
pub(crate) fn multi_indices(n: usize, d: usize) -> Vec<Vec<usize>> {
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut k| {
            let mut idx = vec![0; d];
            for slot in idx.iter_mut().rev() {
                *slot = k % n;
                k /= n;
            }
            idx
        })
        .collect()
}

/// Allocates `α(i) = ε u_i^{-d/(d+2q)} (Σ_j u_j^{-dq/(d+2q)})^{-1/q}`, which
/// minimizes `Σ (α(i)/u_i)^{-d/2}` subject to `Σ α(i)^q = ε^q`.
pub fn build_plan(schedule: &EtaSchedule, d: usize, p: f64, q: f64, eps: f64) -> Result<PartitionPlan> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    if !(p.is_finite() && q.is_finite() && p >= 1.0 && q >= 1.0) {
        return Err(Error::Regime(format!(
            "partition plans need finite 1 <= p, q, got p={p}, q={q}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let all = schedule.all_levels();
    let n = all.len() - 1;
    let (a, b) = exponents(d, p, q);
    let df = d as f64;

    let per_axis: Vec<f64> = all
        .windows(2)
        .map(|w| w[0].powf(1.0 / p) / (w[1] - w[0]).powf(1.0 / q))
        .collect();
    let indices = multi_indices(n, d);
    let weights: Vec<f64> = indices
        .iter()
        .map(|idx| idx.iter().map(|&i| per_axis[i]).product())
        .collect();
    let weight_sum: f64 = weights.iter().map(|u| u.powf(-df * q / (2.0 * q + df))).sum();
    let norm = weight_sum.powf(-1.0 / q);

    let boxes = indices
        .into_iter()
        .zip(&weights)
        .map(|(index, &weight)| {
            let lo = index.iter().map(|&i| all[i]).collect();
            let hi = index.iter().map(|&i| all[i + 1]).collect();
            PlanBox {
                rect: Rect::new(lo, hi).expect("levels increase"),
                index,
                weight,
                alpha: eps * weight.powf(-df / (df + 2.0 * q)) * norm,
            }
        })
        .collect();
    let zetas = all.windows(2).map(|w| w[1].powf(a) / w[0].powf(b)).collect();
    Ok(PartitionPlan {
        schedule: schedule.clone(),
        d,
        p,
        q,
        eps,
        boxes,
        s: level_sum(&all, d, p, q)?,
        zetas,
        weight_sum,
    })
}

/// Outcome of the doubling checks on a geometric schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    /// `u` the checks were run against.
    pub u: f64,
    /// Whether `η_i < u` for `1 ≤ i ≤ l`, the hypothesis of the ratio check.
    pub hypothesis: bool,
    /// `ζ_i / ζ_{i-1}` for `1 ≤ i ≤ l`.
    pub ratios: Vec<f64>,
    /// `min ratio - 2`; `None` when `l = 0`.
    pub ratio_margin: Option<f64>,
    #[serde(rename = "S")]
    pub s: f64,
    pub two_zeta_l: f64,
    pub ratios_pass: bool,
    pub s_pass: bool,
}

impl DoublingReport {
    pub fn pass(&self) -> bool {
        self.ratios_pass && self.s_pass
    }
}

/// Checks `ζ_i / ζ_{i-1} ≥ 2` for `1 ≤ i ≤ l` and `S ≤ 2ζ_l`.
pub fn doubling_diagnostics(plan: &PartitionPlan, u: f64) -> DoublingReport {
    let levels = plan.schedule.levels();
    let l = plan.schedule.l();
    let ratios: Vec<f64> = plan.zetas.windows(2).take(l).map(|w| w[1] / w[0]).collect();
    let ratio_margin = ratios.iter().copied().reduce(f64::min).map(|m| m - 2.0);
    let two_zeta_l = 2.0 * plan.zetas[l];
    let slack = 1e-12;
    DoublingReport {
        u,
        hypothesis: levels[1..].iter().all(|&x| x < u),
        ratio_margin,
        ratios_pass: ratios.iter().all(|&r| r >= 2.0 * (1.0 - slack)),
        ratios,
        s: plan.s,
        two_zeta_l,
        s_pass: plan.s <= two_zeta_l * (1.0 + slack),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum DoublingOutcome {
    /// `η ≥ u`: the interval `[η, u ∨ η]` is empty and nothing needs checking.
    Trivial { eta: f64, u: f64 },
    Checked(DoublingReport),
}

impl DoublingOutcome {
    pub fn pass(&self) -> bool {
        match self {
            DoublingOutcome::Trivial { .. } => true,
            DoublingOutcome::Checked(r) => r.pass(),
        }
    }
}

/// Builds the geometric schedule on `[η, u]` with `u` the doubling threshold
/// for `(d, p, q)` and runs [`doubling_diagnostics`] on it.
pub fn doubling_check(d: usize, p: f64, q: f64, eta: f64) -> Result<DoublingOutcome> {
    let u = u_threshold(d, p, q)?;
    if eta >= u {
        return Ok(DoublingOutcome::Trivial { eta, u });
    }
    let schedule = geometric_schedule(eta, u, p, q)?;
    let plan = build_plan(&schedule, d, p, q, 1.0)?;
    Ok(DoublingOutcome::Checked(doubling_diagnostics(&plan, u)))
}
