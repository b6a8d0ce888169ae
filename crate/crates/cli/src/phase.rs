//! Phase classification tables and the `p_c(λ)` curve.

use std::f64::consts::PI;

use hyperperc_core::percolation::{estimate_pc, simulate, Design, Estimate, Model, PercolationError, SweepResult};

/// Finite-size thresholds behind the phase labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Minimum uniqueness and reach frequency for a unique phase.
    pub unique: f64,
    /// Minimum reach frequency of both sides for the many-clusters phase.
    pub many_reach: f64,
    /// Minimum mean `k` of both sides for the many-clusters phase.
    pub many_k: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { unique: 0.9, many_reach: 0.5, many_k: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseLabel {
    WhiteUnique,
    BlackUnique,
    BothMany,
    SubcriticalAmbiguous,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::WhiteUnique => "W-unique",
            PhaseLabel::BlackUnique => "B-unique",
            PhaseLabel::BothMany => "both-many",
            PhaseLabel::SubcriticalAmbiguous => "subcritical-ambiguous",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [PhaseLabel::WhiteUnique, PhaseLabel::BlackUnique, PhaseLabel::BothMany, PhaseLabel::SubcriticalAmbiguous]
            .into_iter()
            .find(|l| l.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow {
    pub model: Model,
    pub p: f64,
    pub size: f64,
    pub label: PhaseLabel,
    pub theta_w: f64,
    pub theta_b: f64,
    pub unique_w: f64,
    pub unique_b: f64,
    pub kw: f64,
    pub kb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub rows: Vec<PhaseRow>,
    pub replicas: usize,
    pub seed: u64,
}

pub const PHASE_CSV_HEADER: &str =
    "model,p,lambda,pgon,qdeg,R,label,theta_w,theta_b,unique_w,unique_b,kw,kb,replicas,seed";

pub fn classify(theta_w: f64, theta_b: f64, unique_w: f64, unique_b: f64, kw: f64, kb: f64, t: &Thresholds) -> PhaseLabel {
    if unique_w >= t.unique && theta_w >= t.unique {
        PhaseLabel::WhiteUnique
    } else if unique_b >= t.unique && theta_b >= t.unique {
        PhaseLabel::BlackUnique
    } else if theta_w >= t.many_reach && theta_b >= t.many_reach && kw >= t.many_k && kb >= t.many_k {
        PhaseLabel::BothMany
    } else {
        PhaseLabel::SubcriticalAmbiguous
    }
}

impl PhaseTable {
    /// One row per grid point of each sweep, classified on the largest
    /// window of the ladder.
    pub fn from_sweeps(sweeps: &[SweepResult], t: &Thresholds) -> Self {
        let mut rows = Vec::new();
        for s in sweeps {
            let last = s.design.sizes.len() - 1;
            for j in 0..s.design.grid.len() {
                let pt = s.point(last, j);
                rows.push(PhaseRow {
                    model: s.design.model,
                    p: pt.p,
                    size: pt.size,
                    label: classify(pt.theta, pt.theta_b, pt.unique_freq, pt.unique_freq_b, pt.kw, pt.kb, t),
                    theta_w: pt.theta,
                    theta_b: pt.theta_b,
                    unique_w: pt.unique_freq,
                    unique_b: pt.unique_freq_b,
                    kw: pt.kw,
                    kb: pt.kb,
                });
            }
        }
        let (replicas, seed) = sweeps.first().map_or((0, 0), |s| (s.design.replicas, s.design.seed));
        PhaseTable { rows, replicas, seed }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{PHASE_CSV_HEADER}\n");
        for r in &self.rows {
            let (lambda, pgon, qdeg) = model_columns(&r.model);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}\n",
                r.model.name(),
                r.p,
                lambda,
                pgon,
                qdeg,
                r.size,
                r.label.as_str(),
                r.theta_w,
                r.theta_b,
                r.unique_w,
                r.unique_b,
                r.kw,
                r.kb,
                self.replicas,
                self.seed
            ));
        }
        out
    }

    /// Parses `(p, λ or 0, label)` triples back from [`PhaseTable::to_csv`].
    pub fn parse_points(csv: &str) -> Result<Vec<(f64, f64, PhaseLabel)>, String> {
        let mut lines = csv.lines();
        if lines.next() != Some(PHASE_CSV_HEADER) {
            return Err("not a phase table".into());
        }
        lines
            .enumerate()
            .map(|(i, line)| {
                let f: Vec<&str> = line.split(',').collect();
                let bad = || format!("phase table row {}", i + 2);
                if f.len() != PHASE_CSV_HEADER.split(',').count() {
                    return Err(bad());
                }
                let p = f[1].parse().map_err(|_| bad())?;
                let lambda = if f[2].is_empty() { 0.0 } else { f[2].parse().map_err(|_| bad())? };
                let label = PhaseLabel::parse(f[6]).ok_or_else(bad)?;
                Ok((p, lambda, label))
            })
            .collect()
    }
}

pub fn model_columns(m: &Model) -> (String, String, String) {
    match *m {
        Model::Graph { p_gon, q_deg } => (String::new(), p_gon.to_string(), q_deg.to_string()),
        Model::Voronoi { lambda } => (lambda.to_string(), String::new(), String::new()),
    }
}

/// Upper bound `1/2 − 1/(4λπ + 2)` on `p_c(λ)`.
pub fn pc_upper_bound(lambda: f64) -> f64 {
    0.5 - 1.0 / (4.0 * lambda * PI + 2.0)
}

/// The conjectured asymptotic `1/2 − λ^{−2/3}`, reported for comparison only.
pub fn pc_asymptotic_guess(lambda: f64) -> f64 {
    0.5 - lambda.powf(-2.0 / 3.0)
}

/// Window ladder for intensity `lambda`: the base ladder shifted by
/// `ln(1/λ)` so every window holds about the same number of cells.
pub fn scaled_ladder(base: &[f64], lambda: f64) -> Vec<f64> {
    base.iter().map(|r| ((r - lambda.ln()) * 1e9).round() / 1e9).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcCurveRow {
    pub lambda: f64,
    pub ladder: Vec<f64>,
    pub pc: Estimate,
    pub upper_bound: f64,
    pub guess: f64,
    /// CI upper end within `slack` of the upper bound.
    pub bound_ok: bool,
    /// CI lower end above zero.
    pub positive_ok: bool,
    /// Sandwich against the previous (smaller) λ, with CI slack.
    pub sandwich_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcCurveConfig {
    pub base_ladder: Vec<f64>,
    pub scale_ladder: bool,
    pub grid: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub r_core: f64,
    pub margin: f64,
    pub slack: f64,
}

/// `p̂_c(λ)` for each λ (sorted ascending) with bound checks.
pub fn estimate_pc_curve(lambdas: &[f64], cfg: &PcCurveConfig) -> Result<Vec<PcCurveRow>, PercolationError> {
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(f64::total_cmp);
    let mut rows: Vec<PcCurveRow> = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let ladder =
            if cfg.scale_ladder { scaled_ladder(&cfg.base_ladder, lambda) } else { cfg.base_ladder.clone() };
        let mut design = Design::new(Model::Voronoi { lambda }, ladder.clone(), cfg.grid.clone(), cfg.replicas, cfg.seed);
        design.r_core = cfg.r_core;
        design.margin = cfg.margin;
        let data = simulate(&design)?;
        let pc = estimate_pc(&design, &data)?;
        let upper_bound = pc_upper_bound(lambda);
        let sandwich_ok = rows.last().is_none_or(|prev| sandwich_holds(prev.lambda, &prev.pc, lambda, &pc));
        rows.push(PcCurveRow {
            lambda,
            ladder,
            bound_ok: pc.hi <= upper_bound + cfg.slack,
            positive_ok: pc.lo > 0.0,
            sandwich_ok,
            pc,
            upper_bound,
            guess: pc_asymptotic_guess(lambda),
        });
    }
    Ok(rows)
}

/// `p_c(λ)·λ/λ' ≤ p_c(λ') ≤ 1 − (1 − p_c(λ))·λ/λ'` for `λ < λ'`, each side
/// granted the width of the intervals.
pub fn sandwich_holds(lambda: f64, pc: &Estimate, lambda2: f64, pc2: &Estimate) -> bool {
    let r = lambda / lambda2;
    pc.lo * r <= pc2.hi && pc2.lo <= 1.0 - (1.0 - pc.hi) * r
}

pub const PC_CURVE_CSV_HEADER: &str =
    "lambda,R_ladder,pc,pc_lo,pc_hi,upper_bound,bound_ok,positive_ok,sandwich_ok,guess_lambda_pow,replicas,seed";

pub fn pc_curve_csv(rows: &[PcCurveRow], replicas: usize, seed: u64) -> String {
    let mut out = format!("{PC_CURVE_CSV_HEADER}\n");
    for r in rows {
        let ladder: Vec<String> = r.ladder.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{:.6},{},{}\n",
            r.lambda,
            ladder.join(";"),
            r.pc.value,
            r.pc.lo,
            r.pc.hi,
            r.upper_bound,
            r.bound_ok,
            r.positive_ok,
            r.sandwich_ok,
            r.guess,
            replicas,
            seed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(value: f64, lo: f64, hi: f64) -> Estimate {
        Estimate { value, lo, hi, crossings: vec![] }
    }

    #[test]
    fn labels() {
        let t = Thresholds::default();
        assert_eq!(classify(1.0, 0.0, 0.95, 0.0, 1.0, 0.0, &t), PhaseLabel::WhiteUnique);
        assert_eq!(classify(0.1, 0.95, 0.0, 0.92, 0.1, 1.0, &t), PhaseLabel::BlackUnique);
        assert_eq!(classify(0.9, 0.9, 0.3, 0.3, 2.5, 2.1, &t), PhaseLabel::BothMany);
        assert_eq!(classify(0.9, 0.9, 0.3, 0.3, 1.5, 2.1, &t), PhaseLabel::SubcriticalAmbiguous);
        for l in [PhaseLabel::WhiteUnique, PhaseLabel::BothMany] {
            assert_eq!(PhaseLabel::parse(l.as_str()), Some(l));
        }
    }

    #[test]
    fn bounds_and_sandwich() {
        assert!((pc_upper_bound(1.0) - (0.5 - 1.0 / (4.0 * PI + 2.0))).abs() < 1e-15);
        assert!(pc_upper_bound(1e6) < 0.5 && pc_upper_bound(1e-6) > 0.0);
        assert!(sandwich_holds(0.5, &est(0.2, 0.18, 0.22), 1.0, &est(0.25, 0.23, 0.27)));
        // p_c(λ') far below p_c(λ)·λ/λ'
        assert!(!sandwich_holds(1.0, &est(0.4, 0.39, 0.41), 2.0, &est(0.1, 0.09, 0.11)));
        // p_c(λ') above 1 − (1 − p_c(λ))·λ/λ'
        assert!(!sandwich_holds(1.0, &est(0.2, 0.19, 0.21), 2.0, &est(0.7, 0.69, 0.71)));
        let l = scaled_ladder(&[4.5, 5.5], 1.0);
        assert_eq!(l, vec![4.5, 5.5]);
        assert!(scaled_ladder(&[4.5], 0.25)[0] > 5.8);
    }
}
