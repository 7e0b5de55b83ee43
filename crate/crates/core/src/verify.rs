//! Acceptance gates.
//!
//! Each gate recomputes one published claim or property at its stated
//! tolerance and runtime budget. [`Suite::run_all`] also collects every
//! divergence report produced along the way so the Hellinger sandwich and
//! Pinsker's inequality can be checked across all of them.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    asymptotic_sweep, bounds_over, log_grid, ordering_crossover, Regime, ThroughputBounds, SWEEP_POINTS_PER_DECADE,
};
use crate::divergences::{
    isotropic_report, kl_general_covariance, kl_isotropic, kl_isotropic_mc, CovarianceSpec, DivergenceReport,
    IsotropicGaussianPair, Method,
};
use crate::error::Result;
use crate::mc::par_mean;
use crate::planner::{psi_nec, psi_suf, taylor_bracket_check, CovertParams};
use crate::rng::{substream, Domain};
use crate::simkit::{empirical_divergences, observe, willie_detect, Detector, ThresholdRule};
use crate::specfn::Probability;
use crate::truncgauss::{shell_mass, shell_tail_mass, RadialOutputDensity, TruncatedGaussianSpec};

/// Result of one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub budget_secs: f64,
}

impl Outcome {
    /// One summary line.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({:.2}s of {:.0}s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed_secs,
            self.budget_secs,
            self.detail
        )
    }
}

/// Runs the gates and keeps the divergence reports they produce.
#[derive(Debug, Clone)]
pub struct Suite {
    pub seed: u64,
    /// `(gate id, report)` in evaluation order.
    pub reports: Vec<(u8, DivergenceReport)>,
}

fn timed(id: u8, name: &str, budget_secs: f64, f: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed_secs = start.elapsed().as_secs_f64();
    let in_time = elapsed_secs <= budget_secs;
    Outcome {
        id,
        name: name.to_string(),
        passed: passed && in_time,
        detail: if in_time { detail } else { format!("{detail}; over budget") },
        elapsed_secs,
        budget_secs,
    }
}

impl Suite {
    pub fn new(seed: u64) -> Self {
        Suite {
            seed,
            reports: Vec::new(),
        }
    }

    pub fn run_all(&mut self) -> Vec<Outcome> {
        vec![
            self.shell_tail_at_400(),
            self.shell_mass_vs_mc(),
            self.kl_vs_mc(),
            self.detector_realizes_tvd(),
            self.isotropic_minimizes_kl(),
            self.taylor_bracket(),
            self.end_to_end_covertness(),
            self.sweep_regimes(),
            self.bound_structure(),
            self.sandwich_and_pinsker(),
        ]
    }

    /// Run the listed gates in ascending order. Gate 10 only sees the
    /// reports of gates selected alongside it.
    pub fn run_selected(&mut self, ids: &[u8]) -> Result<Vec<Outcome>> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
            .map(|id| {
                Ok(match id {
                    1 => self.shell_tail_at_400(),
                    2 => self.shell_mass_vs_mc(),
                    3 => self.kl_vs_mc(),
                    4 => self.detector_realizes_tvd(),
                    5 => self.isotropic_minimizes_kl(),
                    6 => self.taylor_bracket(),
                    7 => self.end_to_end_covertness(),
                    8 => self.sweep_regimes(),
                    9 => self.bound_structure(),
                    10 => self.sandwich_and_pinsker(),
                    other => return Err(crate::error::Error::Input(format!("no acceptance gate {other}"))),
                })
            })
            .collect()
    }

    /// 1 − Δ < 0.005 at n = 400 for μ ∈ {0.70, 0.75, 0.80, 0.85}.
    pub fn shell_tail_at_400(&mut self) -> Outcome {
        timed(1, "shell tail mass below 0.005 at n = 400", 1.0, || {
            let mut ok = true;
            let mut parts = Vec::new();
            for mu in [0.70, 0.75, 0.80, 0.85] {
                let t = shell_tail_mass(400, mu)?;
                ok &= t < 0.005;
                parts.push(format!("mu={mu}: {t:.3e}"));
            }
            Ok((ok, parts.join(", ")))
        })
    }

    /// Δ against the fraction of 10⁶ Gaussian vectors landing in the shell.
    pub fn shell_mass_vs_mc(&mut self) -> Outcome {
        const SAMPLES: usize = 1_000_000;
        let seed = self.seed;
        timed(2, "shell mass matches Monte-Carlo", 30.0, || {
            let mut ok = true;
            let mut worst: f64 = 0.0;
            for (k, &n) in [2usize, 8, 64, 400].iter().enumerate() {
                for (j, &mu) in [0.5, 0.8].iter().enumerate() {
                    let delta = shell_mass(n, mu)?.get();
                    let (lo, hi) = (mu * n as f64, n as f64 / mu);
                    let stream = (k * 2 + j) as u64 * SAMPLES as u64;
                    let hits = par_mean(SAMPLES, |i| {
                        let mut rng = substream(seed, Domain::Oracle, stream + i);
                        let e: f64 = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
                        Ok(if e >= lo && e <= hi { 1.0 } else { 0.0 })
                    })?;
                    let se = (delta * (1.0 - delta) / SAMPLES as f64).sqrt();
                    let z = if se > 0.0 {
                        (hits.mean() - delta).abs() / se
                    } else if hits.mean() == delta {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    ok &= z <= 3.0;
                    worst = worst.max(z);
                }
            }
            Ok((ok, format!("8 points, worst deviation {worst:.2} standard errors")))
        })
    }

    /// Closed-form KL against the Monte-Carlo mean log-ratio.
    pub fn kl_vs_mc(&mut self) -> Outcome {
        const SAMPLES: usize = 1_000_000;
        let seed = self.seed;
        let mut reports = Vec::new();
        let out = timed(3, "closed-form KL matches Monte-Carlo", 60.0, || {
            let mut ok = true;
            let mut worst: f64 = 0.0;
            let mut point = 0u64;
            for n in [1usize, 2, 8, 64] {
                for x in [0.02, 0.3, 1.0] {
                    let pair = IsotropicGaussianPair::from_power(n, x)?;
                    let exact = kl_isotropic(&pair);
                    let est = kl_isotropic_mc(&pair, SAMPLES, seed.wrapping_add(point))?;
                    point += 1;
                    let z = (est.value - exact).abs() / est.std_err;
                    ok &= z <= 4.0;
                    worst = worst.max(z);
                    reports.push(isotropic_report(&pair)?);
                    let tvd = crate::divergences::tvd_isotropic_exact(&pair)?;
                    reports.push(DivergenceReport {
                        kl_bits: est.value.max(0.0),
                        tvd,
                        hellinger_sq: crate::divergences::hellinger_sq_isotropic(&pair),
                        chi_sq: None,
                        method: Method::MonteCarlo,
                        mc_std_err: est.std_err,
                        samples: est.samples,
                    });
                }
            }
            Ok((ok, format!("12 points, worst deviation {worst:.2} standard errors")))
        });
        self.reports.extend(reports.into_iter().map(|r| (3, r)));
        out
    }

    /// The optimal detector's advantage equals an independent estimate of
    /// the total variation.
    pub fn detector_realizes_tvd(&mut self) -> Outcome {
        const TRIALS: usize = 100_000;
        let seed = self.seed;
        let mut reports = Vec::new();
        let out = timed(4, "optimal detector advantage equals total variation", 300.0, || {
            let n = 64;
            let delta = 0.05;
            let params = CovertParams::with_defaults(n, delta, 0.1)?;
            let spec = TruncatedGaussianSpec::new(n, psi_suf(&params)?, params.mu)?;
            let model = RadialOutputDensity::new(spec)?;
            let obs = observe(&spec, TRIALS, seed)?;
            let det = willie_detect(&obs, Detector::Lrt, ThresholdRule::Bayes, Some(&model))?;
            let emp = empirical_divergences(&model, 4 * TRIALS, seed)?;
            let quad = model.divergences()?;
            let adv = det.advantage();
            let tv = emp.tvd_mixture;
            let combined = (det.std_err.powi(2) + tv.std_err.powi(2)).sqrt();
            let pinsker = (delta * crate::LN_2 / 2.0).sqrt();
            let agree = det.energy_lrt_agreement.unwrap_or(0.0);
            let ok = (adv - tv.value).abs() <= 3.0 * combined
                && adv <= pinsker + 3.0 * det.std_err
                && tv.value <= pinsker + 3.0 * tv.std_err
                && agree == 1.0;
            reports.push(quad.clone());
            reports.push(emp.report());
            Ok((
                ok,
                format!(
                    "1-(a+b) = {adv:.5} ± {:.5}, MC TVD = {:.5} ± {:.5}, quadrature TVD = {:.5}, energy/LRT agreement {agree}",
                    det.std_err,
                    tv.value,
                    tv.std_err,
                    quad.tvd.get()
                ),
            ))
        });
        self.reports.extend(reports.into_iter().map(|r| (4, r)));
        out
    }

    /// Random spectra at fixed trace never beat the isotropic KL.
    pub fn isotropic_minimizes_kl(&mut self) -> Outcome {
        let seed = self.seed;
        let mut reports = Vec::new();
        let out = timed(5, "isotropic covariance minimizes KL at fixed trace", 10.0, || {
            let mut rng = substream(seed, Domain::Oracle, 1 << 50);
            let mut ok = true;
            let mut min_gap = f64::INFINITY;
            for _ in 0..1000 {
                let n = rng.random_range(1..=64usize);
                let x = 10f64.powf(rng.random_range(-3.0..0.5));
                let w: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
                let total: f64 = w.iter().sum();
                let eig: Vec<f64> = w.iter().map(|v| v / total * n as f64 * (1.0 + x)).collect();
                let spec = CovarianceSpec::new(eig)?;
                let pair = IsotropicGaussianPair::from_power(n, spec.trace_power)?;
                let gap = kl_general_covariance(&spec)? - kl_isotropic(&pair);
                ok &= gap >= -1e-9;
                min_gap = min_gap.min(gap);
                reports.push(isotropic_report(&pair)?);
            }
            Ok((ok, format!("1000 spectra, smallest excess {min_gap:.3e} bits")))
        });
        self.reports.extend(reports.into_iter().map(|r| (5, r)));
        out
    }

    /// `x²/(4η) < ½(x − ln(1+x)) < x²/4` below `3(η−1)/(2η)`.
    pub fn taylor_bracket(&mut self) -> Outcome {
        timed(6, "Taylor bracket below its threshold", 5.0, || {
            const POINTS: usize = 10_000;
            let mut ok = true;
            let mut parts = Vec::new();
            for eta in [1.001, 1.01, 1.1] {
                let threshold = 3.0 * (eta - 1.0) / (2.0 * eta);
                let fails = (1..=POINTS)
                    .map(|i| threshold * i as f64 / (POINTS + 1) as f64)
                    .filter(|&x| {
                        let c = taylor_bracket_check(x, eta);
                        !(c.lower_ok && c.upper_ok)
                    })
                    .count();
                ok &= fails == 0;
                parts.push(format!("eta={eta}: {fails} failures"));
            }
            Ok((ok, parts.join(", ")))
        })
    }

    /// Empirical KL of the ensemble output at the sufficient power stays
    /// within budget; at twice the necessary power it exceeds it.
    pub fn end_to_end_covertness(&mut self) -> Outcome {
        const SAMPLES: usize = 400_000;
        let seed = self.seed;
        let mut reports = Vec::new();
        let out = timed(7, "end-to-end covertness at the planned powers", 600.0, || {
            let mut ok = true;
            let mut parts = Vec::new();
            for n in [16usize, 64, 128] {
                for delta in [0.01, 0.05] {
                    let params = CovertParams::with_defaults(n, delta, 0.1)?;
                    let mut kls = Vec::new();
                    for psi in [psi_suf(&params)?, 2.0 * psi_nec(&params)?] {
                        let spec = TruncatedGaussianSpec::new(n, psi, params.mu)?;
                        let model = RadialOutputDensity::new(spec)?;
                        let emp = empirical_divergences(&model, SAMPLES, seed)?;
                        reports.push(model.divergences()?);
                        reports.push(emp.report());
                        kls.push(emp.kl_bits);
                    }
                    let (suf, nec) = (kls[0], kls[1]);
                    let pass = suf.value <= delta + 3.0 * suf.std_err && nec.value > delta;
                    ok &= pass;
                    parts.push(format!(
                        "n={n} delta={delta}: {:.4}/{:.4}",
                        suf.value / delta,
                        nec.value / delta
                    ));
                }
            }
            Ok((ok, format!("KL/delta at (suf/2 nec): {}", parts.join("; "))))
        });
        self.reports.extend(reports.into_iter().map(|r| (7, r)));
        out
    }

    /// Divergence sweeps along `1 + n^{−τ}` fall into the three regimes.
    pub fn sweep_regimes(&mut self) -> Outcome {
        let mut reports = Vec::new();
        let out = timed(8, "power-schedule sweeps classify into three regimes", 10.0, || {
            let grid = log_grid(1e2, 1e8, SWEEP_POINTS_PER_DECADE)?;
            let mut ok = true;
            let mut parts = Vec::new();
            for (tau, want) in [(0.25, Regime::Diverging), (0.5, Regime::Plateau), (0.75, Regime::Vanishing)] {
                let sweep = asymptotic_sweep(1.0, tau, &grid)?;
                let (first, last) = (sweep.trajectories[0], sweep.trajectories[sweep.trajectories.len() - 1]);
                let extra = match want {
                    Regime::Diverging => last.tvd > 0.9 && last.kl_bits > first.kl_bits,
                    Regime::Vanishing => last.tvd < first.tvd && last.kl_bits < first.kl_bits,
                    _ => true,
                };
                ok &= sweep.regime == want && extra;
                parts.push(format!("tau={tau}: {:?}", sweep.regime));
                for p in &sweep.trajectories {
                    reports.push(DivergenceReport {
                        kl_bits: p.kl_bits,
                        tvd: Probability::saturating(p.tvd),
                        hellinger_sq: Probability::saturating(p.hellinger_sq),
                        chi_sq: None,
                        method: Method::ClosedForm,
                        mc_std_err: 0.0,
                        samples: 0,
                    });
                }
            }
            Ok((ok, parts.join(", ")))
        });
        self.reports.extend(reports.into_iter().map(|r| (8, r)));
        out
    }

    /// Ordering, first-order ratio, second-order sign and boundedness of the
    /// throughput bounds.
    pub fn bound_structure(&mut self) -> Outcome {
        timed(9, "throughput bound structure", 10.0, || {
            let (delta, epsilon) = (0.01, 0.1);
            let grid = log_grid(1e2, 1e8, SWEEP_POINTS_PER_DECADE)?;
            let rows = bounds_over(&grid, |n| CovertParams::with_defaults(n, delta, epsilon))?;
            let crossover = ordering_crossover(&rows);
            let ordered = crossover == Some(grid[0]);

            let top = rows[rows.len() - 1];
            let ra = top.achievability_bits / top.first_order;
            let rc = top.converse_bits / top.first_order;
            let ratio_ok = (ra - 1.0).abs() <= 0.02 && (rc - 1.0).abs() <= 0.02;

            let mut sign_ok = true;
            for n in [1_000usize, 100_000, 10_000_000] {
                let eps = [0.3, 0.1, 0.01, 0.001];
                let b: Vec<ThroughputBounds> = eps
                    .iter()
                    .map(|&e| ThroughputBounds::compute(&CovertParams::with_defaults(n, delta, e)?))
                    .collect::<Result<_>>()?;
                sign_ok &= b.windows(2).all(|w| {
                    w[1].achievability_bits < w[0].achievability_bits && w[1].converse_bits < w[0].converse_bits
                });
            }

            let gaps: Vec<f64> = rows
                .iter()
                .filter(|r| r.n >= 1000)
                .map(|r| r.converse_bits - r.achievability_bits - (r.n as f64).log2())
                .collect();
            let max_gap = gaps.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let bounded = max_gap <= 1.0 && gaps[gaps.len() - 1].abs() <= gaps[0].abs();

            Ok((
                ordered && ratio_ok && sign_ok && bounded,
                format!(
                    "ordering from n={} [{}], ratios at n=1e8 achievability {ra:.4} converse {rc:.4} [{}], \
                     second-order sign [{}], max |converse - achievability - log n| = {max_gap:.4} [{}]",
                    crossover.map_or("none".to_string(), |n| n.to_string()),
                    verdict(ordered),
                    verdict(ratio_ok),
                    verdict(sign_ok),
                    verdict(bounded)
                ),
            ))
        })
    }

    /// Hellinger sandwich and Pinsker on every report collected so far.
    pub fn sandwich_and_pinsker(&mut self) -> Outcome {
        let reports = &self.reports;
        timed(10, "Hellinger sandwich and Pinsker on every evaluation", 5.0, || {
            let bad: Vec<String> = reports
                .iter()
                .filter(|(_, r)| !(r.sandwich_holds() && r.pinsker_holds()))
                .map(|(id, r)| format!("criterion {id}: {r:?}"))
                .collect();
            let gates: std::collections::BTreeSet<u8> = reports.iter().map(|(id, _)| *id).collect();
            Ok((
                bad.is_empty() && !reports.is_empty(),
                if bad.is_empty() {
                    format!("{} reports from criteria {gates:?}", reports.len())
                } else {
                    format!("{} violations, first: {}", bad.len(), bad[0])
                },
            ))
        })
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "fail"
    }
}

