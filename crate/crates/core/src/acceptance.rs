//! The acceptance suite: one report per criterion.
//!
//! Thresholds that are not fixed constants of the criteria were frozen from
//! oracle runs; the `calibrate_*` functions rerun those oracles, and a full
//! suite run with [`rerun_oracle`] checks that they still reproduce the frozen
//! values.

use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{
    attractor_starts, attractor_trace, directed_pairs, key_lemma_trace, linear_orbit_experiment, minimal_set_sample,
    orbit_closure_experiment, passes_diophantine, two_hyperbolic_find, AttractorParams, AttractorTrace, LinearPoint,
};
use crate::catalog::{rank2_inclusion, rank2_sym2, rank3_noninjective};
use crate::error::{Error, Result};
use crate::fuchsian::FreeWord;
use crate::hyperbolic::{BoundaryPoint, IsometryClass, Psl2Element};
use crate::projective::{
    contraction_estimate, delta, is_proximal, proj_act, sample_at_distance, ProjMat, ProjPoint, DEFAULT_GAP_TOL,
};
use crate::representation::{
    h1_membership, lorentz_dual, lorentz_embed, lorentz_q, projective_limit_set_sample, veronese, LimitMap,
    Representation,
};
use crate::stats::fit_slope;

pub const DEFAULT_SEED: u64 = 42;
/// Seed of the attractor calibration run; distinct from the suite seed so
/// the threshold is not fitted to the starts it judges.
pub const CALIBRATION_SEED: u64 = 43;

pub const ATTRACTOR_STARTS: usize = 20;
pub const ATTRACTOR_REQUIRED: usize = 19;
/// Records are taken at the first return after `1, 32, 1024`.
pub const ATTRACTOR_SCHEDULE: [f64; 3] = [1.0, 32.0, 1024.0];
pub const ATTRACTOR_RETURN_RADIUS: f64 = 1.5;
pub const ATTRACTOR_BURN_IN: usize = 1;
pub const ATTRACTOR_HORIZON: f64 = 1e12;
/// Tolerance of the `Omega_prox` membership check on the starts.
pub const ATTRACTOR_EPS: f64 = 1e-2;
pub const ATTRACTOR_WORD_LEN: usize = 24;
pub const ATTRACTOR_SEPARATION: f64 = 1e-2;
pub const ATTRACTOR_SAMPLE_LEVEL: usize = 6;
/// Frozen from [`calibrate_attractor`].
pub const ATTRACTOR_THRESHOLD: f64 = 4.4e-3;

/// Frozen from [`calibrate_minimal_grid`].
pub const MINIMAL_GRID_THRESHOLD: f64 = 7.0e-2;
/// Frozen from [`calibrate_orbit_closure`].
pub const ORBIT_CLOSURE_THRESHOLD: f64 = 3.9e-7;

/// Levels of the density oracles; the criteria judge level 8.
pub const ORACLE_LEVELS: std::ops::RangeInclusive<usize> = 6..=10;
pub const JUDGED_LEVEL: usize = 8;
pub const SAMPLE_LEVEL: usize = 4;

pub const HISTOGRAM_BINS: usize = 32;
/// Log-radius unit of the linear histogram: the eigenvalue of the first
/// generator on `R^2`.
pub const HISTOGRAM_LAMBDA: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "==",
        }
    }

    fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Cmp::Lt => value < bound,
            Cmp::Le => value <= bound,
            Cmp::Ge => value >= bound,
            Cmp::Eq => value == bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub cmp: Cmp,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, cmp: Cmp, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            cmp,
            bound,
            pass: cmp.holds(value, bound),
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::new(name, f64::from(u8::from(ok)), Cmp::Eq, 1.0)
    }
}

/// A reported quantity that does not enter the verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Info {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    /// Wall-clock budget in seconds, judged by the caller.
    pub budget_s: Option<f64>,
    pub checks: Vec<Check>,
    pub info: Vec<Info>,
}

impl CriterionReport {
    pub fn new(id: u8, title: &str, budget_s: Option<f64>) -> Self {
        CriterionReport {
            id,
            title: title.to_string(),
            budget_s,
            checks: Vec::new(),
            info: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) {
        self.info.push(Info {
            name: name.into(),
            value,
        });
    }
}

/// Criteria evaluated by the library. Determinism of the CLI is judged by
/// the harness that runs it.
pub const LIBRARY_CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Criteria whose thresholds were frozen from an oracle run.
pub const ORACLE_CRITERIA: [u8; 3] = [5, 6, 7];

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionReport> {
    match id {
        1 => flow_algebra(seed),
        2 => proximality_oracle(seed),
        3 => key_lemma_decay(),
        4 => contraction_constants(seed),
        5 => minimal_set_shape(),
        6 => attractor(seed),
        7 => orbit_closure_density(),
        8 => two_hyperbolic(),
        9 => lorentz(seed),
        _ => Err(Error::invalid(format!("no library criterion {id}"))),
    }
}

/// Reruns the oracle behind a frozen threshold and adds a check that the
/// threshold is reproduced. Criteria without an oracle are left unchanged.
pub fn rerun_oracle(r: &mut CriterionReport) -> Result<()> {
    match r.id {
        5 => {
            let cal = calibrate_minimal_grid()?;
            density_info(r, &cal);
            r.check(Check::flag(
                "frozen threshold reproduced",
                reproduces(MINIMAL_GRID_THRESHOLD, cal.threshold),
            ));
        }
        6 => {
            let cal = calibrate_attractor()?;
            r.info(
                "calibration: worst distance at s >= 1024",
                cal.dist_at_judged.iter().copied().fold(0.0, f64::max),
            );
            r.info("calibration: median decay exponent", median(&cal.exponents));
            r.info("re-derived threshold", cal.threshold);
            r.check(Check::flag(
                "frozen threshold reproduced",
                reproduces(ATTRACTOR_THRESHOLD, cal.threshold),
            ));
        }
        7 => {
            let cal = calibrate_orbit_closure()?;
            density_info(r, &cal);
            r.check(Check::flag(
                "frozen threshold reproduced",
                reproduces(ORBIT_CLOSURE_THRESHOLD, cal.threshold),
            ));
        }
        _ => {}
    }
    Ok(())
}

fn density_info(r: &mut CriterionReport, cal: &DensityCalibration) {
    for (l, d) in cal.levels.iter().zip(&cal.distances) {
        r.info(format!("oracle distance at L={l}"), *d);
    }
    r.info("re-derived threshold", cal.threshold);
}

/// Rounds up to two significant digits.
pub fn round_up_2(x: f64) -> f64 {
    if !(x.is_finite() && x > 0.0) {
        return x;
    }
    let unit = 10f64.powi(x.log10().floor() as i32 - 1);
    let m = (x / unit * (1.0 - 1e-12)).ceil();
    // print and reparse so the result is the shortest decimal
    format!("{m}e{}", x.log10().floor() as i32 - 1)
        .parse()
        .unwrap_or(m * unit)
}

fn reproduces(frozen: f64, derived: f64) -> bool {
    (frozen - derived).abs() <= 1e-12 * frozen.abs()
}

fn random_frame(rng: &mut ChaCha8Rng) -> Psl2Element {
    Psl2Element::rotation(rng.gen_range(0.0..std::f64::consts::TAU))
        .compose(&Psl2Element::diagonal_flow(rng.gen_range(-3.0..3.0)))
        .compose(&Psl2Element::unipotent(rng.gen_range(-3.0..3.0)))
}

fn flow_algebra(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(1, "flow algebra", Some(10.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut flow, mut affine) = (0.0f64, 0.0f64);
    for _ in 0..100_000 {
        let u = random_frame(&mut rng);
        let (s, t) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let lhs = u.horocycle_flow(t).horocycle_flow(s);
        flow = flow.max(lhs.distance(&u.horocycle_flow(s + t)));
        let (a1, b1) = (rng.gen_range(0.2..3.0), rng.gen_range(-3.0..3.0));
        let (a2, b2) = (rng.gen_range(0.2..3.0), rng.gen_range(-3.0..3.0));
        let lhs = u.affine_act(a1, b1)?.affine_act(a2, b2)?;
        let rhs = u.affine_act(a1 * a2, a1 * b2 + b1 / a2)?;
        affine = affine.max(lhs.distance(&rhs));
    }
    r.check(Check::new(
        "max |h_s h_t u - h_(s+t) u| over 1e5 samples",
        flow,
        Cmp::Lt,
        1e-10,
    ));
    r.check(Check::new(
        "max B-group law residual over 1e5 samples",
        affine,
        Cmp::Lt,
        1e-10,
    ));
    Ok(r)
}

// A uniformly drawn length and a random reduced word of that length.
fn random_reduced(rng: &mut ChaCha8Rng, rank: usize, max_len: usize) -> FreeWord {
    let len = rng.gen_range(1..=max_len);
    let mut letters: Vec<i32> = Vec::with_capacity(len);
    while letters.len() < len {
        let g = rng.gen_range(1..=rank as i32);
        let l = if rng.gen::<bool>() { g } else { -g };
        if letters.last() != Some(&-l) {
            letters.push(l);
        }
    }
    FreeWord::from_letters(&letters).expect("reduced by construction")
}

// Relative eigenvalue error and fixed-point distance of Sym^2(w).
fn sym2_agreement(rho: &Representation, w: &FreeWord) -> Result<Option<(f64, f64)>> {
    let IsometryClass::Hyperbolic { lambda, fix_plus, .. } = rho.group().evaluate(w)?.classify() else {
        return Ok(None);
    };
    let Some(pd) = is_proximal(&rho.evaluate(w)?, DEFAULT_GAP_TOL)? else {
        return Ok(Some((f64::INFINITY, f64::INFINITY)));
    };
    let want = lambda * lambda;
    Ok(Some((
        (pd.lambda.abs() - want).abs() / want,
        delta(&pd.chi, &veronese(&fix_plus, 2)),
    )))
}

fn proximality_oracle(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(2, "proximality oracle", None);
    let rho = rank2_sym2()?;
    let g = rho.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lam, mut chi, mut count) = (0.0f64, 0.0f64, 0);
    while count < 100 {
        let len = rng.gen_range(1..=6);
        let w = g.random_cyclically_reduced(&mut rng, len)?;
        if let Some((l, c)) = sym2_agreement(&rho, &w)? {
            lam = lam.max(l);
            chi = chi.max(c);
            count += 1;
        }
    }
    r.check(Check::new(
        "max relative |lambda - lambda_gamma^2| (100 cyclically reduced words)",
        lam,
        Cmp::Lt,
        1e-8,
    ));
    r.check(Check::new("max delta(chi, veronese(gamma+))", chi, Cmp::Lt, 1e-8));
    // conjugates that are not cyclically reduced lose precision in the product
    let (mut lam_any, mut chi_any, mut count) = (0.0f64, 0.0f64, 0);
    while count < 100 {
        let w = random_reduced(&mut rng, g.rank(), 6);
        if let Some((l, c)) = sym2_agreement(&rho, &w)? {
            lam_any = lam_any.max(l);
            chi_any = chi_any.max(c);
            count += 1;
        }
    }
    r.info("max relative eigenvalue error, all reduced words", lam_any);
    r.info("max fixed-point distance, all reduced words", chi_any);
    Ok(r)
}

fn key_lemma_decay() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(3, "key lemma decay", Some(5.0));
    let gamma = Psl2Element::new(2.0, 0.0, 0.0, 0.5)?;
    let a = ProjMat::diagonal(&[4.0, 1.0, 0.25])?;
    let chi = ProjPoint::from_slice(&[1.0, 1.0, 1.0])?;
    let tr = key_lemma_trace(&gamma, &a, &BoundaryPoint::finite(1.0), &chi, 20, DEFAULT_GAP_TOL)?;
    let base_want = -tr.lambda.ln();
    let fiber_want = tr.gap.ln();
    r.check(Check::new(
        "relative error of base slope against ln(1/lambda)",
        (tr.base_slope - base_want).abs() / base_want.abs(),
        Cmp::Le,
        0.1,
    ));
    r.check(Check::new(
        "relative error of fiber slope against ln(gap)",
        (tr.fiber_slope - fiber_want).abs() / fiber_want.abs(),
        Cmp::Le,
        0.1,
    ));
    r.info("base slope", tr.base_slope);
    r.info("ln(1/lambda)", base_want);
    // gamma acts on the boundary by lambda^2
    r.info(
        "relative error of base slope against ln(1/lambda^2)",
        (tr.base_slope - 2.0 * base_want).abs() / (2.0 * base_want).abs(),
    );
    r.info("fiber slope", tr.fiber_slope);
    r.info("final distance", tr.steps.last().map_or(f64::NAN, |s| s.dist));
    Ok(r)
}

fn contraction_constants(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(4, "contraction constants", None);
    let a = ProjMat::diagonal(&[4.0, 1.0, 0.25])?;
    let pd = is_proximal(&a, DEFAULT_GAP_TOL)?.ok_or_else(|| Error::precondition("diag(4,1,1/4) is not proximal"))?;
    let Some(c) = contraction_estimate(&pd, &a, 0.3, 2000, seed)? else {
        r.check(Check::flag("contraction found", false));
        return Ok(r);
    };
    r.check(Check::new("N", c.power as f64, Cmp::Eq, 1.0));
    r.check(Check::new("c lower", c.constant, Cmp::Ge, 0.20));
    r.check(Check::new("c upper", c.constant, Cmp::Le, 0.30));
    let step = a.pow(c.power);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x0 = sample_at_distance(&pd.chi, 0.3 * rng.gen::<f64>(), &mut rng);
        let d0 = delta(&x0, &pd.chi);
        if d0 == 0.0 {
            continue;
        }
        let mut x = x0;
        for k in 1..=10 {
            x = proj_act(&step, &x)?;
            worst = worst.max(delta(&x, &pd.chi) / (c.constant.powi(k) * d0));
        }
    }
    r.check(Check::new(
        "max delta(A^(Nk) chi, chi_A) / (c^k delta(chi, chi_A)), k <= 10",
        worst,
        Cmp::Le,
        1.1,
    ));
    Ok(r)
}

fn as_proj(xi: &BoundaryPoint) -> Result<ProjPoint> {
    let (x, y) = xi.direction();
    ProjPoint::from_slice(&[x, y])
}

/// Directed distance from the level-`SAMPLE_LEVEL` marginal grid to the
/// level-`level` minimal-set sample of the non-injective example.
pub fn minimal_grid_distance(level: usize) -> Result<f64> {
    let rho = rank3_noninjective()?;
    let grid = minimal_set_sample(&rho, SAMPLE_LEVEL, DEFAULT_GAP_TOL)?.marginal_grid();
    let sample = minimal_set_sample(&rho, level, DEFAULT_GAP_TOL)?;
    directed_pairs(&grid, &sample.pairs)
}

/// Oracle levels, their distances and the threshold for the judged level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityCalibration {
    pub levels: Vec<usize>,
    pub distances: Vec<f64>,
    /// `2 exp(fit at the judged level)` of a least-squares line through
    /// `ln distance` against the level, rounded up to two digits.
    pub threshold: f64,
}

fn density_calibration(f: impl Fn(usize) -> Result<f64>) -> Result<DensityCalibration> {
    let levels: Vec<usize> = ORACLE_LEVELS.collect();
    let distances = levels.iter().map(|l| f(*l)).collect::<Result<Vec<f64>>>()?;
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(&distances)
        .map(|(l, d)| (*l as f64, d.ln()))
        .collect();
    let slope = fit_slope(&pts);
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let predicted = (my + slope * (JUDGED_LEVEL as f64 - mx)).exp();
    Ok(DensityCalibration {
        levels,
        distances,
        threshold: round_up_2(2.0 * predicted),
    })
}

pub fn calibrate_minimal_grid() -> Result<DensityCalibration> {
    density_calibration(minimal_grid_distance)
}

fn minimal_set_shape() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(5, "minimal-set shape", Some(120.0));
    let rho = rank2_inclusion()?;
    let s = minimal_set_sample(&rho, JUDGED_LEVEL, DEFAULT_GAP_TOL)?;
    let mut diag = 0.0f64;
    for p in &s.pairs {
        diag = diag.max(delta(&p.chi, &as_proj(&p.xi)?));
    }
    r.check(Check::new(
        "(a) inclusion: max distance to the diagonal",
        diag,
        Cmp::Lt,
        1e-10,
    ));
    let rho = rank2_sym2()?;
    let s = minimal_set_sample(&rho, JUDGED_LEVEL, DEFAULT_GAP_TOL)?;
    let graph = s
        .pairs
        .iter()
        .map(|p| delta(&p.chi, &veronese(&p.xi, 2)))
        .fold(0.0, f64::max);
    r.check(Check::new(
        "(b) Sym^2: max distance to the veronese graph",
        graph,
        Cmp::Lt,
        1e-9,
    ));
    let d = minimal_grid_distance(JUDGED_LEVEL)?;
    r.check(Check::new(
        "(c) non-injective: grid(L'=4) -> sample(L=8)",
        d,
        Cmp::Lt,
        MINIMAL_GRID_THRESHOLD,
    ));
    Ok(r)
}

pub fn attractor_params() -> AttractorParams {
    AttractorParams {
        eps: ATTRACTOR_EPS,
        return_radius: Some(ATTRACTOR_RETURN_RADIUS),
        horizon: ATTRACTOR_HORIZON,
        ..AttractorParams::default()
    }
}

/// Off-graph and on-graph traces of the seeded starts on the rank-2 `Sym^2`
/// example.
pub fn attractor_runs(seed: u64, schedule: &[f64]) -> Result<Vec<(AttractorTrace, AttractorTrace)>> {
    let rho = rank2_sym2()?;
    let phi = LimitMap::veronese(2);
    let ls = rho.group().limit_set_sample(ATTRACTOR_SAMPLE_LEVEL)?;
    let pls = projective_limit_set_sample(&rho, ATTRACTOR_SAMPLE_LEVEL, DEFAULT_GAP_TOL)?;
    let params = attractor_params();
    attractor_starts(
        &rho,
        &phi,
        ATTRACTOR_STARTS,
        ATTRACTOR_WORD_LEN,
        ATTRACTOR_SEPARATION,
        seed,
    )?
    .iter()
    .map(|(off, on)| {
        Ok((
            attractor_trace(off, schedule, &rho, &phi, &ls, &pls, &params)?,
            attractor_trace(on, schedule, &rho, &phi, &ls, &pls, &params)?,
        ))
    })
    .collect()
}

/// Whether an off-graph trace meets the per-start part of the criterion.
pub fn attractor_start_passes(tr: &AttractorTrace, threshold: f64) -> bool {
    tr.complete
        && tr.final_s() >= ATTRACTOR_SCHEDULE[ATTRACTOR_SCHEDULE.len() - 1]
        && tr.final_dist() < threshold
        && tr.decreasing_after(ATTRACTOR_BURN_IN)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttractorCalibration {
    pub seed: u64,
    pub schedule: Vec<f64>,
    /// Distance at the first record with `s >= 1024`, per start.
    pub dist_at_judged: Vec<f64>,
    /// Fitted `d ln dist / d ln s` after the burn-in, per start.
    pub exponents: Vec<f64>,
    /// `2 max(dist_at_judged)`, rounded up to two digits.
    pub threshold: f64,
}

/// Runs the experiment on [`CALIBRATION_SEED`] with the schedule extended
/// to twice its length.
pub fn calibrate_attractor() -> Result<AttractorCalibration> {
    let judged = ATTRACTOR_SCHEDULE[ATTRACTOR_SCHEDULE.len() - 1];
    let ratio = ATTRACTOR_SCHEDULE[1] / ATTRACTOR_SCHEDULE[0];
    let schedule: Vec<f64> = (0..2 * ATTRACTOR_SCHEDULE.len())
        .map(|k| ATTRACTOR_SCHEDULE[0] * ratio.powi(k as i32))
        .collect();
    let runs = attractor_runs(CALIBRATION_SEED, &schedule)?;
    let mut dist_at_judged = Vec::new();
    let mut exponents = Vec::new();
    for (off, _) in &runs {
        let d = off.steps.iter().find(|s| s.s >= judged).map_or(f64::NAN, |s| s.dist);
        dist_at_judged.push(d);
        let s_min = off.steps.get(ATTRACTOR_BURN_IN).map_or(f64::INFINITY, |s| s.s);
        exponents.push(off.decay_exponent(s_min));
    }
    let worst = dist_at_judged.iter().copied().fold(0.0, f64::max);
    Ok(AttractorCalibration {
        seed: CALIBRATION_SEED,
        schedule,
        threshold: round_up_2(2.0 * worst),
        dist_at_judged,
        exponents,
    })
}

fn median(v: &[f64]) -> f64 {
    let mut v: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn attractor(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(6, "attractor", None);
    let runs = attractor_runs(seed, &ATTRACTOR_SCHEDULE)?;
    let passing = runs
        .iter()
        .filter(|(off, _)| attractor_start_passes(off, ATTRACTOR_THRESHOLD))
        .count();
    r.check(Check::new(
        "starts with final distance below threshold and decreasing after burn-in",
        passing as f64,
        Cmp::Ge,
        ATTRACTOR_REQUIRED as f64,
    ));
    let on_graph = runs.iter().map(|(_, on)| on.max_dist()).fold(0.0, f64::max);
    r.check(Check::new(
        "M_B starts: max distance over all records",
        on_graph,
        Cmp::Lt,
        1e-8,
    ));
    r.info("threshold", ATTRACTOR_THRESHOLD);
    r.info(
        "worst final distance",
        runs.iter().map(|(off, _)| off.final_dist()).fold(0.0, f64::max),
    );
    r.info(
        "smallest final s",
        runs.iter().map(|(off, _)| off.final_s()).fold(f64::INFINITY, f64::min),
    );
    r.info(
        "incomplete traces",
        runs.iter().filter(|(off, _)| !off.complete).count() as f64,
    );
    Ok(r)
}

/// The pair of the first sampled minimal-set point of the `Sym^2` example.
pub fn orbit_closure_distance(level: usize) -> Result<f64> {
    let rho = rank2_sym2()?;
    let sample = minimal_set_sample(&rho, SAMPLE_LEVEL, DEFAULT_GAP_TOL)?;
    let start = sample
        .pairs
        .first()
        .ok_or_else(|| Error::precondition("empty minimal-set sample"))?;
    Ok(orbit_closure_experiment(start, &rho, level, SAMPLE_LEVEL, DEFAULT_GAP_TOL)?.sample_to_orbit)
}

pub fn calibrate_orbit_closure() -> Result<DensityCalibration> {
    density_calibration(orbit_closure_distance)
}

fn orbit_closure_density() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(7, "orbit-closure density", None);
    let d = orbit_closure_distance(JUDGED_LEVEL)?;
    r.check(Check::new(
        "sample(L'=4) -> orbit(L=8)",
        d,
        Cmp::Lt,
        ORBIT_CLOSURE_THRESHOLD,
    ));
    let rho = rank2_sym2()?;
    let fix = BoundaryPoint::finite(rho.group().axes()[0].fix_plus);
    let (x, y) = fix.direction();
    let start = LinearPoint::new([x, y], veronese(&fix, 2))?;
    let h = linear_orbit_experiment(&start, &rho, JUDGED_LEVEL, HISTOGRAM_BINS, HISTOGRAM_LAMBDA)?;
    r.check(Check::new(
        "log-radius histogram max deviation (32 bins)",
        h.max_deviation,
        Cmp::Lt,
        h.bound,
    ));
    r.info("orbit size", h.count as f64);
    r.info("occupied bins", h.coverage.iter().filter(|c| **c).count() as f64);
    Ok(r)
}

fn two_hyperbolic() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(8, "two-hyperbolic finder", None);
    let rho = rank2_sym2()?;
    let q = 10_000;
    let mut found = None;
    for level in 1..=3 {
        if let Some(f) = two_hyperbolic_find(rho.group(), &rho, level, q, DEFAULT_GAP_TOL)? {
            found = Some((level, f));
            break;
        }
    }
    match found {
        Some((level, f)) => {
            r.check(Check::new("level of the first pair", level as f64, Cmp::Le, 3.0));
            r.check(Check::flag(
                "continued-fraction test at Q = 1e4",
                passes_diophantine(f.ratio, q),
            ));
            r.info("ln lambda1 / ln lambda2", f.ratio);
            r.info("best convergent error", f.convergent_error);
        }
        None => r.check(Check::flag("pair found at L <= 3", false)),
    }
    Ok(r)
}

fn lorentz(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(9, "Lorentz model", None);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let l = lorentz_embed(&random_frame(&mut rng));
        let x: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let m = l.matrix();
        let y: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| m[(i, j)] * x[j]).sum());
        // relative to the size of the terms that cancel in q(y)
        let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
        worst = worst.max((lorentz_q(&y) - lorentz_q(&x)).abs() / scale);
    }
    r.check(Check::new(
        "max relative q-preservation residual over 1e4 samples",
        worst,
        Cmp::Lt,
        1e-10,
    ));
    let rho = rank2_sym2()?;
    let ls = rho.group().limit_set_sample(5)?;
    let (p, q) = (ls.points[0], ls.points[ls.len() / 2]);
    let x = lorentz_dual(&p, &q)?;
    let m = h1_membership(&x, &ls, 1e-6)?;
    r.check(Check::new(
        "D1/D2 isotropy residual",
        m.isotropy_residual,
        Cmp::Lt,
        1e-9,
    ));
    r.check(Check::flag("dual of two limit points accepted", m.member));
    let e1 = h1_membership(&[1.0, 0.0, 0.0], &ls, 1e-6)?;
    r.check(Check::flag("(1,0,0) rejected", !e1.member));
    r.info("(1,0,0): distance of the nearer isotropic line", e1.dist1.min(e1.dist2));
    Ok(r)
}

/// Budget for one quick suite run of the CLI.
pub const DETERMINISM_BUDGET_S: f64 = 300.0;

/// Runs `binary acceptance --quick --no-determinism` twice into fresh
/// directories and compares every output file byte for byte.
pub fn determinism(binary: &Path, seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(10, "determinism and runtime", Some(2.0 * DETERMINISM_BUDGET_S));
    let root = std::env::temp_dir().join(format!("horoflow-determinism-{}-{seed}", std::process::id()));
    let mut outputs = Vec::new();
    let mut slowest = 0.0f64;
    for run in 0..2 {
        let dir = root.join(format!("run{run}"));
        let start = Instant::now();
        let status = Command::new(binary)
            .args([
                "acceptance",
                "--quick",
                "--no-determinism",
                "--seed",
                &seed.to_string(),
                "--out",
            ])
            .arg(&dir)
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map_err(|e| Error::precondition(format!("cannot run {}: {e}", binary.display())))?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        // exit code 1 reports failing criteria, which is still a complete run
        r.check(Check::flag(
            format!("run {} completed", run + 1),
            matches!(status.code(), Some(0 | 1)),
        ));
        outputs.push(read_dir_files(&dir));
    }
    let _ = fs::remove_dir_all(&root);
    let identical = !outputs[0].is_empty() && outputs[0] == outputs[1];
    r.check(Check::flag("byte-identical outputs", identical));
    r.check(Check::new(
        "wall time of one quick run (s)",
        slowest,
        Cmp::Lt,
        DETERMINISM_BUDGET_S,
    ));
    r.info("files compared", outputs[0].len() as f64);
    Ok(r)
}

fn read_dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .filter_map(|e| Some((e.file_name().into_string().ok()?, fs::read(e.path()).ok()?)))
        .collect();
    files.sort();
    files
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_up_two_digits() {
        assert_eq!(round_up_2(4.305e-3), 4.4e-3);
        assert_eq!(round_up_2(0.0345), 0.035);
        assert_eq!(round_up_2(0.07), 0.07);
        assert_eq!(round_up_2(3.81e-7), 3.9e-7);
        assert_eq!(round_up_2(123.0), 130.0);
    }

    #[test]
    fn checks_compare() {
        assert!(Check::new("x", 1.0, Cmp::Lt, 2.0).pass);
        assert!(!Check::new("x", 2.0, Cmp::Lt, 2.0).pass);
        assert!(Check::new("x", 2.0, Cmp::Le, 2.0).pass);
        assert!(!Check::new("x", f64::NAN, Cmp::Ge, 0.0).pass);
        assert!(Check::flag("x", true).pass);
        let empty = CriterionReport::new(0, "empty", None);
        assert!(!empty.pass());
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(10, DEFAULT_SEED).is_err());
    }

    #[test]
    fn attractor_start_rule() {
        let runs = attractor_runs(DEFAULT_SEED, &ATTRACTOR_SCHEDULE[..2]).unwrap();
        // a trace that stops before 1024 never passes
        assert!(runs
            .iter()
            .all(|(off, _)| !attractor_start_passes(off, 1.0) || off.final_s() >= 1024.0));
    }
}
