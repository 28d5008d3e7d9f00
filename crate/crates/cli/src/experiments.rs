//! One function per subcommand. Each returns trace records, a results
//! object and a verdict; nothing is written here.

use horoflow::acceptance::{
    ATTRACTOR_BURN_IN, ATTRACTOR_EPS, ATTRACTOR_HORIZON, ATTRACTOR_RETURN_RADIUS, ATTRACTOR_SAMPLE_LEVEL,
    ATTRACTOR_SEPARATION, ATTRACTOR_STARTS, ATTRACTOR_THRESHOLD, ATTRACTOR_WORD_LEN, HISTOGRAM_BINS,
};
use horoflow::bundle::{
    attractor_starts, attractor_trace, directed_pairs, key_lemma_word, linear_orbit_experiment, minimal_set_sample,
    orbit_points, two_hyperbolic_find, AttractorParams, LinearPoint,
};
use horoflow::projective::{contraction_estimate, is_proximal, proj_act, sample_at_distance, DEFAULT_GAP_TOL};
use horoflow::representation::{
    check_cg1_heuristic, check_cg2, check_condition_n, h1_membership, lorentz_dual, lorentz_embed, lorentz_q,
    projective_limit_set_sample, veronese,
};
use horoflow::{delta, BoundaryPoint, FreeWord, IsometryClass, LimitMap, ProjPoint, Psl2Element, Representation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Params, StartKind};
use crate::Failure;

pub const EXPERIMENTS: [&str; 11] = [
    "limit-set",
    "proj-limit-set",
    "minimal-set",
    "check-cg",
    "check-n",
    "contraction",
    "attractor",
    "orbit-closure",
    "two-hyperbolic",
    "key-lemma",
    "lorentz",
];

/// On-graph starts are invariant when every recorded distance stays below this.
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Final key-lemma distance counted as convergence.
pub const KEY_LEMMA_CONVERGED: f64 = 1e-6;
/// Default equivariance tolerance of `check-n`.
pub const CONDITION_N_TOL: f64 = 1e-10;

pub struct Artifacts {
    pub records: Vec<Value>,
    pub thresholds: Value,
    pub results: Value,
    pub verdict: String,
}

impl Artifacts {
    fn new(records: Vec<Value>, results: Value, verdict: impl Into<String>) -> Self {
        Artifacts {
            records,
            thresholds: json!({}),
            results,
            verdict: verdict.into(),
        }
    }

    fn with_thresholds(mut self, thresholds: Value) -> Self {
        self.thresholds = thresholds;
        self
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts, Failure> {
    let ctx = Ctx { cfg, p: &cfg.params };
    match cfg.experiment.as_str() {
        "limit-set" => ctx.limit_set(),
        "proj-limit-set" => ctx.proj_limit_set(),
        "minimal-set" => ctx.minimal_set(),
        "check-cg" => ctx.check_cg(),
        "check-n" => ctx.check_n(),
        "contraction" => ctx.contraction(),
        "attractor" => ctx.attractor(),
        "orbit-closure" => ctx.orbit_closure(),
        "two-hyperbolic" => ctx.two_hyperbolic(),
        "key-lemma" => ctx.key_lemma(),
        "lorentz" => ctx.lorentz(),
        other => Err(Failure::config(format!(
            "unknown experiment {other:?}; expected one of {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    p: &'a Params,
}

fn boundary_record(xi: &BoundaryPoint) -> Value {
    let (cx, cy) = xi.to_circle();
    json!({"x": xi.as_real(), "angle": xi.angle(), "circle": [cx, cy]})
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

impl Ctx<'_> {
    fn require<T: Clone>(&self, field: &Option<T>, name: &str) -> Result<T, Failure> {
        Params::require(field, name, &self.cfg.experiment)
    }

    fn gap_tol(&self) -> f64 {
        self.p.gap_tol.unwrap_or(DEFAULT_GAP_TOL)
    }

    fn representation(&self) -> Result<Representation, Failure> {
        self.cfg.build_representation(self.cfg.build_group()?)
    }

    fn word(&self) -> Result<FreeWord, Failure> {
        let letters = self.require(&self.p.word, "word")?;
        FreeWord::from_letters(&letters).map_err(|e| Failure::config(format!("params.word: {e}")))
    }

    fn limit_map(&self, rho: &Representation) -> Result<LimitMap, Failure> {
        let n = self.cfg.veronese_degree().ok_or_else(|| {
            Failure::config(format!(
                "experiment {} needs a sym_power representation, whose limit map is known",
                self.cfg.experiment
            ))
        })?;
        debug_assert_eq!(n, rho.dim());
        Ok(LimitMap::veronese(n))
    }

    fn limit_set(&self) -> Result<Artifacts, Failure> {
        let level = self.require(&self.p.level, "level")?;
        let ls = self.cfg.build_group()?.limit_set_sample(level)?;
        let records = ls
            .points
            .iter()
            .zip(&ls.words)
            .map(|(xi, w)| merge(json!({"word": w.to_string()}), boundary_record(xi)))
            .collect();
        let results = json!({"level": level, "count": ls.len()});
        Ok(Artifacts::new(records, results, "sampled"))
    }

    fn proj_limit_set(&self) -> Result<Artifacts, Failure> {
        let level = self.require(&self.p.level, "level")?;
        let pls = projective_limit_set_sample(&self.representation()?, level, self.gap_tol())?;
        let records = pls
            .points
            .iter()
            .zip(&pls.words)
            .map(|(chi, w)| json!({"word": w.to_string(), "chi": chi}))
            .collect();
        let results = json!({"level": level, "count": pls.len()});
        Ok(Artifacts::new(records, results, "sampled"))
    }

    fn minimal_set(&self) -> Result<Artifacts, Failure> {
        let level = self.require(&self.p.level, "level")?;
        let rho = self.representation()?;
        let s = minimal_set_sample(&rho, level, self.gap_tol())?;
        let records = s
            .pairs
            .iter()
            .zip(&s.words)
            .map(|(p, w)| {
                let (x, y) = p.xi.direction();
                json!({"word": w.to_string(), "x": p.xi.as_real(), "xi_angle": p.xi.angle(), "xi": [x, y], "chi": p.chi})
            })
            .collect();
        let mut results = json!({
            "level": level,
            "count": s.len(),
            "xi_marginal": s.xi_marginal().len(),
            "chi_marginal": s.chi_marginal().len(),
        });
        if let Some(n) = self.cfg.veronese_degree() {
            let graph = s
                .pairs
                .iter()
                .map(|p| delta(&p.chi, &veronese(&p.xi, n)))
                .fold(0.0, f64::max);
            results["graph_distance"] = json!(graph);
        }
        if let Some(sl) = self.p.sample_level {
            let grid = minimal_set_sample(&rho, sl, self.gap_tol())?.marginal_grid();
            results["sample_level"] = json!(sl);
            results["grid_to_sample"] = json!(directed_pairs(&grid, &s.pairs)?);
        }
        Ok(Artifacts::new(records, results, "sampled"))
    }

    fn check_cg(&self) -> Result<Artifacts, Failure> {
        let level = self.require(&self.p.level, "level")?;
        let trials = self.require(&self.p.trials, "trials")?;
        let seed = self.require(&self.p.seed, "seed")?;
        let rho = self.representation()?;
        let cg2 = check_cg2(&rho, level, self.gap_tol())?;
        let cg1 = check_cg1_heuristic(&rho, level, trials, seed)?;
        let records = cg1.dimensions.iter().map(to_value).collect();
        let cg2_value = match &cg2 {
            Some((w, pd)) => json!({"satisfied": true, "word": w.to_string(), "lambda": pd.lambda, "gap": pd.gap}),
            None => json!({"satisfied": false}),
        };
        let verdict = match (cg2.is_some(), cg1.invariant_subspace_found) {
            (true, false) => "CG2 holds; no invariant subspace found",
            (true, true) => "CG2 holds; CG1 fails",
            (false, false) => "CG2 fails; no invariant subspace found",
            (false, true) => "CG2 fails; CG1 fails",
        };
        let results = json!({"cg2": cg2_value, "cg1": to_value(&cg1)});
        Ok(Artifacts::new(records, results, verdict)
            .with_thresholds(json!({"gap_tol": self.gap_tol(), "cg1_tolerance": cg1.tolerance})))
    }

    fn check_n(&self) -> Result<Artifacts, Failure> {
        let level = self.require(&self.p.level, "level")?;
        let tol = self.p.threshold.unwrap_or(CONDITION_N_TOL);
        let rho = self.representation()?;
        let phi = self.limit_map(&rho)?;
        let ls = rho.group().limit_set_sample(level)?;
        let residual = check_condition_n(&rho, &phi, &ls)?;
        let records = vec![json!({"level": level, "points": ls.len(), "residual": residual})];
        let verdict = if residual < tol { "satisfied" } else { "violated" };
        let results = json!({"level": level, "limit_map": phi.name(), "residual": residual});
        Ok(Artifacts::new(records, results, verdict).with_thresholds(json!({"residual": tol})))
    }

    fn contraction(&self) -> Result<Artifacts, Failure> {
        let w = self.word()?;
        let radius = self.require(&self.p.radius, "radius")?;
        let seed = self.require(&self.p.seed, "seed")?;
        let samples = self.p.samples.unwrap_or(2000);
        let rho = self.representation()?;
        let a = rho.evaluate(&w)?;
        let pd = is_proximal(&a, self.gap_tol())?
            .ok_or_else(|| Failure::from(horoflow::Error::Precondition(format!("rho({w}) is not proximal"))))?;
        let Some(c) = contraction_estimate(&pd, &a, radius, samples, seed)? else {
            let results = json!({"word": w.to_string(), "lambda": pd.lambda, "gap": pd.gap, "contraction": null});
            return Ok(Artifacts::new(Vec::new(), results, "none"));
        };
        // worst ratio delta(A^(Nk) chi, chi_A) / (c^k delta(chi, chi_A)) per k
        let step = a.pow(c.power);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut worst = [0.0f64; 10];
        for _ in 0..200 {
            let x0 = sample_at_distance(&pd.chi, radius * rng.gen::<f64>(), &mut rng);
            let d0 = delta(&x0, &pd.chi);
            if d0 == 0.0 {
                continue;
            }
            let mut x = x0;
            for (k, w) in worst.iter_mut().enumerate() {
                x = proj_act(&step, &x)?;
                *w = w.max(delta(&x, &pd.chi) / (c.constant.powi(k as i32 + 1) * d0));
            }
        }
        let records = worst
            .iter()
            .enumerate()
            .map(|(k, r)| json!({"k": k + 1, "max_ratio": r}))
            .collect();
        let results = json!({
            "word": w.to_string(),
            "lambda": pd.lambda,
            "gap": pd.gap,
            "power": c.power,
            "constant": c.constant,
            "max_ratio": worst.iter().copied().fold(0.0, f64::max),
        });
        Ok(Artifacts::new(records, results, "contracting").with_thresholds(json!({"radius": radius})))
    }

    fn attractor(&self) -> Result<Artifacts, Failure> {
        let schedule = self.require(&self.p.schedule, "schedule")?;
        let seed = self.require(&self.p.seed, "seed")?;
        let starts = self.p.starts.unwrap_or(ATTRACTOR_STARTS);
        let kind = self.p.start.unwrap_or_default();
        let threshold = self.p.threshold.unwrap_or(ATTRACTOR_THRESHOLD);
        let burn_in = self.p.burn_in.unwrap_or(ATTRACTOR_BURN_IN);
        let level = self.p.level.unwrap_or(ATTRACTOR_SAMPLE_LEVEL);
        let params = AttractorParams {
            eps: self.p.eps.unwrap_or(ATTRACTOR_EPS),
            return_radius: Some(self.p.return_radius.unwrap_or(ATTRACTOR_RETURN_RADIUS)),
            horizon: self.p.horizon.unwrap_or(ATTRACTOR_HORIZON),
            ..AttractorParams::default()
        };
        let rho = self.representation()?;
        let phi = self.limit_map(&rho)?;
        let ls = rho.group().limit_set_sample(level)?;
        let pls = projective_limit_set_sample(&rho, level, self.gap_tol())?;
        let last = *schedule
            .last()
            .ok_or_else(|| Failure::config("params.schedule is empty"))?;
        let mut records = Vec::new();
        let mut per_start = Vec::new();
        let (mut passing, mut max_dist) = (0usize, 0.0f64);
        let pairs = attractor_starts(&rho, &phi, starts, ATTRACTOR_WORD_LEN, ATTRACTOR_SEPARATION, seed)?;
        for (i, (off, on)) in pairs.iter().enumerate() {
            let y0 = if kind == StartKind::OffGraph { off } else { on };
            let tr = attractor_trace(y0, &schedule, &rho, &phi, &ls, &pls, &params)?;
            for st in &tr.steps {
                records.push(merge(json!({"start": i}), to_value(st)));
            }
            let pass =
                tr.complete && tr.final_s() >= last && tr.final_dist() < threshold && tr.decreasing_after(burn_in);
            passing += usize::from(pass);
            max_dist = max_dist.max(tr.max_dist());
            per_start.push(json!({
                "start": i,
                "complete": tr.complete,
                "final_s": tr.final_s(),
                "final_dist": tr.final_dist(),
                "decreasing": tr.decreasing_after(burn_in),
                "pass": pass,
            }));
        }
        let (verdict, thresholds) = match kind {
            StartKind::OnGraph => {
                let v = if max_dist < INVARIANCE_TOL {
                    "invariant"
                } else {
                    "drift"
                };
                (v, json!({"invariance": INVARIANCE_TOL}))
            }
            StartKind::OffGraph => {
                // at least 95% of starts
                let v = if 20 * passing >= 19 * starts {
                    "attracted"
                } else {
                    "not attracted"
                };
                (
                    v,
                    json!({"final_dist": threshold, "burn_in": burn_in, "required_fraction": 0.95}),
                )
            }
        };
        let results = json!({
            "start": kind,
            "starts": starts,
            "passing": passing,
            "max_dist": max_dist,
            "params": to_value(&params),
            "per_start": per_start,
        });
        Ok(Artifacts::new(records, results, verdict).with_thresholds(thresholds))
    }

    fn orbit_closure(&self) -> Result<Artifacts, Failure> {
        let level = self.require(&self.p.level, "level")?;
        let rho = self.representation()?;
        if self.p.linear.unwrap_or(false) {
            let bins = self.p.bins.unwrap_or(HISTOGRAM_BINS);
            let g0 = rho.group().generators()[0];
            let IsometryClass::Hyperbolic { lambda, fix_plus, .. } = g0.classify() else {
                return Err(Failure::config("the first generator is not hyperbolic"));
            };
            let lambda_ref = self.p.lambda_ref.unwrap_or(lambda);
            let phi = self.limit_map(&rho)?;
            let (x, y) = fix_plus.direction();
            let start = LinearPoint::new([x, y], phi.eval(&fix_plus))?;
            let h = linear_orbit_experiment(&start, &rho, level, bins, lambda_ref)?;
            let records = h
                .histogram
                .iter()
                .enumerate()
                .map(|(b, c)| json!({"bin": b, "count": c}))
                .collect();
            let verdict = if h.equidistributed {
                "equidistributed"
            } else {
                "not equidistributed"
            };
            return Ok(
                Artifacts::new(records, to_value(&h), verdict).with_thresholds(json!({"max_deviation": h.bound}))
            );
        }
        let sample_level = self.require(&self.p.sample_level, "sample_level")?;
        let sample = minimal_set_sample(&rho, sample_level, self.gap_tol())?;
        let index = self.p.start_index.unwrap_or(0);
        let start = sample.pairs.get(index).ok_or_else(|| {
            Failure::config(format!(
                "params.start_index {index} exceeds the {} sampled pairs",
                sample.len()
            ))
        })?;
        let orbit = orbit_points(start, &rho, level)?;
        let d = directed_pairs(&sample.pairs, &orbit)?;
        let records = orbit
            .iter()
            .map(|p| json!({"x": p.xi.as_real(), "xi_angle": p.xi.angle(), "chi": p.chi}))
            .collect();
        let results = json!({
            "level": level,
            "sample_level": sample_level,
            "start_word": sample.words[index].to_string(),
            "orbit_size": orbit.len(),
            "sample_size": sample.len(),
            "sample_to_orbit": d,
        });
        Ok(Artifacts::new(records, results, "diagnostic"))
    }

    fn two_hyperbolic(&self) -> Result<Artifacts, Failure> {
        let level = self.require(&self.p.level, "level")?;
        let q = self.require(&self.p.q, "q")?;
        let rho = self.representation()?;
        let found = two_hyperbolic_find(rho.group(), &rho, level, q, self.gap_tol())?;
        let (records, verdict) = match &found {
            Some(f) => (vec![to_value(f)], "found"),
            None => (Vec::new(), "absent"),
        };
        let results = json!({"level": level, "q": q, "pair": found.as_ref().map(to_value)});
        Ok(Artifacts::new(records, results, verdict))
    }

    fn key_lemma(&self) -> Result<Artifacts, Failure> {
        let w = self.word()?;
        let k = self.require(&self.p.k, "k")?;
        let xi = self.require(&self.p.xi, "xi")?.point();
        let rho = self.representation()?;
        let chi = match &self.p.chi {
            Some(v) => ProjPoint::from_slice(v).map_err(|e| Failure::config(format!("params.chi: {e}")))?,
            None => ProjPoint::from_slice(&vec![1.0; rho.order()])?,
        };
        if chi.dim() != rho.order() {
            return Err(Failure::config(format!(
                "params.chi has {} coordinates, the representation acts on R^{}",
                chi.dim(),
                rho.order()
            )));
        }
        let tr = key_lemma_word(&rho, &w, &xi, &chi, k, self.gap_tol())?;
        let records = tr.steps.iter().map(to_value).collect();
        let final_dist = tr.steps.last().map_or(f64::NAN, |s| s.dist);
        let verdict = if final_dist < KEY_LEMMA_CONVERGED {
            "converged"
        } else {
            "not converged"
        };
        let results = merge(json!({"word": w.to_string(), "final_dist": final_dist}), to_value(&tr));
        Ok(Artifacts::new(records, results, verdict).with_thresholds(json!({"final_dist": KEY_LEMMA_CONVERGED})))
    }

    fn lorentz(&self) -> Result<Artifacts, Failure> {
        let seed = self.require(&self.p.seed, "seed")?;
        let samples = self.p.samples.unwrap_or(10_000);
        let level = self.p.level.unwrap_or(5);
        let eps = self.p.eps.unwrap_or(1e-6);
        let ls = self.cfg.build_group()?.limit_set_sample(level)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let u = Psl2Element::rotation(rng.gen_range(0.0..std::f64::consts::TAU))
                .compose(&Psl2Element::diagonal_flow(rng.gen_range(-3.0..3.0)))
                .compose(&Psl2Element::unipotent(rng.gen_range(-3.0..3.0)));
            let m = lorentz_embed(&u);
            let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let y: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| m.matrix()[(i, j)] * x[j]).sum());
            let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
            worst = worst.max((lorentz_q(&y) - lorentz_q(&x)).abs() / scale);
        }
        let [i, j] = self.p.limit_pair.unwrap_or([0, ls.len() / 2]);
        let (Some(p), Some(q)) = (ls.points.get(i), ls.points.get(j)) else {
            return Err(Failure::config(format!(
                "params.limit_pair out of range for {} sampled points",
                ls.len()
            )));
        };
        let dual = lorentz_dual(p, q)?;
        let mut records = vec![merge(
            json!({"kind": "dual", "vector": dual}),
            to_value(&h1_membership(&dual, &ls, eps)?),
        )];
        if let Some(x) = self.p.x {
            records.push(merge(
                json!({"kind": "given", "vector": x}),
                to_value(&h1_membership(&x, &ls, eps)?),
            ));
        }
        let dual_member = records[0]["member"].as_bool() == Some(true);
        let verdict = if dual_member && worst < 1e-10 {
            "consistent"
        } else {
            "inconsistent"
        };
        let results = json!({
            "level": level,
            "samples": samples,
            "q_residual": worst,
            "dual_member": dual_member,
            "given_member": records.get(1).map(|r| r["member"].clone()),
        });
        Ok(Artifacts::new(records, results, verdict)
            .with_thresholds(json!({"q_residual": 1e-10, "membership_eps": eps})))
    }
}
