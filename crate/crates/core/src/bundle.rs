//! The flat projective bundle `Y = Gamma_rho \ (PSL(2,R) x P^n)`, worked
//! upstairs on fundamental-domain representatives.
//!
//! A bundle point is a pair `(u, chi)`. Moving the base out of the Schottky
//! fundamental domain and back by a deck word `gamma` moves the fiber by
//! `rho(gamma)`; this is the only coupling between the two factors.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuchsian::words::is_cyclically_reduced;
use crate::fuchsian::{letter_from_rank, scan_words, FreeWord, Letter, LimitSetSample, SchottkyGroup};
use crate::hausdorff::DedupIndex;
use crate::hyperbolic::{BoundaryPoint, HPoint, IsometryClass, Psl2Element};
use crate::projective::{delta, dominant_direction, is_proximal, proj_act, ProjMat, ProjPoint};
use crate::representation::{LimitMap, ProjLimitSetSample, Representation};
use crate::stats::fit_slope;

/// Resolution at which sampled pairs are merged.
pub const PAIR_DEDUP_RESOLUTION: f64 = 1e-10;
/// Horocycle step taken near the disks between two reductions in
/// [`attractor_trace`].
pub const DEFAULT_MAX_STEP: f64 = 1.0;
/// `xi` closer than this to the repelling fixed point is rejected by the key
/// lemma.
pub const KEY_LEMMA_XI_TOL: f64 = 1e-12;
/// `chi` closer than this to the repelling hyperplane is rejected by the key
/// lemma.
pub const KEY_LEMMA_CHI_TOL: f64 = 1e-6;

/// A point of `PSL(2,R) x P^n` with the deck word accumulated by reductions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundlePoint {
    pub u: Psl2Element,
    pub chi: ProjPoint,
    pub deck: FreeWord,
}

impl BundlePoint {
    pub fn new(u: Psl2Element, chi: ProjPoint) -> Self {
        BundlePoint {
            u,
            chi,
            deck: FreeWord::identity(),
        }
    }

    /// Right-translates the base by `g` and reduces, transporting the fiber
    /// by the image of the reduction word.
    pub fn right_act(&self, g: &Psl2Element, rho: &Representation) -> Result<BundlePoint> {
        let moved = self.u.compose(g);
        let red = rho.group().reduce(&moved)?;
        let chi = if red.word.is_empty() {
            self.chi.clone()
        } else {
            proj_act(&rho.evaluate(&red.word)?, &self.chi)?
        };
        Ok(BundlePoint {
            u: red.reduced,
            chi,
            deck: red.word.concat(&self.deck),
        })
    }

    /// Left action of the deck transformation `(gamma, rho(gamma))`, without
    /// reduction.
    pub fn deck_act(&self, w: &FreeWord, rho: &Representation) -> Result<BundlePoint> {
        let g = rho.group().evaluate(w)?;
        Ok(BundlePoint {
            u: g.compose(&self.u),
            chi: proj_act(&rho.evaluate(w)?, &self.chi)?,
            deck: w.concat(&self.deck),
        })
    }

    /// `delta(chi, phi(u(+inf)))`: zero exactly on the graph of the section.
    pub fn graph_distance(&self, phi: &LimitMap) -> f64 {
        delta(&self.chi, &phi.eval(&self.u.endpoint_plus()))
    }

    pub fn geodesic(&self, t: f64, rho: &Representation) -> Result<BundlePoint> {
        self.right_act(&Psl2Element::diagonal_flow(t), rho)
    }

    pub fn affine(&self, a: f64, b: f64, rho: &Representation) -> Result<BundlePoint> {
        let g = Psl2Element::identity().affine_act(a, b)?;
        self.right_act(&g, rho)
    }
}

/// Membership in the sampled `Omega_prox`: the forward endpoint is near the
/// limit set and the fiber near the projective limit set.
pub fn in_omega_prox(y: &BundlePoint, ls: &LimitSetSample, pls: &ProjLimitSetSample, eps: f64) -> Result<bool> {
    Ok(ls.distance_to(&y.u.endpoint_plus())? <= eps && pls.distance_to(&y.chi)? <= eps)
}

/// A point of `P^1 x P^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedBoundaryPoint {
    pub xi: BoundaryPoint,
    pub chi: ProjPoint,
}

impl PairedBoundaryPoint {
    /// Max of the sine distances on the two factors.
    pub fn dist(&self, other: &PairedBoundaryPoint) -> f64 {
        self.xi.dist(&other.xi).max(delta(&self.chi, &other.chi))
    }

    pub fn act(&self, g: &Psl2Element, a: &ProjMat) -> Result<PairedBoundaryPoint> {
        Ok(PairedBoundaryPoint {
            xi: g.mobius_boundary(&self.xi),
            chi: proj_act(a, &self.chi)?,
        })
    }
}

/// A point of `E x P^n` with `E = (R^2 \ 0) / +-1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearPoint {
    pub v: [f64; 2],
    pub chi: ProjPoint,
}

impl LinearPoint {
    pub fn new(v: [f64; 2], chi: ProjPoint) -> Result<Self> {
        if !(v[0].is_finite() && v[1].is_finite()) || (v[0] == 0.0 && v[1] == 0.0) {
            return Err(Error::invalid("a linear point needs a nonzero finite vector"));
        }
        let flip = if v[0] != 0.0 { v[0] < 0.0 } else { v[1] < 0.0 };
        let v = if flip { [-v[0], -v[1]] } else { v };
        Ok(LinearPoint { v, chi })
    }

    pub fn direction(&self) -> BoundaryPoint {
        BoundaryPoint::from_direction(self.v[0], self.v[1]).expect("nonzero vector")
    }

    pub fn radius(&self) -> f64 {
        self.v[0].hypot(self.v[1])
    }

    pub fn scaled(&self, c: f64) -> Result<LinearPoint> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("scaling factor must be positive, got {c}")));
        }
        LinearPoint::new([c * self.v[0], c * self.v[1]], self.chi.clone())
    }

    pub fn act(&self, g: &Psl2Element, a: &ProjMat) -> Result<LinearPoint> {
        let [p, q, r, s] = g.entries();
        let [x, y] = self.v;
        LinearPoint::new([p * x + q * y, r * x + s * y], proj_act(a, &self.chi)?)
    }
}

/// Sampled minimal set: pairs `(gamma^+, chi_rho(gamma))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalSetSample {
    pub level: usize,
    pub pairs: Vec<PairedBoundaryPoint>,
    pub words: Vec<FreeWord>,
}

impl MinimalSetSample {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xi_marginal(&self) -> Vec<BoundaryPoint> {
        let mut out: Vec<BoundaryPoint> = Vec::new();
        let mut index = DedupIndex::new(2.0 * PAIR_DEDUP_RESOLUTION);
        for p in &self.pairs {
            let id = out.len();
            if index.insert_if_new(p.xi.direction().1, id, |j| out[j].dist(&p.xi) <= PAIR_DEDUP_RESOLUTION) {
                out.push(p.xi);
            }
        }
        out
    }

    pub fn chi_marginal(&self) -> Vec<ProjPoint> {
        let mut out: Vec<ProjPoint> = Vec::new();
        let mut index = DedupIndex::new(2.0 * PAIR_DEDUP_RESOLUTION);
        for p in &self.pairs {
            let id = out.len();
            if index.insert_if_new(p.chi.as_slice()[0].abs(), id, |j| {
                delta(&out[j], &p.chi) <= PAIR_DEDUP_RESOLUTION
            }) {
                out.push(p.chi.clone());
            }
        }
        out
    }

    /// The product of the two marginals.
    pub fn marginal_grid(&self) -> Vec<PairedBoundaryPoint> {
        let chis = self.chi_marginal();
        self.xi_marginal()
            .into_iter()
            .flat_map(|xi| chis.iter().map(move |chi| PairedBoundaryPoint { xi, chi: chi.clone() }))
            .collect()
    }
}

/// Visits `(gamma^+, chi_rho(gamma))` for every cyclically reduced hyperbolic
/// word of length `<= max_len` with proximal image, without deduplication.
pub fn scan_minimal_pairs(
    rho: &Representation,
    max_len: usize,
    gap_tol: f64,
    mut visit: impl FnMut(&[Letter], PairedBoundaryPoint),
) -> Result<()> {
    if max_len == 0 {
        return Err(Error::invalid("minimal-set sampling needs word length >= 1"));
    }
    let g = rho.group();
    let mut failure = None;
    scan_words(
        g.rank(),
        max_len,
        (Psl2Element::identity(), ProjMat::identity(rho.order())),
        |(u, a), l| (*u * g.generator(l), a.mul(rho.image(l))),
        |letters, (u, a)| {
            if letters.is_empty() || failure.is_some() || !is_cyclically_reduced(letters) {
                return;
            }
            let IsometryClass::Hyperbolic { fix_plus, .. } = u.classify() else {
                return;
            };
            match dominant_direction(a, gap_tol) {
                Ok(Some((_, chi, _))) => visit(letters, PairedBoundaryPoint { xi: fix_plus, chi }),
                Ok(None) => {}
                Err(e) => failure = Some(e),
            }
        },
    );
    failure.map_or(Ok(()), Err)
}

pub fn minimal_set_sample(rho: &Representation, max_len: usize, gap_tol: f64) -> Result<MinimalSetSample> {
    let mut out = MinimalSetSample {
        level: max_len,
        pairs: Vec::new(),
        words: Vec::new(),
    };
    let mut index = DedupIndex::new(2.0 * PAIR_DEDUP_RESOLUTION);
    scan_minimal_pairs(rho, max_len, gap_tol, |letters, p| {
        let id = out.pairs.len();
        let pairs = &out.pairs;
        if index.insert_if_new(p.xi.direction().1, id, |j| pairs[j].dist(&p) <= PAIR_DEDUP_RESOLUTION) {
            out.pairs.push(p);
            out.words
                .push(FreeWord::from_letters(letters).expect("reduced letters"));
        }
    })?;
    Ok(out)
}

/// Nearest-neighbour index for the max-metric on `P^1 x P^n`.
///
/// Cells are keyed by the angle of `xi` (on which the sine metric is at
/// least `2/pi` times the circular angle difference) and by `|chi_0|`
/// (which moves by at most `sqrt 2` times the sine distance).
pub struct PairIndex<'a> {
    points: &'a [PairedBoundaryPoint],
    nt: usize,
    nk: usize,
    cells: Vec<Vec<u32>>,
}

impl<'a> PairIndex<'a> {
    pub fn new(points: &'a [PairedBoundaryPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("cannot index an empty point set"));
        }
        if points.len() > u32::MAX as usize {
            return Err(Error::invalid("too many points to index"));
        }
        let side = ((points.len() as f64 / 4.0).sqrt().ceil() as usize).clamp(1, 1024);
        let (nt, nk) = (side, side);
        let mut cells = vec![Vec::new(); nt * nk];
        let mut index = PairIndex {
            points,
            nt,
            nk,
            cells: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let (ct, ck) = index.cell(p);
            cells[ct * nk + ck].push(i as u32);
        }
        index.cells = cells;
        Ok(index)
    }

    fn cell(&self, p: &PairedBoundaryPoint) -> (usize, usize) {
        let t = p.xi.angle() / PI;
        let k = p.chi.as_slice()[0].abs();
        let ct = ((t * self.nt as f64) as usize).min(self.nt - 1);
        let ck = ((k * self.nk as f64) as usize).min(self.nk - 1);
        (ct, ck)
    }

    /// Distance from `q` to the nearest indexed point.
    pub fn nearest(&self, q: &PairedBoundaryPoint) -> f64 {
        let (ct, ck) = self.cell(q);
        let (nt, nk) = (self.nt as isize, self.nk as isize);
        let (ct, ck) = (ct as isize, ck as isize);
        // circular theta offsets -a..=b cover every residue once
        let a = (nt - 1) / 2;
        let b = nt - 1 - a;
        let ht = PI / self.nt as f64;
        let hk = 1.0 / self.nk as f64;
        let k_reach = ck.max(nk - 1 - ck);
        let mut best = f64::INFINITY;
        let mut r: isize = 0;
        loop {
            let (t_lo, t_hi) = (-r.min(a), r.min(b));
            let (k_lo, k_hi) = ((-r).max(-ck), r.min(nk - 1 - ck));
            for dt in t_lo..=t_hi {
                let on_t_edge = dt.abs() == r;
                let t_cell = (ct + dt).rem_euclid(nt) as usize;
                for dk in k_lo..=k_hi {
                    if !on_t_edge && dk.abs() != r {
                        continue;
                    }
                    let cell = &self.cells[t_cell * self.nk + (ck + dk) as usize];
                    for &i in cell {
                        best = best.min(self.points[i as usize].dist(q));
                    }
                }
            }
            // unvisited points are r full cells away in theta or in k
            let t_bound = if r < a.max(b) {
                (2.0 / PI) * (r as f64 * ht).min(FRAC_PI_2)
            } else {
                f64::INFINITY
            };
            let k_bound = if r < k_reach {
                r as f64 * hk / SQRT_2
            } else {
                f64::INFINITY
            };
            let bound = t_bound.min(k_bound);
            if bound.is_infinite() || bound >= best {
                return best;
            }
            r += 1;
        }
    }
}

/// One-sided Hausdorff distance `max_{p in from} min_{q in to} d(p, q)` for
/// the max-metric on `P^1 x P^n`.
pub fn directed_pairs(from: &[PairedBoundaryPoint], to: &[PairedBoundaryPoint]) -> Result<f64> {
    if from.is_empty() {
        return Err(Error::invalid("Hausdorff distance of an empty set"));
    }
    let index = PairIndex::new(to)?;
    Ok(from.iter().map(|p| index.nearest(p)).fold(0.0, f64::max))
}

/// `Phi(u) = (u, phi(u(+inf)))`, defined over the non-wandering set only.
pub fn section_phi(u: &Psl2Element, phi: &LimitMap, ls: &LimitSetSample, eps: f64) -> Result<BundlePoint> {
    let xi = u.endpoint_plus();
    let d = ls.distance_to(&xi)?;
    if d > eps {
        return Err(Error::precondition(format!(
            "forward endpoint {xi} is {d:e} from the sampled limit set (tolerance {eps:e})"
        )));
    }
    Ok(BundlePoint::new(*u, phi.eval(&xi)))
}

/// `h_s` on the bundle: flow the base, reduce, transport the fiber.
pub fn foliated_horocycle(y: &BundlePoint, s: f64, rho: &Representation) -> Result<BundlePoint> {
    if !s.is_finite() {
        return Err(Error::invalid(format!("horocycle time must be finite, got {s}")));
    }
    y.right_act(&Psl2Element::unipotent(s), rho)
}

/// Knobs of [`attractor_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AttractorParams {
    /// Tolerance of the `Omega_prox` membership test on the start.
    pub eps: f64,
    /// Largest horocycle step between two reductions.
    pub max_step: f64,
    /// Records are taken at the first time at or after each schedule point
    /// at which the reduced base point lies within this hyperbolic distance
    /// of `i`. `None` records exactly at the schedule points.
    pub return_radius: Option<f64>,
    /// Flow time after which the search for a return is abandoned.
    pub horizon: f64,
}

impl Default for AttractorParams {
    fn default() -> Self {
        AttractorParams {
            eps: 1e-6,
            max_step: DEFAULT_MAX_STEP,
            return_radius: None,
            horizon: f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AttractorStep {
    /// Schedule point this record belongs to.
    pub target: f64,
    pub s: f64,
    pub dist: f64,
    /// Hyperbolic distance from `i` to the reduced base point.
    pub depth: f64,
    pub deck_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttractorTrace {
    pub params: AttractorParams,
    pub steps: Vec<AttractorStep>,
    /// Whether every schedule point produced a record before the horizon.
    pub complete: bool,
    pub end: BundlePoint,
}

impl AttractorTrace {
    pub fn final_dist(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.dist)
    }

    pub fn final_s(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.s)
    }

    pub fn max_dist(&self) -> f64 {
        self.steps.iter().map(|s| s.dist).fold(0.0, f64::max)
    }

    /// Whether the distances strictly decrease after the first `burn_in`
    /// records.
    pub fn decreasing_after(&self, burn_in: usize) -> bool {
        let tail = &self.steps[burn_in.min(self.steps.len())..];
        tail.windows(2).all(|w| w[1].dist < w[0].dist)
    }

    /// Slope of `ln dist` against `ln s` over records with `s >= s_min`.
    pub fn decay_exponent(&self, s_min: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .steps
            .iter()
            .filter(|st| st.s >= s_min && st.s > 0.0 && st.dist > 0.0)
            .map(|st| (st.s.ln(), st.dist.ln()))
            .collect();
        if pts.len() < 2 {
            f64::NAN
        } else {
            fit_slope(&pts)
        }
    }
}

/// Follows `h_s(y0)` along an increasing schedule, recording the distance of
/// the fiber to the graph of `phi`.
///
/// The base advances in sub-steps, reducing after each, so that every
/// reduction word stays short: `max_step` near the disks, longer steps where
/// the base point is provably far from them. Horocycles based at limit
/// points spend most of their time deep in the funnels, where the reduced
/// representative is unbounded; with `return_radius` set, each record is
/// taken at the next return of the base to a fixed compact set instead.
pub fn attractor_trace(
    y0: &BundlePoint,
    schedule: &[f64],
    rho: &Representation,
    phi: &LimitMap,
    ls: &LimitSetSample,
    pls: &ProjLimitSetSample,
    params: &AttractorParams,
) -> Result<AttractorTrace> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty schedule"));
    }
    if schedule.iter().any(|s| !s.is_finite()) || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("schedule must be finite and strictly increasing"));
    }
    if schedule[0] < 0.0 {
        return Err(Error::invalid("schedule must start at s >= 0"));
    }
    let max_step = params.max_step;
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::invalid(format!("max_step must be positive, got {max_step}")));
    }
    if params.return_radius.is_some_and(|r| !(r.is_finite() && r > 0.0)) {
        return Err(Error::invalid("return radius must be positive"));
    }
    if !(params.horizon >= schedule[schedule.len() - 1]) {
        return Err(Error::invalid("horizon must not precede the last schedule point"));
    }
    let eps = params.eps;
    let d_base = ls.distance_to(&y0.u.endpoint_plus())?;
    if d_base > eps {
        return Err(Error::precondition(format!(
            "start is not in Omega_prox: endpoint is {d_base:e} from the limit set (tolerance {eps:e})"
        )));
    }
    let d_fiber = pls.distance_to(&y0.chi)?;
    if d_fiber > eps {
        return Err(Error::precondition(format!(
            "start is not in Omega_prox: fiber is {d_fiber:e} from the projective limit set (tolerance {eps:e})"
        )));
    }
    let g = rho.group();
    let origin = HPoint::i();
    let mut u = y0.u;
    let mut deck = FreeWord::identity();
    let mut now = 0.0;
    let advance = |u: &mut Psl2Element, deck: &mut FreeWord, h: f64| -> Result<()> {
        let red = g.reduce(&u.compose(&Psl2Element::unipotent(h)))?;
        *u = red.reduced;
        *deck = red.word.concat(deck);
        Ok(())
    };
    let mut steps: Vec<AttractorStep> = Vec::with_capacity(schedule.len());
    let mut complete = true;
    // A horocycle step of length h moves the base point by 2 asinh(h/2), so
    // a step of 2 sinh(0.45 c) stays within 0.9 c. Far from the disks this
    // allows long steps that need no reduction; near them steps are max_step.
    let clear_step = |clearance: f64| max_step.max(2.0 * (0.45 * clearance).sinh());
    for &target in schedule {
        while now < target {
            let h = clear_step(g.distance_to_disks(&u.basepoint())).min(target - now);
            advance(&mut u, &mut deck, h)?;
            now = if target - now <= h { target } else { now + h };
        }
        if let Some(r) = params.return_radius {
            loop {
                let z = u.basepoint();
                let depth = origin.dist(&z);
                if depth <= r || now >= params.horizon {
                    break;
                }
                // no lift of i lies closer than min(depth, distance to disks)
                let clearance = (depth.min(g.distance_to_disks(&z)) - r).max(0.0);
                let h = clear_step(clearance);
                advance(&mut u, &mut deck, h)?;
                now += h;
            }
            if origin.dist(&u.basepoint()) > r {
                complete = false;
                break;
            }
            if steps.last().is_some_and(|st| st.s == now) {
                // an earlier target already waited past this one
                continue;
            }
        }
        // the fiber is transported by the freely reduced deck word rather
        // than step by step: cancelling letters near a repelling point would
        // otherwise amplify rounding errors in chi
        let y = BundlePoint {
            u,
            chi: transport(rho, &deck, &y0.chi)?,
            deck: deck.concat(&y0.deck),
        };
        steps.push(AttractorStep {
            target,
            s: now,
            dist: y.graph_distance(phi),
            depth: origin.dist(&u.basepoint()),
            deck_len: y.deck.len(),
        });
    }
    let end = BundlePoint {
        u,
        chi: transport(rho, &deck, &y0.chi)?,
        deck: deck.concat(&y0.deck),
    };
    Ok(AttractorTrace {
        params: *params,
        steps,
        complete,
        end,
    })
}

/// Seeded attractor starts. Each start has a frame `u` with `u(+inf) = eta`
/// and comes as a pair: `(u, phi(xi))` off the graph and `(u, phi(eta))` on
/// it. `eta` and `xi` are attracting fixed points of random cyclically
/// reduced words of length `word_len`, at least `separation` apart.
pub fn attractor_starts(
    rho: &Representation,
    phi: &LimitMap,
    count: usize,
    word_len: usize,
    separation: f64,
    seed: u64,
) -> Result<Vec<(BundlePoint, BundlePoint)>> {
    if !(separation > 0.0 && separation < 1.0) {
        return Err(Error::invalid(format!(
            "separation must lie in (0,1), got {separation}"
        )));
    }
    let g = rho.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let eta = g.random_limit_point(&mut rng, word_len)?;
        let xi = loop {
            let xi = g.random_limit_point(&mut rng, word_len)?;
            if xi.dist(&eta) > separation {
                break xi;
            }
        };
        let u = Psl2Element::frame_at(&eta, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        out.push((BundlePoint::new(u, phi.eval(&xi)), BundlePoint::new(u, phi.eval(&eta))));
    }
    Ok(out)
}

/// `rho(w) chi`, applying one generator image at a time.
pub fn transport(rho: &Representation, w: &FreeWord, chi: &ProjPoint) -> Result<ProjPoint> {
    if w.max_generator() > rho.group().rank() {
        return Err(Error::invalid(format!("word {w} uses a generator outside the group")));
    }
    w.letters()
        .iter()
        .rev()
        .try_fold(chi.clone(), |c, l| proj_act(rho.image(*l), &c))
}

/// The orbit of `start` under all words of length `<= max_len`, each point
/// computed from its parent by a single generator.
pub fn orbit_points(
    start: &PairedBoundaryPoint,
    rho: &Representation,
    max_len: usize,
) -> Result<Vec<PairedBoundaryPoint>> {
    orbit_dfs(start, rho, max_len, |p, l| {
        p.act(&rho.group().generator(l), rho.image(l))
    })
}

pub fn linear_orbit_points(start: &LinearPoint, rho: &Representation, max_len: usize) -> Result<Vec<LinearPoint>> {
    orbit_dfs(start, rho, max_len, |p, l| {
        p.act(&rho.group().generator(l), rho.image(l))
    })
}

// Children of the word w are s.w with s != -first(w).
fn orbit_dfs<T: Clone>(
    start: &T,
    rho: &Representation,
    max_len: usize,
    step: impl Fn(&T, Letter) -> Result<T>,
) -> Result<Vec<T>> {
    let alphabet = 2 * rho.group().rank();
    let mut out = vec![start.clone()];
    let mut stack: Vec<(T, Option<Letter>, usize)> = vec![(start.clone(), None, 0)];
    while let Some((p, first, depth)) = stack.pop() {
        if depth == max_len {
            continue;
        }
        for r in (0..alphabet).rev() {
            let l = letter_from_rank(r);
            if first == Some(-l) {
                continue;
            }
            let q = step(&p, l)?;
            out.push(q.clone());
            stack.push((q, Some(l), depth + 1));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitClosureReport {
    pub level: usize,
    pub sample_level: usize,
    pub orbit_size: usize,
    pub sample_size: usize,
    /// One-sided Hausdorff distance from the minimal-set sample to the orbit.
    pub sample_to_orbit: f64,
}

pub fn orbit_closure_experiment(
    start: &PairedBoundaryPoint,
    rho: &Representation,
    max_len: usize,
    sample_len: usize,
    gap_tol: f64,
) -> Result<OrbitClosureReport> {
    let sample = minimal_set_sample(rho, sample_len, gap_tol)?;
    let orbit = orbit_points(start, rho, max_len)?;
    Ok(OrbitClosureReport {
        level: max_len,
        sample_level: sample_len,
        orbit_size: orbit.len(),
        sample_size: sample.len(),
        sample_to_orbit: directed_pairs(&sample.pairs, &orbit)?,
    })
}

/// Log-radius statistics of a linear orbit, in units of `ln lambda_ref`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearOrbitReport {
    pub level: usize,
    pub lambda_ref: f64,
    pub count: usize,
    pub histogram: Vec<usize>,
    /// `max_i |count_i / count - 1 / bins|`.
    pub max_deviation: f64,
    /// `3 / sqrt(count)`.
    pub bound: f64,
    pub equidistributed: bool,
    /// Occupied bins.
    pub coverage: Vec<bool>,
}

pub fn linear_orbit_experiment(
    start: &LinearPoint,
    rho: &Representation,
    max_len: usize,
    bins: usize,
    lambda_ref: f64,
) -> Result<LinearOrbitReport> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if !(lambda_ref.is_finite() && lambda_ref > 1.0) {
        return Err(Error::invalid(format!(
            "reference multiplier must exceed 1, got {lambda_ref}"
        )));
    }
    let orbit = linear_orbit_points(start, rho, max_len)?;
    let scale = lambda_ref.ln();
    let mut histogram = vec![0usize; bins];
    for p in &orbit {
        let x = (p.radius().ln() / scale).rem_euclid(1.0);
        histogram[((x * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let count = orbit.len();
    let max_deviation = histogram
        .iter()
        .map(|c| (*c as f64 / count as f64 - 1.0 / bins as f64).abs())
        .fold(0.0, f64::max);
    let bound = 3.0 / (count as f64).sqrt();
    Ok(LinearOrbitReport {
        level: max_len,
        lambda_ref,
        count,
        coverage: histogram.iter().map(|c| *c > 0).collect(),
        histogram,
        max_deviation,
        bound,
        equidistributed: max_deviation < bound,
    })
}

/// A pair of hyperbolic words whose multipliers generate a dense subgroup
/// of `R_+^*`, as far as the continued-fraction test can tell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoHyperbolic {
    pub w1: FreeWord,
    pub w2: FreeWord,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `ln lambda1 / ln lambda2`.
    pub ratio: f64,
    /// Best convergent `p/q` with `q <= Q` and its error.
    pub convergent: (i64, i64),
    pub convergent_error: f64,
}

/// Best rational approximation `p/q` of `x` among continued-fraction
/// convergents with `q <= max_q`, and the error `|x - p/q|`.
///
/// By Legendre's theorem any `p/q` with `|x - p/q| < 1/(2 q^2)` is a
/// convergent, so scanning convergents decides the test below.
pub fn best_convergent(x: f64, max_q: i64) -> ((i64, i64), f64) {
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut best = ((p1, q1), (x - p1 as f64).abs());
    let mut rest = x - x.floor();
    while rest > 0.0 {
        let inv = rest.recip();
        let a = inv.floor();
        if !a.is_finite() || a > i64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as i64;
        let (Some(p2), Some(q2)) = (
            a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
        ) else {
            break;
        };
        if q2 > max_q {
            break;
        }
        let err = (x - p2 as f64 / q2 as f64).abs();
        if err < best.1 {
            best = ((p2, q2), err);
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        rest = inv - inv.floor();
    }
    best
}

/// Whether `x` has no rational approximation `p/q`, `q <= max_q`, within
/// `1/(2 max_q^2)`.
pub fn passes_diophantine(x: f64, max_q: i64) -> bool {
    let (_, err) = best_convergent(x, max_q);
    err >= 0.5 / (max_q as f64 * max_q as f64)
}

/// First pair (in length-lex order of the later word, then of the earlier)
/// of hyperbolic words with proximal images whose log-multiplier ratio
/// passes the continued-fraction test.
pub fn two_hyperbolic_find(
    group: &SchottkyGroup,
    rho: &Representation,
    max_len: usize,
    max_q: i64,
    gap_tol: f64,
) -> Result<Option<TwoHyperbolic>> {
    if max_q < 1 {
        return Err(Error::invalid(format!("Q must be >= 1, got {max_q}")));
    }
    if rho.group() != group {
        return Err(Error::invalid("the representation is defined on a different group"));
    }
    let mut found: Vec<(FreeWord, f64)> = Vec::new();
    for w in group.words_up_to(max_len).skip(1) {
        let IsometryClass::Hyperbolic { lambda, .. } = group.evaluate(&w)?.classify() else {
            continue;
        };
        if is_proximal(&rho.evaluate(&w)?, gap_tol)?.is_none() {
            continue;
        }
        for (w1, l1) in &found {
            let ratio = l1.ln() / lambda.ln();
            let (convergent, convergent_error) = best_convergent(ratio, max_q);
            if convergent_error >= 0.5 / (max_q as f64 * max_q as f64) {
                return Ok(Some(TwoHyperbolic {
                    w1: w1.clone(),
                    w2: w,
                    lambda1: *l1,
                    lambda2: lambda,
                    ratio,
                    convergent,
                    convergent_error,
                }));
            }
        }
        found.push((w, lambda));
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyLemmaStep {
    pub k: usize,
    /// `d(gamma^k xi, gamma^+)`
    pub base: f64,
    /// `delta(A^k chi, chi_A)`
    pub fiber: f64,
    pub dist: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyLemmaTrace {
    /// Dominant eigenvalue of `gamma`.
    pub lambda: f64,
    /// `|lambda_2 / lambda_1|` of `A`.
    pub gap: f64,
    pub steps: Vec<KeyLemmaStep>,
    /// Fitted slopes of `ln base` and `ln fiber` against `k`.
    pub base_slope: f64,
    pub fiber_slope: f64,
}

/// Iterates `(gamma^k xi, A^k chi)` towards `(gamma^+, chi_A)`.
pub fn key_lemma_trace(
    gamma: &Psl2Element,
    a: &ProjMat,
    xi: &BoundaryPoint,
    chi: &ProjPoint,
    k_max: usize,
    gap_tol: f64,
) -> Result<KeyLemmaTrace> {
    if k_max == 0 {
        return Err(Error::invalid("key-lemma trace needs K >= 1"));
    }
    if a.dim() != chi.dim() {
        return Err(Error::invalid("matrix and fiber point have different dimensions"));
    }
    let IsometryClass::Hyperbolic {
        lambda,
        fix_plus,
        fix_minus,
    } = gamma.classify()
    else {
        return Err(Error::precondition("gamma is not hyperbolic"));
    };
    let Some(pd) = is_proximal(a, gap_tol)? else {
        return Err(Error::precondition("rho(gamma) is not proximal"));
    };
    if xi.dist(&fix_minus) <= KEY_LEMMA_XI_TOL {
        return Err(Error::precondition("xi is the repelling fixed point gamma^-"));
    }
    let clearance = pd.dist_to_repelling(chi);
    if clearance <= KEY_LEMMA_CHI_TOL {
        return Err(Error::precondition(format!(
            "chi lies within {clearance:e} of the repelling hyperplane W_A"
        )));
    }
    let mut x = *xi;
    let mut c = chi.clone();
    let mut steps = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        x = gamma.mobius_boundary(&x);
        c = proj_act(a, &c)?;
        let base = x.dist(&fix_plus);
        let fiber = delta(&c, &pd.chi);
        steps.push(KeyLemmaStep {
            k,
            base,
            fiber,
            dist: base.max(fiber),
        });
    }
    let slope = |f: fn(&KeyLemmaStep) -> f64| {
        let pts: Vec<(f64, f64)> = steps
            .iter()
            .filter(|s| f(s) > 0.0)
            .map(|s| (s.k as f64, f(s).ln()))
            .collect();
        if pts.len() < 2 {
            f64::NAN
        } else {
            fit_slope(&pts)
        }
    };
    let base_slope = slope(|s| s.base);
    let fiber_slope = slope(|s| s.fiber);
    Ok(KeyLemmaTrace {
        lambda,
        gap: pd.gap,
        steps,
        base_slope,
        fiber_slope,
    })
}

/// [`key_lemma_trace`] for `gamma = w` in the group and `A = rho(w)`.
pub fn key_lemma_word(
    rho: &Representation,
    w: &FreeWord,
    xi: &BoundaryPoint,
    chi: &ProjPoint,
    k_max: usize,
    gap_tol: f64,
) -> Result<KeyLemmaTrace> {
    key_lemma_trace(&rho.group().evaluate(w)?, &rho.evaluate(w)?, xi, chi, k_max, gap_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{rank2_group, rank2_inclusion, rank2_sym2, rank3_noninjective};
    use crate::hausdorff::directed;
    use crate::projective::DEFAULT_GAP_TOL;
    use crate::representation::{projective_limit_set_sample, veronese};
    use proptest::prelude::*;
    use rand::Rng;

    fn as_proj(xi: &BoundaryPoint) -> ProjPoint {
        let (x, y) = xi.direction();
        ProjPoint::from_slice(&[x, y]).unwrap()
    }

    #[test]
    fn frame_endpoint() {
        for xi in [
            BoundaryPoint::finite(-3.0),
            BoundaryPoint::finite(0.2),
            BoundaryPoint::infinity(),
        ] {
            assert!(Psl2Element::frame_at(&xi, 0.7, -1.3).endpoint_plus().dist(&xi) < 1e-14);
        }
    }

    #[test]
    fn inclusion_sample_is_diagonal() {
        let rho = rank2_inclusion().unwrap();
        let m = minimal_set_sample(&rho, 5, DEFAULT_GAP_TOL).unwrap();
        assert!(m.len() > 100);
        for p in &m.pairs {
            assert!(delta(&as_proj(&p.xi), &p.chi) < 1e-10);
        }
    }

    #[test]
    fn sym2_sample_is_graph() {
        let rho = rank2_sym2().unwrap();
        let m = minimal_set_sample(&rho, 5, DEFAULT_GAP_TOL).unwrap();
        for p in &m.pairs {
            assert!(delta(&veronese(&p.xi, 2), &p.chi) < 1e-9);
        }
    }

    #[test]
    fn sample_consistency() {
        let rho = rank2_sym2().unwrap();
        let m = minimal_set_sample(&rho, 4, DEFAULT_GAP_TOL).unwrap();
        let ls = rho.group().limit_set_sample(4).unwrap();
        let pls = projective_limit_set_sample(&rho, 4, DEFAULT_GAP_TOL).unwrap();
        for p in &m.pairs {
            assert!(ls.distance_to(&p.xi).unwrap() < 1e-9);
            assert!(pls.distance_to(&p.chi).unwrap() < 1e-9);
        }
    }

    #[test]
    fn noninjective_grid_distance_shrinks() {
        let rho = rank3_noninjective().unwrap();
        let grid = minimal_set_sample(&rho, 3, DEFAULT_GAP_TOL).unwrap().marginal_grid();
        let d: Vec<f64> = [3, 5]
            .iter()
            .map(|l| {
                let m = minimal_set_sample(&rho, *l, DEFAULT_GAP_TOL).unwrap();
                directed_pairs(&grid, &m.pairs).unwrap()
            })
            .collect();
        assert!(d[1] < d[0], "{d:?}");
    }

    #[test]
    fn pair_index_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut random = |n: usize| -> Vec<PairedBoundaryPoint> {
            (0..n)
                .map(|_| PairedBoundaryPoint {
                    xi: BoundaryPoint::from_direction(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0)).unwrap(),
                    chi: ProjPoint::from_slice(&[
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ])
                    .unwrap(),
                })
                .collect()
        };
        for (na, nb) in [(50, 1), (50, 7), (200, 3000)] {
            let a = random(na);
            let b = random(nb);
            let fast = directed_pairs(&a, &b).unwrap();
            let slow = directed(&a, &b, |p, q| p.dist(q));
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn section_examples() {
        let rho = rank2_sym2().unwrap();
        let g = rho.group();
        let ls = g.limit_set_sample(4).unwrap();
        let phi = LimitMap::veronese(2);
        let fix = g.axes()[0].fix_plus;
        let u = Psl2Element::frame_at(&BoundaryPoint::finite(fix), 0.3, 0.1);
        let y = section_phi(&u, &phi, &ls, 1e-9).unwrap();
        assert!(delta(&y.chi, &veronese(&BoundaryPoint::finite(fix), 2)) < 1e-12);
        let y2 = section_phi(&u.horocycle_flow(5.0), &phi, &ls, 1e-9).unwrap();
        assert!(delta(&y.chi, &y2.chi) < 1e-12);
        assert!(matches!(
            section_phi(&Psl2Element::identity(), &phi, &ls, 1e-6),
            Err(Error::Precondition(_))
        ));
    }

    fn start_in_mb(rng: &mut impl Rng) -> (Representation, BundlePoint) {
        let rho = rank2_sym2().unwrap();
        let ls = rho.group().limit_set_sample(4).unwrap();
        let xi = ls.points[rng.gen_range(0..ls.len())];
        let u = Psl2Element::frame_at(&xi, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let y = BundlePoint::new(u, veronese(&xi, 2));
        (rho, y)
    }

    #[test]
    fn zero_flow_is_reduction_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (rho, y) = start_in_mb(&mut rng);
        let y1 = foliated_horocycle(&y, 0.0, &rho).unwrap();
        let y2 = foliated_horocycle(&y1, 0.0, &rho).unwrap();
        assert_eq!(y1, y2);
        let red = rho.group().reduce(&y.u).unwrap();
        assert_eq!(y1.u, red.reduced);
    }

    #[test]
    fn flow_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (rho, y) = start_in_mb(&mut rng);
            let s = rng.gen_range(-3.0..3.0);
            let t = rng.gen_range(-3.0..3.0);
            let a = foliated_horocycle(&foliated_horocycle(&y, s, &rho).unwrap(), t, &rho).unwrap();
            let b = foliated_horocycle(&y, s + t, &rho).unwrap();
            assert!(a.u.distance(&b.u) < 1e-8, "{} vs {}", a.u, b.u);
            assert!(delta(&a.chi, &b.chi) < 1e-8);
            assert_eq!(a.deck, b.deck);
        }
    }

    #[test]
    fn pi_compatibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (rho, y) = start_in_mb(&mut rng);
        for s in [-2.0, 0.5, 4.0] {
            let z = foliated_horocycle(&y, s, &rho).unwrap();
            let red = rho.group().reduce(&y.u.horocycle_flow(s)).unwrap();
            assert_eq!(z.u, red.reduced);
            assert!(rho.group().in_fundamental_domain(&z.u.basepoint()) || red.word.is_empty());
        }
    }

    #[test]
    fn flatness() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let (rho, y) = start_in_mb(&mut rng);
            let y = foliated_horocycle(&y, 0.0, &rho).unwrap();
            let w = FreeWord::from_letters(&[1, -2]).unwrap();
            let moved = y.deck_act(&w, &rho).unwrap();
            let s = rng.gen_range(-2.0..2.0);
            let a = foliated_horocycle(&moved, s, &rho).unwrap();
            let b = foliated_horocycle(&y, s, &rho).unwrap();
            assert!(a.u.distance(&b.u) < 1e-9);
            assert!(delta(&a.chi, &b.chi) < 1e-9);
        }
    }

    #[test]
    fn graph_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = LimitMap::veronese(2);
        for _ in 0..20 {
            let (rho, y) = start_in_mb(&mut rng);
            let mut z = y.clone();
            for _ in 0..40 {
                z = foliated_horocycle(&z, rng.gen_range(-1.0..1.0), &rho).unwrap();
                assert!(z.graph_distance(&phi) < 1e-8);
            }
            let g = y.geodesic(rng.gen_range(-3.0..3.0), &rho).unwrap();
            assert!(g.graph_distance(&phi) < 1e-8);
            let a = y
                .affine(rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0), &rho)
                .unwrap();
            assert!(a.graph_distance(&phi) < 1e-8);
        }
    }

    fn omega_prox_start(rng: &mut impl Rng) -> (Representation, BundlePoint, LimitSetSample, ProjLimitSetSample) {
        let rho = rank2_sym2().unwrap();
        let g = rho.group().clone();
        let ls = g.limit_set_sample(4).unwrap();
        let pls = projective_limit_set_sample(&rho, 4, DEFAULT_GAP_TOL).unwrap();
        let eta = g.random_limit_point(rng, 24).unwrap();
        let xi = loop {
            let xi = g.random_limit_point(rng, 24).unwrap();
            if xi.dist(&eta) > 0.01 {
                break xi;
            }
        };
        let u = Psl2Element::frame_at(&eta, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        (rho, BundlePoint::new(u, veronese(&xi, 2)), ls, pls)
    }

    #[test]
    fn attractor_on_graph_stays() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (rho, y) = start_in_mb(&mut rng);
        let ls = rho.group().limit_set_sample(4).unwrap();
        let pls = projective_limit_set_sample(&rho, 4, DEFAULT_GAP_TOL).unwrap();
        let phi = LimitMap::veronese(2);
        let sched: Vec<f64> = (0..8).map(|k| 4f64.powi(k)).collect();
        let tr = attractor_trace(&y, &sched, &rho, &phi, &ls, &pls, &AttractorParams::default()).unwrap();
        assert!(tr.max_dist() < 1e-8, "{}", tr.max_dist());
    }

    #[test]
    fn attractor_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phi = LimitMap::veronese(2);
        let sched = [1.0, 32.0, 1024.0];
        let params = AttractorParams {
            eps: 1e-2,
            return_radius: Some(1.5),
            horizon: 1e6,
            ..Default::default()
        };
        let (rho, y, ls, pls) = omega_prox_start(&mut rng);
        let tr = attractor_trace(&y, &sched, &rho, &phi, &ls, &pls, &params).unwrap();
        assert!(tr.complete);
        assert!(tr.final_s() >= 1024.0);
        assert!(tr.final_dist() < 0.01, "{:?}", tr.steps);
    }

    #[test]
    fn attractor_rejections() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let phi = LimitMap::veronese(2);
        let (rho, y, ls, pls) = omega_prox_start(&mut rng);
        let bad = attractor_trace(&y, &[1.0, 1.0], &rho, &phi, &ls, &pls, &AttractorParams::default());
        assert!(matches!(bad, Err(Error::InvalidArgument(_))));
        let off = BundlePoint::new(y.u, ProjPoint::basis(3, 1));
        let bad = attractor_trace(&off, &[1.0], &rho, &phi, &ls, &pls, &AttractorParams::default());
        assert!(matches!(bad, Err(Error::Precondition(_))));
        let off = BundlePoint::new(Psl2Element::identity(), y.chi.clone());
        let bad = attractor_trace(&off, &[1.0], &rho, &phi, &ls, &pls, &AttractorParams::default());
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn orbit_size_and_equivariance() {
        let rho = rank2_inclusion().unwrap();
        let m = minimal_set_sample(&rho, 1, DEFAULT_GAP_TOL).unwrap();
        let orbit = orbit_points(&m.pairs[0], &rho, 5).unwrap();
        assert_eq!(orbit.len(), crate::fuchsian::word_count(2, 5));
        for p in &orbit {
            assert!(delta(&as_proj(&p.xi), &p.chi) < 1e-10);
        }
    }

    #[test]
    fn orbit_closure_density_improves() {
        let rho = rank2_sym2().unwrap();
        let m = minimal_set_sample(&rho, 1, DEFAULT_GAP_TOL).unwrap();
        let r4 = orbit_closure_experiment(&m.pairs[0], &rho, 4, 3, DEFAULT_GAP_TOL).unwrap();
        let r7 = orbit_closure_experiment(&m.pairs[0], &rho, 7, 3, DEFAULT_GAP_TOL).unwrap();
        assert!(r7.sample_to_orbit < r4.sample_to_orbit);
    }

    #[test]
    fn linear_scaling_shifts_histogram() {
        let rho = rank2_sym2().unwrap();
        let g = rho.group();
        let fix = BoundaryPoint::finite(g.axes()[0].fix_plus);
        let (x, y) = fix.direction();
        let p = LinearPoint::new([x, y], veronese(&fix, 2)).unwrap();
        let a = linear_orbit_experiment(&p, &rho, 6, 32, 3.0).unwrap();
        // scaling by lambda_ref^{k/32} shifts bins by k
        let q = p.scaled(3f64.powf(5.0 / 32.0)).unwrap();
        let b = linear_orbit_experiment(&q, &rho, 6, 32, 3.0).unwrap();
        assert_eq!(a.count, b.count);
        let shifted: usize = (0..32).filter(|i| a.histogram[*i] != b.histogram[(i + 5) % 32]).count();
        assert!(shifted <= 4, "{:?}\n{:?}", a.histogram, b.histogram);
    }

    #[test]
    fn linear_point_sign() {
        let chi = ProjPoint::basis(2, 0);
        let p = LinearPoint::new([-1.0, 2.0], chi.clone()).unwrap();
        assert_eq!(p.v, [1.0, -2.0]);
        let p = LinearPoint::new([0.0, -2.0], chi.clone()).unwrap();
        assert_eq!(p.v, [0.0, 2.0]);
        assert!(LinearPoint::new([0.0, 0.0], chi).is_err());
    }

    #[test]
    fn convergents() {
        assert_eq!(best_convergent(0.5, 10).0, (1, 2));
        assert_eq!(best_convergent(std::f64::consts::PI, 1000).0, (355, 113));
        assert_eq!(best_convergent(2.0, 5), ((2, 1), 0.0));
        assert!(!passes_diophantine(1.0, 10_000));
        assert!(passes_diophantine(std::f64::consts::PI, 100));
        // the nearest integer is always a convergent within 1/2
        for x in [0.3, 0.49, 0.51, 2.7, 9.999] {
            assert!(!passes_diophantine(x, 1));
        }
    }

    proptest! {
        #[test]
        fn legendre(p in 1i64..200, q in 1i64..200, noise in -1e-9f64..1e-9) {
            let x = p as f64 / q as f64 + noise;
            prop_assert!(!passes_diophantine(x, 200));
        }
    }

    #[test]
    fn two_hyperbolic_shipped() {
        let rho = rank2_sym2().unwrap();
        let found = two_hyperbolic_find(rho.group(), &rho, 3, 10_000, DEFAULT_GAP_TOL)
            .unwrap()
            .expect("a pair");
        assert!(found.w1.len() <= 3 && found.w2.len() <= 3);
        assert!((found.ratio - 9f64.ln() / (100.0f64 * (1.0 + 1e-7)).ln()).abs() < 1e-12);
    }

    #[test]
    fn two_hyperbolic_equal_multipliers() {
        let g = std::sync::Arc::new(SchottkyGroup::from_axes(&[(-1.0, 1.0, 9.0), (-30.0, 20.0, 9.0)]).unwrap());
        let rho = Representation::sym_power(g.clone(), 2).unwrap();
        let found = two_hyperbolic_find(&g, &rho, 2, 10_000, DEFAULT_GAP_TOL).unwrap();
        if let Some(f) = found {
            assert!(f.w1.len() + f.w2.len() > 2);
        }
        let other = rank2_group().unwrap();
        assert!(two_hyperbolic_find(&other, &rho, 2, 10, DEFAULT_GAP_TOL).is_err());
    }

    fn diagonal_model() -> (Psl2Element, ProjMat) {
        (
            Psl2Element::new(2.0, 0.0, 0.0, 0.5).unwrap(),
            ProjMat::diagonal(&[4.0, 1.0, 0.25]).unwrap(),
        )
    }

    #[test]
    fn key_lemma_fixed_pair() {
        let (g, a) = diagonal_model();
        let tr = key_lemma_trace(
            &g,
            &a,
            &BoundaryPoint::infinity(),
            &ProjPoint::basis(3, 0),
            10,
            DEFAULT_GAP_TOL,
        )
        .unwrap();
        assert!(tr.steps.iter().all(|s| s.dist == 0.0));
    }

    #[test]
    fn key_lemma_diagonal_slopes() {
        let (g, a) = diagonal_model();
        let chi = ProjPoint::from_slice(&[1.0, 1.0, 1.0]).unwrap();
        let tr = key_lemma_trace(&g, &a, &BoundaryPoint::finite(1.0), &chi, 20, DEFAULT_GAP_TOL).unwrap();
        // xi -> 4 xi: the base contracts by lambda^-2 per step
        assert!((tr.base_slope + 4f64.ln()).abs() < 1e-3, "{}", tr.base_slope);
        assert!((tr.fiber_slope - tr.gap.ln()).abs() < 1e-3, "{}", tr.fiber_slope);
        assert!(tr.steps.last().unwrap().dist < 1e-6);
    }

    #[test]
    fn key_lemma_rejections() {
        let (g, a) = diagonal_model();
        let chi = ProjPoint::from_slice(&[1.0, 1.0, 1.0]).unwrap();
        let err = |r: Result<KeyLemmaTrace>| match r {
            Err(Error::Precondition(m)) => m,
            other => panic!("expected a precondition error, got {other:?}"),
        };
        let m = err(key_lemma_trace(
            &g,
            &a,
            &BoundaryPoint::finite(0.0),
            &chi,
            5,
            DEFAULT_GAP_TOL,
        ));
        assert!(m.contains("repelling fixed point"));
        let m = err(key_lemma_trace(
            &g,
            &a,
            &BoundaryPoint::finite(1.0),
            &ProjPoint::from_slice(&[0.0, 1.0, 1.0]).unwrap(),
            5,
            DEFAULT_GAP_TOL,
        ));
        assert!(m.contains("hyperplane"));
        let m = err(key_lemma_trace(
            &Psl2Element::rotation(1.0),
            &a,
            &BoundaryPoint::finite(1.0),
            &chi,
            5,
            DEFAULT_GAP_TOL,
        ));
        assert!(m.contains("not hyperbolic"));
        let m = err(key_lemma_trace(
            &g,
            &ProjMat::identity(3),
            &BoundaryPoint::finite(1.0),
            &chi,
            5,
            DEFAULT_GAP_TOL,
        ));
        assert!(m.contains("not proximal"));
    }

    #[test]
    fn key_lemma_on_words() {
        let rho = rank2_sym2().unwrap();
        let w = FreeWord::from_letters(&[1, 2]).unwrap();
        let tr = key_lemma_word(
            &rho,
            &w,
            &BoundaryPoint::finite(0.0),
            &ProjPoint::basis(3, 1),
            8,
            DEFAULT_GAP_TOL,
        )
        .unwrap();
        assert!(tr.steps.last().unwrap().dist < 1e-6);
    }
}
