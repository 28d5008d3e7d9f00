//! Schottky groups: free convex-cocompact Fuchsian groups built from
//! hyperbolic generators with disjoint isometric circles.
//!
//! Generator `i` maps the exterior of `disk(-i)` onto the interior of
//! `disk(+i)`. The common exterior of the `2r` disks in the upper half-plane
//! is a fundamental domain, which makes passage to the quotient
//! `Gamma \ PSL(2,R)` a terminating reduction.

pub mod words;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hausdorff::DedupIndex;
use crate::hyperbolic::{BoundaryPoint, HPoint, IsometryClass, Psl2Element};

pub use words::{letter_from_rank, letter_rank, scan_words, word_count, FreeWord, Letter, WordIter};

/// Tolerance collar on disk containment during reduction.
pub const DISK_COLLAR: f64 = 1e-12;
/// Step cap for [`SchottkyGroup::reduce`].
pub const REDUCTION_CAP: usize = 10_000;
/// Resolution at which sampled boundary points are merged.
pub const DEDUP_RESOLUTION: f64 = 1e-10;
/// Tolerance of the sampled ping-pong mapping check.
pub const MAPPING_TOL: f64 = 1e-9;

/// Axis data for one hyperbolic generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub fix_minus: f64,
    pub fix_plus: f64,
    /// Boundary multiplier: the generator is conjugate to
    /// `diag(sqrt(m), 1/sqrt(m))`.
    pub multiplier: f64,
}

/// A round disk centered on the real axis, labeled by a letter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Disk {
    pub letter: Letter,
    pub center: f64,
    pub radius: f64,
}

impl Disk {
    fn contains(&self, z: &HPoint, collar: f64) -> bool {
        let dx = z.x - self.center;
        (dx * dx + z.y * z.y).sqrt() <= self.radius + collar
    }

    pub fn contains_real(&self, t: f64) -> bool {
        (t - self.center).abs() <= self.radius
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchottkyGroup {
    axes: Vec<Axis>,
    generators: Vec<Psl2Element>,
    inverses: Vec<Psl2Element>,
    // indexed by letter rank: 1, -1, 2, -2, ...
    disks: Vec<Disk>,
}

/// Output of [`SchottkyGroup::reduce`]: `evaluate(word) * u = reduced`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub word: FreeWord,
    pub reduced: Psl2Element,
}

impl SchottkyGroup {
    /// Builds the group from `(fix_minus, fix_plus, multiplier)` triples and
    /// certifies ping-pong.
    pub fn from_axes(pairs: &[(f64, f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("a Schottky group needs at least one generator"));
        }
        let mut endpoints: Vec<f64> = Vec::with_capacity(2 * pairs.len());
        let mut axes = Vec::with_capacity(pairs.len());
        for (i, &(fm, fp, m)) in pairs.iter().enumerate() {
            if !(fm.is_finite() && fp.is_finite()) {
                return Err(Error::invalid(format!("axis {} has a non-finite endpoint", i + 1)));
            }
            if !(m.is_finite() && m > 1.0) {
                return Err(Error::invalid(format!(
                    "axis {} has multiplier {m}, expected > 1",
                    i + 1
                )));
            }
            for e in [fm, fp] {
                if endpoints.iter().any(|x| (x - e).abs() <= 1e-12 * (1.0 + e.abs())) {
                    return Err(Error::Certificate(format!(
                        "axis endpoint {e} is shared by two axes (or repeated)"
                    )));
                }
                endpoints.push(e);
            }
            axes.push(Axis {
                fix_minus: fm,
                fix_plus: fp,
                multiplier: m,
            });
        }
        let generators: Vec<Psl2Element> = axes.iter().map(hyperbolic_from_axis).collect();
        let inverses: Vec<Psl2Element> = generators.iter().map(|g| g.inverse()).collect();
        let mut disks = Vec::with_capacity(2 * generators.len());
        for (i, g) in generators.iter().enumerate() {
            let [a, _, c, d] = g.entries();
            let radius = 1.0 / c.abs();
            let letter = (i + 1) as Letter;
            disks.push(Disk {
                letter,
                center: a / c,
                radius,
            });
            disks.push(Disk {
                letter: -letter,
                center: -d / c,
                radius,
            });
        }
        let group = SchottkyGroup {
            axes,
            generators,
            inverses,
            disks,
        };
        group.certify()?;
        Ok(group)
    }

    fn certify(&self) -> Result<()> {
        for (i, p) in self.disks.iter().enumerate() {
            for q in &self.disks[i + 1..] {
                let gap = (p.center - q.center).abs() - p.radius - q.radius;
                if !(gap > 0.0) {
                    return Err(Error::Certificate(format!(
                        "disks {} and {} are not disjoint (boundary gap {gap:.3e}); \
                         increase the multipliers or separate the axes",
                        p.letter, q.letter
                    )));
                }
            }
        }
        const SAMPLES: usize = 32;
        for (i, g) in self.generators.iter().enumerate() {
            let letter = (i + 1) as Letter;
            let src = self.disk(-letter);
            let dst = self.disk(letter);
            let [a, b, c, d] = g.entries();
            for k in 0..SAMPLES {
                let th = std::f64::consts::TAU * (k as f64 + 0.5) / SAMPLES as f64;
                let z = Complex64::new(src.center, 0.0) + Complex64::from_polar(src.radius, th);
                let w = (a * z + b) / (c * z + d);
                let r = (w - Complex64::new(dst.center, 0.0)).norm();
                if (r - dst.radius).abs() > MAPPING_TOL * dst.radius.max(1.0) {
                    return Err(Error::Certificate(format!(
                        "generator {letter} does not map circle {} onto circle {letter} \
                         (residual {:.3e})",
                        -letter,
                        (r - dst.radius).abs()
                    )));
                }
            }
            // the exterior point infinity must land inside disk(+i)
            if !dst.contains_real(a / c) {
                return Err(Error::Certificate(format!(
                    "generator {letter} maps infinity outside disk {letter}"
                )));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn generators(&self) -> &[Psl2Element] {
        &self.generators
    }

    /// The matrix of a letter (a generator or its inverse).
    pub fn generator(&self, l: Letter) -> Psl2Element {
        let i = l.unsigned_abs() as usize - 1;
        if l > 0 {
            self.generators[i]
        } else {
            self.inverses[i]
        }
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn disk(&self, l: Letter) -> &Disk {
        &self.disks[letter_rank(l)]
    }

    pub fn words_up_to(&self, max_len: usize) -> WordIter {
        WordIter::new(self.rank(), max_len)
    }

    fn check_word(&self, w: &FreeWord) -> Result<()> {
        if w.max_generator() > self.rank() {
            return Err(Error::invalid(format!(
                "word {w} uses generator {} of a rank {} group",
                w.max_generator(),
                self.rank()
            )));
        }
        Ok(())
    }

    /// Product of the generator matrices along the word.
    pub fn evaluate(&self, w: &FreeWord) -> Result<Psl2Element> {
        self.check_word(w)?;
        Ok(self.evaluate_letters(w.letters()))
    }

    pub(crate) fn evaluate_letters(&self, letters: &[Letter]) -> Psl2Element {
        letters
            .iter()
            .fold(Psl2Element::identity(), |acc, l| acc * self.generator(*l))
    }

    /// Attracting fixed points of all cyclically reduced nonidentity words of
    /// length `<= max_len`, deduplicated at [`DEDUP_RESOLUTION`].
    pub fn limit_set_sample(&self, max_len: usize) -> Result<LimitSetSample> {
        if max_len == 0 {
            return Err(Error::invalid("limit-set sampling needs word length >= 1"));
        }
        let mut sample = LimitSetSample {
            level: max_len,
            points: Vec::new(),
            words: Vec::new(),
        };
        let mut index = DedupIndex::new(2.0 * DEDUP_RESOLUTION);
        scan_words(
            self.rank(),
            max_len,
            Psl2Element::identity(),
            |acc, l| *acc * self.generator(l),
            |letters, g| {
                if !words::is_cyclically_reduced(letters) {
                    return;
                }
                if let IsometryClass::Hyperbolic { fix_plus, .. } = g.classify() {
                    let key = fix_plus.direction().1;
                    let id = sample.points.len();
                    let pts = &sample.points;
                    if index.insert_if_new(key, id, |j| pts[j].dist(&fix_plus) <= DEDUP_RESOLUTION) {
                        sample.points.push(fix_plus);
                        sample
                            .words
                            .push(FreeWord::from_letters(letters).expect("reduced letters"));
                    }
                }
            },
        );
        Ok(sample)
    }

    /// Random cyclically reduced word of length `len >= 1`.
    pub fn random_cyclically_reduced<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Result<FreeWord> {
        if len == 0 {
            return Err(Error::invalid("random word length must be >= 1"));
        }
        let alphabet = 2 * self.rank();
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let l = words::letter_from_rank(rng.gen_range(0..alphabet));
            if letters.last() == Some(&-l) || (letters.len() + 1 == len && len > 1 && letters[0] == -l) {
                continue;
            }
            letters.push(l);
        }
        FreeWord::from_letters(&letters)
    }

    /// Attracting fixed point of a random cyclically reduced word of length
    /// `len`. Long words give limit points with no visible periodicity.
    pub fn random_limit_point<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Result<BoundaryPoint> {
        loop {
            let w = self.random_cyclically_reduced(rng, len)?;
            if let IsometryClass::Hyperbolic { fix_plus, .. } = self.evaluate(&w)?.classify() {
                return Ok(fix_plus);
            }
        }
    }

    /// True when the base point lies in the common exterior of all disks.
    pub fn in_fundamental_domain(&self, z: &HPoint) -> bool {
        !self.disks.iter().any(|d| d.contains(z, -DISK_COLLAR))
    }

    /// Hyperbolic distance from `z` to the nearest disk, zero inside one.
    pub fn distance_to_disks(&self, z: &HPoint) -> f64 {
        self.disks
            .iter()
            .map(|d| {
                let dx = z.x - d.center;
                let excess = dx * dx + z.y * z.y - d.radius * d.radius;
                // sinh of the distance to the geodesic bounding the disk
                (excess / (2.0 * d.radius * z.y)).max(0.0).asinh()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Moves `u` into the fundamental domain by the deck word that the
    /// ping-pong disks dictate.
    pub fn reduce(&self, u: &Psl2Element) -> Result<Reduction> {
        let mut applied: Vec<Letter> = Vec::new();
        let mut gamma = Psl2Element::identity();
        let mut current = *u;
        for _ in 0..REDUCTION_CAP {
            let z = current.basepoint();
            let last = applied.last().copied();
            // the disk whose letter equals the last applied letter would undo it
            let hit = self
                .disks
                .iter()
                .find(|d| Some(d.letter) != last && d.contains(&z, DISK_COLLAR));
            let Some(disk) = hit else {
                applied.reverse();
                let word = FreeWord::from_letters(&applied)?;
                return Ok(Reduction { word, reduced: current });
            };
            let step = -disk.letter;
            applied.push(step);
            gamma = self.generator(step) * gamma;
            current = gamma * *u;
        }
        Err(Error::ReductionCap { cap: REDUCTION_CAP })
    }

    /// Whether `endpoint_plus(u)` is within `eps` of the sampled limit set.
    pub fn nonwandering_test(&self, u: &Psl2Element, ls: &LimitSetSample, eps: f64) -> Result<bool> {
        Ok(ls.distance_to(&u.endpoint_plus())? <= eps)
    }
}

// Conjugate diag(sqrt m, 1/sqrt m) by the Moebius map sending 0, inf to
// fix_minus, fix_plus.
fn hyperbolic_from_axis(axis: &Axis) -> Psl2Element {
    let s = axis.multiplier.sqrt();
    let (fm, fp) = (axis.fix_minus, axis.fix_plus);
    let det = fp - fm;
    // M = [[fp, fm], [1, 1]], M^{-1} = [[1, -fm], [-1, fp]] / det
    let (a, b) = (fp * s, fm / s);
    let (c, d) = (s, 1.0 / s);
    let e = (a - b) / det;
    let f = (-a * fm + b * fp) / det;
    let g = (c - d) / det;
    let h = (-c * fm + d * fp) / det;
    if det > 0.0 {
        Psl2Element::new(e, f, g, h).expect("conjugate of a unimodular matrix")
    } else {
        Psl2Element::new(-e, -f, -g, -h).expect("conjugate of a unimodular matrix")
    }
}

/// Sampled limit set: attracting fixed points with the words producing them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSetSample {
    pub level: usize,
    pub points: Vec<BoundaryPoint>,
    pub words: Vec<FreeWord>,
}

impl LimitSetSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sine distance from `xi` to the nearest sampled point.
    pub fn distance_to(&self, xi: &BoundaryPoint) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::invalid("empty limit-set sample"));
        }
        Ok(self.points.iter().map(|p| p.dist(xi)).fold(f64::INFINITY, f64::min))
    }
}
