//! Refraction paths across a circular dielectric boundary.
//!
//! A wave travelling from an exterior antenna to an interior focal point
//! crosses the boundary somewhere on the arc that faces the antenna. With the
//! boundary parameterised by its polar angle `φ`, the two-segment travel time
//!
//! ```text
//! T(φ) = (n_out·|s − b(φ)| + n_in·|b(φ) − p|) / c
//! ```
//!
//! is a smooth 1-D function. Physical rays are the *stationary* points of `T`
//! (local minima and maxima alike), which are exactly the boundary points where
//! Snell's law holds. A curved boundary can produce up to three of them. The
//! global minimum of `T` over the arc, which time-shift beamformers use, need
//! not be stationary at all: it often sits at the grazing edge of the arc.
//!
//! Roots of `dT/dφ` are seeded on a 0.25° grid, including a check for pairs
//! of roots hidden between two samples, then refined by false position to
//! 1e-10 rad.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dielectric::{DielectricSpectrum, SPEED_OF_LIGHT};
use crate::geometry::{angle_between, GridSpec, Point};
use crate::{Error, Result};

/// Seed spacing for the stationary-point search.
pub const SEED_STEP_DEG: f64 = 0.25;
/// Root refinement tolerance on the boundary angle.
pub const ROOT_TOLERANCE_RAD: f64 = 1e-10;
/// Roots closer than this are the same root.
pub const MERGE_THRESHOLD_DEG: f64 = 0.05;
/// Paths whose interior angle exceeds this are numerically degenerate.
pub const MAX_REFRACTION_ANGLE_DEG: f64 = 89.9;
/// Interior points must be at least this far inside the boundary, in metres.
pub const BOUNDARY_MARGIN: f64 = 1e-9;
/// Discretisation of the least-time search.
pub const LEAST_TIME_STEP_DEG: f64 = 0.01;

const SEED_STEP: f64 = SEED_STEP_DEG * std::f64::consts::PI / 180.0;
const FINE_STEP: f64 = LEAST_TIME_STEP_DEG * std::f64::consts::PI / 180.0;
// fine samples per coarse sample in the least-time search
const FINE_PER_SEED: i64 = 25;

/// Cross-section of a dielectric cylinder: medium `interior` inside a circle,
/// medium `exterior` outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderScene {
    pub center: Point,
    pub radius: f64,
    pub exterior: DielectricSpectrum,
    pub interior: DielectricSpectrum,
}

/// One refraction solution between an exterior antenna and an interior point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPath {
    /// Crossing point on the boundary.
    pub refraction_point: Point,
    /// Polar angle of the crossing point about the cylinder centre.
    pub boundary_angle: f64,
    /// Length of the exterior segment, m.
    pub d_out: f64,
    /// Length of the interior segment, m.
    pub d_in: f64,
    /// Angle between the exterior ray and the boundary normal, rad.
    pub incidence_angle: f64,
    /// Angle between the interior ray and the boundary normal, rad.
    pub refraction_angle: f64,
    /// Travel time along the path using real refractive indices, s.
    pub travel_time: f64,
    /// Whether the path satisfies Snell's law (a stationary-time path).
    pub stationary: bool,
}

impl RayPath {
    /// `|sin θi / sin θr − n_in/n_out|`; zero at exact normal incidence.
    pub fn snell_residual(&self, index_ratio: f64) -> f64 {
        let (si, sr) = (self.incidence_angle.sin(), self.refraction_angle.sin());
        if sr.abs() < 1e-12 {
            return si.abs();
        }
        (si / sr - index_ratio).abs()
    }

    pub fn length(&self) -> f64 {
        self.d_out + self.d_in
    }
}

/// One sample of the travel-time curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateTime {
    /// Boundary angle, rad.
    pub angle: f64,
    /// Travel time, s.
    pub time: f64,
}

/// Per-pixel path counts; `None` marks pixels outside the cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCountMap {
    pub grid: GridSpec,
    pub counts: Vec<Option<u8>>,
}

impl PathCountMap {
    /// Number of interior pixels with each count 0..=3.
    pub fn histogram(&self) -> [usize; 4] {
        let mut h = [0; 4];
        for c in self.counts.iter().flatten() {
            h[(*c).min(3) as usize] += 1;
        }
        h
    }

    /// Rows of `x_m,y_m,count` for interior pixels.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("x_m,y_m,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            if let Some(c) = c {
                let p = self.grid.point(i);
                out.push_str(&format!("{},{},{}\n", p.x, p.y, c));
            }
        }
        out
    }

    /// Binary 8-bit graymap: 3, 2, 1, 0 paths map to black, dark gray, light
    /// gray and white; exterior pixels are white. Top row is the largest `y`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        for iy in (0..ny).rev() {
            for ix in 0..nx {
                let level = match self.counts[self.grid.index(ix, iy)] {
                    Some(3..) => 0,
                    Some(2) => 85,
                    Some(1) => 170,
                    Some(0) | None => 255,
                };
                out.push(level);
            }
        }
        out
    }
}

fn seed_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=720).map(|k| (k as f64 * SEED_STEP).sin_cos()).collect())
}

fn fine_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=18_000).map(|k| (k as f64 * FINE_STEP).sin_cos()).collect())
}

/// The refraction problem for one antenna/focal pair at one frequency.
#[derive(Debug, Clone, Copy)]
struct Refraction {
    center: Point,
    radius: f64,
    outside: Point,
    inside: Point,
    n_out: f64,
    n_in: f64,
    axis: f64,
    axis_sc: (f64, f64),
    half_width: f64,
}

impl Refraction {
    fn new(scene: &CylinderScene, outside: Point, inside: Point, n_out: f64, n_in: f64) -> Self {
        let rel = outside - scene.center;
        let axis = rel.angle();
        Self {
            center: scene.center,
            radius: scene.radius,
            outside,
            inside,
            n_out,
            n_in,
            axis,
            axis_sc: axis.sin_cos(),
            half_width: (scene.radius / rel.norm()).acos(),
        }
    }

    /// Boundary point and unit tangent at `axis + offset`, given `(sin, cos)`
    /// of the offset.
    fn boundary_rotated(&self, (s, c): (f64, f64)) -> (Point, Point) {
        let (sa, ca) = self.axis_sc;
        let cos = ca * c - sa * s;
        let sin = sa * c + ca * s;
        let b = Point::new(self.center.x + self.radius * cos, self.center.y + self.radius * sin);
        (b, Point::new(-sin, cos))
    }

    fn boundary_signed(&self, table: &[(f64, f64)], k: i64) -> (Point, Point) {
        let (s, c) = table[k.unsigned_abs() as usize];
        self.boundary_rotated(if k < 0 { (-s, c) } else { (s, c) })
    }

    fn boundary(&self, offset: f64) -> (Point, Point) {
        self.boundary_rotated(offset.sin_cos())
    }

    fn time_at(&self, b: Point) -> f64 {
        let d_out = self.outside.distance(b);
        let d_in = b.distance(self.inside);
        (self.n_out * d_out + self.n_in * d_in) / SPEED_OF_LIGHT
    }

    /// Direction cosines of both segments against the boundary tangent.
    fn cosines(&self, b: Point, tangent: Point) -> (f64, f64) {
        let to_out = b - self.outside;
        let to_in = b - self.inside;
        (to_out.dot(tangent) / to_out.norm(), to_in.dot(tangent) / to_in.norm())
    }

    /// `dT/dφ · c / r` from the direction cosines.
    fn combine(&self, a: f64, c: f64) -> f64 {
        self.n_out * a + self.n_in * c
    }

    fn slope(&self, offset: f64) -> f64 {
        let (b, t) = self.boundary(offset);
        let (a, c) = self.cosines(b, t);
        self.combine(a, c)
    }

    fn path(&self, offset: f64, stationary: bool) -> RayPath {
        let (b, _) = self.boundary(offset);
        let normal = (b - self.center).unit();
        let d_out = self.outside.distance(b);
        let d_in = b.distance(self.inside);
        RayPath {
            refraction_point: b,
            boundary_angle: self.axis + offset,
            d_out,
            d_in,
            incidence_angle: angle_between(normal, self.outside - b),
            refraction_angle: angle_between(-normal, self.inside - b),
            travel_time: self.time_at(b),
            stationary,
        }
    }

    /// Root of the slope inside a sign-change bracket (Illinois variant of
    /// false position).
    fn refine(&self, mut lo: f64, mut hi: f64, mut g_lo: f64, mut g_hi: f64) -> f64 {
        let mut last_side = 0i8;
        for _ in 0..200 {
            if hi - lo <= ROOT_TOLERANCE_RAD {
                break;
            }
            let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let g = self.slope(x);
            if g == 0.0 {
                return x;
            }
            if (g < 0.0) == (g_lo < 0.0) {
                lo = x;
                g_lo = g;
                if last_side == -1 {
                    g_hi *= 0.5;
                }
                last_side = -1;
            } else {
                hi = x;
                g_hi = g;
                if last_side == 1 {
                    g_lo *= 0.5;
                }
                last_side = 1;
            }
        }
        0.5 * (lo + hi)
    }

    /// Minimises `sign·slope` on `[lo, hi]` by golden-section search.
    fn slope_extremum(&self, mut lo: f64, mut hi: f64, sign: f64) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let f = |x: f64| sign * self.slope(x);
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        while hi - lo > ROOT_TOLERANCE_RAD {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = f(x2);
            }
            // stop as soon as a sign change is certain
            if f1.min(f2) < 0.0 {
                return if f1 < f2 { (x1, f1) } else { (x2, f2) };
            }
        }
        let x = 0.5 * (lo + hi);
        (x, f(x))
    }

    /// Boundary-angle offsets (relative to the axis) of all stationary points,
    /// given the seed offsets and their direction cosines.
    fn stationary_offsets(&self, offsets: &[f64], a: &[f64], c: &[f64]) -> Vec<f64> {
        let mut roots = Vec::new();
        let n = offsets.len();
        let (mut g2, mut g1) = (f64::NAN, self.combine(a[0], c[0]));
        if g1 == 0.0 {
            roots.push(offsets[0]);
        }
        for i in 1..n {
            let g = self.combine(a[i], c[i]);
            if g == 0.0 {
                roots.push(offsets[i]);
            } else if g1 * g < 0.0 {
                roots.push(self.refine(offsets[i - 1], offsets[i], g1, g));
            }
            // A pair of roots closer than the seed spacing shows up only as
            // a local minimum of |slope| without a sign change.
            if i >= 2 && g1.abs() < g2.abs() && g1.abs() < g.abs() && g2 * g1 > 0.0 && g1 * g > 0.0 {
                if let Some((lo, hi)) = self.hidden_pair(offsets[i - 2], offsets[i], g2, g1, g) {
                    roots.push(lo);
                    roots.push(hi);
                }
            }
            (g2, g1) = (g1, g);
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// Looks for two roots between `lo` and `hi` when the slope has the same
    /// sign at `lo`, the midpoint sample and `hi`.
    fn hidden_pair(&self, lo: f64, hi: f64, ga: f64, gb: f64, gc: f64) -> Option<(f64, f64)> {
        let sign = gb.signum();
        // vertex of the parabola through the three samples
        let (fa, fb, fc) = (ga * sign, gb * sign, gc * sign);
        let vertex = fb - (fc - fa).powi(2) / (8.0 * (fa + fc - 2.0 * fb));
        if vertex > 0.5 * fb {
            return None;
        }
        let (x, fx) = self.slope_extremum(lo, hi, sign);
        if fx >= 0.0 {
            return None;
        }
        let gx = fx * sign;
        Some((self.refine(lo, x, ga, gx), self.refine(x, hi, gx, gc)))
    }

    fn solve(&self, offsets: &[f64], a: &[f64], c: &[f64]) -> Vec<RayPath> {
        let merge = MERGE_THRESHOLD_DEG.to_radians();
        let max_refraction = MAX_REFRACTION_ANGLE_DEG.to_radians();
        let mut last: Option<f64> = None;
        let mut paths = Vec::new();
        for root in self.stationary_offsets(offsets, a, c) {
            if last.is_some_and(|last| root - last < merge) {
                continue;
            }
            last = Some(root);
            let path = self.path(root, true);
            if path.refraction_angle > max_refraction {
                continue;
            }
            paths.push(path);
        }
        paths.sort_by(|a, b| a.travel_time.total_cmp(&b.travel_time));
        debug_assert!(paths.len() <= 3, "{} refraction paths through a circular boundary", paths.len());
        paths
    }

    fn fine_limit(&self) -> i64 {
        let k = (self.half_width / FINE_STEP).ceil() as i64 - 1;
        // exclude a grid point that lands exactly on the tangent point
        if k >= 0 && (k as f64) * FINE_STEP >= self.half_width {
            k - 1
        } else {
            k.max(0)
        }
    }

    fn time_fine(&self, k: i64) -> f64 {
        let (b, _) = self.boundary_signed(fine_table(), k);
        self.time_at(b)
    }

    /// Global minimum of the travel time on the 0.01° grid.
    fn least_time(&self) -> RayPath {
        let k_max = self.fine_limit();
        let mut coarse: Vec<i64> = vec![-k_max];
        let mut k = (-k_max).div_euclid(FINE_PER_SEED) * FINE_PER_SEED + FINE_PER_SEED;
        while k < k_max {
            coarse.push(k);
            k += FINE_PER_SEED;
        }
        if k_max > 0 {
            coarse.push(k_max);
        }
        let times: Vec<f64> = coarse.iter().map(|&k| self.time_fine(k)).collect();

        let mut best = (f64::INFINITY, 0i64);
        let n = coarse.len();
        for i in 0..n {
            let left = if i > 0 { times[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < n { times[i + 1] } else { f64::INFINITY };
            if times[i] <= left && times[i] <= right {
                let lo = coarse[i.saturating_sub(1)];
                let hi = coarse[(i + 1).min(n - 1)];
                for k in lo..=hi {
                    let t = self.time_fine(k);
                    if t < best.0 {
                        best = (t, k);
                    }
                }
            }
        }
        let path = self.path(best.1 as f64 * FINE_STEP, false);
        RayPath { travel_time: best.0, ..path }
    }
}

/// Geometry-only part of the stationary-path search for one exterior/interior
/// pair. Building it costs one pass over the seed grid; each
/// [`solve`](Self::solve) afterwards only rescales by the refractive indices,
/// so sweeping many frequencies is cheap.
#[derive(Debug, Clone)]
pub struct PathSolver {
    problem: Refraction,
    offsets: Vec<f64>,
    a: Vec<f64>,
    c: Vec<f64>,
}

impl PathSolver {
    fn build(problem: Refraction) -> Self {
        let table = seed_table();
        let edge = problem.half_width * (1.0 - 1e-9);
        let k_max = ((edge / SEED_STEP).ceil() as i64 - 1).max(0);
        let n = 2 * k_max as usize + 3;
        let (mut offsets, mut a, mut c) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        let mut push = |offset: f64, (b, t): (Point, Point)| {
            let (ca, cc) = problem.cosines(b, t);
            offsets.push(offset);
            a.push(ca);
            c.push(cc);
        };
        push(-edge, problem.boundary(-edge));
        for k in -k_max..=k_max {
            push(k as f64 * SEED_STEP, problem.boundary_signed(table, k));
        }
        push(edge, problem.boundary(edge));
        Self { problem, offsets, a, c }
    }

    /// Stationary paths for the given exterior and interior refractive
    /// indices, ordered by travel time.
    pub fn solve(&self, n_out: f64, n_in: f64) -> Vec<RayPath> {
        let problem = Refraction { n_out, n_in, ..self.problem };
        problem.solve(&self.offsets, &self.a, &self.c)
    }

    /// Stationary paths at `frequency` in `scene`.
    pub fn solve_at(&self, scene: &CylinderScene, frequency: f64) -> Result<Vec<RayPath>> {
        let (n_out, n_in) = scene.indices(frequency)?;
        Ok(self.solve(n_out, n_in))
    }
}

impl CylinderScene {
    pub fn new(center: Point, radius: f64, exterior: DielectricSpectrum, interior: DielectricSpectrum) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius, exterior, interior })
    }

    /// Inside the boundary by more than [`BOUNDARY_MARGIN`], so points that
    /// only rounding places inside (grid pixels on the rim) count as outside.
    pub fn contains(&self, p: Point) -> bool {
        p.distance(self.center) < self.radius - BOUNDARY_MARGIN
    }

    /// Real refractive indices `(n_exterior, n_interior)` at `frequency`.
    pub fn indices(&self, frequency: f64) -> Result<(f64, f64)> {
        Ok((self.exterior.refractive_index(frequency)?, self.interior.refractive_index(frequency)?))
    }

    /// Same geometry with a different interior medium.
    pub fn with_interior(&self, interior: DielectricSpectrum) -> Self {
        Self { interior, ..self.clone() }
    }

    fn check(&self, outside: Point, inside: Point) -> Result<()> {
        if !(outside.distance(self.center) > self.radius) {
            return Err(Error::PointNotExterior { x: outside.x, y: outside.y });
        }
        if !self.contains(inside) {
            return Err(Error::PointNotInterior { x: inside.x, y: inside.y });
        }
        Ok(())
    }

    fn problem(&self, outside: Point, inside: Point, frequency: f64) -> Result<Refraction> {
        self.check(outside, inside)?;
        let (n_out, n_in) = self.indices(frequency)?;
        Ok(Refraction::new(self, outside, inside, n_out, n_in))
    }

    /// Travel time through each candidate boundary point on the arc facing
    /// `source`, spaced `step_deg` apart and symmetric about the
    /// source–centre axis. Ordered by boundary angle.
    pub fn candidate_times(&self, source: Point, focal: Point, frequency: f64, step_deg: f64) -> Result<Vec<CandidateTime>> {
        if !(step_deg > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {step_deg}")));
        }
        let problem = self.problem(source, focal, frequency)?;
        let step = step_deg.to_radians();
        let mut k_max = (problem.half_width / step).ceil() as i64 - 1;
        if k_max >= 0 && k_max as f64 * step >= problem.half_width {
            k_max -= 1;
        }
        Ok((-k_max..=k_max)
            .map(|k| {
                let offset = k as f64 * step;
                let (b, _) = problem.boundary(offset);
                CandidateTime { angle: problem.axis + offset, time: problem.time_at(b) }
            })
            .collect())
    }

    /// Every stationary-time refraction path from `source` (exterior) to
    /// `focal` (interior), ordered by travel time. Empty when no boundary
    /// point satisfies Snell's law.
    pub fn solve_refraction_points(&self, source: Point, focal: Point, frequency: f64) -> Result<Vec<RayPath>> {
        self.path_solver(source, focal)?.solve_at(self, frequency)
    }

    /// Same as [`solve_refraction_points`](Self::solve_refraction_points) but
    /// posed from the interior point towards an exterior receiver.
    pub fn solve_from_interior(&self, focal: Point, receiver: Point, frequency: f64) -> Result<Vec<RayPath>> {
        self.check(receiver, focal)?;
        let (n_out, n_in) = self.indices(frequency)?;
        Ok(PathSolver::build(Refraction::new(self, receiver, focal, n_out, n_in)).solve(n_out, n_in))
    }

    /// Reusable stationary-path search between `outside` and `inside`.
    pub fn path_solver(&self, outside: Point, inside: Point) -> Result<PathSolver> {
        self.check(outside, inside)?;
        Ok(PathSolver::build(Refraction::new(self, outside, inside, 1.0, 1.0)))
    }

    /// Minimum-time crossing on the 0.01° grid of the facing arc. Always
    /// exists; the result is not required to satisfy Snell's law.
    pub fn least_time_path(&self, source: Point, focal: Point, frequency: f64) -> Result<RayPath> {
        Ok(self.problem(source, focal, frequency)?.least_time())
    }

    /// Number of stationary paths from `source` to every interior pixel.
    pub fn path_count_map(&self, source: Point, grid: &GridSpec, frequency: f64) -> Result<PathCountMap> {
        if !(source.distance(self.center) > self.radius) {
            return Err(Error::PointNotExterior { x: source.x, y: source.y });
        }
        let (n_out, n_in) = self.indices(frequency)?;
        let counts = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = grid.point(i);
                self.contains(p).then(|| {
                    let problem = Refraction::new(self, source, p, n_out, n_in);
                    PathSolver::build(problem).solve(n_out, n_in).len() as u8
                })
            })
            .collect();
        Ok(PathCountMap { grid: *grid, counts })
    }
}
