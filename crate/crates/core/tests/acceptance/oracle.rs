//! Reference computations written independently of the library.

use psas::Point;

/// Number of stationary points of the two-segment travel time, counted as
/// sign changes of its forward difference on a 0.01° grid over the arc of
/// the circle that `source` can see.
pub fn brute_force_path_count(center: Point, radius: f64, n_out: f64, n_in: f64, source: Point, focal: Point) -> usize {
    let rel = source - center;
    let axis = rel.y.atan2(rel.x);
    let half = (radius / rel.norm()).acos();
    let step = 0.01f64.to_radians();
    let k = (half / step).floor() as i64;
    let time = |phi: f64| {
        let b = Point::new(center.x + radius * phi.cos(), center.y + radius * phi.sin());
        n_out * source.distance(b) + n_in * b.distance(focal)
    };
    let samples: Vec<f64> = (-k..=k).map(|i| time(axis + i as f64 * step)).collect();
    let diffs: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).collect();
    diffs.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

/// Local extrema strictly inside a sampled curve.
pub fn interior_extrema(values: &[f64]) -> usize {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).collect();
    diffs.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

/// `sqrt(−2 ln R)` with `R` the mean resultant length of unit phasors.
pub fn circular_std(phases: &[f64]) -> f64 {
    let n = phases.len() as f64;
    let (c, s) = phases.iter().fold((0.0, 0.0), |(c, s), p| (c + p.cos(), s + p.sin()));
    let r = (c / n).hypot(s / n);
    (-2.0 * r.ln()).sqrt()
}
