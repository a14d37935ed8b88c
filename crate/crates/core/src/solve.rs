//! Constructive fixed-point iterations and their diagnostics.
//!
//! * [`solve_ordered`]: `x_{n+1} = U* x_n` from a start with `x0 ≼ U* x0`.
//! * [`solve_preimage`]: `x_{n+1}` = least preimage of `x_n` under `U`.
//! * [`solve_common`]: the two-map iteration `y_{n+1} = U x_{n+1} = V x_n`.
//!
//! All three stop once a step `d(x_n, x_{n+1})` is at most `tol` and the
//! residual is at most `tol` (κ = 1 on every space). A stop with residual
//! above `10 tol` ends with [`TraceVerdict::ResidualTooLarge`]; residuals in
//! between keep the iteration going. An exactly repeated point ends the
//! iteration without being appended.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{grid_zeros, Mapping, RightInverse, DEFAULT_GRID};
use crate::space::{PartialOrder, Point, Space};
use crate::TAU_EQ;

/// Consecutive increasing steps tolerated before a trace is rejected.
const MAX_INCREASES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub cauchy_window: usize,
    /// When set, `s = 1/eta` and its geometric envelope are recorded.
    pub eta: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 100_000,
            cauchy_window: 50,
            eta: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if let Some(eta) = self.eta {
            if !(eta.is_finite() && eta > 1.0) {
                return Err(Error::InvalidEta(eta));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceVerdict {
    Converged,
    MaxIterations,
    StalledNonMonotone,
    /// Steps vanished but the final point is not a fixed point.
    ResidualTooLarge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub points: Vec<Point>,
    pub step_distances: Vec<f64>,
    pub residual: f64,
    pub verdict: TraceVerdict,
    /// `1/eta`, when `eta` was supplied.
    pub s: Option<f64>,
    /// `d_0 * s^n`, the distance-domain envelope implied by `s`
    /// (informational).
    pub envelope: Vec<f64>,
}

impl IterationTrace {
    /// A trace over `points` with step distances measured in `space`;
    /// `residual` is left at `NaN` and the verdict at `MaxIterations`.
    pub fn from_points(space: &Space, points: Vec<Point>) -> Self {
        let step_distances = points.windows(2).map(|w| space.distance(&w[0], &w[1])).collect();
        IterationTrace {
            points,
            step_distances,
            residual: f64::NAN,
            verdict: TraceVerdict::MaxIterations,
            s: None,
            envelope: Vec::new(),
        }
    }

    pub fn iterations(&self) -> usize {
        self.step_distances.len()
    }

    pub fn last(&self) -> Point {
        *self.points.last().expect("trace always holds the start point")
    }

    pub fn converged(&self) -> bool {
        self.verdict == TraceVerdict::Converged
    }

    /// `true` when every step is strictly smaller than the previous one
    /// (up to `TAU_EQ`).
    pub fn strictly_decreasing(&self) -> bool {
        self.step_distances.windows(2).all(|w| w[1] < w[0] + TAU_EQ)
    }

    pub fn summary(&self, space: &Space) -> TraceSummary {
        TraceSummary {
            verdict: self.verdict,
            iterations: self.iterations(),
            residual: self.residual,
            s: self.s,
            final_point: space.label(&self.last()),
            last_step: self.step_distances.last().copied(),
            envelope_last: self.envelope.last().copied(),
        }
    }

    /// CSV with columns `n, point, step_distance` (empty step for `n = 0`).
    pub fn write_csv<W: Write>(&self, space: &Space, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "point", "step_distance"])?;
        for (n, p) in self.points.iter().enumerate() {
            let step = if n == 0 {
                String::new()
            } else {
                format!("{:e}", self.step_distances[n - 1])
            };
            w.write_record([n.to_string(), space.label(p), step])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.json` (the summary) under `dir`.
    pub fn export(&self, space: &Space, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(space, std::fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        let summary = serde_json::to_string_pretty(&self.summary(space)).expect("summary serializes");
        std::fs::write(dir.join(format!("{stem}.json")), summary)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub verdict: TraceVerdict,
    pub iterations: usize,
    pub residual: f64,
    pub s: Option<f64>,
    pub final_point: String,
    pub last_step: Option<f64>,
    pub envelope_last: Option<f64>,
}

/// What to do after a step.
enum Next {
    Continue,
    Stop(TraceVerdict),
}

/// Shared bookkeeping of the three iterations.
struct Tracker<'a> {
    space: &'a Space,
    cfg: &'a SolverConfig,
    trace: IterationTrace,
    increases: usize,
}

impl<'a> Tracker<'a> {
    fn new(space: &'a Space, cfg: &'a SolverConfig, start: Point) -> Self {
        Tracker {
            space,
            cfg,
            trace: IterationTrace {
                points: vec![start],
                step_distances: Vec::new(),
                residual: f64::NAN,
                verdict: TraceVerdict::MaxIterations,
                s: cfg.eta.map(|e| 1.0 / e),
                envelope: Vec::new(),
            },
            increases: 0,
        }
    }

    fn current(&self) -> Point {
        self.trace.last()
    }

    /// Appends `next` (unless it repeats the current point) and decides
    /// whether to stop. `residual_at` computes the residual for a candidate
    /// final point.
    fn step(&mut self, next: Point, residual_at: impl Fn(&Point) -> Result<f64>) -> Result<Next> {
        let cur = self.current();
        let d = self.space.distance(&cur, &next);
        if d == 0.0 {
            let res = residual_at(&cur)?;
            self.trace.residual = res;
            let verdict = if res <= self.cfg.tol {
                TraceVerdict::Converged
            } else {
                TraceVerdict::ResidualTooLarge
            };
            return Ok(Next::Stop(verdict));
        }
        if let Some(&prev) = self.trace.step_distances.last() {
            if d > prev + TAU_EQ {
                self.increases += 1;
            } else {
                self.increases = 0;
            }
        }
        self.trace.points.push(next);
        self.trace.step_distances.push(d);
        if let Some(s) = self.trace.s {
            let d0 = self.trace.step_distances[0];
            self.trace.envelope.push(d0 * s.powi(self.trace.envelope.len() as i32));
        }
        if self.increases >= MAX_INCREASES {
            self.trace.residual = residual_at(&next)?;
            self.trace.verdict = TraceVerdict::StalledNonMonotone;
            let step = self.trace.iterations();
            return Err(Error::NonMonotoneTrace {
                step,
                trace: Box::new(self.trace.clone()),
            });
        }
        if d <= self.cfg.tol {
            let res = residual_at(&next)?;
            self.trace.residual = res;
            if res <= self.cfg.tol {
                return Ok(Next::Stop(TraceVerdict::Converged));
            }
            if res > 10.0 * self.cfg.tol {
                return Ok(Next::Stop(TraceVerdict::ResidualTooLarge));
            }
        }
        Ok(Next::Continue)
    }

    fn finish(mut self, verdict: TraceVerdict, residual_at: impl Fn(&Point) -> Result<f64>) -> Result<IterationTrace> {
        if self.trace.residual.is_nan() || verdict == TraceVerdict::MaxIterations {
            self.trace.residual = residual_at(&self.current())?;
        }
        self.trace.verdict = verdict;
        Ok(self.trace)
    }
}

fn check_start(space: &Space, x0: &Point) -> Result<()> {
    if space.contains(x0) {
        Ok(())
    } else {
        Err(Error::UnknownPoint(format!("{x0:?}")))
    }
}

/// Iterates `x_{n+1} = U* x_n` from `x0`, which must satisfy `x0 ≼ U* x0`.
pub fn solve_ordered(
    u: &Mapping,
    ustar: &RightInverse,
    x0: Point,
    order: &PartialOrder,
    space: &Space,
    cfg: &SolverConfig,
) -> Result<IterationTrace> {
    cfg.validate()?;
    check_start(space, &x0)?;
    let first = ustar.apply(&x0)?;
    if !order.le(space, &x0, &first) {
        return Err(Error::StartConditionViolated {
            x0: space.label(&x0),
            image: space.label(&first),
        });
    }
    let residual = |x: &Point| Ok(space.distance(x, &u.apply(x)));
    let mut t = Tracker::new(space, cfg, x0);
    for _ in 0..cfg.max_iter {
        let next = ustar.apply(&t.current())?;
        if let Next::Stop(v) = t.step(next, residual)? {
            return t.finish(v, residual);
        }
    }
    t.finish(TraceVerdict::MaxIterations, residual)
}

/// Iterates `x_{n+1}` = canonically least `U`-preimage of `x_n`.
pub fn solve_preimage(u: &Mapping, x0: Point, space: &Space, cfg: &SolverConfig) -> Result<IterationTrace> {
    cfg.validate()?;
    u.check_compatible(space)?;
    check_start(space, &x0)?;
    let residual = |x: &Point| Ok(space.distance(x, &u.apply(x)));
    let mut t = Tracker::new(space, cfg, x0);
    for _ in 0..cfg.max_iter {
        let cur = t.current();
        let next = u.least_preimage(space, &cur).ok_or_else(|| Error::NotSurjective {
            uncovered: vec![space.label(&cur)],
        })?;
        if let Next::Stop(v) = t.step(next, residual)? {
            return t.finish(v, residual);
        }
    }
    t.finish(TraceVerdict::MaxIterations, residual)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonSolution {
    /// Trace over `y_1, y_2, ...` with `y_{n+1} = U x_{n+1} = V x_n`.
    pub trace: IterationTrace,
    /// The limit `w` of the `y` sequence (its final element).
    pub w: Point,
    /// The common fixed-point candidate `u` with `Uu = w`.
    pub u: Point,
    /// `d(Uu, u)` and `d(Vu, u)`.
    pub residual_u: f64,
    pub residual_v: f64,
}

/// The two-map iteration for a common fixed point of `U` and `V`.
///
/// Requires `V(M) ⊆ U(M)`. After the `y` sequence settles at `w`, `u` is
/// taken as `w` itself when `Uw = Vw = w`, otherwise as the least
/// `U`-preimage of `w`. A coincidence at `u` where `U` and `V` do not commute
/// is reported as [`Error::CoincidenceNotFixed`].
pub fn solve_common(u: &Mapping, v: &Mapping, x0: Point, space: &Space, cfg: &SolverConfig) -> Result<CommonSolution> {
    cfg.validate()?;
    u.check_compatible(space)?;
    v.check_compatible(space)?;
    check_start(space, &x0)?;
    crate::checks::check_containment(u, v, space)?;

    let preimage = |y: &Point| {
        u.least_preimage(space, y).ok_or_else(|| Error::ContainmentViolated {
            point: "-".into(),
            image: space.label(y),
        })
    };
    // resolves the candidate u for a limit w
    let resolve = |w: &Point| -> Result<Point> {
        let uw = u.apply(w);
        if space.same_point(&uw, w) && space.same_point(&v.apply(w), w) {
            return Ok(*w);
        }
        preimage(w)
    };
    let residual = |w: &Point| -> Result<f64> {
        let c = resolve(w)?;
        let (uc, vc) = (u.apply(&c), v.apply(&c));
        Ok(space
            .distance(&uc, &c)
            .max(space.distance(&vc, &c))
            .max(space.distance(&vc, w)))
    };

    let mut x = x0;
    let y1 = v.apply(&x);
    x = preimage(&y1)?;
    let mut t = Tracker::new(space, cfg, y1);
    let mut verdict = TraceVerdict::MaxIterations;
    for _ in 0..cfg.max_iter {
        let y_next = v.apply(&x);
        let x_next = preimage(&y_next)?;
        match t.step(y_next, residual)? {
            Next::Stop(vd) => {
                verdict = vd;
                break;
            }
            Next::Continue => x = x_next,
        }
    }
    let trace = t.finish(verdict, residual)?;
    let w = trace.last();
    let cand = resolve(&w)?;
    let (uc, vc) = (u.apply(&cand), v.apply(&cand));
    if space.distance(&uc, &vc) <= cfg.tol {
        let uv = u.apply(&vc);
        let vu = v.apply(&uc);
        if space.distance(&uv, &vu) > cfg.tol {
            return Err(Error::CoincidenceNotFixed {
                point: space.label(&cand),
            });
        }
    }
    Ok(CommonSolution {
        residual_u: space.distance(&uc, &cand),
        residual_v: space.distance(&vc, &cand),
        trace,
        w,
        u: cand,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyDiagnostics {
    pub window: usize,
    /// Max pairwise distance over the last `window` points.
    pub window_diameter: f64,
    /// Diameter of the tail `x_{N/2..N}`.
    pub tail_diameter: f64,
    /// Diameter of the tail `x_{N/4..N/2}`.
    pub previous_tail_diameter: f64,
    pub steps_vanish: bool,
    pub diameter_decays: bool,
    pub not_cauchy_like: bool,
}

/// Points beyond this count are subsampled when measuring a diameter.
const DIAMETER_SAMPLE: usize = 2_000;

fn diameter(space: &Space, pts: &[Point]) -> f64 {
    let sample: Vec<Point> = if pts.len() > DIAMETER_SAMPLE {
        let step = pts.len() as f64 / DIAMETER_SAMPLE as f64;
        let mut s: Vec<Point> = (0..DIAMETER_SAMPLE).map(|i| pts[(i as f64 * step) as usize]).collect();
        s.push(*pts.last().unwrap());
        s
    } else {
        pts.to_vec()
    };
    let mut best = 0.0f64;
    for (i, a) in sample.iter().enumerate() {
        for b in &sample[i + 1..] {
            best = best.max(space.distance(a, b));
        }
    }
    best
}

/// Detects vanishing steps combined with non-shrinking tail diameters.
///
/// Steps vanish when the last step is at most 1% of the largest one. The
/// diameter decays when the dyadic tail `x_{N/2..N}` is smaller than 90% of
/// `x_{N/4..N/2}`. `not_cauchy_like` flags vanishing steps without decay.
pub fn cauchy_diagnostics(trace: &IterationTrace, space: &Space, window: usize) -> Result<CauchyDiagnostics> {
    let n = trace.points.len();
    if window == 0 || n < window {
        return Err(Error::TraceTooShort { len: n, window });
    }
    let pts = &trace.points;
    let window_diameter = diameter(space, &pts[n - window..]);
    let last = n - 1;
    let tail_diameter = diameter(space, &pts[last / 2..]);
    let previous_tail_diameter = diameter(space, &pts[last / 4..=last / 2]);
    let max_step = trace.step_distances.iter().copied().fold(0.0, f64::max);
    let steps_vanish = match trace.step_distances.last() {
        Some(&s) => s <= 0.01 * max_step,
        None => true,
    };
    let diameter_decays = tail_diameter <= TAU_EQ || tail_diameter < 0.9 * previous_tail_diameter;
    Ok(CauchyDiagnostics {
        window,
        window_diameter,
        tail_diameter,
        previous_tail_diameter,
        steps_vanish,
        diameter_decays,
        not_cauchy_like: steps_vanish && !diameter_decays,
    })
}

/// All `x` with `d(x, Ux) <= tol`: the enumeration on finite spaces, a
/// clustered grid scan (default 100 001 points) on intervals.
pub fn enumerate_fixed_points(u: &Mapping, space: &Space, tol: f64) -> Result<Vec<Point>> {
    enumerate_fixed_points_on_grid(u, space, tol, DEFAULT_GRID)
}

pub fn enumerate_fixed_points_on_grid(u: &Mapping, space: &Space, tol: f64, grid: usize) -> Result<Vec<Point>> {
    u.check_compatible(space)?;
    match space {
        Space::RealInterval { a, b } => {
            let g = |x: f64| u.apply(&Point::real(x)).coordinate().unwrap_or(f64::NAN) - x;
            let mut out: Vec<Point> = grid_zeros(g, *a, *b, grid).into_iter().map(Point::real).collect();
            if tol > TAU_EQ {
                // coarser tolerance: merge grid hits within tol as well
                let n = grid.max(2);
                let xs = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64);
                let mut clusters: Vec<(f64, f64)> = Vec::new();
                let mut open = false;
                for x in xs {
                    let r = g(x).abs();
                    if r <= tol {
                        if open {
                            let c = clusters.last_mut().unwrap();
                            if r < c.1 {
                                *c = (x, r);
                            }
                        } else {
                            clusters.push((x, r));
                            open = true;
                        }
                    } else {
                        open = false;
                    }
                }
                for (x, _) in clusters {
                    let covered = out.iter().any(|p| (p.coordinate().unwrap() - x).abs() <= (b - a) / (n - 1) as f64 * 2.0);
                    if !covered {
                        out.push(Point::real(x));
                    }
                }
                out.sort();
            }
            Ok(out)
        }
        _ => Ok(space
            .enumerate()?
            .into_iter()
            .filter(|x| space.distance(x, &u.apply(x)) <= tol)
            .collect()),
    }
}
