//! Reference curves and parameter scans for the two-qubit noisy Pauli
//! steering scenario and the amplitude-damping instrument scenario.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::functionals::WitnessFunctional;
use crate::par::{map_indexed, Parallelism};
use crate::quantum::{
    amplitude_damping_kraus, conditional_assemblage, instrument_from_dilation, minimal_dilation,
    noisy_pauli_assemblage, pure_state_family, DensityMatrix,
};
use crate::witness::violation;

/// Default bracket for threshold searches in `w`.
pub const DEFAULT_BRACKET: (f64, f64) = (0.0, 0.5);
/// Default points per axis of a scan.
pub const DEFAULT_RESOLUTION: usize = 101;

const DOMAIN_SLACK: f64 = 1e-12;

/// `w² − 2w + 1/2`, the signed ℓ2 witness at the maximally entangled point.
pub fn analytic_mn_signed(w: f64) -> f64 {
    w * w - 2.0 * w + 0.5
}

pub fn analytic_mn(w: f64) -> f64 {
    analytic_mn_signed(w).max(0.0)
}

/// `(1 − w)² − √(w(2 − w))`, the signed skew-information witness with
/// `H = σ_z` at the maximally entangled point.
pub fn analytic_mi_signed(w: f64) -> f64 {
    (1.0 - w).powi(2) - (w * (2.0 - w)).max(0.0).sqrt()
}

pub fn analytic_mi(w: f64) -> f64 {
    analytic_mi_signed(w).max(0.0)
}

/// Exact root of [`analytic_mn_signed`].
pub fn mn_root() -> f64 {
    1.0 - std::f64::consts::FRAC_1_SQRT_2
}

/// Signed witness margin of the steering assemblage from `|φ(θ)>` and the
/// noisy Pauli pair.
pub fn steering_margin(g: &WitnessFunctional, theta: f64, w: f64) -> Result<f64> {
    let m = noisy_pauli_assemblage(w)?;
    let sigma = conditional_assemblage(&pure_state_family(theta), &m, 2, 2)?;
    Ok(violation(g, &sigma)?.margin)
}

/// Checks [`analytic_mi_signed`] against the engine on `points` evenly spaced
/// `w` in `[0, 1]` at `θ = π/4`.
pub fn verify_analytic_mi(points: usize, tol: f64) -> Result<()> {
    let g = WitnessFunctional::wysi(crate::linalg::pauli::z());
    for i in 0..points {
        let w = i as f64 / (points.max(2) - 1) as f64;
        let engine = steering_margin(&g, FRAC_PI_4, w)?;
        let analytic = analytic_mi_signed(w);
        if (engine - analytic).abs() > tol {
            return Err(Error::Optimizer(format!(
                "analytic skew-information curve deviates from the engine at w = {w}: {analytic} vs {engine}"
            )));
        }
    }
    Ok(())
}

/// Bisection for the zero of a signed curve with `curve(lo) > 0 ≥ curve(hi)`.
pub fn find_threshold(
    mut curve: impl FnMut(f64) -> Result<f64>,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let (mut lo, mut hi) = bracket;
    let (mut f_lo, mut f_hi) = (curve(lo)?, curve(hi)?);
    if !(f_lo > 0.0 && f_hi <= 0.0) {
        return Err(Error::Bracketing { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = curve(mid)?;
        if f_mid > 0.0 {
            (lo, f_lo) = (mid, f_mid);
        } else {
            (hi, f_hi) = (mid, f_mid);
        }
    }
    // One secant step inside the final bracket: still within tol of the
    // boundary, and exact to round-off where the curve is locally linear.
    // A clamped (identically zero) upper end falls back to the midpoint.
    if f_hi < 0.0 {
        let t = f_lo / (f_lo - f_hi);
        return Ok(lo + t * (hi - lo));
    }
    Ok(0.5 * (lo + hi))
}

/// Parameter of a scan axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    Theta,
    W,
    Gamma,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Theta => "theta",
            Parameter::W => "w",
            Parameter::Gamma => "gamma",
        }
    }

    fn domain(self) -> (f64, f64) {
        match self {
            Parameter::Theta => (0.0, FRAC_PI_2),
            Parameter::W | Parameter::Gamma => (0.0, 1.0),
        }
    }
}

/// Evenly spaced points `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub resolution: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, resolution: usize) -> Self {
        Self {
            min,
            max,
            resolution,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.resolution {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.resolution - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.resolution).map(|i| self.point(i)).collect()
    }
}

fn parse_number(token: &str) -> Option<f64> {
    let t = token.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    // forms: pi, k*pi, pi/m, k*pi/m
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (t, 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c
            .strip_suffix('*')
            .unwrap_or(c)
            .trim()
            .parse::<f64>()
            .ok()?,
        None => return None,
    };
    Some(coeff * PI / den)
}

/// Parses `a:b:n`; `a` and `b` may use `pi` (`pi/2`, `2*pi/3`).
impl FromStr for Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Shape(format!("expected a:b:n, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parse_number(parts[0]).ok_or_else(bad)?;
        let max = parse_number(parts[1]).ok_or_else(bad)?;
        let resolution = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        Ok(Self::new(min, max, resolution))
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.resolution)
    }
}

/// One axis of a scan grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub parameter: Parameter,
    pub range: Range,
}

impl Axis {
    pub fn new(parameter: Parameter, range: Range) -> Result<Self> {
        if range.resolution < 2 {
            return Err(Error::OutOfRange {
                name: "resolution",
                value: range.resolution as f64,
                min: 2.0,
                max: f64::INFINITY,
            });
        }
        let (lo, hi) = parameter.domain();
        for v in [range.min, range.max] {
            if !(lo - DOMAIN_SLACK..=hi + DOMAIN_SLACK).contains(&v) {
                return Err(Error::OutOfRange {
                    name: parameter.name(),
                    value: v,
                    min: lo,
                    max: hi,
                });
            }
        }
        let clamp = |v: f64| v.clamp(lo, hi);
        Ok(Self {
            parameter,
            range: Range::new(clamp(range.min), clamp(range.max), range.resolution),
        })
    }

    pub fn full(parameter: Parameter, resolution: usize) -> Result<Self> {
        let (lo, hi) = parameter.domain();
        Self::new(parameter, Range::new(lo, hi, resolution))
    }
}

/// Two-dimensional grid; rows are ordered with the outer axis first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub outer: Axis,
    pub inner: Axis,
}

impl ScanGrid {
    pub fn new(outer: Axis, inner: Axis) -> Self {
        Self { outer, inner }
    }

    /// `θ ∈ [0, π/2]` by `w ∈ [0, 1]`.
    pub fn steering_default() -> Self {
        Self::new(
            Axis::full(Parameter::Theta, DEFAULT_RESOLUTION).expect("valid"),
            Axis::full(Parameter::W, DEFAULT_RESOLUTION).expect("valid"),
        )
    }

    /// `γ ∈ [0, 1]` by `w ∈ [0, 1]`.
    pub fn instrument_default() -> Self {
        Self::new(
            Axis::full(Parameter::Gamma, DEFAULT_RESOLUTION).expect("valid"),
            Axis::full(Parameter::W, DEFAULT_RESOLUTION).expect("valid"),
        )
    }

    pub fn len(&self) -> usize {
        self.outer.range.resolution * self.inner.range.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of cell `k` in lexicographic order.
    pub fn cell(&self, k: usize) -> (f64, f64) {
        let n = self.inner.range.resolution;
        (self.outer.range.point(k / n), self.inner.range.point(k % n))
    }
}

/// Scan results: one row per grid cell, one value column per functional.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub grid: ScanGrid,
    pub functionals: Vec<String>,
    /// `rows[k] = (outer, inner, values)`.
    pub rows: Vec<(f64, f64, Vec<f64>)>,
}

impl ScanTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![
            self.grid.outer.parameter.name().to_string(),
            self.grid.inner.parameter.name().to_string(),
        ];
        h.extend(self.functionals.iter().cloned());
        h
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.2[j]).collect()
    }

    /// Rows sharing one outer-axis value.
    pub fn slices(&self) -> impl Iterator<Item = &[(f64, f64, Vec<f64>)]> {
        self.rows.chunks(self.grid.inner.range.resolution)
    }

    /// For column `j`: per outer value, the number of positive-to-zero
    /// transitions along the inner axis.
    pub fn zero_crossings(&self, j: usize, tol: f64) -> Vec<(f64, usize)> {
        self.slices()
            .map(|s| {
                let n = s
                    .windows(2)
                    .filter(|p| (p[0].2[j] > tol) != (p[1].2[j] > tol))
                    .count();
                (s[0].0, n)
            })
            .collect()
    }
}

fn run_scan(
    functionals: &[WitnessFunctional],
    grid: &ScanGrid,
    parallelism: Parallelism,
    cell: impl Fn(f64, f64) -> Result<Vec<f64>> + Sync + Send,
) -> Result<ScanTable> {
    let values = map_indexed(grid.len(), parallelism, |k| {
        let (a, b) = grid.cell(k);
        cell(a, b).map(|v| (a, b, v))
    });
    Ok(ScanTable {
        grid: *grid,
        functionals: functionals.iter().map(|g| g.name().to_string()).collect(),
        rows: values.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

fn expect_axes(grid: &ScanGrid, outer: Parameter) -> Result<()> {
    if grid.outer.parameter != outer || grid.inner.parameter != Parameter::W {
        return Err(Error::Shape(format!(
            "scan grid must be {} by w",
            outer.name()
        )));
    }
    Ok(())
}

/// Violation of each functional over a `(θ, w)` grid.
pub fn scan_steering(
    functionals: &[WitnessFunctional],
    grid: &ScanGrid,
    parallelism: Parallelism,
) -> Result<ScanTable> {
    expect_axes(grid, Parameter::Theta)?;
    run_scan(functionals, grid, parallelism, |theta, w| {
        let m = noisy_pauli_assemblage(w)?;
        let sigma = conditional_assemblage(&pure_state_family(theta), &m, 2, 2)?;
        functionals
            .iter()
            .map(|g| violation(g, &sigma).map(|r| r.violation))
            .collect()
    })
}

/// Violations of the state assemblage `Λ_{a|x}(ρ_C)` induced by the
/// amplitude-damping dilation with noisy Pauli measurements on the ancilla.
pub fn instrument_cell(
    functionals: &[WitnessFunctional],
    gamma: f64,
    w: f64,
    rho_c: &DensityMatrix,
) -> Result<Vec<f64>> {
    let v = minimal_dilation(&amplitude_damping_kraus(gamma)?)?;
    if v.dim_anc() == 1 {
        return Ok(vec![0.0; functionals.len()]);
    }
    let instrument = instrument_from_dilation(&v, &noisy_pauli_assemblage(w)?)?;
    let sigma = instrument.induced_assemblage(rho_c)?;
    functionals
        .iter()
        .map(|g| violation(g, &sigma).map(|r| r.violation))
        .collect()
}

/// [`instrument_cell`] over a `(γ, w)` grid.
pub fn scan_instrument(
    functionals: &[WitnessFunctional],
    grid: &ScanGrid,
    rho_c: &DensityMatrix,
    parallelism: Parallelism,
) -> Result<ScanTable> {
    expect_axes(grid, Parameter::Gamma)?;
    run_scan(functionals, grid, parallelism, |gamma, w| {
        instrument_cell(functionals, gamma, w, rho_c)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::ReferenceBasis;
    use crate::linalg::pauli;

    fn both() -> Vec<WitnessFunctional> {
        vec![
            WitnessFunctional::l2(ReferenceBasis::computational(2)),
            WitnessFunctional::wysi(pauli::z()),
        ]
    }

    #[test]
    fn analytic_values() {
        assert_eq!(analytic_mn(0.0), 0.5);
        assert!(analytic_mn_signed(mn_root()).abs() < 1e-15);
        assert_eq!(analytic_mn(0.5), 0.0);
        assert_eq!(analytic_mi(0.0), 1.0);
        assert_eq!(analytic_mi(0.3), 0.0);
        // root of (1-w)^2 = sqrt(w(2-w)) is 1 - sqrt((sqrt5 - 1)/2)
        let root = 1.0 - ((5f64.sqrt() - 1.0) / 2.0).sqrt();
        assert!(analytic_mi_signed(root).abs() < 1e-14);
    }

    #[test]
    fn analytic_mi_matches_engine() {
        verify_analytic_mi(20, 1e-8).unwrap();
    }

    #[test]
    fn thresholds() {
        let t = find_threshold(|w| Ok(analytic_mn_signed(w)), DEFAULT_BRACKET, 1e-10).unwrap();
        assert!((t - mn_root()).abs() < 1e-10);
        let t = find_threshold(|w| Ok(analytic_mi_signed(w)), DEFAULT_BRACKET, 1e-10).unwrap();
        assert!((t - 0.213_85).abs() < 1e-4);
        assert!(matches!(
            find_threshold(|_| Ok(0.0), DEFAULT_BRACKET, 1e-10),
            Err(Error::Bracketing { .. })
        ));
        assert!(find_threshold(|w| Ok(analytic_mn_signed(w)), DEFAULT_BRACKET, 0.0).is_err());
    }

    #[test]
    fn range_parsing() {
        let r: Range = "0:pi/2:3".parse().unwrap();
        assert_eq!(r.points(), vec![0.0, FRAC_PI_4, FRAC_PI_2]);
        let r: Range = "pi/4:pi/4:2".parse().unwrap();
        assert_eq!(r.min, FRAC_PI_4);
        assert!("0:1".parse::<Range>().is_err());
        assert!("0:tau:3".parse::<Range>().is_err());
        assert!(Axis::new(Parameter::W, Range::new(0.0, 1.5, 3)).is_err());
        assert!(Axis::new(Parameter::W, Range::new(0.0, 1.0, 1)).is_err());
        let r: Range = "0:2*pi/3:2".parse().unwrap();
        assert!((r.max - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn steering_scan_structure() {
        let grid = ScanGrid::new(
            Axis::new(Parameter::Theta, Range::new(0.0, FRAC_PI_4, 2)).unwrap(),
            Axis::full(Parameter::W, 11).unwrap(),
        );
        let table = scan_steering(&both(), &grid, Parallelism::Parallel).unwrap();
        assert_eq!(table.rows.len(), 22);
        assert_eq!(table.header(), vec!["theta", "w", "l2", "wysi"]);
        for (theta, w, v) in &table.rows {
            if *theta == 0.0 {
                assert!(v.iter().all(|&x| x == 0.0));
            } else {
                assert!((v[0] - analytic_mn(*w)).abs() < 1e-9);
                assert!((v[1] - analytic_mi(*w)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn instrument_cells() {
        let one = DensityMatrix::basis(2, 1);
        for gamma in [0.0, 1.0] {
            for w in [0.0, 0.4] {
                assert_eq!(
                    instrument_cell(&both(), gamma, w, &one).unwrap(),
                    vec![0.0, 0.0]
                );
            }
        }
        let v = instrument_cell(&both(), 0.5, 0.0, &one).unwrap();
        assert!(
            (v[0] - 0.5).abs() < 1e-9 && (v[1] - 1.0).abs() < 1e-9,
            "{v:?}"
        );
        for (gamma, w) in [(0.2, 0.1), (0.35, 0.05)] {
            let a = instrument_cell(&both(), gamma, w, &one).unwrap();
            let b = instrument_cell(&both(), 1.0 - gamma, w, &one).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }
    }
}
