//! Diagonal-plus-regular kernel pairings on a continuous spectrum, their time
//! evolution, and the graded pairing whose singular sectors carry poles in ε.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::DistributionTag;

/// Default upper end of the spectrum window.
pub const DEFAULT_OMEGA_MAX: f64 = 20.0;

/// Kernels must fall below this fraction of their peak at the window edges.
pub const BOUNDARY_DECAY: f64 = 1e-6;

/// Maximum points per tuple in a graded object.
pub const MAX_TUPLE_POINTS: usize = 3;

/// Maximum nodes per axis for tuple grids.
pub const MAX_TUPLE_AXIS: usize = 16;

/// Uniform grid with composite Simpson weights (3/8 rule on the last three
/// intervals when the interval count is odd).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectrumGrid {
    pub fn new(omega_min: f64, omega_max: f64, nodes: usize) -> Result<Self> {
        if !(omega_min >= 0.0) || !(omega_max > omega_min) || !omega_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        if nodes < 8 {
            return Err(Error::InvalidArgument(format!("need at least 8 nodes, got {nodes}")));
        }
        let intervals = nodes - 1;
        let h = (omega_max - omega_min) / intervals as f64;
        let points = (0..nodes)
            .map(|i| {
                if i == intervals {
                    omega_max
                } else {
                    omega_min + i as f64 * h
                }
            })
            .collect();
        let mut weights = vec![0.0; nodes];
        let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
        for i in (0..simpson_end).step_by(2) {
            weights[i] += h / 3.0;
            weights[i + 1] += 4.0 * h / 3.0;
            weights[i + 2] += h / 3.0;
        }
        if simpson_end < intervals {
            let s = simpson_end;
            let w = 3.0 * h / 8.0;
            weights[s] += w;
            weights[s + 1] += 3.0 * w;
            weights[s + 2] += 3.0 * w;
            weights[s + 3] += w;
        }
        Ok(SpectrumGrid {
            omega_min,
            omega_max,
            nodes: points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.len() - 1) as f64
    }

    /// Same window with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        SpectrumGrid::new(self.omega_min, self.omega_max, (self.len() - 1) * factor + 1)
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    fn check_same(&self, other: &SpectrumGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}] x {} vs [{}, {}] x {}",
                self.omega_min,
                self.omega_max,
                self.len(),
                other.omega_min,
                other.omega_max,
                other.len()
            )))
        }
    }
}

/// Analytic kernel families. The regular kernel is the product `f(ω) f(ω′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian { center: f64, width: f64, amplitude: f64 },
    Lorentzian { center: f64, width: f64, amplitude: f64 },
}

impl KernelFamily {
    pub fn eval(&self, omega: f64) -> f64 {
        match *self {
            KernelFamily::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let z = (omega - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            KernelFamily::Lorentzian {
                center,
                width,
                amplitude,
            } => {
                let d = omega - center;
                amplitude * width * width / (d * d + width * width)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (KernelFamily::Gaussian { center, width, amplitude }
        | KernelFamily::Lorentzian { center, width, amplitude }) = *self;
        if !(width > 0.0) || !center.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid kernel parameters {self:?}")));
        }
        Ok(())
    }
}

fn sample_product(grid: &SpectrumGrid, f: &KernelFamily) -> Array2<Complex64> {
    let v: Vec<f64> = grid.nodes.iter().map(|&w| f.eval(w)).collect();
    Array2::from_shape_fn((grid.len(), grid.len()), |(i, j)| Complex64::new(v[i] * v[j], 0.0))
}

fn check_hermitian(k: &Array2<Complex64>) -> Result<()> {
    let scale = k.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for ((i, j), z) in k.indexed_iter() {
        if (z - k[(j, i)].conj()).norm() > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "kernel is not self-adjoint at ({i}, {j})"
            )));
        }
    }
    Ok(())
}

fn check_shapes(grid: &SpectrumGrid, diagonal: &[f64], regular: &Array2<Complex64>) -> Result<()> {
    let n = grid.len();
    if diagonal.len() != n || regular.dim() != (n, n) {
        return Err(Error::GridMismatch(format!(
            "samples have shape {} / {:?}, grid has {n} nodes",
            diagonal.len(),
            regular.dim()
        )));
    }
    if diagonal.iter().any(|v| !v.is_finite()) || regular.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("kernel samples must be finite".into()));
    }
    Ok(())
}

/// Fraction of the peak reached at the window edges, over both sectors.
fn edge_fraction(grid: &SpectrumGrid, diagonal: &[f64], regular: &Array2<Complex64>) -> f64 {
    let n = grid.len();
    let peak = diagonal
        .iter()
        .map(|v| v.abs())
        .chain(regular.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = diagonal[0].abs().max(diagonal[n - 1].abs());
    for i in 0..n {
        for j in [0, n - 1] {
            edge = edge.max(regular[(i, j)].norm()).max(regular[(j, i)].norm());
        }
    }
    edge / peak
}

/// Observable `O = ∫dω O_ω|ω) + ∫∫dωdω′ O_{ωω′}|ω,ω′)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VHOperator {
    pub grid: SpectrumGrid,
    pub diagonal: Vec<f64>,
    pub regular: Array2<Complex64>,
}

impl VHOperator {
    pub fn new(grid: SpectrumGrid, diagonal: Vec<f64>, regular: Array2<Complex64>) -> Result<Self> {
        check_shapes(&grid, &diagonal, &regular)?;
        check_hermitian(&regular)?;
        Ok(VHOperator {
            grid,
            diagonal,
            regular,
        })
    }

    pub fn from_family(grid: &SpectrumGrid, diagonal: &KernelFamily, regular: &KernelFamily) -> Result<Self> {
        diagonal.validate()?;
        regular.validate()?;
        let d = grid.nodes.iter().map(|&w| diagonal.eval(w)).collect();
        VHOperator::new(grid.clone(), d, sample_product(grid, regular))
    }

    /// `O_ω = 1`, `O_{ωω′} = 0`.
    pub fn identity(grid: &SpectrumGrid) -> Self {
        let n = grid.len();
        VHOperator {
            grid: grid.clone(),
            diagonal: vec![1.0; n],
            regular: Array2::zeros((n, n)),
        }
    }

    pub fn edge_fraction(&self) -> f64 {
        edge_fraction(&self.grid, &self.diagonal, &self.regular)
    }
}

/// State `ρ = ∫dω ρ_ω(ω| + ∫∫dωdω′ ρ_{ωω′}(ω,ω′|`.
#[derive(Debug, Clone, PartialEq)]
pub struct VHState {
    pub grid: SpectrumGrid,
    pub diagonal: Vec<f64>,
    pub regular: Array2<Complex64>,
    pub normalized: bool,
}

impl VHState {
    pub fn new(
        grid: SpectrumGrid,
        diagonal: Vec<f64>,
        regular: Array2<Complex64>,
        normalized: bool,
    ) -> Result<Self> {
        check_shapes(&grid, &diagonal, &regular)?;
        check_hermitian(&regular)?;
        if diagonal.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("diagonal state weights must be >= 0".into()));
        }
        if normalized {
            let total = grid.integrate(&diagonal);
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "normalized state integrates to {total}, not 1"
                )));
            }
        }
        Ok(VHState {
            grid,
            diagonal,
            regular,
            normalized,
        })
    }

    /// Diagonal part rescaled to unit integral.
    pub fn from_family(grid: &SpectrumGrid, diagonal: &KernelFamily, regular: &KernelFamily) -> Result<Self> {
        diagonal.validate()?;
        regular.validate()?;
        let raw: Vec<f64> = grid.nodes.iter().map(|&w| diagonal.eval(w)).collect();
        let total = grid.integrate(&raw);
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("diagonal state has no positive weight".into()));
        }
        let d = raw.iter().map(|v| v / total).collect();
        VHState::new(grid.clone(), d, sample_product(grid, regular), true)
    }

    pub fn edge_fraction(&self) -> f64 {
        edge_fraction(&self.grid, &self.diagonal, &self.regular)
    }
}

/// Pairing split into its two sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolvedPairing {
    pub t: f64,
    pub diagonal: Complex64,
    pub off_diagonal: Complex64,
    pub total: Complex64,
    /// Set when `|t| · spacing > π/4`, where the phase is under-resolved.
    pub aliasing: bool,
}

/// `∫dω ρ_ω O_ω + ∫∫dωdω′ ρ_{ωω′} O_{ω′ω}`.
pub fn pairing(rho: &VHState, op: &VHOperator) -> Result<Complex64> {
    Ok(evolve_pairing(rho, op, 0.0)?.total)
}

/// Pairing with the phase `e^{−i(ω−ω′)t}` inside the off-diagonal integral.
pub fn evolve_pairing(rho: &VHState, op: &VHOperator, t: f64) -> Result<EvolvedPairing> {
    rho.grid.check_same(&op.grid)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be finite, got {t}")));
    }
    let grid = &rho.grid;
    let n = grid.len();
    let w = &grid.weights;
    let diag: f64 = (0..n).map(|i| w[i] * rho.diagonal[i] * op.diagonal[i]).sum();
    let phases: Vec<Complex64> = grid
        .nodes
        .iter()
        .map(|&om| Complex64::from_polar(1.0, -om * t))
        .collect();
    let mut off = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += w[j] * phases[j].conj() * rho.regular[(i, j)] * op.regular[(j, i)];
        }
        off += w[i] * phases[i] * row;
    }
    let diagonal = Complex64::new(diag, 0.0);
    Ok(EvolvedPairing {
        t,
        diagonal,
        off_diagonal: off,
        total: diagonal + off,
        aliasing: t.abs() * grid.spacing() > PI / 4.0,
    })
}

/// Evolved pairings over a list of times, after checking the boundary decay.
pub fn decoherence_scan(rho: &VHState, op: &VHOperator, times: &[f64]) -> Result<Vec<EvolvedPairing>> {
    for (name, frac) in [("state", rho.edge_fraction()), ("observable", op.edge_fraction())] {
        if frac >= BOUNDARY_DECAY {
            return Err(Error::InvalidArgument(format!(
                "{name} kernel reaches {frac:e} of its peak at the window edge"
            )));
        }
    }
    times.iter().map(|&t| evolve_pairing(rho, op, t)).collect()
}

/// Grid for `N`-point tuples: one axis, shared by every coordinate.
fn tuple_len(axis: usize, points: usize) -> usize {
    axis.pow(points as u32)
}

/// Identifies a singular sector: `N` points, pole order `α`, and the number `N − i`
/// of independent points left after the coincidence limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorKey {
    pub points: usize,
    pub pole_order: u32,
    pub reduced_dim: usize,
    pub tag: DistributionTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSector {
    pub key: SectorKey,
    /// Row-major samples over `(N − i)`-tuples.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularComponent {
    pub points: usize,
    /// Row-major samples over `N`-tuples.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradedKind {
    Observable,
    State,
}

/// Observable or state with a regular sector and pole-carrying singular sectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedObject {
    pub kind: GradedKind,
    pub axis: SpectrumGrid,
    pub regular: Vec<RegularComponent>,
    pub singular: Vec<SingularSector>,
}

pub type GradedObservable = GradedObject;
pub type GradedState = GradedObject;

impl GradedObject {
    pub fn new(
        kind: GradedKind,
        axis: SpectrumGrid,
        regular: Vec<RegularComponent>,
        singular: Vec<SingularSector>,
    ) -> Result<Self> {
        let n = axis.len();
        if n > MAX_TUPLE_AXIS {
            return Err(Error::InvalidArgument(format!(
                "tuple grids are capped at {MAX_TUPLE_AXIS} nodes per axis, got {n}"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &regular {
            if !(1..=MAX_TUPLE_POINTS).contains(&r.points) {
                return Err(Error::InvalidArgument(format!(
                    "regular component with {} points (allowed 1..={MAX_TUPLE_POINTS})",
                    r.points
                )));
            }
            if r.values.len() != tuple_len(n, r.points) {
                return Err(Error::GridMismatch(format!(
                    "regular component for N = {} has {} samples",
                    r.points,
                    r.values.len()
                )));
            }
            if !seen.insert(r.points) {
                return Err(Error::InvalidArgument(format!("duplicate regular component N = {}", r.points)));
            }
        }
        let mut keys = std::collections::BTreeSet::new();
        for s in &singular {
            let k = s.key;
            if k.pole_order < 1 || !(1..=MAX_TUPLE_POINTS).contains(&k.points) || k.reduced_dim > k.points {
                return Err(Error::InvalidArgument(format!("invalid singular sector {k:?}")));
            }
            if s.coefficients.len() != tuple_len(n, k.reduced_dim) {
                return Err(Error::GridMismatch(format!(
                    "sector {k:?} has {} samples",
                    s.coefficients.len()
                )));
            }
            if !keys.insert(k) {
                return Err(Error::InvalidArgument(format!("duplicate singular sector {k:?}")));
            }
        }
        Ok(GradedObject {
            kind,
            axis,
            regular,
            singular,
        })
    }

    /// True when every singular coefficient is zero (or there are no sectors).
    pub fn singular_vanishes(&self) -> bool {
        self.singular.iter().all(|s| s.coefficients.iter().all(|&c| c == 0.0))
    }
}

/// The subtraction recipe as a projection: drops every singular sector.
pub fn regularize(x: &GradedObject) -> GradedObject {
    GradedObject {
        singular: Vec::new(),
        ..x.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QftPairing {
    pub finite: Complex64,
    pub pole_terms: BTreeMap<u32, Complex64>,
}

impl QftPairing {
    /// Physical when no pole term survives.
    pub fn is_physical(&self) -> bool {
        self.pole_terms.values().all(|c| c.norm() == 0.0)
    }
}

/// Tuple weights `w_{k₁} ⋯ w_{k_d}` in row-major order.
fn tuple_weights(axis: &SpectrumGrid, dim: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..dim {
        out = out
            .iter()
            .flat_map(|&p| axis.weights.iter().map(move |&w| p * w))
            .collect();
    }
    out
}

/// Row-major index of the tuple with its coordinates in reverse order.
fn reversed_index(index: usize, axis: usize, dim: usize) -> usize {
    let mut rest = index;
    let mut rev = 0;
    for _ in 0..dim {
        rev = rev * axis + rest % axis;
        rest /= axis;
    }
    rev
}

/// `Σ_N ∫ρ^(r)_{x₁…x_N} O^(r)_{x_N…x₁} + Σ ∫ρ^(α,s) O^(α,s) ε^{−α}`.
///
/// Regular components pair with the tuple order reversed, which for `N = 2` is
/// `∫∫ρ_{xx′}O_{x′x}`. Singular sectors pair only with the sector of the same key.
pub fn qft_pairing(rho: &GradedState, op: &GradedObservable) -> Result<QftPairing> {
    rho.axis.check_same(&op.axis)?;
    let n = rho.axis.len();
    let mut finite = 0.0;
    for r in &rho.regular {
        if let Some(o) = op.regular.iter().find(|o| o.points == r.points) {
            let w = tuple_weights(&rho.axis, r.points);
            for (k, wk) in w.iter().enumerate() {
                finite += wk * r.values[k] * o.values[reversed_index(k, n, r.points)];
            }
        }
    }
    let mut pole_terms = BTreeMap::new();
    for s in &rho.singular {
        if let Some(o) = op.singular.iter().find(|o| o.key == s.key) {
            let w = tuple_weights(&rho.axis, s.key.reduced_dim);
            let v: f64 = w
                .iter()
                .zip(s.coefficients.iter().zip(&o.coefficients))
                .map(|(wk, (a, b))| wk * a * b)
                .sum();
            *pole_terms
                .entry(s.key.pole_order)
                .or_insert(Complex64::new(0.0, 0.0)) += v;
        }
    }
    Ok(QftPairing {
        finite: Complex64::new(finite, 0.0),
        pole_terms,
    })
}

/// `Z[ρ] = exp(i (ρ|O))` over the regularized arguments.
pub fn z_functional(rho: &GradedState, op: &GradedObservable) -> Result<Complex64> {
    let p = qft_pairing(&regularize(rho), &regularize(op))?;
    Ok((Complex64::new(0.0, 1.0) * p.finite).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gaussian(center: f64, width: f64) -> KernelFamily {
        KernelFamily::Gaussian {
            center,
            width,
            amplitude: 1.0,
        }
    }

    #[test]
    fn grid_weights_sum_to_length() {
        for n in [8, 9, 10, 33, 64, 257] {
            let g = SpectrumGrid::new(0.5, 7.25, n).unwrap();
            let total: f64 = g.weights.iter().sum();
            assert!((total - 6.75).abs() < 1e-12, "n = {n}");
            assert!(g.weights.iter().all(|&w| w > 0.0));
            assert!(g.nodes.windows(2).all(|p| p[1] > p[0]));
        }
        assert!(SpectrumGrid::new(0.0, 1.0, 7).is_err());
        assert!(SpectrumGrid::new(1.0, 1.0, 9).is_err());
    }

    #[test]
    fn grid_integrates_cubics_exactly() {
        for n in [8, 9] {
            let g = SpectrumGrid::new(0.0, 2.0, n).unwrap();
            let v: Vec<f64> = g.nodes.iter().map(|x| x * x * x - x).collect();
            assert_relative_eq!(g.integrate(&v), 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn identity_pairing_is_normalization() {
        let g = SpectrumGrid::new(0.0, DEFAULT_OMEGA_MAX, 129).unwrap();
        let rho = VHState::from_family(&g, &gaussian(8.0, 1.5), &gaussian(9.0, 1.0)).unwrap();
        let p = pairing(&rho, &VHOperator::identity(&g)).unwrap();
        assert!((p - 1.0).norm() < 1e-10);
    }

    #[test]
    fn diagonal_only_state() {
        let g = SpectrumGrid::new(0.0, 10.0, 65).unwrap();
        let n = g.len();
        let d: Vec<f64> = g.nodes.iter().map(|&w| gaussian(5.0, 1.0).eval(w)).collect();
        let rho = VHState::new(g.clone(), d.clone(), Array2::zeros((n, n)), false).unwrap();
        let op = VHOperator::from_family(&g, &gaussian(4.0, 2.0), &gaussian(5.0, 1.0)).unwrap();
        let expected: f64 = (0..n).map(|i| g.weights[i] * d[i] * op.diagonal[i]).sum();
        assert_eq!(pairing(&rho, &op).unwrap(), Complex64::new(expected, 0.0));
    }

    #[test]
    fn pairing_converges_under_refinement() {
        let g = SpectrumGrid::new(0.0, DEFAULT_OMEGA_MAX, 129).unwrap();
        let fine = g.refined(4).unwrap();
        let (ds, rs, dop, rop) = (gaussian(10.0, 1.2), gaussian(9.5, 1.0), gaussian(11.0, 2.0), gaussian(10.0, 1.5));
        let coarse = pairing(
            &VHState::from_family(&g, &ds, &rs).unwrap(),
            &VHOperator::from_family(&g, &dop, &rop).unwrap(),
        )
        .unwrap();
        let dense = pairing(
            &VHState::from_family(&fine, &ds, &rs).unwrap(),
            &VHOperator::from_family(&fine, &dop, &rop).unwrap(),
        )
        .unwrap();
        assert!((coarse - dense).norm() < 1e-6 * dense.norm());
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = SpectrumGrid::new(0.0, 10.0, 33).unwrap();
        let b = SpectrumGrid::new(0.0, 10.0, 65).unwrap();
        let rho = VHState::from_family(&a, &gaussian(5.0, 1.0), &gaussian(5.0, 1.0)).unwrap();
        let op = VHOperator::identity(&b);
        assert!(matches!(pairing(&rho, &op), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn non_hermitian_kernel_rejected() {
        let g = SpectrumGrid::new(0.0, 1.0, 9).unwrap();
        let mut k = Array2::zeros((9, 9));
        k[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(VHOperator::new(g, vec![0.0; 9], k).is_err());
    }

    #[test]
    fn evolution_keeps_diagonal_and_flags_aliasing() {
        let g = SpectrumGrid::new(0.0, DEFAULT_OMEGA_MAX, 257).unwrap();
        let rho = VHState::from_family(&g, &gaussian(10.0, 1.0), &gaussian(10.0, 1.0)).unwrap();
        let op = VHOperator::from_family(&g, &gaussian(10.0, 2.0), &gaussian(10.0, 1.0)).unwrap();
        let at0 = evolve_pairing(&rho, &op, 0.0).unwrap();
        assert_eq!(at0.total, pairing(&rho, &op).unwrap());
        for t in [10.0, 100.0] {
            let e = evolve_pairing(&rho, &op, t).unwrap();
            assert_eq!(e.diagonal, at0.diagonal);
        }
        assert!(!evolve_pairing(&rho, &op, 10.0).unwrap().aliasing);
        assert!(evolve_pairing(&rho, &op, 100.0).unwrap().aliasing);
    }

    #[test]
    fn gaussian_off_diagonal_decays() {
        let g = SpectrumGrid::new(0.0, DEFAULT_OMEGA_MAX, 257).unwrap();
        for width in [0.7, 1.0, 1.5] {
            let rho = VHState::from_family(&g, &gaussian(10.0, 1.0), &gaussian(10.0, width)).unwrap();
            let op = VHOperator::from_family(&g, &gaussian(10.0, 1.0), &gaussian(10.0, width)).unwrap();
            let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
            let scan = decoherence_scan(&rho, &op, &times).unwrap();
            let mags: Vec<f64> = scan.iter().map(|e| e.off_diagonal.norm()).collect();
            // monotone until the values reach the rounding floor
            let floor = 1e-12 * mags[0];
            assert!(
                mags.windows(2).all(|p| p[1] <= p[0] || p[0] < floor),
                "width {width}"
            );
            assert!(mags[40] < 1e-3 * mags[0]);
            // analytic: |∫g² e^{−iωt}|² ∝ exp(−w² t²/2)
            let t = 2.0;
            assert_relative_eq!(mags[8] / mags[0], (-width * width * t * t / 2.0).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn edge_decay_enforced() {
        let g = SpectrumGrid::new(0.0, 20.0, 65).unwrap();
        let wide = KernelFamily::Lorentzian {
            center: 10.0,
            width: 1.0,
            amplitude: 1.0,
        };
        let rho = VHState::from_family(&g, &wide, &wide).unwrap();
        let op = VHOperator::identity(&g);
        assert!(decoherence_scan(&rho, &op, &[0.0]).is_err());
    }

    fn axis(n: usize) -> SpectrumGrid {
        SpectrumGrid::new(0.0, 1.0, n).unwrap()
    }

    fn unit_sector(axis_len: usize, points: usize, reduced: usize, order: u32) -> SingularSector {
        SingularSector {
            key: SectorKey {
                points,
                pole_order: order,
                reduced_dim: reduced,
                tag: DistributionTag::Delta,
            },
            coefficients: vec![1.0; tuple_len(axis_len, reduced)],
        }
    }

    #[test]
    fn unit_regular_kernels_give_unit_area() {
        let a = axis(9);
        let unit = RegularComponent {
            points: 2,
            values: vec![1.0; 81],
        };
        let rho = GradedObject::new(GradedKind::State, a.clone(), vec![unit.clone()], vec![]).unwrap();
        let op = GradedObject::new(GradedKind::Observable, a, vec![unit], vec![]).unwrap();
        let p = qft_pairing(&rho, &op).unwrap();
        assert!((p.finite.re - 1.0).abs() < 1e-12);
        assert!(p.pole_terms.is_empty());
    }

    #[test]
    fn matched_sector_gives_domain_volume() {
        let a = SpectrumGrid::new(0.0, 2.0, 9).unwrap();
        let rho = GradedObject::new(GradedKind::State, a.clone(), vec![], vec![unit_sector(9, 3, 2, 1)]).unwrap();
        let op = GradedObject::new(GradedKind::Observable, a, vec![], vec![unit_sector(9, 3, 2, 1)]).unwrap();
        let p = qft_pairing(&rho, &op).unwrap();
        assert_relative_eq!(p.pole_terms[&1].re, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn regular_pairing_reverses_tuples() {
        let a = axis(8);
        let n = a.len();
        let rho_v: Vec<f64> = (0..n * n).map(|k| (k / n) as f64).collect();
        let op_v: Vec<f64> = (0..n * n).map(|k| (k % n) as f64 + 1.0).collect();
        let rho = GradedObject::new(GradedKind::State, a.clone(), vec![RegularComponent { points: 2, values: rho_v.clone() }], vec![]).unwrap();
        let op = GradedObject::new(GradedKind::Observable, a.clone(), vec![RegularComponent { points: 2, values: op_v.clone() }], vec![]).unwrap();
        let mut expected = 0.0;
        for i in 0..n {
            for j in 0..n {
                expected += a.weights[i] * a.weights[j] * rho_v[i * n + j] * op_v[j * n + i];
            }
        }
        assert_relative_eq!(qft_pairing(&rho, &op).unwrap().finite.re, expected, max_relative = 1e-14);
    }

    #[test]
    fn dichotomy_over_sector_presence() {
        let a = axis(8);
        for (rho_sing, op_sing) in [(false, false), (true, false), (false, true), (true, true)] {
            let sectors = |on: bool| if on { vec![unit_sector(8, 2, 1, 1)] } else { vec![] };
            let rho = GradedObject::new(GradedKind::State, a.clone(), vec![], sectors(rho_sing)).unwrap();
            let op = GradedObject::new(GradedKind::Observable, a.clone(), vec![], sectors(op_sing)).unwrap();
            let p = qft_pairing(&rho, &op).unwrap();
            let either_regular = rho.singular_vanishes() || op.singular_vanishes();
            assert_eq!(p.is_physical(), either_regular);
        }
    }

    #[test]
    fn regularize_is_projection() {
        let a = axis(8);
        let rho = GradedObject::new(GradedKind::State, a.clone(), vec![], vec![unit_sector(8, 2, 1, 2)]).unwrap();
        let r1 = regularize(&rho);
        assert_eq!(regularize(&r1), r1);
        assert!(r1.singular.is_empty());
        let op = GradedObject::new(GradedKind::Observable, a, vec![], vec![unit_sector(8, 2, 1, 2)]).unwrap();
        assert!(qft_pairing(&r1, &op).unwrap().pole_terms.is_empty());
        assert_eq!(regularize(&regularize(&op)), regularize(&op));
    }

    #[test]
    fn z_functional_two_point_toy() {
        let a = axis(12);
        let n = a.len();
        let x = &a.nodes;
        let rho1: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let op1: Vec<f64> = x.iter().map(|v| 1.0 + v).collect();
        let rho2: Vec<f64> = (0..n * n).map(|k| (x[k / n] * x[k % n]).cos()).collect();
        let op2: Vec<f64> = (0..n * n).map(|k| x[k / n] + x[k % n]).collect();
        let rho = GradedObject::new(
            GradedKind::State,
            a.clone(),
            vec![RegularComponent { points: 1, values: rho1 }, RegularComponent { points: 2, values: rho2 }],
            vec![unit_sector(n, 2, 1, 1)],
        )
        .unwrap();
        let op = GradedObject::new(
            GradedKind::Observable,
            a.clone(),
            vec![RegularComponent { points: 1, values: op1 }, RegularComponent { points: 2, values: op2 }],
            vec![unit_sector(n, 2, 1, 1)],
        )
        .unwrap();
        // ∫₀¹ e^{−x}(1+x) dx = 2 − 3/e ;  ∫∫ cos(xy)(x+y) = 2∫₀¹ sin(x) dx = 2(1 − cos 1)
        let exact = 2.0 - 3.0 / std::f64::consts::E + 2.0 * (1.0 - 1.0f64.cos());
        let z = z_functional(&rho, &op).unwrap();
        let expected = Complex64::new(0.0, exact).exp();
        assert!((z - expected).norm() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pairing_is_bilinear(a in -2.0..2.0f64, b in -2.0..2.0f64, c1 in 6.0..14.0f64, c2 in 6.0..14.0f64) {
            let g = SpectrumGrid::new(0.0, DEFAULT_OMEGA_MAX, 65).unwrap();
            let r1 = VHState::from_family(&g, &gaussian(c1, 1.0), &gaussian(c1, 1.3)).unwrap();
            let r2 = VHState::from_family(&g, &gaussian(c2, 1.5), &gaussian(c2, 0.9)).unwrap();
            let op = VHOperator::from_family(&g, &gaussian(10.0, 2.0), &gaussian(9.0, 1.1)).unwrap();
            let mix_d: Vec<f64> = r1.diagonal.iter().zip(&r2.diagonal).map(|(x, y)| a * x + b * y).collect();
            let mix_r = r1.regular.mapv(|z| z * a) + r2.regular.mapv(|z| z * b);
            // diagonal sign may be negative, so bypass the state constructor checks
            let mixed = VHState { grid: g.clone(), diagonal: mix_d, regular: mix_r, normalized: false };
            let lhs = pairing(&mixed, &op).unwrap();
            let rhs = pairing(&r1, &op).unwrap() * a + pairing(&r2, &op).unwrap() * b;
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }

        #[test]
        fn qft_pairing_is_bilinear(a in -2.0..2.0f64, b in -2.0..2.0f64, seed in 0u64..1000) {
            let ax = axis(8);
            let n = ax.len();
            let f = |s: u64, k: usize| (((k as u64 + 1) * (s + 7)) as f64 * 0.37).sin();
            let make = |s: u64| GradedObject::new(
                GradedKind::State,
                ax.clone(),
                vec![RegularComponent { points: 2, values: (0..n * n).map(|k| f(s, k)).collect() }],
                vec![SingularSector { key: unit_sector(n, 2, 1, 1).key, coefficients: (0..n).map(|k| f(s + 3, k)).collect() }],
            ).unwrap();
            let (x, y, o) = (make(seed), make(seed + 11), make(seed + 23));
            let mut mixed = x.clone();
            mixed.regular[0].values = x.regular[0].values.iter().zip(&y.regular[0].values).map(|(p, q)| a * p + b * q).collect();
            mixed.singular[0].coefficients = x.singular[0].coefficients.iter().zip(&y.singular[0].coefficients).map(|(p, q)| a * p + b * q).collect();
            let lhs = qft_pairing(&mixed, &o).unwrap();
            let px = qft_pairing(&x, &o).unwrap();
            let py = qft_pairing(&y, &o).unwrap();
            prop_assert!((lhs.finite - (px.finite * a + py.finite * b)).norm() <= 1e-10 * (1.0 + lhs.finite.norm()));
            let pole = px.pole_terms[&1] * a + py.pole_terms[&1] * b;
            prop_assert!((lhs.pole_terms[&1] - pole).norm() <= 1e-10 * (1.0 + pole.norm()));
        }
    }
}
