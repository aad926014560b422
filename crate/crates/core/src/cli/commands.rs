//! Per-command parameter parsing and evaluation.
//!
//! Each command reads and validates everything it needs from the config, calls
//! [`RunConfig::finish`], and only then runs the computation, so configuration
//! problems never surface as module errors.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::table::{Cell, Table};
use super::{CliError, Command};
use crate::curved::{
    coincidence_limit, dewitt_coefficients, effective_lagrangian_split, l_from_mu,
    renormalized_constants, CurvatureInvariants, GravitationalConstants,
};
use crate::error::Error;
use crate::functional::{
    decoherence_scan, evolve_pairing, KernelFamily, SpectrumGrid, VHOperator, VHState,
    BOUNDARY_DECAY, DEFAULT_OMEGA_MAX,
};
use crate::graphs::{fish, fish_closed_form, tadpole, KinematicPoint, DEFAULT_QUAD_TOL};
use crate::hadamard::{hadamard_expand, hadamard_split, HadamardInput, SingularBasisExpansion};
use crate::renorm::{
    amplitude_T, energy_density, energy_density_standard, energy_scheme_offset,
    pole_cancellation_report_at, propagator_inverse, rg_flow, CouplingSet, ReportKinematics,
    LANDAU_GUARD, MIN_FLOW_STEPS, POLE_RESIDUAL_TOL, STEP_DOUBLING_TOL,
};

/// Result of one command before it is written anywhere.
#[derive(Debug, Clone)]
pub struct Output {
    pub table: Table,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub notes: BTreeMap<&'static str, Value>,
}

impl Output {
    fn new(table: Table) -> Self {
        Output {
            table,
            tolerances: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    fn tol(mut self, name: &'static str, v: f64) -> Self {
        self.tolerances.insert(name, v);
        self
    }
}

fn invalid(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn module(e: Error) -> CliError {
    CliError::Module(e)
}

fn order_i32(cfg: &mut RunConfig, default: usize) -> Result<i32, CliError> {
    let o = cfg.usize_or("series", "order", default)?;
    i32::try_from(o).map_err(|_| CliError::Config(format!("series.order {o} is out of range")))
}

fn couplings(cfg: &mut RunConfig, need_mass: bool) -> Result<CouplingSet, CliError> {
    let lambda0 = cfg.f64_or("couplings", "lambda0", 0.0)?;
    let m_sq = if need_mass {
        cfg.f64_req("couplings", "m_sq")?
    } else {
        cfg.f64_or("couplings", "m_sq", 0.0)?
    };
    let mu = cfg.f64_or("couplings", "mu", 1.0)?;
    let cosmological = cfg.f64_or("couplings", "Lambda0", 0.0)?;
    CouplingSet::new(lambda0, m_sq, cosmological, mu).map_err(invalid)
}

fn kinematic_point(c: &CouplingSet) -> Result<KinematicPoint, CliError> {
    c.kinematics().map_err(invalid)
}

fn complex_cells(z: Complex64) -> [Cell; 2] {
    [z.re.into(), z.im.into()]
}

pub fn run(command: Command, cfg: &mut RunConfig, base: &Path) -> Result<Output, CliError> {
    match command {
        Command::Tadpole => run_tadpole(cfg),
        Command::Fish => run_fish(cfg),
        Command::Amplitude => run_amplitude(cfg),
        Command::Rgflow => run_rgflow(cfg),
        Command::Energy => run_energy(cfg),
        Command::Propagator => run_propagator(cfg),
        Command::Poles => run_poles(cfg),
        Command::Curved => run_curved(cfg),
        Command::Hadamard => run_hadamard(cfg),
        Command::Pairing => run_pairing(cfg, base),
        Command::Decohere => run_decohere(cfg, base),
    }
}

fn run_tadpole(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let c = couplings(cfg, true)?;
    let order = order_i32(cfg, 1)?;
    if !(1..=4).contains(&order) {
        return Err(CliError::Config(format!("series.order must lie in 1..=4, got {order}")));
    }
    let k = kinematic_point(&c)?;
    cfg.finish()?;

    let g = tadpole(&k, order).map_err(module)?;
    let mut table = Table::new(&["power", "re", "im"]);
    for p in g.series.min_order()..=g.series.max_order() {
        let [re, im] = complex_cells(g.series.coeff(p));
        table.push(vec![Cell::Int(p.into()), re, im]);
    }
    Ok(Output::new(table))
}

fn run_fish(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let c = couplings(cfg, true)?;
    let p_list = cfg.list_req("kinematics", "p_sq")?;
    let tol = cfg.f64_or("quadrature", "tol", DEFAULT_QUAD_TOL)?;
    let order = order_i32(cfg, 0)?;
    if !(tol > 0.0) {
        return Err(CliError::Config(format!("quadrature.tol must be > 0, got {tol}")));
    }
    if order > 4 {
        return Err(CliError::Config(format!("series.order must lie in 0..=4, got {order}")));
    }
    let k = kinematic_point(&c)?;
    cfg.finish()?;

    let mut table = Table::new(&[
        "p_sq",
        "pole_re",
        "finite_re",
        "finite_im",
        "closed_form_re",
        "closed_form_im",
    ]);
    for &p_sq in &p_list {
        let g = fish(p_sq, &k, order, tol).map_err(module)?;
        let closed = match fish_closed_form(-p_sq, &k) {
            Ok(z) => Some(z),
            Err(Error::DomainUnsupported { .. }) => None,
            Err(e) => return Err(module(e)),
        };
        let [fre, fim] = complex_cells(g.series.coeff(0));
        table.push(vec![
            p_sq.into(),
            g.series.coeff(-1).re.into(),
            fre,
            fim,
            closed.map(|z| z.re).into(),
            closed.map(|z| z.im).into(),
        ]);
    }
    Ok(Output::new(table).tol("quadrature_tol", tol))
}

/// Equal-length `s`, `t`, `u` lists from the kinematics section.
fn mandelstam(cfg: &mut RunConfig) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let s = cfg.list_req("kinematics", "s")?;
    let t = cfg.list_req("kinematics", "t")?;
    let u = cfg.list_req("kinematics", "u")?;
    if s.len() != t.len() || s.len() != u.len() {
        return Err(CliError::Config(format!(
            "kinematics.s, t and u must have equal lengths ({}, {}, {})",
            s.len(),
            t.len(),
            u.len()
        )));
    }
    Ok(s.into_iter()
        .zip(t)
        .zip(u)
        .map(|((s, t), u)| (s, t, u))
        .collect())
}

fn run_amplitude(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let c = couplings(cfg, true)?;
    let points = mandelstam(cfg)?;
    kinematic_point(&c)?;
    cfg.finish()?;

    let mut table = Table::new(&["s", "t", "u", "re_T", "im_T"]);
    for (s, t, u) in points {
        let [re, im] = complex_cells(amplitude_T(&c, s, t, u).map_err(module)?);
        table.push(vec![s.into(), t.into(), u.into(), re, im]);
    }
    Ok(Output::new(table))
}

fn run_rgflow(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let c = couplings(cfg, true)?;
    let mu_end = cfg.f64_req("flow", "mu_end")?;
    let steps = cfg.usize_or("flow", "steps", 256)?;
    if !(mu_end > 0.0) {
        return Err(CliError::Config(format!("flow.mu_end must be > 0, got {mu_end}")));
    }
    if steps < MIN_FLOW_STEPS {
        return Err(CliError::Config(format!("flow.steps must be >= {MIN_FLOW_STEPS}, got {steps}")));
    }
    cfg.finish()?;

    let traj = rg_flow(&c, mu_end, steps).map_err(module)?;
    let mut table = Table::new(&["step", "mu", "lambda0", "m0_sq", "Lambda0"]);
    for (i, p) in traj.points.iter().enumerate() {
        table.push(vec![
            Cell::Int(i as i64),
            p.mu.into(),
            p.lambda0.into(),
            p.m0_sq.into(),
            p.cosmological.into(),
        ]);
    }
    let mut out = Output::new(table)
        .tol("step_doubling", STEP_DOUBLING_TOL)
        .tol("landau_guard", LANDAU_GUARD);
    out.notes.insert("halted_at_landau", json!(traj.halted_at_landau));
    Ok(out)
}

fn run_energy(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let c = couplings(cfg, true)?;
    let order = cfg.usize_or("energy", "order", 1)?;
    let order = match order {
        1 | 2 => order as u8,
        _ => return Err(CliError::Config(format!("energy.order must be 1 or 2, got {order}"))),
    };
    kinematic_point(&c)?;
    cfg.finish()?;

    let mut table = Table::new(&["order", "subtraction", "standard", "offset"]);
    table.push(vec![
        Cell::Int(order.into()),
        energy_density(&c, order).map_err(module)?.into(),
        energy_density_standard(&c, order).map_err(module)?.into(),
        energy_scheme_offset(&c, order).map_err(module)?.into(),
    ]);
    Ok(Output::new(table))
}

fn run_propagator(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let c = couplings(cfg, true)?;
    let p_list = cfg.list_req("kinematics", "p_sq")?;
    if let Some(bad) = p_list.iter().find(|&&p| !(p > 0.0)) {
        return Err(CliError::Config(format!("kinematics.p_sq entries must be > 0, got {bad}")));
    }
    kinematic_point(&c)?;
    cfg.finish()?;

    let mut table = Table::new(&["p_sq", "g_inverse"]);
    for p_sq in p_list {
        table.push(vec![p_sq.into(), propagator_inverse(p_sq, &c).map_err(module)?.into()]);
    }
    Ok(Output::new(table))
}

fn run_poles(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let c = couplings(cfg, false)?;
    let default = ReportKinematics::symmetric(&c);
    let kin = ReportKinematics {
        s: cfg.f64_or("kinematics", "s", default.s)?,
        t: cfg.f64_or("kinematics", "t", default.t)?,
        u: cfg.f64_or("kinematics", "u", default.u)?,
        p_sq: cfg.f64_or("kinematics", "p_sq", default.p_sq)?,
    };
    kinematic_point(&c)?;
    cfg.finish()?;

    let reports = pole_cancellation_report_at(&c, &kin).map_err(module)?;
    let mut table = Table::new(&[
        "quantity_name",
        "residual_1_re",
        "residual_1_im",
        "residual_2_re",
        "residual_2_im",
        "finite_re",
        "finite_im",
        "is_finite",
    ]);
    for r in &reports {
        let res = |k: u32| r.residuals.get(&k).copied().unwrap_or_default();
        let [r1re, r1im] = complex_cells(res(1));
        let [r2re, r2im] = complex_cells(res(2));
        let [fre, fim] = complex_cells(r.finite);
        table.push(vec![
            r.quantity_name.as_str().into(),
            r1re,
            r1im,
            r2re,
            r2im,
            fre,
            fim,
            r.is_finite.into(),
        ]);
    }
    Ok(Output::new(table).tol("pole_residual", POLE_RESIDUAL_TOL))
}

fn run_curved(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let inv = CurvatureInvariants {
        r: cfg.f64_or("curvature", "R", 0.0)?,
        ricci_sq: cfg.f64_or("curvature", "RicciSq", 0.0)?,
        riemann_sq: cfg.f64_or("curvature", "RiemannSq", 0.0)?,
        box_r: cfg.f64_or("curvature", "BoxR", 0.0)?,
        xi: cfg.f64_or("curvature", "xi", 0.0)?,
    };
    inv.validate().map_err(invalid)?;
    let m = cfg.f64_req("field", "m")?;
    let mu = cfg.f64_or("field", "mu", 1.0)?;
    let tail = cfg.list_opt("field", "tail")?.unwrap_or_default();
    let order = order_i32(cfg, 0)?;
    if !(m > 0.0) || !(mu > 0.0) {
        return Err(CliError::Config(format!("field.m and field.mu must be > 0, got {m}, {mu}")));
    }
    if order > 3 {
        return Err(CliError::Config(format!("series.order must lie in 0..=3, got {order}")));
    }
    let l = match cfg.f64_opt("gravity", "l")? {
        Some(l) => l,
        None => l_from_mu(m, mu),
    };
    let alpha = cfg.list_opt("gravity", "alpha")?.unwrap_or_else(|| vec![0.0; 3]);
    let alpha_abc: [f64; 3] = alpha
        .try_into()
        .map_err(|_| CliError::Config("gravity.alpha needs exactly three values".into()))?;
    let gc = GravitationalConstants {
        g0: cfg.f64_req("gravity", "G0")?,
        cosmological: cfg.f64_or("gravity", "Lambda0", 0.0)?,
        l,
        g: cfg.f64_or("gravity", "g", 0.0)?,
        alpha_abc,
    };
    if !(gc.g0 > 0.0) {
        return Err(CliError::Config(format!("gravity.G0 must be > 0, got {}", gc.g0)));
    }
    cfg.finish()?;

    let a = dewitt_coefficients(&inv);
    let split = effective_lagrangian_split(&inv, m, mu, order, &tail, gc.l, gc.g).map_err(module)?;
    let lim = coincidence_limit(&inv, m, &tail, gc.l, gc.g).map_err(module)?;
    let consts = renormalized_constants(&gc, m).map_err(module)?;
    let total = split.singular.total();
    let mut table = Table::new(&[
        "a0",
        "a1",
        "a2",
        "l",
        "pole_re",
        "lagrangian_regular",
        "coincidence_euclidean",
        "G_phys",
        "Lambda_phys",
    ]);
    table.push(vec![
        a.a0.into(),
        a.a1.into(),
        a.a2.into(),
        gc.l.into(),
        total.coeff(-1).re.into(),
        split.regular.into(),
        lim.euclidean().into(),
        consts.g_phys.into(),
        consts.lambda_phys.into(),
    ]);
    let mut out = Output::new(table);
    out.notes.insert("dropped_tail", json!(lim.dropped_tail));
    Ok(out)
}

fn push_terms(table: &mut Table, part: &str, e: &SingularBasisExpansion) {
    for term in e.term_list() {
        let key = term.key;
        table.push(vec![
            part.into(),
            Cell::Text(enum_name(&key.channel)),
            Cell::Text(enum_name(&key.tag)),
            Cell::Int(key.source as i64),
            term.coefficient.into(),
        ]);
    }
}

fn enum_name<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

fn run_hadamard(cfg: &mut RunConfig) -> Result<Output, CliError> {
    let sigma = cfg.f64_req("hadamard", "sigma")?;
    let m = cfg.f64_req("hadamard", "m")?;
    let a = cfg.list_req("hadamard", "a")?;
    let vanvleck = cfg.f64_or("hadamard", "vanvleck", 1.0)?;
    let a_count = cfg.usize_or("hadamard", "a_count", 3)?;
    if a_count < 3 {
        return Err(CliError::Config(format!("hadamard.a_count must be >= 3, got {a_count}")));
    }
    cfg.finish()?;

    let input = HadamardInput { sigma, m, a, vanvleck };
    let e = hadamard_expand(&input).map_err(module)?;
    let split = hadamard_split(&e, a_count).map_err(module)?;
    let mut table = Table::new(&["part", "channel", "tag", "source", "coefficient"]);
    push_terms(&mut table, "singular", &split.singular);
    push_terms(&mut table, "regular", &split.regular);
    let mut out = Output::new(table);
    let dropped: Vec<Value> = e
        .dropped
        .iter()
        .map(|k| json!({"channel": k.channel, "tag": k.tag, "source": k.source}))
        .collect();
    out.notes.insert("dropped_terms", Value::Array(dropped));
    out.notes.insert("truncation_order", json!(e.truncation_order));
    Ok(out)
}

/// A kernel given either by an analytic family or by a CSV grid file.
enum KernelSpec {
    Family(KernelFamily),
    Diagonal(Vec<f64>),
    Regular(Array2<Complex64>),
}

fn kernel_spec(
    cfg: &mut RunConfig,
    section: &str,
    regular: bool,
    grid: &SpectrumGrid,
    base: &Path,
) -> Result<KernelSpec, CliError> {
    if let Some(path) = cfg.string(section, "csv") {
        let path = base.join(path);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read kernel {}: {e}", path.display())))?;
        return if regular {
            read_regular_csv(&text, grid).map(KernelSpec::Regular)
        } else {
            read_diagonal_csv(&text, grid).map(KernelSpec::Diagonal)
        };
    }
    let family = cfg
        .string(section, "family")
        .ok_or_else(|| CliError::Config(format!("[{section}] needs 'family' or 'csv'")))?;
    let center = cfg.f64_req(section, "center")?;
    let width = cfg.f64_req(section, "width")?;
    let amplitude = cfg.f64_or(section, "amplitude", 1.0)?;
    let f = match family.as_str() {
        "gaussian" => KernelFamily::Gaussian { center, width, amplitude },
        "lorentzian" => KernelFamily::Lorentzian { center, width, amplitude },
        other => {
            return Err(CliError::Config(format!(
                "{section}.family '{other}' is not gaussian or lorentzian"
            )))
        }
    };
    f.validate().map_err(invalid)?;
    Ok(KernelSpec::Family(f))
}

fn csv_rows(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| CliError::Config("empty kernel file".into()))?;
    let mut first = header.split(',').map(str::trim);
    if first.next() != Some("omega") {
        return Err(CliError::Config("kernel file header must start with 'omega'".into()));
    }
    let header_vals: Vec<f64> = first
        .map(|s| s.parse::<f64>())
        .collect::<Result<_, _>>()
        .unwrap_or_default();
    let mut rows = vec![header_vals];
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::Config(format!("kernel file row {}: bad number", i + 2)))?;
        rows.push(row);
    }
    Ok(rows)
}

fn check_node(got: f64, want: f64, what: &str) -> Result<(), CliError> {
    let scale = want.abs().max(1.0);
    if (got - want).abs() > 1e-9 * scale {
        return Err(CliError::Config(format!(
            "kernel {what} omega {got} does not match grid node {want}"
        )));
    }
    Ok(())
}

/// Header `omega,value`, then rows `ω_i,ρ(ω_i)`.
fn read_diagonal_csv(text: &str, grid: &SpectrumGrid) -> Result<Vec<f64>, CliError> {
    let rows = csv_rows(text)?;
    let data = &rows[1..];
    if data.len() != grid.len() {
        return Err(CliError::Config(format!(
            "diagonal kernel has {} rows, grid has {} nodes",
            data.len(),
            grid.len()
        )));
    }
    data.iter()
        .zip(&grid.nodes)
        .map(|(row, &w)| {
            if row.len() != 2 {
                return Err(CliError::Config("diagonal kernel rows need 'omega,value'".into()));
            }
            check_node(row[0], w, "row")?;
            Ok(row[1])
        })
        .collect()
}

/// Header `omega,ω_1,…,ω_n`, then rows `ω_i,K(ω_i,ω_1),…,K(ω_i,ω_n)`.
fn read_regular_csv(text: &str, grid: &SpectrumGrid) -> Result<Array2<Complex64>, CliError> {
    let rows = csv_rows(text)?;
    let n = grid.len();
    if rows[0].len() != n {
        return Err(CliError::Config(format!(
            "regular kernel header has {} nodes, grid has {n}",
            rows[0].len()
        )));
    }
    for (&got, &want) in rows[0].iter().zip(&grid.nodes) {
        check_node(got, want, "column")?;
    }
    let data = &rows[1..];
    if data.len() != n {
        return Err(CliError::Config(format!("regular kernel has {} rows, grid has {n} nodes", data.len())));
    }
    let mut k = Array2::zeros((n, n));
    for (i, row) in data.iter().enumerate() {
        if row.len() != n + 1 {
            return Err(CliError::Config(format!("regular kernel row {} has {} fields", i + 2, row.len())));
        }
        check_node(row[0], grid.nodes[i], "row")?;
        for j in 0..n {
            k[(i, j)] = Complex64::new(row[j + 1], 0.0);
        }
    }
    Ok(k)
}

fn spectrum_grid(cfg: &mut RunConfig) -> Result<SpectrumGrid, CliError> {
    let lo = cfg.f64_or("grid", "omega_min", 0.0)?;
    let hi = cfg.f64_or("grid", "omega_max", DEFAULT_OMEGA_MAX)?;
    let n = cfg.usize_or("grid", "nodes", 257)?;
    SpectrumGrid::new(lo, hi, n).map_err(invalid)
}

fn sample_diagonal(spec: KernelSpec, grid: &SpectrumGrid) -> Vec<f64> {
    match spec {
        KernelSpec::Family(f) => grid.nodes.iter().map(|&w| f.eval(w)).collect(),
        KernelSpec::Diagonal(v) => v,
        KernelSpec::Regular(_) => unreachable!("diagonal section parsed as regular"),
    }
}

fn sample_regular(spec: KernelSpec, grid: &SpectrumGrid) -> Array2<Complex64> {
    match spec {
        KernelSpec::Family(f) => {
            let v: Vec<f64> = grid.nodes.iter().map(|&w| f.eval(w)).collect();
            Array2::from_shape_fn((grid.len(), grid.len()), |(i, j)| Complex64::new(v[i] * v[j], 0.0))
        }
        KernelSpec::Regular(k) => k,
        KernelSpec::Diagonal(_) => unreachable!("regular section parsed as diagonal"),
    }
}

fn state_and_observable(cfg: &mut RunConfig, base: &Path) -> Result<(VHState, VHOperator), CliError> {
    let grid = spectrum_grid(cfg)?;
    let sd = kernel_spec(cfg, "state_diagonal", false, &grid, base)?;
    let sr = kernel_spec(cfg, "state_regular", true, &grid, base)?;
    let od = kernel_spec(cfg, "observable_diagonal", false, &grid, base)?;
    let or = kernel_spec(cfg, "observable_regular", true, &grid, base)?;
    let rho = match (sd, sr) {
        (KernelSpec::Family(d), KernelSpec::Family(r)) => VHState::from_family(&grid, &d, &r),
        (d, r) => VHState::new(grid.clone(), sample_diagonal(d, &grid), sample_regular(r, &grid), true),
    }
    .map_err(invalid)?;
    let op = match (od, or) {
        (KernelSpec::Family(d), KernelSpec::Family(r)) => VHOperator::from_family(&grid, &d, &r),
        (d, r) => VHOperator::new(grid.clone(), sample_diagonal(d, &grid), sample_regular(r, &grid)),
    }
    .map_err(invalid)?;
    Ok((rho, op))
}

const PAIRING_COLUMNS: [&str; 8] = [
    "t",
    "diagonal_re",
    "off_diagonal_re",
    "off_diagonal_im",
    "off_diagonal_abs",
    "total_re",
    "total_im",
    "aliasing",
];

fn pairing_row(p: &crate::functional::EvolvedPairing) -> Vec<Cell> {
    vec![
        p.t.into(),
        p.diagonal.re.into(),
        p.off_diagonal.re.into(),
        p.off_diagonal.im.into(),
        p.off_diagonal.norm().into(),
        p.total.re.into(),
        p.total.im.into(),
        p.aliasing.into(),
    ]
}

fn run_pairing(cfg: &mut RunConfig, base: &Path) -> Result<Output, CliError> {
    let (rho, op) = state_and_observable(cfg, base)?;
    let t = cfg.f64_or("time", "t", 0.0)?;
    cfg.finish()?;

    let p = evolve_pairing(&rho, &op, t).map_err(module)?;
    let mut table = Table::new(&PAIRING_COLUMNS);
    table.push(pairing_row(&p));
    Ok(Output::new(table))
}

fn run_decohere(cfg: &mut RunConfig, base: &Path) -> Result<Output, CliError> {
    let (rho, op) = state_and_observable(cfg, base)?;
    let times = match cfg.list_opt("time", "times")? {
        Some(list) => {
            if cfg.has("time", "t_max") || cfg.has("time", "t_steps") {
                return Err(CliError::Config("give either time.times or time.t_max/t_steps".into()));
            }
            list
        }
        None => {
            let t_min = cfg.f64_or("time", "t_min", 0.0)?;
            let t_max = cfg.f64_req("time", "t_max")?;
            let steps = cfg.usize_or("time", "t_steps", 50)?;
            if steps == 0 || !(t_max > t_min) {
                return Err(CliError::Config("need t_max > t_min and t_steps >= 1".into()));
            }
            let h = (t_max - t_min) / steps as f64;
            (0..=steps)
                .map(|i| if i == steps { t_max } else { t_min + i as f64 * h })
                .collect()
        }
    };
    cfg.finish()?;

    let scan = decoherence_scan(&rho, &op, &times).map_err(module)?;
    let mut table = Table::new(&PAIRING_COLUMNS);
    for p in &scan {
        table.push(pairing_row(p));
    }
    Ok(Output::new(table).tol("boundary_decay", BOUNDARY_DECAY))
}
