//! Convergence-study harness: runs (k, h) grids of local/global error
//! measurements, estimates observed orders from adjacent step sizes, audits
//! the stability constants the error analysis relies on, and emits CSV
//! reports. Named presets encode the standard experiment matrix.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::boundary::BoundaryMode;
use crate::error::{Error, Result};
use crate::integrators::{Integrator, SchemeKind};
use crate::linalg::{inf_norm_mat, matmul};
use crate::par;
use crate::problems::{registry, ManufacturedProblem};
use crate::space::{build_collocation, build_fd_dirichlet, build_fd_mixed, DiscreteSpace, SpaceKind};
use crate::tableau::builtin;

/// Space discretization request: mesh widths for the difference schemes,
/// a node count for collocation.
#[derive(Debug, Clone)]
pub enum SpaceSpec {
    FdDirichlet { h_list: Vec<f64> },
    FdMixed { h_list: Vec<f64> },
    Collocation { nodes: usize },
}

impl SpaceSpec {
    fn h_list(&self) -> Option<&[f64]> {
        match self {
            SpaceSpec::FdDirichlet { h_list } | SpaceSpec::FdMixed { h_list } => Some(h_list),
            SpaceSpec::Collocation { .. } => None,
        }
    }

    pub fn build_all(&self) -> Result<Vec<DiscreteSpace>> {
        match self {
            SpaceSpec::FdDirichlet { h_list } => {
                h_list.iter().map(|&h| build_fd_dirichlet(h)).collect()
            }
            SpaceSpec::FdMixed { h_list } => h_list.iter().map(|&h| build_fd_mixed(h)).collect(),
            SpaceSpec::Collocation { nodes } => Ok(vec![build_collocation(*nodes)?]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub problem: String,
    pub scheme: SchemeKind,
    pub tableau: String,
    pub mode: BoundaryMode,
    pub space: SpaceSpec,
    /// Step sizes, strictly descending.
    pub k_list: Vec<f64>,
    pub t_end: f64,
    pub want_local: bool,
    pub want_global: bool,
    /// Optional bound on k/h; rows beyond it are flagged in the warnings.
    pub cfl_bound: Option<f64>,
}

fn check_descending(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidConfig(format!("{name} list is empty")));
    }
    for w in xs.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidConfig(format!(
                "{name} list must be strictly descending, got {} before {}",
                w[0], w[1]
            )));
        }
    }
    if xs[xs.len() - 1] <= 0.0 {
        return Err(Error::InvalidConfig(format!("{name} values must be positive")));
    }
    Ok(())
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        check_descending("k", &self.k_list)?;
        if let Some(hs) = self.space.h_list() {
            check_descending("h", hs)?;
        } else if let SpaceSpec::Collocation { nodes } = &self.space {
            if *nodes < 3 {
                return Err(Error::InvalidConfig("need at least 3 collocation nodes".into()));
            }
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive, got {}",
                self.t_end
            )));
        }
        if !self.want_local && !self.want_global {
            return Err(Error::InvalidConfig("no error kind requested".into()));
        }
        Ok(())
    }
}

pub const ROW_OK: &str = "ok";
pub const ROW_BLOWUP: &str = "blow-up";

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub k: f64,
    pub h: f64,
    pub local_error: Option<f64>,
    pub global_error: Option<f64>,
    pub local_order: Option<f64>,
    pub global_order: Option<f64>,
    pub cfl_ratio: f64,
    pub status: &'static str,
}

#[derive(Debug, Clone, Default)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
    pub warnings: Vec<String>,
}

impl ErrorReport {
    /// Rows for one mesh width, in the k order of the study config.
    pub fn rows_for_h(&self, h: f64) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.h == h).collect()
    }
}

/// log(e1/e2) / log(k1/k2) when both errors are finite and positive.
fn observed_order(k1: f64, e1: Option<f64>, k2: f64, e2: Option<f64>) -> Option<f64> {
    let (e1, e2) = (e1?, e2?);
    if e1 > 0.0 && e2 > 0.0 && e1.is_finite() && e2.is_finite() {
        Some((e1 / e2).ln() / (k1 / k2).ln())
    } else {
        None
    }
}

/// Runs a study for a problem outside the registry (used by tests; the
/// public entry resolves the configured problem name).
pub fn run_study_on(problem: &ManufacturedProblem, cfg: &StudyConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let tableau = builtin(&cfg.tableau)?;
    let spaces = cfg.space.build_all()?;
    let jobs: Vec<(usize, f64)> = (0..spaces.len())
        .flat_map(|si| cfg.k_list.iter().map(move |&k| (si, k)))
        .collect();
    type Outcome = (Option<f64>, Option<f64>, &'static str);
    let outcomes: Vec<Result<Outcome>> = par::map_vec(jobs.clone(), |(si, k)| {
        let stepper = Integrator {
            problem,
            space: &spaces[si],
            tableau: &tableau,
            scheme: cfg.scheme,
            mode: cfg.mode,
        };
        let mut local = None;
        let mut global = None;
        let mut status = ROW_OK;
        if cfg.want_local {
            // Convergence tables quote the defect of the step from the
            // initial data; the sweep's running maximum stays available on
            // the LocalSweep for diagnostics.
            match stepper.local_error_sweep(k, cfg.t_end) {
                Ok(sweep) => local = Some(sweep.first_error),
                Err(Error::BlowUp { .. }) => {
                    local = Some(f64::INFINITY);
                    status = ROW_BLOWUP;
                }
                Err(e) => return Err(e),
            }
        }
        if cfg.want_global {
            // Convergence tables quote the error at the final time; the
            // running maximum stays available on the Evolution.
            match stepper.integrate(k, cfg.t_end) {
                Ok(run) => global = Some(run.final_error),
                Err(Error::BlowUp { .. }) => {
                    global = Some(f64::INFINITY);
                    status = ROW_BLOWUP;
                }
                Err(e) => return Err(e),
            }
        }
        Ok((local, global, status))
    });

    let mut report = ErrorReport::default();
    for (idx, ((si, k), outcome)) in jobs.into_iter().zip(outcomes).enumerate() {
        let (local, global, status) = outcome?;
        let h = spaces[si].grid.h;
        let (mut local_order, mut global_order) = (None, None);
        // Order against the previous k at the same mesh width.
        if idx % cfg.k_list.len() != 0 {
            let prev = &report.rows[idx - 1];
            local_order = observed_order(prev.k, prev.local_error, k, local);
            global_order = observed_order(prev.k, prev.global_error, k, global);
        }
        let cfl_ratio = k / h;
        if let Some(bound) = cfg.cfl_bound {
            if cfl_ratio > bound {
                report.warnings.push(format!(
                    "k={k}, h={h}: ratio k/h = {cfl_ratio:.3} exceeds the bound {bound}"
                ));
            }
        }
        if status == ROW_BLOWUP {
            report
                .warnings
                .push(format!("k={k}, h={h}: the run blew up"));
        }
        report.rows.push(ReportRow {
            k,
            h,
            local_error: local,
            global_error: global,
            local_order,
            global_order,
            cfl_ratio,
            status,
        });
    }
    Ok(report)
}

pub fn run_study(cfg: &StudyConfig) -> Result<ErrorReport> {
    let problem = registry(&cfg.problem)?;
    run_study_on(&problem, cfg)
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) => format!("{x}"),
    }
}

pub fn csv_string(report: &ErrorReport) -> String {
    let mut out = String::from("k,h,local_error,global_error,local_order,global_order,cfl_ratio,status\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            r.h,
            fmt_cell(r.local_error),
            fmt_cell(r.global_error),
            fmt_cell(r.local_order),
            fmt_cell(r.global_order),
            r.cfl_ratio,
            r.status
        );
    }
    out
}

pub fn emit_csv(report: &ErrorReport, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(report))?;
    Ok(())
}

/// Sampled stability constants behind the convergence analysis: semigroup
/// and phi-weighted norms, resolvent norms, the discrete variation-of-
/// constants partial sums, and the conjugated reaction Jacobian.
#[derive(Debug, Clone)]
pub struct AuditRecord {
    pub h: f64,
    /// max over sampled tau of ||e^{tau A}||_inf; 1 for a contraction.
    pub exp_norm_max: f64,
    /// max over sampled tau of ||tau A e^{tau A}||_inf.
    pub tau_exp_norm_max: f64,
    pub inv_norm: f64,
    pub inv_coupling_norm: f64,
    /// max over n k <= 1 of ||k A sum_{r<n} e^{r k A}||_inf.
    pub partial_sum_norm_max: f64,
    /// ||A^{-1} f_u(t, P_h u) A||_inf on the registry solution.
    pub conjugated_jacobian_norm: f64,
}

impl AuditRecord {
    pub fn values(&self) -> [(&'static str, f64); 6] {
        [
            ("exp_norm_max", self.exp_norm_max),
            ("tau_exp_norm_max", self.tau_exp_norm_max),
            ("inv_norm", self.inv_norm),
            ("inv_coupling_norm", self.inv_coupling_norm),
            ("partial_sum_norm_max", self.partial_sum_norm_max),
            ("conjugated_jacobian_norm", self.conjugated_jacobian_norm),
        ]
    }
}

fn inv_apply_mat(space: &DiscreteSpace, m: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, cols) = (m.nrows(), m.ncols());
    let mut out = Array2::zeros((n, cols));
    for c in 0..cols {
        let col = space.solve_op(&m.column(c).to_owned())?;
        out.column_mut(c).assign(&col);
    }
    Ok(out)
}

pub fn assumption_audit(space: &DiscreteSpace, k_list: &[f64]) -> Result<AuditRecord> {
    check_descending("k", k_list)?;
    let n = space.n();
    let a = space.op_dense();
    let mut exp_norm_max: f64 = 0.0;
    let mut tau_exp_norm_max: f64 = 0.0;
    for &k in k_list {
        for tau in [k / 3.0, 2.0 * k / 3.0, k] {
            let e = space.propagator().materialize(tau, 0)?;
            exp_norm_max = exp_norm_max.max(inf_norm_mat(&e));
            tau_exp_norm_max = tau_exp_norm_max.max(tau * inf_norm_mat(&a.dot(&e)));
        }
    }

    let eye = Array2::eye(n);
    let inv = inv_apply_mat(space, &eye)?;
    let inv_norm = inf_norm_mat(&inv);
    let inv_coupling = inv_apply_mat(space, space.coupling())?;
    let inv_coupling_norm = inf_norm_mat(&inv_coupling);

    // k A (e^{kA} + ... + e^{(n-1)kA}) for n k <= 1, at the coarsest k
    // (largest partial sums in the fewest terms). The sum starts at r = 1:
    // the leading e^{kA} is what keeps k A of the sum bounded.
    let k = k_list[0];
    let steps = (1.0 / k).floor().max(2.0) as usize;
    let m = space.propagator().materialize(k, 0)?;
    let mut power = m.clone();
    let mut sum = m.clone();
    let mut partial_sum_norm_max: f64 = inf_norm_mat(&(a.dot(&sum) * k));
    for _ in 3..=steps {
        power = matmul(&power, &m);
        sum += &power;
        partial_sum_norm_max = partial_sum_norm_max.max(inf_norm_mat(&(a.dot(&sum) * k)));
    }

    let problem = match space.kind() {
        SpaceKind::FdMixed => registry("mixed-nonvanishing")?,
        _ => registry("dirichlet-nonvanishing")?,
    };
    let u = problem.exact_state(space, 0.5);
    let dphi = &problem.reaction.dphi;
    let jac = Array1::from_iter(u.iter().map(|&ui| dphi(ui)));
    let mut scaled = a.clone();
    for (i, mut row) in scaled.rows_mut().into_iter().enumerate() {
        row *= jac[i];
    }
    let conjugated = inv_apply_mat(space, &scaled)?;
    let conjugated_jacobian_norm = inf_norm_mat(&conjugated);

    Ok(AuditRecord {
        h: space.grid.h,
        exp_norm_max,
        tau_exp_norm_max,
        inv_norm,
        inv_coupling_norm,
        partial_sum_norm_max,
        conjugated_jacobian_norm,
    })
}

/// The standard experiment matrix, by name.
pub fn preset(name: &str) -> Result<StudyConfig> {
    let k4 = |k0: f64| vec![k0, k0 / 2.0, k0 / 4.0, k0 / 8.0];
    let cfg = match name {
        "table2" => StudyConfig {
            problem: "dirichlet-vanishing".into(),
            scheme: SchemeKind::Classical,
            tableau: "rk2".into(),
            mode: BoundaryMode::ExactOracle,
            space: SpaceSpec::FdDirichlet { h_list: vec![5e-4] },
            k_list: k4(1e-3),
            t_end: 1.0,
            want_local: true,
            want_global: true,
            cfl_bound: None,
        },
        "table3" | "table4" => StudyConfig {
            problem: "dirichlet-nonvanishing".into(),
            scheme: SchemeKind::Classical,
            tableau: "rk2".into(),
            mode: BoundaryMode::ExactOracle,
            space: SpaceSpec::FdDirichlet {
                h_list: vec![2e-3, 1e-3, 5e-4],
            },
            k_list: k4(1e-3),
            t_end: 1.0,
            want_local: name == "table3",
            want_global: name == "table4",
            cfl_bound: None,
        },
        "table5" => StudyConfig {
            problem: "dirichlet-nonvanishing".into(),
            scheme: SchemeKind::Corrected2,
            tableau: "rk2".into(),
            mode: BoundaryMode::FromData,
            space: SpaceSpec::FdDirichlet { h_list: vec![5e-4] },
            k_list: k4(1e-3),
            t_end: 1.0,
            want_local: true,
            want_global: true,
            cfl_bound: None,
        },
        "table6" => StudyConfig {
            problem: "dirichlet-nonvanishing".into(),
            scheme: SchemeKind::Corrected3,
            tableau: "rk2".into(),
            mode: BoundaryMode::FromData,
            space: SpaceSpec::FdDirichlet { h_list: vec![5e-4] },
            k_list: k4(8e-3),
            t_end: 1.0,
            want_local: true,
            want_global: true,
            cfl_bound: None,
        },
        "table7" | "table8" => StudyConfig {
            problem: "mixed-nonvanishing".into(),
            scheme: if name == "table7" {
                SchemeKind::Classical
            } else {
                SchemeKind::Corrected3
            },
            tableau: "heun3".into(),
            mode: if name == "table7" {
                BoundaryMode::ExactOracle
            } else {
                BoundaryMode::FromData
            },
            space: SpaceSpec::FdMixed { h_list: vec![1e-3] },
            k_list: k4(0.2),
            t_end: 1.0,
            want_local: true,
            want_global: true,
            cfl_bound: None,
        },
        "table9" => StudyConfig {
            problem: "dirichlet-nonvanishing".into(),
            scheme: SchemeKind::Corrected4,
            tableau: "rk4".into(),
            mode: BoundaryMode::ExactOracle,
            space: SpaceSpec::FdDirichlet { h_list: vec![5e-4] },
            k_list: k4(0.2),
            t_end: 1.0,
            want_local: true,
            want_global: true,
            cfl_bound: None,
        },
        "table10" => StudyConfig {
            problem: "dirichlet-nonvanishing".into(),
            scheme: SchemeKind::Corrected4,
            tableau: "rk4".into(),
            mode: BoundaryMode::FromData,
            space: SpaceSpec::Collocation { nodes: 17 },
            k_list: k4(2.5e-2),
            t_end: 1.0,
            want_local: true,
            want_global: true,
            cfl_bound: None,
        },
        other => {
            return Err(Error::UnknownName {
                kind: "preset",
                name: other.to_string(),
            })
        }
    };
    Ok(cfg)
}

pub fn preset_names() -> &'static [&'static str] {
    &[
        "table2", "table3", "table4", "table5", "table6", "table7", "table8", "table9", "table10",
    ]
}
