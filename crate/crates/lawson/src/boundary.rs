//! Boundary traces feeding the corrected integrators. For a step of local
//! order p the update needs value traces of A^l u and of (iterated) images
//! of f under A at the current state; everything reduces to boundary data,
//! forcing derivatives and at most two quantities recovered numerically:
//! the solution's x-derivative at a Dirichlet end (one-sided space stencil)
//! and its time derivative at a Neumann end (backward differentiation of
//! the trajectory).

use std::collections::VecDeque;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::problems::ManufacturedProblem;
use crate::space::{BcKind, DiscreteSpace, Side};
use crate::tableau::ButcherTableau;

/// Backward 4-point first derivative at the newest point; `y[j]` is the
/// value at t - j k. Exact on cubics, error O(k^3).
pub fn bdf_time_first(y: [f64; 4], k: f64) -> f64 {
    (11.0 * y[0] - 18.0 * y[1] + 9.0 * y[2] - 2.0 * y[3]) / (6.0 * k)
}

/// Backward 4-point second derivative at the newest point. Exact on cubics,
/// error O(k^2).
pub fn bdf_time_second(y: [f64; 4], k: f64) -> f64 {
    (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (k * k)
}

/// Where boundary traces come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Evaluate the exact-solution closures (reference runs).
    ExactOracle,
    /// Recover from boundary data plus the numerical trajectory.
    FromData,
}

const HISTORY_DEPTH: usize = 4;

/// Rolling window of the last few accepted states, newest last.
#[derive(Debug, Clone, Default)]
pub struct TraceHistory {
    snaps: VecDeque<(f64, Array1<f64>)>,
}

impl TraceHistory {
    pub fn new() -> Self {
        TraceHistory::default()
    }

    pub fn push(&mut self, t: f64, u: Array1<f64>) {
        if self.snaps.len() == HISTORY_DEPTH {
            self.snaps.pop_front();
        }
        self.snaps.push_back((t, u));
    }

    pub fn len(&self) -> usize {
        self.snaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snaps.is_empty()
    }

    pub fn clear(&mut self) {
        self.snaps.clear();
    }

    fn window(&self, k: f64) -> Result<[&Array1<f64>; 4]> {
        if self.snaps.len() < HISTORY_DEPTH {
            return Err(Error::InsufficientHistory {
                needed: HISTORY_DEPTH,
                got: self.snaps.len(),
            });
        }
        // Newest first; spacing must match the current step size.
        for j in 0..3 {
            let dt = self.snaps[3 - j].0 - self.snaps[2 - j].0;
            if (dt - k).abs() > 1e-6 * k {
                return Err(Error::InvalidConfig(format!(
                    "history spacing {dt} does not match step {k}"
                )));
            }
        }
        Ok([&self.snaps[3].1, &self.snaps[2].1, &self.snaps[1].1, &self.snaps[0].1])
    }

    /// d/dt of a single component at the newest snapshot.
    pub fn node_dot(&self, idx: usize, k: f64) -> Result<f64> {
        let w = self.window(k)?;
        Ok(bdf_time_first([w[0][idx], w[1][idx], w[2][idx], w[3][idx]], k))
    }

    /// d^2/dt^2 of a single component at the newest snapshot.
    pub fn node_ddot(&self, idx: usize, k: f64) -> Result<f64> {
        let w = self.window(k)?;
        Ok(bdf_time_second([w[0][idx], w[1][idx], w[2][idx], w[3][idx]], k))
    }

    /// Nodewise d/dt of the whole state at the newest snapshot.
    pub fn vector_dot(&self, k: f64) -> Result<Array1<f64>> {
        let w = self.window(k)?;
        Ok(Array1::from_shape_fn(w[0].len(), |i| {
            bdf_time_first([w[0][i], w[1][i], w[2][i], w[3][i]], k)
        }))
    }
}

/// Everything the corrected schemes trace at one step, per endpoint
/// (index 0 = left, 1 = right). Stage-indexed vectors follow the tableau.
#[derive(Debug, Clone)]
pub struct StepTraces {
    /// Value traces of u, Au, A^2 u, A^3 u at t_n.
    pub du: [f64; 2],
    pub dau: [f64; 2],
    pub da2u: [f64; 2],
    pub da3u: [f64; 2],
    /// Traces of f, A f, A^2 f at (t_n, u(t_n)).
    pub df0: [f64; 2],
    pub daf0: [f64; 2],
    pub da2f0: [f64; 2],
    /// Per stage i: trace of f(t_n + c_i k, u + c_i k u_t).
    pub df_stage: Vec<[f64; 2]>,
    /// Per stage i: trace of A f(t_n + c_i k, u + c_i k u_t).
    pub daf_stage: Vec<[f64; 2]>,
    /// Per stage i: trace of f at the reconstructed stage argument used by
    /// the fourth-order update.
    pub df_big: Vec<[f64; 2]>,
}

/// Per-endpoint primitive quantities the trace formulas consume. Fields not
/// required at the requested order stay NaN so accidental use is caught by
/// the integrator's finiteness checks.
struct SideState {
    g: f64,
    gd: f64,
    gdd: f64,
    gddd: f64,
    /// Value trace of u and its time derivative.
    ub: f64,
    ubd: f64,
    /// x-derivative trace of u and its time derivative.
    ux: f64,
    uxd: f64,
}

fn boundary_unknown_index(space: &DiscreteSpace, side: Side) -> Result<usize> {
    let nodes = &space.grid.nodes;
    let (idx, xe) = match side {
        Side::Left => (0, 0.0),
        Side::Right => (nodes.len() - 1, 1.0),
    };
    if (nodes[idx] - xe).abs() < 1e-12 {
        Ok(idx)
    } else {
        Err(Error::Unsupported(
            "flux boundary data needs an unknown on the boundary node".into(),
        ))
    }
}

/// Value trace of u at each endpoint: the datum where it is Dirichlet, the
/// numerical boundary unknown where it is Neumann.
fn value_pair(
    problem: &ManufacturedProblem,
    space: &DiscreteSpace,
    t: f64,
    u: &Array1<f64>,
) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for side in [Side::Left, Side::Right] {
        let s = side.index();
        out[s] = match problem.boundary[s].kind {
            BcKind::Dirichlet => (problem.boundary[s].g)(t),
            BcKind::Neumann => u[boundary_unknown_index(space, side)?],
            BcKind::Robin { .. } => {
                return Err(Error::Unsupported("corrected traces for Robin data".into()))
            }
        };
    }
    Ok(out)
}

/// Time derivative of the value trace at each endpoint.
fn value_dot_pair(
    problem: &ManufacturedProblem,
    space: &DiscreteSpace,
    mode: BoundaryMode,
    history: &TraceHistory,
    t: f64,
    k: f64,
) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for side in [Side::Left, Side::Right] {
        let s = side.index();
        out[s] = match problem.boundary[s].kind {
            BcKind::Dirichlet => (problem.boundary[s].g_dot)(t),
            BcKind::Neumann => match mode {
                BoundaryMode::ExactOracle => (problem.solution.u_t)(t, side.coordinate()),
                BoundaryMode::FromData => {
                    history.node_dot(boundary_unknown_index(space, side)?, k)?
                }
            },
            BcKind::Robin { .. } => {
                return Err(Error::Unsupported("corrected traces for Robin data".into()))
            }
        };
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn side_state(
    side: Side,
    order: usize,
    problem: &ManufacturedProblem,
    space: &DiscreteSpace,
    mode: BoundaryMode,
    history: &TraceHistory,
    t: f64,
    k: f64,
    u: &Array1<f64>,
) -> Result<SideState> {
    let s = side.index();
    let xe = side.coordinate();
    let bd = &problem.boundary[s];
    let g = (bd.g)(t);
    let gd = (bd.g_dot)(t);
    let gdd = (bd.g_ddot)(t);
    let gddd = (bd.g_dddot)(t);
    let mut st = SideState {
        g,
        gd,
        gdd,
        gddd,
        ub: f64::NAN,
        ubd: f64::NAN,
        ux: f64::NAN,
        uxd: f64::NAN,
    };
    match bd.kind {
        BcKind::Dirichlet => {
            st.ub = g;
            st.ubd = gd;
            if order >= 3 {
                st.ux = match mode {
                    BoundaryMode::ExactOracle => (problem.solution.u_x)(t, xe),
                    BoundaryMode::FromData => {
                        let vp = value_pair(problem, space, t, u)?;
                        space.stencil(side).apply(vp[0], vp[1], u)
                    }
                };
            }
            if order >= 4 {
                st.uxd = match mode {
                    BoundaryMode::ExactOracle => (problem.solution.u_tx)(t, xe),
                    BoundaryMode::FromData => {
                        let vdp = value_dot_pair(problem, space, mode, history, t, k)?;
                        let udot = history.vector_dot(k)?;
                        space.stencil(side).apply(vdp[0], vdp[1], &udot)
                    }
                };
            }
        }
        BcKind::Neumann => {
            st.ux = g;
            st.uxd = gd;
            st.ub = match mode {
                BoundaryMode::ExactOracle => (problem.solution.u)(t, xe),
                BoundaryMode::FromData => u[boundary_unknown_index(space, side)?],
            };
            if order >= 3 {
                st.ubd = match mode {
                    BoundaryMode::ExactOracle => (problem.solution.u_t)(t, xe),
                    BoundaryMode::FromData => {
                        history.node_dot(boundary_unknown_index(space, side)?, k)?
                    }
                };
            }
        }
        BcKind::Robin { .. } => {
            return Err(Error::Unsupported("corrected traces for Robin data".into()))
        }
    }
    Ok(st)
}

/// Computes every boundary trace a corrected scheme of the given local
/// order (2, 3 or 4) consumes over one step from (t, u).
#[allow(clippy::too_many_arguments)]
pub fn compute_traces(
    order: usize,
    problem: &ManufacturedProblem,
    space: &DiscreteSpace,
    mode: BoundaryMode,
    history: &TraceHistory,
    tableau: &ButcherTableau,
    t: f64,
    k: f64,
    u: &Array1<f64>,
) -> Result<StepTraces> {
    assert!((2..=4).contains(&order), "corrected orders are 2..=4");
    let stages = tableau.c.len();
    let mut tr = StepTraces {
        du: [0.0; 2],
        dau: [0.0; 2],
        da2u: [0.0; 2],
        da3u: [0.0; 2],
        df0: [0.0; 2],
        daf0: [0.0; 2],
        da2f0: [0.0; 2],
        df_stage: vec![[0.0; 2]; if order >= 3 { stages } else { 0 }],
        daf_stage: vec![[0.0; 2]; if order >= 4 { stages } else { 0 }],
        df_big: vec![[0.0; 2]; if order >= 4 { stages } else { 0 }],
    };
    let phi = &problem.reaction.phi;
    let dphi = &problem.reaction.dphi;
    let d2phi = &problem.reaction.d2phi;
    let d3phi = &problem.reaction.d3phi;
    let d4phi = &problem.reaction.d4phi;
    let f = &problem.forcing;

    for side in [Side::Left, Side::Right] {
        let s = side.index();
        let xe = side.coordinate();
        let kind = problem.boundary[s].kind;
        if order >= 4 && !kind.is_dirichlet() {
            return Err(Error::Unsupported(
                "fourth-order boundary correction is implemented for Dirichlet data only".into(),
            ));
        }
        let st = side_state(side, order, problem, space, mode, history, t, k, u)?;

        tr.du[s] = st.g;
        tr.df0[s] = match kind {
            BcKind::Dirichlet => phi(st.g) + (f.h)(t, xe),
            _ => dphi(st.ub) * st.ux + (f.h_x)(t, xe),
        };
        tr.dau[s] = st.gd - tr.df0[s];

        if order < 3 {
            continue;
        }

        // Interior identity u_xx = u_t - phi(u) - h traced at the endpoint.
        let uxx = st.ubd - phi(st.ub) - (f.h)(t, xe);
        tr.daf0[s] = match kind {
            BcKind::Dirichlet => {
                d2phi(st.g) * st.ux * st.ux + dphi(st.g) * uxx + (f.h_xx)(t, xe)
            }
            _ => {
                d3phi(st.ub) * st.ux.powi(3)
                    + 3.0 * d2phi(st.ub) * st.ux * uxx
                    + dphi(st.ub) * (st.uxd - dphi(st.ub) * st.ux - (f.h_x)(t, xe))
                    + (f.h_xxx)(t, xe)
            }
        };
        // Value trace of d/dt f = h_t + phi'(u) u_t.
        let dft = match kind {
            BcKind::Dirichlet => (f.h_t)(t, xe) + dphi(st.g) * st.gd,
            _ => {
                (f.h_tx)(t, xe) + d2phi(st.ub) * st.ux * st.ubd + dphi(st.ub) * st.uxd
            }
        };
        tr.da2u[s] = st.gdd - dft - tr.daf0[s];

        for (i, &ci) in tableau.c.iter().enumerate() {
            let ti = t + ci * k;
            tr.df_stage[i][s] = match kind {
                BcKind::Dirichlet => phi(st.g + ci * k * st.gd) + (f.h)(ti, xe),
                _ => {
                    dphi(st.ub + ci * k * st.ubd) * (st.ux + ci * k * st.uxd)
                        + (f.h_x)(ti, xe)
                }
            };
        }

        if order < 4 {
            continue;
        }

        // Dirichlet-only fourth-order pieces; interior identities supply the
        // higher x-derivatives at the endpoint.
        let udot_xx = st.gdd - dphi(st.g) * st.gd - (f.h_t)(t, xe);
        let uxxx = st.uxd - dphi(st.g) * st.ux - (f.h_x)(t, xe);
        let uxxxx = udot_xx
            - d2phi(st.g) * st.ux * st.ux
            - dphi(st.g) * uxx
            - (f.h_xx)(t, xe);
        tr.da2f0[s] = d4phi(st.g) * st.ux.powi(4)
            + 6.0 * d3phi(st.g) * st.ux * st.ux * uxx
            + 3.0 * d2phi(st.g) * uxx * uxx
            + 4.0 * d2phi(st.g) * st.ux * uxxx
            + dphi(st.g) * uxxxx
            + (f.h_xxxx)(t, xe);
        // Value trace of A(f_t + f_u u_t).
        let datf = d3phi(st.g) * st.ux * st.ux * st.gd
            + d2phi(st.g) * uxx * st.gd
            + 2.0 * d2phi(st.g) * st.ux * st.uxd
            + dphi(st.g) * udot_xx
            + (f.h_txx)(t, xe);
        // Value trace of d^2/dt^2 f = h_tt + phi''(u) u_t^2 + phi'(u) u_tt.
        let dftt = (f.h_tt)(t, xe) + d2phi(st.g) * st.gd * st.gd + dphi(st.g) * st.gdd;
        tr.da3u[s] = st.gddd - dftt - datf - tr.da2f0[s];

        for (i, &ci) in tableau.c.iter().enumerate() {
            let ti = t + ci * k;
            let gi = st.g + ci * k * st.gd;
            tr.daf_stage[i][s] = d2phi(gi) * (st.ux + ci * k * st.uxd).powi(2)
                + dphi(gi) * (uxx + ci * k * udot_xx)
                + (f.h_xx)(ti, xe);
            // Reconstructed trace of the argument fed to f in the update.
            let mut arg = st.g + ci * k * tr.dau[s] + 0.5 * ci * ci * k * k * tr.da2u[s];
            for (j, &cj) in tableau.c.iter().enumerate().take(i) {
                arg += k
                    * tableau.a[i][j]
                    * (tr.df_stage[j][s] + (ci - cj) * k * tr.daf0[s]);
            }
            tr.df_big[i][s] = phi(arg) + (f.h)(ti, xe);
        }
    }
    Ok(tr)
}
