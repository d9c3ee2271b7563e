//! 1-D spatial discretizations of the diffusion operator on (0, 1) with the
//! boundary data split off: A_h0 U + C_h g approximates u_xx at the unknown
//! nodes. Builders: second-order finite differences (Dirichlet-Dirichlet and
//! Dirichlet-Neumann) and Chebyshev-Gauss-Lobatto collocation. Also home to
//! the elliptic projection and its consistency measures.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{inf_norm_vec, solve_tridiag, Lu};
use crate::phi::LinearPropagator;

/// Boundary-condition kind at one endpoint. The trace operator is
/// alpha*u + beta*u_x with outward x-derivative at the right end; plain
/// Dirichlet and Neumann are the (1,0) and (0,1) cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcKind {
    Dirichlet,
    Neumann,
    Robin { alpha: f64, beta: f64 },
}

impl BcKind {
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            BcKind::Dirichlet => (1.0, 0.0),
            BcKind::Neumann => (0.0, 1.0),
            BcKind::Robin { alpha, beta } => (alpha, beta),
        }
    }

    pub fn is_dirichlet(self) -> bool {
        matches!(self, BcKind::Dirichlet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    FdDirichlet,
    FdMixed,
    Collocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn coordinate(self) -> f64 {
        match self {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }
}

/// Unknown-node layout of a discretization.
#[derive(Debug, Clone)]
pub struct Grid1D {
    pub kind: SpaceKind,
    /// Coordinates of the unknown nodes, strictly increasing.
    pub nodes: Vec<f64>,
    /// Mesh width (uniform spacing for FD, minimum spacing for collocation).
    pub h: f64,
}

/// One-sided first-derivative stencil at an endpoint, acting on the pair of
/// boundary values plus unknown-node values.
#[derive(Debug, Clone)]
pub struct BoundaryStencil {
    pub left_weight: f64,
    pub right_weight: f64,
    pub interior: Vec<(usize, f64)>,
}

impl BoundaryStencil {
    /// Applies the stencil to boundary values (gl, gr) and unknowns.
    pub fn apply(&self, gl: f64, gr: f64, u: &Array1<f64>) -> f64 {
        let mut acc = self.left_weight * gl + self.right_weight * gr;
        for &(i, w) in &self.interior {
            acc += w * u[i];
        }
        acc
    }
}

pub(crate) enum Operator {
    Tridiag {
        sub: Vec<f64>,
        diag: Vec<f64>,
        sup: Vec<f64>,
    },
    Dense(Array2<f64>),
}

impl Operator {
    pub(crate) fn matvec(&self, v: &Array1<f64>) -> Array1<f64> {
        match self {
            Operator::Tridiag { sub, diag, sup } => {
                let n = diag.len();
                let mut out = Array1::zeros(n);
                for i in 0..n {
                    let mut acc = diag[i] * v[i];
                    if i > 0 {
                        acc += sub[i - 1] * v[i - 1];
                    }
                    if i + 1 < n {
                        acc += sup[i] * v[i + 1];
                    }
                    out[i] = acc;
                }
                out
            }
            Operator::Dense(a) => a.dot(v),
        }
    }

    pub(crate) fn solve(&self, b: &Array1<f64>) -> Result<Array1<f64>> {
        match self {
            Operator::Tridiag { sub, diag, sup } => solve_tridiag(sub, diag, sup, b),
            Operator::Dense(a) => Ok(Lu::factor(a)?.solve_vec(b)),
        }
    }

    pub(crate) fn to_dense(&self) -> Array2<f64> {
        match self {
            Operator::Tridiag { sub, diag, sup } => {
                let n = diag.len();
                let mut a = Array2::zeros((n, n));
                for i in 0..n {
                    a[[i, i]] = diag[i];
                    if i + 1 < n {
                        a[[i, i + 1]] = sup[i];
                        a[[i + 1, i]] = sub[i];
                    }
                }
                a
            }
            Operator::Dense(a) => a.clone(),
        }
    }
}

/// A spatial discretization: operator, boundary coupling, propagator and the
/// endpoint derivative stencils used by data-driven boundary terms.
pub struct DiscreteSpace {
    pub grid: Grid1D,
    pub bc: [BcKind; 2],
    op: Operator,
    /// N x 2 coupling: column 0 multiplies the left datum, column 1 the right.
    c_h: Array2<f64>,
    propagator: Arc<LinearPropagator>,
    stencils: [BoundaryStencil; 2],
}

impl DiscreteSpace {
    pub fn n(&self) -> usize {
        self.grid.nodes.len()
    }

    pub fn kind(&self) -> SpaceKind {
        self.grid.kind
    }

    pub fn propagator(&self) -> &Arc<LinearPropagator> {
        &self.propagator
    }

    /// A_h0 v.
    pub fn apply_op(&self, v: &Array1<f64>) -> Array1<f64> {
        self.op.matvec(v)
    }

    /// A_h0^-1 b.
    pub fn solve_op(&self, b: &Array1<f64>) -> Result<Array1<f64>> {
        self.op.solve(b)
    }

    pub fn op_dense(&self) -> Array2<f64> {
        self.op.to_dense()
    }

    /// C_h applied to the boundary data pair.
    pub fn apply_coupling(&self, gl: f64, gr: f64) -> Array1<f64> {
        let n = self.n();
        let mut out = Array1::zeros(n);
        if gl != 0.0 {
            out.scaled_add(gl, &self.c_h.column(0));
        }
        if gr != 0.0 {
            out.scaled_add(gr, &self.c_h.column(1));
        }
        out
    }

    pub fn coupling(&self) -> &Array2<f64> {
        &self.c_h
    }

    /// Pointwise restriction P_h of a function to the unknown nodes.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> Array1<f64> {
        Array1::from_iter(self.grid.nodes.iter().map(|&x| f(x)))
    }

    pub fn stencil(&self, side: Side) -> &BoundaryStencil {
        &self.stencils[side.index()]
    }

    /// Elliptic projection R_h u: solves A_h0 R = P_h(Au) - C_h (trace pair).
    pub fn elliptic_projection(
        &self,
        trace: [f64; 2],
        au_at_nodes: &Array1<f64>,
    ) -> Result<Array1<f64>> {
        let rhs = au_at_nodes - &self.apply_coupling(trace[0], trace[1]);
        self.op.solve(&rhs)
    }

    /// Consistency measures of the elliptic projection:
    /// eps = ||A_h0 (P_h u - R_h u)||_inf, eta = ||P_h u - R_h u||_inf.
    pub fn consistency_measure(
        &self,
        u: impl Fn(f64) -> f64,
        au: impl Fn(f64) -> f64,
        trace: [f64; 2],
    ) -> Result<(f64, f64)> {
        let pu = self.project(&u);
        let pau = self.project(&au);
        let residual = &self.apply_op(&pu) + &self.apply_coupling(trace[0], trace[1]) - &pau;
        let eps = inf_norm_vec(&residual);
        let ru = self.elliptic_projection(trace, &pau)?;
        let eta = inf_norm_vec(&(&pu - &ru));
        Ok((eps, eta))
    }
}

fn mesh_count(h: f64, offset: f64) -> Result<usize> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidConfig(format!("mesh width {h} out of range")));
    }
    let m = 1.0 / h;
    let rounded = m.round();
    if (m - rounded).abs() > 1e-8 * rounded {
        return Err(Error::InvalidConfig(format!(
            "mesh width {h} does not divide the unit interval"
        )));
    }
    let n = rounded as isize + offset as isize;
    if n < 1 {
        return Err(Error::InvalidConfig(format!("mesh width {h} leaves no unknowns")));
    }
    Ok(n as usize)
}

/// Second-order FD discretization with Dirichlet data at both ends:
/// unknowns at x_i = i h, i = 1..=N, h = 1/(N+1).
pub fn build_fd_dirichlet(h: f64) -> Result<DiscreteSpace> {
    let n = mesh_count(h, -1.0)?;
    let h = 1.0 / (n + 1) as f64;
    let h2 = h * h;
    let nodes: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let op = Operator::Tridiag {
        sub: vec![1.0 / h2; n - 1],
        diag: vec![-2.0 / h2; n],
        sup: vec![1.0 / h2; n - 1],
    };
    let mut c_h = Array2::zeros((n, 2));
    c_h[[0, 0]] = 1.0 / h2;
    c_h[[n - 1, 1]] = 1.0 / h2;
    let propagator = Arc::new(LinearPropagator::fd_dirichlet_sine(n));
    let stencils = if n >= 2 {
        [
            BoundaryStencil {
                left_weight: -3.0 / (2.0 * h),
                right_weight: 0.0,
                interior: vec![(0, 2.0 / h), (1, -1.0 / (2.0 * h))],
            },
            BoundaryStencil {
                left_weight: 0.0,
                right_weight: 3.0 / (2.0 * h),
                interior: vec![(n - 1, -2.0 / h), (n - 2, 1.0 / (2.0 * h))],
            },
        ]
    } else {
        // One unknown: the second-order 3-point stencil spans the whole
        // interval, so the far endpoint supplies the third value.
        [
            BoundaryStencil {
                left_weight: -3.0 / (2.0 * h),
                right_weight: -1.0 / (2.0 * h),
                interior: vec![(0, 2.0 / h)],
            },
            BoundaryStencil {
                left_weight: 1.0 / (2.0 * h),
                right_weight: 3.0 / (2.0 * h),
                interior: vec![(0, -2.0 / h)],
            },
        ]
    };
    Ok(DiscreteSpace {
        grid: Grid1D {
            kind: SpaceKind::FdDirichlet,
            nodes,
            h,
        },
        bc: [BcKind::Dirichlet, BcKind::Dirichlet],
        op,
        c_h,
        propagator,
        stencils,
    })
}

/// Second-order FD discretization with Dirichlet data at x=0 and Neumann
/// data at x=1: unknowns at x_i = i h, i = 1..=N, h = 1/N (the right
/// boundary node is an unknown, eliminated by the ghost-node trick).
pub fn build_fd_mixed(h: f64) -> Result<DiscreteSpace> {
    let n = mesh_count(h, 0.0)?;
    if n < 3 {
        return Err(Error::InvalidConfig("fd-mixed needs at least 3 unknowns".into()));
    }
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let nodes: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let mut sub = vec![1.0 / h2; n - 1];
    let diag = vec![-2.0 / h2; n];
    let sup = vec![1.0 / h2; n - 1];
    sub[n - 2] = 2.0 / h2;
    let propagator = Arc::new(LinearPropagator::symmetrizable_tridiag(&sub, &diag, &sup)?);
    let op = Operator::Tridiag { sub, diag, sup };
    let mut c_h = Array2::zeros((n, 2));
    c_h[[0, 0]] = 1.0 / h2;
    c_h[[n - 1, 1]] = 2.0 / h;
    let stencils = [
        BoundaryStencil {
            left_weight: -3.0 / (2.0 * h),
            right_weight: 0.0,
            interior: vec![(0, 2.0 / h), (1, -1.0 / (2.0 * h))],
        },
        // The right endpoint is an unknown; its derivative is boundary data,
        // so runs never differentiate there. Kept for completeness.
        BoundaryStencil {
            left_weight: 0.0,
            right_weight: 0.0,
            interior: vec![
                (n - 1, 3.0 / (2.0 * h)),
                (n - 2, -2.0 / h),
                (n - 3, 1.0 / (2.0 * h)),
            ],
        },
    ];
    Ok(DiscreteSpace {
        grid: Grid1D {
            kind: SpaceKind::FdMixed,
            nodes,
            h,
        },
        bc: [BcKind::Dirichlet, BcKind::Neumann],
        op,
        c_h,
        propagator,
        stencils,
    })
}

/// Chebyshev-Gauss-Lobatto nodes mapped to [0, 1], increasing.
pub fn cgl_nodes(count: usize) -> Vec<f64> {
    let p = count - 1;
    (0..=p)
        .map(|i| (1.0 - (i as f64 * PI / p as f64).cos()) / 2.0)
        .collect()
}

/// First-derivative collocation matrix on arbitrary nodes via barycentric
/// weights, with the negative-sum trick on the diagonal.
pub fn differentiation_matrix(nodes: &[f64]) -> Array2<f64> {
    let n = nodes.len();
    let mut w = vec![1.0f64; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] *= nodes[i] - nodes[j];
            }
        }
        w[i] = 1.0 / w[i];
    }
    let wmax = w.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    for wi in &mut w {
        *wi /= wmax;
    }
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let mut rowsum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[[i, j]] = v;
                rowsum += v;
            }
        }
        d[[i, i]] = -rowsum;
    }
    d
}

/// Chebyshev collocation with Dirichlet data at both ends. `node_count` is
/// the full Gauss-Lobatto count including the two boundary nodes.
pub fn build_collocation(node_count: usize) -> Result<DiscreteSpace> {
    if node_count < 4 {
        return Err(Error::InvalidConfig("collocation needs at least 4 nodes".into()));
    }
    let all = cgl_nodes(node_count);
    let n = node_count - 2;
    let d1 = differentiation_matrix(&all);
    let d2 = d1.dot(&d1);
    let mut a = Array2::zeros((n, n));
    let mut c_h = Array2::zeros((n, 2));
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] = d2[[i + 1, j + 1]];
        }
        c_h[[i, 0]] = d2[[i + 1, 0]];
        c_h[[i, 1]] = d2[[i + 1, node_count - 1]];
    }
    let nodes: Vec<f64> = all[1..node_count - 1].to_vec();
    let h = nodes
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain([nodes[0] - 0.0, 1.0 - nodes[n - 1]])
        .fold(f64::INFINITY, f64::min);
    let propagator = Arc::new(LinearPropagator::dense(a.clone())?);
    let stencil_for = |row: usize| BoundaryStencil {
        left_weight: d1[[row, 0]],
        right_weight: d1[[row, node_count - 1]],
        interior: (0..n).map(|j| (j, d1[[row, j + 1]])).collect(),
    };
    let stencils = [stencil_for(0), stencil_for(node_count - 1)];
    Ok(DiscreteSpace {
        grid: Grid1D {
            kind: SpaceKind::Collocation,
            nodes,
            h,
        },
        bc: [BcKind::Dirichlet, BcKind::Dirichlet],
        op: Operator::Dense(a),
        c_h,
        propagator,
        stencils,
    })
}
