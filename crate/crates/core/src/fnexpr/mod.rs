//! Smooth maps `R^n ⊇ dom -> R^m` as immutable combinator trees.
//!
//! Every construction in the crate is assembled from these nodes and
//! evaluated pointwise. Trees share subtrees through `Arc`, so cloning a map
//! is cheap and maps can be evaluated from many threads at once.

mod probe;
mod text;

use std::fmt;
use std::sync::Arc;

use crate::cubelat::{Domain, Face, MEMBERSHIP_TOL};
use crate::error::{domain, Error, Result};
use crate::kernels::{self, QuadratureConfig, SmashParams};

pub use probe::{fd_partial, fd_partial_richardson, seam_check, SeamReport, DEFAULT_FD_STEP};
pub use text::{parse_map, serialize_map};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(Vec<f64>),
    Coord(usize),
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    Sum(Vec<SmoothMap>),
    Product(Vec<SmoothMap>),
    Compose(SmoothMap, SmoothMap),
    Gamma,
    Lambda,
    Clamp01,
    Smash(SmashParams),
    /// `(sigma, tau, t) -> T_{sigma,tau}(t)`.
    SmashDyn,
    /// `(a, b) -> a / b`.
    Div,
    Tuple(Vec<SmoothMap>),
    Project(usize, SmoothMap),
    Piecewise {
        axis: usize,
        breaks: Vec<f64>,
        pieces: Vec<SmoothMap>,
    },
    /// Map on a union of faces: the first face containing the point wins and
    /// its piece is evaluated at the point snapped onto that face.
    Glue {
        faces: Vec<Face>,
        pieces: Vec<SmoothMap>,
    },
    /// Restricts the child to the unit cube.
    Cube(SmoothMap),
}

/// A smooth map with fixed input and output dimensions.
#[derive(Clone, PartialEq)]
pub struct SmoothMap {
    node: Arc<Node>,
    in_dim: usize,
    out_dim: usize,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap[{}->{}] {}", self.in_dim, self.out_dim, serialize_map(self))
    }
}

fn dim_err(node: &str, message: impl Into<String>) -> Error {
    Error::Dimension {
        node: node.to_string(),
        message: message.into(),
    }
}

fn finite_all(values: &[f64], node: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(dim_err(node, "non-finite coefficient"))
    }
}

fn common_in_dim(children: &[SmoothMap], node: &str) -> Result<usize> {
    let first = children
        .first()
        .ok_or_else(|| dim_err(node, "needs at least one child"))?;
    if let Some(bad) = children.iter().find(|c| c.in_dim != first.in_dim) {
        return Err(dim_err(
            node,
            format!(
                "children disagree on input dimension ({} vs {})",
                first.in_dim, bad.in_dim
            ),
        ));
    }
    Ok(first.in_dim)
}

/// Output dimension of a broadcasting sum/product: every child is scalar or
/// has the same width `m`.
fn broadcast_out_dim(children: &[SmoothMap], node: &str) -> Result<usize> {
    let m = children.iter().map(|c| c.out_dim).max().unwrap_or(1);
    if let Some(bad) = children.iter().find(|c| c.out_dim != 1 && c.out_dim != m) {
        return Err(dim_err(
            node,
            format!("cannot broadcast output widths {} and {m}", bad.out_dim),
        ));
    }
    Ok(m)
}

impl SmoothMap {
    fn make(node: Node, in_dim: usize, out_dim: usize) -> Self {
        Self {
            node: Arc::new(node),
            in_dim,
            out_dim,
        }
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn constant(in_dim: usize, values: Vec<f64>) -> Result<Self> {
        finite_all(&values, "const")?;
        if values.is_empty() {
            return Err(dim_err("const", "needs at least one value"));
        }
        let m = values.len();
        Ok(Self::make(Node::Const(values), in_dim, m))
    }

    /// The 0-based coordinate `k` of `R^in_dim`.
    pub fn coord(in_dim: usize, k: usize) -> Result<Self> {
        if k >= in_dim {
            return Err(dim_err(
                "coord",
                format!("coordinate {} out of range for input dimension {in_dim}", k + 1),
            ));
        }
        Ok(Self::make(Node::Coord(k), in_dim, 1))
    }

    /// The identity of `R^n`.
    pub fn identity(n: usize) -> Result<Self> {
        Self::tuple((0..n).map(|k| Self::coord(n, k)).collect::<Result<Vec<_>>>()?)
    }

    /// `x -> matrix · x + offset`; the input dimension is the column count.
    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let rows = matrix.len();
        if rows == 0 || rows != offset.len() {
            return Err(dim_err(
                "affine",
                format!("{rows} rows but {} offsets", offset.len()),
            ));
        }
        let cols = matrix[0].len();
        if cols == 0 || matrix.iter().any(|r| r.len() != cols) {
            return Err(dim_err("affine", "ragged or empty matrix"));
        }
        for r in &matrix {
            finite_all(r, "affine")?;
        }
        finite_all(&offset, "affine")?;
        Ok(Self::make(Node::Affine { matrix, offset }, cols, rows))
    }

    pub fn sum(children: Vec<SmoothMap>) -> Result<Self> {
        let n = common_in_dim(&children, "sum")?;
        let m = broadcast_out_dim(&children, "sum")?;
        Ok(Self::make(Node::Sum(children), n, m))
    }

    /// Componentwise product; scalar factors broadcast.
    pub fn product(children: Vec<SmoothMap>) -> Result<Self> {
        let n = common_in_dim(&children, "prod")?;
        let m = broadcast_out_dim(&children, "prod")?;
        Ok(Self::make(Node::Product(children), n, m))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: SmoothMap, inner: SmoothMap) -> Result<Self> {
        if outer.in_dim != inner.out_dim {
            return Err(dim_err(
                "compose",
                format!(
                    "outer map takes {} inputs but inner map yields {}",
                    outer.in_dim, inner.out_dim
                ),
            ));
        }
        let (n, m) = (inner.in_dim, outer.out_dim);
        Ok(Self::make(Node::Compose(outer, inner), n, m))
    }

    /// `gamma` applied to each of `dim` components.
    pub fn gamma(dim: usize) -> Self {
        Self::make(Node::Gamma, dim, dim)
    }

    /// `lambda` applied to each of `dim` components.
    pub fn lambda(dim: usize) -> Self {
        Self::make(Node::Lambda, dim, dim)
    }

    pub fn clamp01(dim: usize) -> Self {
        Self::make(Node::Clamp01, dim, dim)
    }

    /// `T_{sigma,tau}` applied to each of `dim` components.
    pub fn smash(p: SmashParams, dim: usize) -> Self {
        Self::make(Node::Smash(p), dim, dim)
    }

    /// `(sigma, tau, t) -> T_{sigma,tau}(t)`; parameters are validated at
    /// every evaluation.
    pub fn smash_dyn() -> Self {
        Self::make(Node::SmashDyn, 3, 1)
    }

    /// `(a, b) -> a / b`, a domain error when `b = 0`.
    pub fn div() -> Self {
        Self::make(Node::Div, 2, 1)
    }

    pub fn tuple(children: Vec<SmoothMap>) -> Result<Self> {
        let n = common_in_dim(&children, "tuple")?;
        let m = children.iter().map(|c| c.out_dim).sum();
        Ok(Self::make(Node::Tuple(children), n, m))
    }

    /// Component `index` (0-based) of `child`.
    pub fn project(index: usize, child: SmoothMap) -> Result<Self> {
        if index >= child.out_dim {
            return Err(dim_err(
                "project",
                format!(
                    "component {} out of range for output dimension {}",
                    index + 1,
                    child.out_dim
                ),
            ));
        }
        let n = child.in_dim;
        Ok(Self::make(Node::Project(index, child), n, 1))
    }

    /// Splits along one axis: piece `i` is used for
    /// `breaks[i-1] < x_axis <= breaks[i]`.
    pub fn piecewise(axis: usize, breaks: Vec<f64>, pieces: Vec<SmoothMap>) -> Result<Self> {
        let n = common_in_dim(&pieces, "piece")?;
        if axis >= n {
            return Err(dim_err("piece", format!("axis {} out of range", axis + 1)));
        }
        if pieces.len() != breaks.len() + 1 {
            return Err(dim_err(
                "piece",
                format!("{} breakpoints need {} pieces", breaks.len(), breaks.len() + 1),
            ));
        }
        if breaks.iter().any(|b| !(*b > 0.0 && *b < 1.0)) || breaks.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(dim_err(
                "piece",
                "breakpoints must increase strictly inside (0, 1)",
            ));
        }
        let m = pieces[0].out_dim;
        if pieces.iter().any(|p| p.out_dim != m) {
            return Err(dim_err("piece", "pieces disagree on output dimension"));
        }
        Ok(Self::make(Node::Piecewise { axis, breaks, pieces }, n, m))
    }

    /// A map on the union of `faces`, given by one ambient formula per face.
    pub fn glue(faces: Vec<Face>, pieces: Vec<SmoothMap>) -> Result<Self> {
        let n = common_in_dim(&pieces, "glue")?;
        if faces.len() != pieces.len() {
            return Err(dim_err("glue", "one piece per face required"));
        }
        if let Some(f) = faces.iter().find(|f| f.ambient_dim() != n) {
            return Err(dim_err("glue", format!("face {f} is not a face of I^{n}")));
        }
        let m = pieces[0].out_dim;
        if pieces.iter().any(|p| p.out_dim != m) {
            return Err(dim_err("glue", "pieces disagree on output dimension"));
        }
        Ok(Self::make(Node::Glue { faces, pieces }, n, m))
    }

    /// The same map, declared on the unit cube only.
    pub fn on_cube(self) -> Self {
        if matches!(*self.node, Node::Cube(_)) {
            return self;
        }
        let (n, m) = (self.in_dim, self.out_dim);
        Self::make(Node::Cube(self), n, m)
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: SmoothMap) -> Result<Self> {
        Self::compose(outer, self.clone())
    }

    /// `a · self + b` for a scalar map.
    pub fn scale_shift(&self, a: f64, b: f64) -> Result<Self> {
        let m = self.out_dim;
        let matrix = (0..m)
            .map(|i| (0..m).map(|j| if i == j { a } else { 0.0 }).collect())
            .collect();
        self.then(Self::affine(matrix, vec![b; m])?)
    }

    /// Wraps the whole tree as a unit-cube map if any `Cube` node guards its
    /// input, otherwise as-is.
    pub fn is_cube_domain(&self) -> bool {
        matches!(*self.node, Node::Cube(_) | Node::Glue { .. })
    }

    /// The branches of a top-level `piece` node (looking through `cube`).
    pub fn as_piecewise(&self) -> Option<(usize, &[f64], &[SmoothMap])> {
        match &*self.node {
            Node::Piecewise {
                axis,
                breaks,
                pieces,
            } => Some((*axis, breaks, pieces)),
            Node::Cube(c) => c.as_piecewise(),
            _ => None,
        }
    }

    /// Evaluates the map at `p`.
    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.in_dim {
            return Err(dim_err(
                "eval",
                format!("point has dimension {} but map takes {}", p.len(), self.in_dim),
            ));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite()) {
            return Err(domain(format!("non-finite coordinate {x}")));
        }
        self.eval_raw(p)
    }

    fn eval_raw(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(match &*self.node {
            Node::Const(v) => v.clone(),
            Node::Coord(k) => vec![p[*k]],
            Node::Affine { matrix, offset } => matrix
                .iter()
                .zip(offset)
                .map(|(row, b)| row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + b)
                .collect(),
            Node::Sum(children) => {
                let mut acc = vec![0.0; self.out_dim];
                for c in children {
                    let v = c.eval_raw(p)?;
                    for (i, a) in acc.iter_mut().enumerate() {
                        *a += if v.len() == 1 { v[0] } else { v[i] };
                    }
                }
                acc
            }
            Node::Product(children) => {
                let mut acc = vec![1.0; self.out_dim];
                for c in children {
                    let v = c.eval_raw(p)?;
                    for (i, a) in acc.iter_mut().enumerate() {
                        *a *= if v.len() == 1 { v[0] } else { v[i] };
                    }
                }
                acc
            }
            Node::Compose(outer, inner) => outer.eval_raw(&inner.eval_raw(p)?)?,
            Node::Gamma => p.iter().map(|&t| kernels::gamma_raw(t)).collect(),
            Node::Lambda => p.iter().map(|&t| kernels::lambda_raw(t)).collect(),
            Node::Clamp01 => p.iter().map(|t| t.clamp(0.0, 1.0)).collect(),
            Node::Smash(sp) => {
                let q = QuadratureConfig::default();
                p.iter()
                    .map(|&t| kernels::smash_t(*sp, t, &q))
                    .collect::<Result<_>>()?
            }
            Node::SmashDyn => vec![kernels::smash_t_dyn(p[0], p[1], p[2])?],
            Node::Div => {
                if p[1] == 0.0 {
                    return Err(domain("division by zero"));
                }
                vec![p[0] / p[1]]
            }
            Node::Tuple(children) => {
                let mut out = Vec::with_capacity(self.out_dim);
                for c in children {
                    out.extend(c.eval_raw(p)?);
                }
                out
            }
            Node::Project(i, child) => vec![child.eval_raw(p)?[*i]],
            Node::Piecewise {
                axis,
                breaks,
                pieces,
            } => {
                let x = p[*axis];
                let idx = breaks.iter().take_while(|&&b| x > b).count();
                pieces[idx].eval_raw(p)?
            }
            Node::Glue { faces, pieces } => {
                let i = faces
                    .iter()
                    .position(|f| f.contains(p, MEMBERSHIP_TOL))
                    .ok_or_else(|| domain(format!("point {p:?} lies on none of the glued faces")))?;
                let mut q = p.to_vec();
                faces[i].snap(&mut q);
                pieces[i].eval_raw(&q)?
            }
            Node::Cube(child) => {
                if p.iter().any(|&x| x < -MEMBERSHIP_TOL || x > 1.0 + MEMBERSHIP_TOL) {
                    return Err(domain(format!("point {p:?} lies outside the unit cube")));
                }
                let q: Vec<f64> = p.iter().map(|x| x.clamp(0.0, 1.0)).collect();
                child.eval_raw(&q)?
            }
        })
    }
}

/// A homotopy `K × I -> R^m`; the last input coordinate is time.
#[derive(Debug, Clone, PartialEq)]
pub struct Homotopy {
    map: SmoothMap,
    base: Domain,
}

impl Homotopy {
    pub fn new(map: SmoothMap, base: Domain) -> Result<Self> {
        if map.in_dim() == 0 || map.in_dim() != base.ambient_dim() + 1 {
            return Err(dim_err(
                "homotopy",
                format!(
                    "map takes {} inputs but base lives in I^{}",
                    map.in_dim(),
                    base.ambient_dim()
                ),
            ));
        }
        Ok(Self { map, base })
    }

    /// `(x, u) -> f(x)`.
    pub fn constant(f: &SmoothMap, base: Domain) -> Result<Self> {
        let n = f.in_dim();
        let drop_time = SmoothMap::affine(
            (0..n)
                .map(|i| (0..=n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            vec![0.0; n],
        )?;
        Self::new(SmoothMap::compose(f.clone(), drop_time)?.on_cube(), base)
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn base(&self) -> &Domain {
        &self.base
    }

    pub fn base_dim(&self) -> usize {
        self.base.ambient_dim()
    }

    pub fn eval(&self, x: &[f64], u: f64) -> Result<Vec<f64>> {
        let mut p = x.to_vec();
        p.push(u);
        self.map.eval(&p)
    }

    /// `x -> H(x, u)`.
    pub fn slice(&self, u: f64) -> Result<SmoothMap> {
        if !(0.0..=1.0).contains(&u) {
            return Err(domain(format!("homotopy time {u} outside [0, 1]")));
        }
        let n = self.base_dim();
        let extend = SmoothMap::affine(
            (0..=n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            (0..=n).map(|i| if i == n { u } else { 0.0 }).collect(),
        )?;
        SmoothMap::compose(self.map.clone(), extend)
    }
}
