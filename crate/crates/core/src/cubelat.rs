//! Faces of the unit cube, cubical subcomplexes, and box regions.
//!
//! Coordinates are 0-based throughout the Rust API. A face is written as a
//! pattern string with one character per coordinate: `0` or `1` for a pinned
//! coordinate, `*` for a free one. `"*1"` is the top edge of the square.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{domain, Error, Result};

/// Default tolerance for comparing a coordinate against a pinned value.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A face of `I^n`: some coordinates pinned to 0 or 1, the rest free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pins: Vec<Option<u8>>,
}

impl Face {
    /// The whole cube `I^n`.
    pub fn full(n: usize) -> Self {
        Self {
            pins: vec![None; n],
        }
    }

    /// Face with the given `(axis, value)` pins.
    pub fn new(n: usize, pins: &[(usize, u8)]) -> Result<Self> {
        let mut face = Self::full(n);
        for &(axis, alpha) in pins {
            if axis >= n {
                return Err(domain(format!("axis {axis} out of range for I^{n}")));
            }
            if alpha > 1 {
                return Err(domain(format!("pinned value must be 0 or 1, got {alpha}")));
            }
            if face.pins[axis].is_some() {
                return Err(domain(format!("axis {axis} pinned twice")));
            }
            face.pins[axis] = Some(alpha);
        }
        Ok(face)
    }

    pub fn ambient_dim(&self) -> usize {
        self.pins.len()
    }

    pub fn dim(&self) -> usize {
        self.pins.iter().filter(|p| p.is_none()).count()
    }

    pub fn pin(&self, axis: usize) -> Option<u8> {
        self.pins[axis]
    }

    pub fn pins(&self) -> &[Option<u8>] {
        &self.pins
    }

    pub fn free_axes(&self) -> Vec<usize> {
        (0..self.pins.len())
            .filter(|&i| self.pins[i].is_none())
            .collect()
    }

    /// Pin one more coordinate.
    pub fn with_pin(&self, axis: usize, alpha: u8) -> Result<Self> {
        if axis >= self.pins.len() || self.pins[axis].is_some() || alpha > 1 {
            return Err(domain(format!("cannot pin axis {axis} of face {self}")));
        }
        let mut f = self.clone();
        f.pins[axis] = Some(alpha);
        Ok(f)
    }

    /// `self ⊆ other`.
    pub fn is_subface_of(&self, other: &Face) -> bool {
        self.pins.len() == other.pins.len()
            && self
                .pins
                .iter()
                .zip(&other.pins)
                .all(|(a, b)| b.is_none() || a == b)
    }

    pub fn intersect(&self, other: &Face) -> Option<Face> {
        let mut pins = Vec::with_capacity(self.pins.len());
        for (a, b) in self.pins.iter().zip(&other.pins) {
            pins.push(match (a, b) {
                (None, x) | (x, None) => *x,
                (Some(x), Some(y)) if x == y => Some(*x),
                _ => return None,
            });
        }
        Some(Face { pins })
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.pins.len()
            && p.iter().zip(&self.pins).all(|(&x, pin)| match pin {
                Some(a) => (x - f64::from(*a)).abs() <= tol,
                None => (-tol..=1.0 + tol).contains(&x),
            })
    }

    /// Snap the pinned coordinates of `p` to their exact values.
    pub fn snap(&self, p: &mut [f64]) {
        for (x, pin) in p.iter_mut().zip(&self.pins) {
            if let Some(a) = pin {
                *x = f64::from(*a);
            }
        }
    }

    /// Every face of this face, itself included.
    pub fn subfaces(&self) -> Vec<Face> {
        let mut out = vec![self.clone()];
        for axis in self.free_axes() {
            let mut next = Vec::with_capacity(out.len() * 3);
            for f in &out {
                next.push(f.clone());
                for alpha in 0..=1u8 {
                    let mut g = f.clone();
                    g.pins[axis] = Some(alpha);
                    next.push(g);
                }
            }
            out = next;
        }
        out
    }

    /// The codimension-one faces of this face.
    pub fn facets(&self) -> Vec<Face> {
        let mut out = Vec::new();
        for axis in self.free_axes() {
            for alpha in 0..=1u8 {
                let mut g = self.clone();
                g.pins[axis] = Some(alpha);
                out.push(g);
            }
        }
        out
    }

    pub fn center(&self) -> Vec<f64> {
        self.pins
            .iter()
            .map(|p| p.map_or(0.5, f64::from))
            .collect()
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pins {
            let c = match p {
                None => '*',
                Some(0) => '0',
                Some(_) => '1',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Face {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pins = s
            .chars()
            .map(|c| match c {
                '*' => Ok(None),
                '0' => Ok(Some(0)),
                '1' => Ok(Some(1)),
                other => Err(domain(format!("bad face pattern character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Face { pins })
    }
}

/// Orthogonal projection onto the face `{t_axis = alpha}`.
pub fn face_projection(p: &[f64], axis: usize, alpha: u8) -> Result<Vec<f64>> {
    if axis >= p.len() {
        return Err(domain(format!(
            "projection axis {axis} out of range for a point of dimension {}",
            p.len()
        )));
    }
    if alpha > 1 {
        return Err(domain(format!("projection value must be 0 or 1, got {alpha}")));
    }
    let mut q = p.to_vec();
    q[axis] = f64::from(alpha);
    Ok(q)
}

/// A union of faces of `I^n`, stored by its maximal faces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubicalComplex {
    ambient_dim: usize,
    maximal: Vec<Face>,
}

impl CubicalComplex {
    /// Builds the complex generated by `faces`, dropping duplicates and
    /// faces dominated by another one.
    pub fn from_faces(ambient_dim: usize, faces: impl IntoIterator<Item = Face>) -> Result<Self> {
        let mut all: Vec<Face> = faces.into_iter().collect();
        if let Some(bad) = all.iter().find(|f| f.ambient_dim() != ambient_dim) {
            return Err(domain(format!(
                "face {bad} does not live in I^{ambient_dim}"
            )));
        }
        all.sort();
        all.dedup();
        let maximal = all
            .iter()
            .filter(|f| !all.iter().any(|g| g != *f && f.is_subface_of(g)))
            .cloned()
            .collect();
        Ok(Self {
            ambient_dim,
            maximal,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            ambient_dim: n,
            maximal: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            ambient_dim: n,
            maximal: vec![Face::full(n)],
        }
    }

    /// `∂I^n`: the `2n` codimension-one faces.
    pub fn boundary(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("boundary complex needs n >= 1"));
        }
        Self::from_faces(n, Face::full(n).facets())
    }

    /// `J^{n-1} = ∂I^{n-1} × I ∪ I^{n-1} × {1}`.
    pub fn j_complex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("J complex needs n >= 1"));
        }
        let last = n - 1;
        let mut faces = vec![Face::new(n, &[(last, 1)])?];
        for axis in 0..last {
            for alpha in 0..=1 {
                faces.push(Face::new(n, &[(axis, alpha)])?);
            }
        }
        Self::from_faces(n, faces)
    }

    /// `∂I^{n-1} × {0}`, the rim of the bottom face.
    pub fn bottom_rim(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("bottom rim needs n >= 1"));
        }
        let last = n - 1;
        let mut faces = Vec::new();
        for axis in 0..last {
            for alpha in 0..=1 {
                faces.push(Face::new(n, &[(axis, alpha), (last, 0)])?);
            }
        }
        Self::from_faces(n, faces)
    }

    pub fn single(face: Face) -> Self {
        Self {
            ambient_dim: face.ambient_dim(),
            maximal: vec![face],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn maximal_faces(&self) -> &[Face] {
        &self.maximal
    }

    pub fn is_empty(&self) -> bool {
        self.maximal.is_empty()
    }

    /// Dimension of the largest face, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.maximal.iter().map(Face::dim).max()
    }

    /// Every face of the complex, sorted and without repeats.
    pub fn all_faces(&self) -> Vec<Face> {
        let mut out: Vec<Face> = self.maximal.iter().flat_map(Face::subfaces).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn faces_of_dim(&self, d: usize) -> Vec<Face> {
        self.all_faces().into_iter().filter(|f| f.dim() == d).collect()
    }

    pub fn contains_face(&self, face: &Face) -> bool {
        self.maximal.iter().any(|m| face.is_subface_of(m))
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.maximal.iter().any(|f| f.contains(p, tol))
    }

    /// All faces of dimension `<= j`.
    pub fn skeleton(&self, j: usize) -> Self {
        let faces = self.all_faces().into_iter().filter(|f| f.dim() <= j);
        Self::from_faces(self.ambient_dim, faces).expect("faces share the ambient dimension")
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Self::from_faces(
            self.ambient_dim,
            self.maximal.iter().chain(&other.maximal).cloned(),
        )
    }

    pub fn intersect_face(&self, face: &Face) -> Self {
        let faces = self.maximal.iter().filter_map(|m| m.intersect(face));
        Self::from_faces(self.ambient_dim, faces).expect("faces share the ambient dimension")
    }

    pub fn is_subcomplex_of(&self, other: &Self) -> bool {
        self.maximal.iter().all(|f| other.contains_face(f))
    }
}

impl fmt::Display for CubicalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, face) in self.maximal.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{face}")?;
        }
        write!(f, "}}")
    }
}

/// Parses `full:n`, `boundary:n`, `J:n`, `face:<pattern>`, `empty:n` and
/// `skeleton:<desc>:<j>`.
impl FromStr for CubicalComplex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || domain(format!("bad complex descriptor {s:?}"));
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        let dim = |r: &str| r.trim().parse::<usize>().map_err(|_| bad());
        match head.trim() {
            "full" => Ok(Self::full(dim(rest)?)),
            "empty" => Ok(Self::empty(dim(rest)?)),
            "boundary" => Self::boundary(dim(rest)?),
            "J" => Self::j_complex(dim(rest)?),
            "face" => Ok(Self::single(rest.trim().parse()?)),
            "skeleton" => {
                let (inner, j) = rest.rsplit_once(':').ok_or_else(bad)?;
                Ok(inner.parse::<Self>()?.skeleton(dim(j)?))
            }
            _ => Err(bad()),
        }
    }
}

/// A finite union of axis-aligned closed boxes in `I^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    ambient_dim: usize,
    boxes: Vec<Vec<(f64, f64)>>,
}

impl BoxRegion {
    pub fn new(ambient_dim: usize, boxes: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        for b in &boxes {
            if b.len() != ambient_dim {
                return Err(domain(format!(
                    "box of dimension {} in a region of dimension {ambient_dim}",
                    b.len()
                )));
            }
            if b.iter().any(|&(lo, hi)| !(lo <= hi) || lo < 0.0 || hi > 1.0) {
                return Err(domain(format!("box {b:?} is not a sub-box of the unit cube")));
            }
        }
        Ok(Self { ambient_dim, boxes })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn boxes(&self) -> &[Vec<(f64, f64)>] {
        &self.boxes
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.ambient_dim
            && self.boxes.iter().any(|b| {
                b.iter()
                    .zip(p)
                    .all(|(&(lo, hi), &x)| x >= lo - tol && x <= hi + tol)
            })
    }

    pub fn intersect_face(&self, face: &Face) -> Self {
        let boxes = self
            .boxes
            .iter()
            .filter_map(|b| {
                let mut out = b.clone();
                for (axis, iv) in out.iter_mut().enumerate() {
                    if let Some(a) = face.pin(axis) {
                        let a = f64::from(a);
                        if a < iv.0 || a > iv.1 {
                            return None;
                        }
                        *iv = (a, a);
                    }
                }
                Some(out)
            })
            .collect();
        Self {
            ambient_dim: self.ambient_dim,
            boxes,
        }
    }
}

/// `K(eps)`: one box per maximal face, free coordinates cut to
/// `[eps, 1 - eps]`.
pub fn chamber_region(k: &CubicalComplex, eps: f64) -> Result<BoxRegion> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(domain(format!("chamber needs 0 < eps <= 1/2, got {eps}")));
    }
    let boxes = k
        .maximal_faces()
        .iter()
        .map(|f| {
            f.pins()
                .iter()
                .map(|p| match p {
                    Some(a) => (f64::from(*a), f64::from(*a)),
                    None => (eps, 1.0 - eps),
                })
                .collect()
        })
        .collect();
    BoxRegion::new(k.ambient_dim(), boxes)
}

/// `J^{n-1}_delta`: `∂I^n` minus the open core `(delta, 1 - delta)^{n-1} × {0}`
/// of the bottom face.
pub fn j_delta_region(n: usize, delta: f64) -> Result<BoxRegion> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(domain(format!("J_delta needs 0 < delta < 1/2, got {delta}")));
    }
    let j = CubicalComplex::j_complex(n)?;
    let mut boxes: Vec<Vec<(f64, f64)>> = j
        .maximal_faces()
        .iter()
        .map(|f| {
            f.pins()
                .iter()
                .map(|p| p.map_or((0.0, 1.0), |a| (f64::from(a), f64::from(a))))
                .collect()
        })
        .collect();
    let last = n - 1;
    for axis in 0..last {
        for band in [(0.0, delta), (1.0 - delta, 1.0)] {
            let mut b = vec![(0.0, 1.0); n];
            b[axis] = band;
            b[last] = (0.0, 0.0);
            boxes.push(b);
        }
    }
    BoxRegion::new(n, boxes)
}

/// A set of points of `I^n` that can be sampled and tested for membership.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Complex(CubicalComplex),
    Boxes(BoxRegion),
}

impl From<CubicalComplex> for Domain {
    fn from(k: CubicalComplex) -> Self {
        Domain::Complex(k)
    }
}

impl From<BoxRegion> for Domain {
    fn from(b: BoxRegion) -> Self {
        Domain::Boxes(b)
    }
}

fn linspace(lo: f64, hi: f64, res: usize) -> Vec<f64> {
    if lo == hi || res < 2 {
        return vec![lo];
    }
    (0..res)
        .map(|k| {
            if k == res - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (res - 1) as f64
            }
        })
        .collect()
}

fn box_grid(intervals: &[(f64, f64)], res: usize, out: &mut Vec<Vec<f64>>) {
    let axes: Vec<Vec<f64>> = intervals
        .iter()
        .map(|&(lo, hi)| linspace(lo, hi, res))
        .collect();
    let mut idx = vec![0usize; axes.len()];
    loop {
        out.push(idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect());
        // odometer, last axis fastest
        let mut k = axes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn face_intervals(f: &Face) -> Vec<(f64, f64)> {
    f.pins()
        .iter()
        .map(|p| p.map_or((0.0, 1.0), |a| (f64::from(a), f64::from(a))))
        .collect()
}

impl Domain {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Domain::Complex(k) => k.ambient_dim(),
            Domain::Boxes(b) => b.ambient_dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Domain::Complex(k) => k.is_empty(),
            Domain::Boxes(b) => b.boxes().is_empty(),
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        match self {
            Domain::Complex(k) => k.contains(p, tol),
            Domain::Boxes(b) => b.contains(p, tol),
        }
    }

    pub fn intersect_face(&self, face: &Face) -> Domain {
        match self {
            Domain::Complex(k) => Domain::Complex(k.intersect_face(face)),
            Domain::Boxes(b) => Domain::Boxes(b.intersect_face(face)),
        }
    }

    fn pieces(&self) -> Vec<Vec<(f64, f64)>> {
        match self {
            Domain::Complex(k) => k.maximal_faces().iter().map(face_intervals).collect(),
            Domain::Boxes(b) => b.boxes().to_vec(),
        }
    }

    /// Tensor grid with `res` points per non-degenerate axis on every
    /// maximal face or box. Shared boundaries appear more than once.
    pub fn grid_points(&self, res: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for piece in self.pieces() {
            box_grid(&piece, res, &mut out);
        }
        out
    }

    /// `count` uniform points on every maximal face or box.
    pub fn random_points<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for piece in self.pieces() {
            for _ in 0..count {
                out.push(
                    piece
                        .iter()
                        .map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
                        .collect(),
                );
            }
        }
        out
    }
}
