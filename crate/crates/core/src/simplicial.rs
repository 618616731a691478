//! Cells of Δⁿ and of the cyclic sets ĥΔⁿ, grid paths in Δᵏ×Δˡ, and the
//! contracting homotopy on normalized chains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use smallvec::SmallVec;

use crate::scalar::Scalar;

/// Raw index sequence `(i₀,…,i_k)`.
pub type Cell = SmallVec<[u8; 12]>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimplicialError {
    #[error("index {j} out of range for a cell of length {len}")]
    OutOfRange { j: usize, len: usize },
    #[error("face of a 0-cell")]
    FaceOfVertex,
    #[error("vertex {v} exceeds bound {n}")]
    Bound { v: usize, n: usize },
    #[error("grid path invalid: {0}")]
    Grid(String),
}

pub fn cell(ix: &[usize]) -> Cell {
    ix.iter().map(|&i| u8::try_from(i).expect("vertex index fits in u8")).collect()
}

pub fn dim(c: &[u8]) -> usize {
    c.len() - 1
}

pub fn is_degenerate(c: &[u8]) -> bool {
    c.windows(2).any(|w| w[0] == w[1])
}

pub fn is_monotone(c: &[u8]) -> bool {
    c.windows(2).all(|w| w[0] <= w[1])
}

pub fn face(c: &[u8], j: usize) -> Result<Cell, SimplicialError> {
    if c.len() < 2 {
        return Err(SimplicialError::FaceOfVertex);
    }
    if j >= c.len() {
        return Err(SimplicialError::OutOfRange { j, len: c.len() });
    }
    let mut out: Cell = c.into();
    out.remove(j);
    Ok(out)
}

pub fn degeneracy(c: &[u8], j: usize) -> Result<Cell, SimplicialError> {
    if j >= c.len() {
        return Err(SimplicialError::OutOfRange { j, len: c.len() });
    }
    let mut out: Cell = c.into();
    out.insert(j, c[j]);
    Ok(out)
}

/// `t_k(i₀,…,i_{k−1},i_k) = (i_k,i₀,…,i_{k−1})`.
pub fn rotate(c: &[u8]) -> Cell {
    let mut out: Cell = SmallVec::with_capacity(c.len());
    out.push(c[c.len() - 1]);
    out.extend_from_slice(&c[..c.len() - 1]);
    out
}

/// Consecutive subcell `α(a,…,b)`.
pub fn sub(c: &[u8], a: usize, b: usize) -> Cell {
    c[a..=b].into()
}

/// Wrapped cell `α(ℓ,…,s,0,…,k)`.
pub fn wrapped(c: &[u8], l: usize, k: usize) -> Cell {
    let mut out: Cell = c[l..].into();
    out.extend_from_slice(&c[..=k]);
    out
}

/// Applies a vertex map `φ` pointwise.
pub fn map_vertices(c: &[u8], phi: &[usize]) -> Cell {
    c.iter().map(|&i| phi[i as usize] as u8).collect()
}

/// Vertex map of the coface `δ_j: [n−1] → [n]`.
pub fn coface_map(n: usize, j: usize) -> Vec<usize> {
    (0..n).map(|i| if i < j { i } else { i + 1 }).collect()
}

/// Vertex map of the codegeneracy `σ_j: [n+1] → [n]`.
pub fn codegeneracy_map(n: usize, j: usize) -> Vec<usize> {
    (0..n + 2).map(|i| if i <= j { i } else { i - 1 }).collect()
}

/// A k-simplex of ĥΔⁿ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicCell {
    n: usize,
    idx: Cell,
}

impl CyclicCell {
    pub fn new(n: usize, ix: &[usize]) -> Result<Self, SimplicialError> {
        if ix.is_empty() {
            return Err(SimplicialError::OutOfRange { j: 0, len: 0 });
        }
        if let Some(&v) = ix.iter().find(|&&v| v > n) {
            return Err(SimplicialError::Bound { v, n });
        }
        Ok(CyclicCell { n, idx: cell(ix) })
    }

    pub fn bound(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[u8] {
        &self.idx
    }

    pub fn dim(&self) -> usize {
        self.idx.len() - 1
    }

    pub fn is_degenerate(&self) -> bool {
        is_degenerate(&self.idx)
    }

    pub fn face(&self, j: usize) -> Result<Self, SimplicialError> {
        Ok(CyclicCell { n: self.n, idx: face(&self.idx, j)? })
    }

    pub fn degeneracy(&self, j: usize) -> Result<Self, SimplicialError> {
        Ok(CyclicCell { n: self.n, idx: degeneracy(&self.idx, j)? })
    }

    pub fn rotate(&self) -> Self {
        CyclicCell { n: self.n, idx: rotate(&self.idx) }
    }
}

impl fmt::Debug for CyclicCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.idx.as_slice())
    }
}

/// A k-simplex of Δⁿ: a nondecreasing sequence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MonotoneCell(CyclicCell);

impl MonotoneCell {
    pub fn new(n: usize, ix: &[usize]) -> Result<Self, SimplicialError> {
        let c = CyclicCell::new(n, ix)?;
        if !is_monotone(&c.idx) {
            return Err(SimplicialError::Grid(format!("{ix:?} is not nondecreasing")));
        }
        Ok(MonotoneCell(c))
    }

    pub fn as_cyclic(&self) -> &CyclicCell {
        &self.0
    }
}

/// All length-(k+1) sequences over `{0,…,n}` in lexicographic order.
pub fn enum_all(n: usize, k: usize) -> Vec<Cell> {
    let mut out = vec![Cell::new()];
    for _ in 0..=k {
        let mut next = Vec::with_capacity(out.len() * (n + 1));
        for c in &out {
            for v in 0..=n {
                let mut d = c.clone();
                d.push(v as u8);
                next.push(d);
            }
        }
        out = next;
    }
    out
}

/// Nondegenerate k-cells of ĥΔⁿ in lexicographic order.
pub fn enum_nondegenerate(n: usize, k: usize) -> Vec<Cell> {
    let mut out: Vec<Cell> = (0..=n).map(|v| cell(&[v])).collect();
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * n.max(1));
        for c in &out {
            let last = *c.last().unwrap();
            for v in 0..=n as u8 {
                if v != last {
                    let mut d = c.clone();
                    d.push(v);
                    next.push(d);
                }
            }
        }
        out = next;
    }
    out
}

/// Nondegenerate k-cells of Δⁿ (strictly increasing sequences).
pub fn enum_strict(n: usize, k: usize) -> Vec<Cell> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Cell, out: &mut Vec<Cell>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..=n {
            cur.push(v as u8);
            rec(v + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k + 1, &mut Cell::new(), &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridMode {
    Monotone,
    Supported,
}

/// A sequence of grid points `(α_i, β_i)` in `[k]×[ℓ]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPath {
    pub k: usize,
    pub l: usize,
    pub verts: Vec<(u8, u8)>,
    pub mode: GridMode,
}

fn comparable(a: (u8, u8), b: (u8, u8)) -> bool {
    (a.0 <= b.0 && a.1 <= b.1) || (b.0 <= a.0 && b.1 <= a.1)
}

impl GridPath {
    /// Builds a path from its two rows.
    pub fn from_rows(k: usize, l: usize, alpha: &[usize], beta: &[usize], mode: GridMode) -> Result<Self, SimplicialError> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(SimplicialError::Grid("row lengths differ".into()));
        }
        let p = GridPath {
            k,
            l,
            verts: alpha.iter().zip(beta).map(|(&a, &b)| (a as u8, b as u8)).collect(),
            mode,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn alpha(&self) -> Cell {
        self.verts.iter().map(|v| v.0).collect()
    }

    pub fn beta(&self) -> Cell {
        self.verts.iter().map(|v| v.1).collect()
    }

    pub fn dim(&self) -> usize {
        self.verts.len() - 1
    }

    pub fn validate(&self) -> Result<(), SimplicialError> {
        for &(a, b) in &self.verts {
            if a as usize > self.k || b as usize > self.l {
                return Err(SimplicialError::Grid(format!("vertex ({a},{b}) outside the {}x{} grid", self.k + 1, self.l + 1)));
            }
        }
        match self.mode {
            GridMode::Monotone => {
                if !is_monotone(&self.alpha()) || !is_monotone(&self.beta()) {
                    return Err(SimplicialError::Grid("rows are not nondecreasing".into()));
                }
            }
            GridMode::Supported => {
                if !self.is_supported() {
                    return Err(SimplicialError::Grid("vertex set is not a chain".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether the vertex set lies on a single monotone path.
    pub fn is_supported(&self) -> bool {
        self.verts.iter().all(|&a| self.verts.iter().all(|&b| comparable(a, b)))
    }

    pub fn is_degenerate(&self) -> bool {
        self.verts.windows(2).any(|w| w[0] == w[1])
    }

    /// Applies `δ_j` to the β-row, landing in the `[k]×[ℓ+1]` grid.
    pub fn coface_beta(&self, j: usize) -> GridPath {
        let phi = coface_map(self.l + 1, j);
        GridPath {
            k: self.k,
            l: self.l + 1,
            verts: self.verts.iter().map(|&(a, b)| (a, phi[b as usize] as u8)).collect(),
            mode: self.mode,
        }
    }
}

impl fmt::Debug for GridPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.verts.iter().map(|v| v.0.to_string()).collect();
        let b: Vec<String> = self.verts.iter().map(|v| v.1.to_string()).collect();
        write!(f, "[{}; {}]", a.join(" "), b.join(" "))
    }
}

/// Grid points in product order, as a flat list.
fn grid_points(k: usize, l: usize) -> Vec<(u8, u8)> {
    let mut v = Vec::new();
    for a in 0..=k {
        for b in 0..=l {
            v.push((a as u8, b as u8));
        }
    }
    v
}

/// Monotone mode: every nondegenerate cell of Δᵏ×Δˡ.
/// Supported mode: every nondegenerate sequence of at most `max_len` points
/// whose vertex set lies on a monotone path.
pub fn enum_grid_paths(k: usize, l: usize, mode: GridMode, max_len: usize) -> Vec<GridPath> {
    let pts = grid_points(k, l);
    let mut out = Vec::new();
    match mode {
        GridMode::Monotone => {
            fn rec(pts: &[(u8, u8)], cur: &mut Vec<(u8, u8)>, k: usize, l: usize, out: &mut Vec<GridPath>) {
                out.push(GridPath { k, l, verts: cur.clone(), mode: GridMode::Monotone });
                let last = *cur.last().unwrap();
                for &p in pts {
                    if p != last && p.0 >= last.0 && p.1 >= last.1 {
                        cur.push(p);
                        rec(pts, cur, k, l, out);
                        cur.pop();
                    }
                }
            }
            for &p in &pts {
                rec(&pts, &mut vec![p], k, l, &mut out);
            }
        }
        GridMode::Supported => {
            fn rec(pts: &[(u8, u8)], cur: &mut Vec<(u8, u8)>, k: usize, l: usize, max_len: usize, out: &mut Vec<GridPath>) {
                out.push(GridPath { k, l, verts: cur.clone(), mode: GridMode::Supported });
                if cur.len() == max_len {
                    return;
                }
                let last = *cur.last().unwrap();
                for &p in pts {
                    if p != last && cur.iter().all(|&q| comparable(p, q)) {
                        cur.push(p);
                        rec(pts, cur, k, l, max_len, out);
                        cur.pop();
                    }
                }
            }
            if max_len > 0 {
                for &p in &pts {
                    rec(&pts, &mut vec![p], k, l, max_len, &mut out);
                }
            }
        }
    }
    out.sort();
    out
}

/// Maximal monotone paths, i.e. the top cells of Δᵏ×Δˡ.
pub fn maximal_paths(k: usize, l: usize) -> Vec<GridPath> {
    let mut out = Vec::new();
    fn rec(a: usize, b: usize, k: usize, l: usize, cur: &mut Vec<(u8, u8)>, out: &mut Vec<GridPath>) {
        if a == k && b == l {
            out.push(GridPath { k, l, verts: cur.clone(), mode: GridMode::Monotone });
            return;
        }
        if a < k {
            cur.push((a as u8 + 1, b as u8));
            rec(a + 1, b, k, l, cur, out);
            cur.pop();
        }
        if b < l {
            cur.push((a as u8, b as u8 + 1));
            rec(a, b + 1, k, l, cur, out);
            cur.pop();
        }
    }
    rec(0, 0, k, l, &mut vec![(0, 0)], &mut out);
    out.sort();
    out
}

/// Result of the contracting homotopy check in one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomotopyDegree {
    pub degree: usize,
    pub cells: usize,
    pub holds: bool,
}

type Chain = BTreeMap<Cell, Scalar>;

fn chain_add(c: &mut Chain, k: Cell, v: &Scalar) {
    if is_degenerate(&k) {
        return;
    }
    let e = c.entry(k.clone()).or_default();
    *e += v;
    if e.is_zero() {
        c.remove(&k);
    }
}

fn boundary(c: &Chain) -> Chain {
    let mut out = Chain::new();
    for (cell, v) in c {
        if cell.len() < 2 {
            continue;
        }
        for j in 0..cell.len() {
            let s = if j % 2 == 0 { v.clone() } else { -v };
            chain_add(&mut out, face(cell, j).unwrap(), &s);
        }
    }
    out
}

fn homotopy(c: &Chain) -> Chain {
    let mut out = Chain::new();
    for (cell, v) in c {
        let mut d: Cell = SmallVec::new();
        d.push(0);
        d.extend_from_slice(cell);
        chain_add(&mut out, d, v);
    }
    out
}

/// Checks `∂h + h∂ = id − ε` on normalized chains of ĥΔⁿ, basis cell by basis cell,
/// where `h(i₀,…,i_k) = (0,i₀,…,i_k)` and `ε` projects onto the basepoint `(0)`.
pub fn contracting_homotopy_check(n: usize, maxdeg: usize) -> Vec<HomotopyDegree> {
    let mut report = Vec::new();
    for k in 0..=maxdeg {
        let cells = enum_nondegenerate(n, k);
        let mut holds = true;
        for c in &cells {
            let mut x = Chain::new();
            x.insert(c.clone(), Scalar::ONE);
            let mut lhs = boundary(&homotopy(&x));
            for (kk, v) in homotopy(&boundary(&x)) {
                chain_add(&mut lhs, kk, &v);
            }
            let mut rhs = x.clone();
            if k == 0 {
                chain_add(&mut rhs, cell(&[0]), &-Scalar::ONE);
            }
            if lhs != rhs {
                holds = false;
            }
        }
        report.push(HomotopyDegree { degree: k, cells: cells.len(), holds });
    }
    report
}

/// Distinct vertex-set classes of a family of paths, used by coverage checks.
pub fn vertex_set(p: &GridPath) -> BTreeSet<(u8, u8)> {
    p.verts.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_and_degeneracy_examples() {
        assert_eq!(face(&cell(&[0, 1, 0]), 1).unwrap(), cell(&[0, 0]));
        assert_eq!(degeneracy(&cell(&[0, 1]), 0).unwrap(), cell(&[0, 0, 1]));
        assert_eq!(rotate(&cell(&[0, 1, 2])), cell(&[2, 0, 1]));
        assert!(face(&cell(&[3]), 0).is_err());
        assert!(face(&cell(&[0, 1]), 2).is_err());
    }

    #[test]
    fn grid_example_path() {
        let p = GridPath::from_rows(
            4,
            7,
            &[0, 1, 1, 1, 2, 3, 4, 4, 4, 4, 4, 4],
            &[0, 0, 1, 2, 2, 2, 2, 3, 4, 5, 6, 7],
            GridMode::Monotone,
        )
        .unwrap();
        assert_eq!(p.dim(), 11);
        assert!(GridPath::from_rows(1, 1, &[0, 1, 0, 1], &[0, 0, 1, 1], GridMode::Supported).is_err());
        let s = GridPath::from_rows(
            2,
            3,
            &[0, 0, 1, 0, 0, 1, 0, 2, 1, 2],
            &[0, 1, 3, 1, 2, 2, 1, 3, 3, 3],
            GridMode::Supported,
        );
        assert!(s.is_ok());
    }

    #[test]
    fn vertex_homotopy() {
        let r = contracting_homotopy_check(1, 0);
        assert!(r[0].holds);
    }
}
