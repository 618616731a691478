//! Homology of local complexes: Smith-style diagonalization over `ℚ[z]` and
//! `ℚ[z, z⁻¹]`, generic rank profiles otherwise.

use std::collections::BTreeMap;
use std::fmt;

use crate::forms::Gens;
use crate::perf::{FormMatrix, Grading, HomElement, PerfError, PerfObject};
use crate::poly::{LaurentPoly, Mono, Ring};
use crate::scalar::Scalar;

/// Dense univariate polynomial, lowest coefficient first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
struct Uni(Vec<Scalar>);

impl Uni {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn deg(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> &Scalar {
        self.0.last().unwrap()
    }

    fn sub_scaled_shift(&mut self, other: &Uni, c: &Scalar, shift: usize) {
        if self.0.len() < other.0.len() + shift {
            self.0.resize(other.0.len() + shift, Scalar::ZERO);
        }
        for (i, b) in other.0.iter().enumerate() {
            let t = b * c;
            self.0[i + shift] -= &t;
        }
        let v = std::mem::take(&mut self.0);
        *self = Uni(v).trim();
    }

    fn mul(&self, other: &Uni) -> Uni {
        if self.is_zero() || other.is_zero() {
            return Uni(vec![]);
        }
        let mut out = vec![Scalar::ZERO; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Uni(out).trim()
    }

    fn divrem(&self, b: &Uni) -> (Uni, Uni) {
        let mut r = self.clone();
        let mut q = vec![Scalar::ZERO; self.0.len().saturating_sub(b.0.len()) + 1];
        while !r.is_zero() && r.deg() >= b.deg() {
            let shift = r.deg() - b.deg();
            let c = r.lead() / b.lead();
            r.sub_scaled_shift(b, &c, shift);
            q[shift] = c;
        }
        (Uni(q).trim(), r)
    }

    fn monic(&self) -> Uni {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.lead().inv();
        Uni(self.0.iter().map(|a| a * &c).collect())
    }

    /// Divides out the largest power of `z`.
    fn strip_z(&self) -> Uni {
        let v = self.0.iter().position(|c| !c.is_zero()).unwrap_or(0);
        Uni(self.0[v..].to_vec())
    }

    fn gcd(a: &Uni, b: &Uni) -> Uni {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn to_poly(&self, ring: &Ring) -> LaurentPoly {
        LaurentPoly::from_terms(
            ring,
            self.0.iter().enumerate().map(|(i, c)| (Mono::var(ring.nvars(), 0, i as i32), c.clone())),
        )
    }
}

/// The coefficient sequence of `z^shift · p`.
fn to_uni(p: &LaurentPoly, shift: i32) -> Uni {
    let mut v = Vec::new();
    for (m, c) in p.terms() {
        let e = (m.0.first().copied().unwrap_or(0) + shift) as usize;
        if v.len() <= e {
            v.resize(e + 1, Scalar::ZERO);
        }
        v[e] = c.clone();
    }
    Uni(v).trim()
}

fn min_exponent(rows: &[Vec<LaurentPoly>]) -> i32 {
    rows.iter()
        .flatten()
        .flat_map(|p| p.terms().keys().map(|m| m.0.first().copied().unwrap_or(0)))
        .min()
        .unwrap_or(0)
        .min(0)
}

/// Whether `ring` admits the exact Euclidean computation.
pub fn is_euclidean(ring: &Ring) -> bool {
    ring.nvars() <= 1
}

/// Monic invariant factors `d₁ | d₂ | ⋯` of a matrix over a univariate ring;
/// for a Laurent coordinate, powers of `z` are units and are divided out.
pub fn invariant_factors(ring: &Ring, rows: &[Vec<LaurentPoly>]) -> Vec<LaurentPoly> {
    assert!(is_euclidean(ring), "invariant factors need a univariate ring");
    let laurent = ring.nvars() == 1 && ring.is_invertible(0);
    let shift = -min_exponent(rows);
    let mut a: Vec<Vec<Uni>> = rows.iter().map(|r| r.iter().map(|p| to_uni(p, shift)).collect()).collect();
    let (m, n) = (a.len(), a.first().map_or(0, |r| r.len()));
    let mut diag = Vec::new();
    for t in 0..m.min(n) {
        let Some((pi, pj)) = min_entry(&a, t..m, t..n) else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let piv = a[t][t].clone();
            for i in t + 1..m {
                let (q, _) = a[i][t].divrem(&piv);
                if !q.is_zero() {
                    for j in t..n {
                        let s = q.mul(&a[t][j]);
                        a[i][j].sub_scaled_shift(&s, &Scalar::ONE, 0);
                    }
                }
            }
            for j in t + 1..n {
                let (q, _) = a[t][j].divrem(&piv);
                if !q.is_zero() {
                    for i in t..m {
                        let s = q.mul(&a[i][t]);
                        a[i][j].sub_scaled_shift(&s, &Scalar::ONE, 0);
                    }
                }
            }
            let row_left = (t + 1..n).find(|&j| !a[t][j].is_zero());
            let col_left = (t + 1..m).find(|&i| !a[i][t].is_zero());
            match (row_left, col_left) {
                (None, None) => break,
                (Some(j), _) => {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                }
                (None, Some(i)) => a.swap(t, i),
            }
        }
        diag.push(a[t][t].clone());
    }
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let g = Uni::gcd(&diag[i], &diag[j]);
            let (l, _) = diag[i].mul(&diag[j]).divrem(&g);
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag.into_iter()
        .map(|d| if laurent { d.strip_z().monic() } else { d.monic() })
        .map(|d| d.to_poly(ring))
        .collect()
}

fn min_entry(
    a: &[Vec<Uni>],
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for i in rows {
        for j in cols.clone() {
            if !a[i][j].is_zero() && best.is_none_or(|b| a[i][j].deg() < b.2) {
                best = Some((i, j, a[i][j].deg()));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// Rank over the fraction field, by division-free elimination.
pub fn generic_rank(rows: &[Vec<LaurentPoly>]) -> usize {
    let mut a: Vec<Vec<LaurentPoly>> = rows.to_vec();
    let (m, n) = (a.len(), a.first().map_or(0, |r| r.len()));
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..m {
            if a[i][c].is_zero() {
                continue;
            }
            let (pv, q) = (a[r][c].clone(), a[i][c].clone());
            for j in c..n {
                a[i][j] = a[i][j].mul(&pv).sub(&a[r][j].mul(&q));
            }
        }
        r += 1;
        if r == m {
            break;
        }
    }
    r
}

/// `R^free ⊕ ⊕ R/(tᵢ)`.
#[derive(Clone, PartialEq, Eq)]
pub struct ModuleSummary {
    pub free_rank: usize,
    pub torsion: Vec<LaurentPoly>,
}

impl ModuleSummary {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for ModuleSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("R^{}", self.free_rank));
        }
        for t in &self.torsion {
            parts.push(format!("R/({t})"));
        }
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

impl fmt::Debug for ModuleSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Homology {
    /// Exact module structure per degree.
    Exact(BTreeMap<i32, ModuleSummary>),
    /// Ranks of homology over the fraction field only.
    RankProfile(BTreeMap<i32, usize>),
}

impl Homology {
    pub fn is_exact_method(&self) -> bool {
        matches!(self, Homology::Exact(_))
    }

    /// Degrees with nonzero homology.
    pub fn support(&self) -> Vec<i32> {
        match self {
            Homology::Exact(m) => m.iter().filter(|(_, s)| !s.is_zero()).map(|(&q, _)| q).collect(),
            Homology::RankProfile(m) => m.iter().filter(|(_, &r)| r > 0).map(|(&q, _)| q).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_empty()
    }

    pub fn concentrated_in_degree_zero(&self) -> bool {
        self.support().iter().all(|&q| q == 0)
    }
}

fn function_rows(m: &FormMatrix) -> Vec<Vec<LaurentPoly>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).comp(Gens(0))).collect()).collect()
}

fn diff_rows(e: &PerfObject, q: i32) -> Option<Vec<Vec<LaurentPoly>>> {
    let (s, t) = (e.ranks().rank(q), e.ranks().rank(q + 1));
    if s == 0 || t == 0 {
        return None;
    }
    Some(match e.d().block(q + 1, q) {
        Some(m) => function_rows(m),
        None => vec![vec![LaurentPoly::zero(e.ring()); s]; t],
    })
}

/// Homology of a complex of free modules.
pub fn homology(e: &PerfObject) -> Homology {
    let ring = e.ring();
    let degrees: Vec<i32> = e.ranks().degrees().map(|(q, _)| q).collect();
    if is_euclidean(ring) {
        let mut out = BTreeMap::new();
        let factors = |q: i32| diff_rows(e, q).map(|r| invariant_factors(ring, &r)).unwrap_or_default();
        for &q in &degrees {
            let out_f = factors(q);
            let in_f = factors(q - 1);
            let free = e.ranks().rank(q) - out_f.len() - in_f.len();
            let torsion = in_f.into_iter().filter(|t| *t != LaurentPoly::one(ring)).collect();
            out.insert(q, ModuleSummary { free_rank: free, torsion });
        }
        Homology::Exact(out)
    } else {
        let rank = |q: i32| diff_rows(e, q).map(|r| generic_rank(&r)).unwrap_or(0);
        Homology::RankProfile(degrees.iter().map(|&q| (q, e.ranks().rank(q) - rank(q) - rank(q - 1))).collect())
    }
}

/// `Cone(f)^q = A^{q+1} ⊕ B^q` with `d(a, b) = (−d a, f a + d b)`, for a degree-0 chain map `f: A → B`.
pub fn mapping_cone(f: &HomElement, src: &PerfObject, tgt: &PerfObject) -> Result<PerfObject, PerfError> {
    let ring = src.ring();
    let (a, b) = (src.ranks(), tgt.ranks());
    let mut qs: Vec<i32> = a.degrees().map(|(q, _)| q - 1).chain(b.degrees().map(|(q, _)| q)).collect();
    qs.sort();
    qs.dedup();
    let ranks = Grading::new(qs.iter().map(|&q| (q, a.rank(q + 1) + b.rank(q))));
    let zero = |r, c| FormMatrix::zero(ring, r, c);
    let mut diff = BTreeMap::new();
    for &q in &qs {
        let (a0, b0) = (a.rank(q + 1), b.rank(q));
        let (a1, b1) = (a.rank(q + 2), b.rank(q + 1));
        if a0 + b0 == 0 || a1 + b1 == 0 {
            continue;
        }
        let da = src.d().block(q + 2, q + 1).cloned().unwrap_or_else(|| zero(a1, a0));
        let db = tgt.d().block(q + 1, q).cloned().unwrap_or_else(|| zero(b1, b0));
        let fa = f.block(q + 1, q + 1).cloned().unwrap_or_else(|| zero(b1, a0));
        let mut m = zero(a1 + b1, a0 + b0);
        for i in 0..a1 {
            for j in 0..a0 {
                m.set(i, j, da.get(i, j).neg());
            }
        }
        for i in 0..b1 {
            for j in 0..a0 {
                m.set(a1 + i, j, fa.get(i, j).clone());
            }
            for j in 0..b0 {
                m.set(a1 + i, a0 + j, db.get(i, j).clone());
            }
        }
        if !m.is_zero() {
            diff.insert(q, m);
        }
    }
    PerfObject::new(ring, ranks, diff, BTreeMap::new())
}

/// Whether a degree-0 map is a chain map and induces an isomorphism on homology.
pub fn induces_homology_iso(f: &HomElement, src: &PerfObject, tgt: &PerfObject) -> Result<bool, PerfError> {
    let dd = f.compose_unchecked(src.d()).sub(&tgt.d().compose_unchecked(f));
    if !dd.is_zero() {
        return Ok(false);
    }
    Ok(homology(&mapping_cone(f, src, tgt)?).is_zero())
}
