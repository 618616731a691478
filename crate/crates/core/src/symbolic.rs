//! Term-level expansion of `Tr_g(Aᵏ)_α` into words `± str(g_γ ∘ A_{β₁} ∘ ⋯ ∘ A_{β_k})`.

use std::collections::BTreeMap;
use std::fmt;

use crate::cochain::{trace_sign, LabeledCochain};
use crate::forms::HolForm;
use crate::scalar::Scalar;
use crate::simplicial::{is_degenerate, map_vertices, wrapped, Cell};

/// `sign · str(g_{wrap} ∘ A_{f₁} ∘ ⋯)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub wrap: Cell,
    pub factors: Vec<Cell>,
}

fn idx(c: &[u8]) -> String {
    c.iter().map(|i| i.to_string()).collect()
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g_{{{}}}", idx(&self.wrap))?;
        for c in &self.factors {
            write!(f, " A_{{{}}}", idx(c))?;
        }
        Ok(())
    }
}

/// A signed multiset of words in canonical order.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct TermSet(pub BTreeMap<Word, i64>);

impl TermSet {
    pub fn add(&mut self, w: Word, c: i64) {
        let e = self.0.entry(w.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&w);
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Drops words vanishing by the degenerate-cell convention.
    pub fn simplified(&self) -> TermSet {
        let mut r = TermSet::default();
        for (w, &c) in &self.0 {
            if w.factors.iter().any(|f| is_degenerate(f)) {
                continue;
            }
            if is_degenerate(&w.wrap) && w.wrap.len() > 2 {
                continue;
            }
            r.add(w.clone(), c);
        }
        r
    }

    /// Relabels every vertex through `phi`.
    pub fn relabel(&self, phi: &[usize]) -> TermSet {
        let mut r = TermSet::default();
        for (w, &c) in &self.0 {
            r.add(
                Word { wrap: map_vertices(&w.wrap, phi), factors: w.factors.iter().map(|f| map_vertices(f, phi)).collect() },
                c,
            );
        }
        r
    }

    /// Words present in both with opposite coefficients, and words present in only one.
    pub fn diff(&self, other: &TermSet) -> Vec<(Word, i64, i64)> {
        let mut keys: Vec<&Word> = self.0.keys().chain(other.0.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter_map(|w| {
                let a = self.0.get(w).copied().unwrap_or(0);
                let b = other.0.get(w).copied().unwrap_or(0);
                (a != b).then(|| (w.clone(), a, b))
            })
            .collect()
    }

    pub fn evaluate(&self, g: &LabeledCochain, a: &LabeledCochain) -> HolForm {
        let ring = g.labeling().ring().clone();
        let mut acc = HolForm::zero(&ring);
        'words: for (w, &c) in &self.0 {
            let Some(mut m) = g.get(&w.wrap).cloned() else { continue };
            for f in &w.factors {
                let Some(x) = a.get(f) else { continue 'words };
                m = m.compose_unchecked(x);
            }
            acc.add_scaled(&m.supertrace_unchecked(), &Scalar::int(c));
        }
        acc
    }
}

impl fmt::Debug for TermSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (w, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match *c {
                1 => write!(f, "+{w:?}")?,
                -1 => write!(f, "-{w:?}")?,
                _ => write!(f, "{c:+}*{w:?}")?,
            }
        }
        Ok(())
    }
}

/// Nondecreasing cut points `c₁ ≤ ⋯ ≤ c_{k−1}` in `[0, m]`, each followed by `m`.
fn splits(m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() + 1 == k {
        let mut v = cur.clone();
        v.push(m);
        out.push(v);
        return;
    }
    let lo = cur.last().copied().unwrap_or(0);
    for c in lo..=m {
        cur.push(c);
        splits(m, k, cur, out);
        cur.pop();
    }
}

/// All words of `Tr_g(Aᵏ)_α` before simplification.
pub fn expand_trace_power(alpha: &[u8], k: usize) -> TermSet {
    let s = alpha.len() - 1;
    let mut r = TermSet::default();
    for k0 in 0..=s {
        for l in k0..=s {
            let seg = &alpha[k0..=l];
            let m = l - k0;
            let tsign = if trace_sign(s, k0, l) { -1 } else { 1 };
            let wrap = wrapped(alpha, l, k0);
            if k == 0 {
                if m == 0 {
                    r.add(Word { wrap, factors: vec![] }, tsign);
                }
                continue;
            }
            let mut all = Vec::new();
            splits(m, k, &mut Vec::new(), &mut all);
            for cuts in all {
                let mut prev = 0;
                let mut dims = Vec::with_capacity(k);
                let mut factors = Vec::with_capacity(k);
                for &c in &cuts {
                    factors.push(Cell::from(&seg[prev..=c]));
                    dims.push(c - prev);
                    prev = c;
                }
                let mut parity = 0;
                for i in 0..k {
                    for j in i + 1..k {
                        parity += dims[i] * dims[j];
                    }
                }
                let sign = if parity % 2 == 0 { tsign } else { -tsign };
                r.add(Word { wrap: wrap.clone(), factors }, sign);
            }
        }
    }
    r
}

/// Terms of the Chern component over an ordered tuple of opens, read through the
/// pattern rule `g_β = a_{T∘β}` on `(0,…,ℓ)`.
pub fn nerve_terms(tuple: &[u8], k: usize) -> TermSet {
    let l = tuple.len() - 1;
    let base: Vec<u8> = (0..=l as u8).collect();
    let phi: Vec<usize> = tuple.iter().map(|&i| i as usize).collect();
    expand_trace_power(&base, k).relabel(&phi).simplified()
}

/// The same terms read directly on the tuple of opens.
pub fn tuple_terms(tuple: &[u8], k: usize) -> TermSet {
    expand_trace_power(tuple, k).simplified()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse trace expression at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parses expressions like `tr( g_{101} \nabla g_1 - g_{010} \nabla g_0 ) - tr(…)`,
/// reading `\nabla g_β` as the Atiyah component on `β`.
pub fn parse_trace_expression(src: &str) -> Result<TermSet, ParseError> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = TermSet::default();
    let mut outer = 1i64;
    let mut inner = 1i64;
    let mut in_tr = false;
    let mut cur: Option<Word> = None;
    let flush = |cur: &mut Option<Word>, out: &mut TermSet, s: i64| {
        if let Some(w) = cur.take() {
            out.add(w, s);
        }
    };
    let read_index = |i: &mut usize| -> Result<Cell, ParseError> {
        while *i < b.len() && b[*i] == b' ' {
            *i += 1;
        }
        if *i >= b.len() || b[*i] != b'_' {
            return Err(ParseError { pos: *i, msg: "expected `_`".into() });
        }
        *i += 1;
        let mut c = Cell::new();
        if *i < b.len() && b[*i] == b'{' {
            *i += 1;
            while *i < b.len() && b[*i] != b'}' {
                if b[*i].is_ascii_digit() {
                    c.push(b[*i] - b'0');
                } else if b[*i] != b' ' {
                    return Err(ParseError { pos: *i, msg: "expected digit".into() });
                }
                *i += 1;
            }
            *i += 1;
        } else if *i < b.len() && b[*i].is_ascii_digit() {
            c.push(b[*i] - b'0');
            *i += 1;
        } else {
            return Err(ParseError { pos: *i, msg: "expected index".into() });
        }
        Ok(c)
    };
    while i < b.len() {
        let ch = b[i];
        if src[i..].starts_with("tr(") || src[i..].starts_with("tr (") {
            i += if b[i + 2] == b'(' { 3 } else { 4 };
            in_tr = true;
            inner = 1;
            continue;
        }
        if src[i..].starts_with("\\nabla") {
            i += 6;
            while i < b.len() && b[i] == b' ' {
                i += 1;
            }
            if i >= b.len() || b[i] != b'g' {
                return Err(ParseError { pos: i, msg: "expected `g` after nabla".into() });
            }
            i += 1;
            let c = read_index(&mut i)?;
            match cur.as_mut() {
                Some(w) => w.factors.push(c),
                None => return Err(ParseError { pos: i, msg: "factor without a leading g".into() }),
            }
            continue;
        }
        match ch {
            b'g' => {
                if !in_tr {
                    return Err(ParseError { pos: i, msg: "term outside tr(…)".into() });
                }
                i += 1;
                let c = read_index(&mut i)?;
                flush(&mut cur, &mut out, outer * inner);
                cur = Some(Word { wrap: c, factors: vec![] });
            }
            b'+' | b'-' => {
                let s = if ch == b'-' { -1 } else { 1 };
                if in_tr {
                    flush(&mut cur, &mut out, outer * inner);
                    inner = s;
                } else {
                    outer = s;
                }
                i += 1;
            }
            b')' => {
                flush(&mut cur, &mut out, outer * inner);
                in_tr = false;
                outer = 1;
                i += 1;
            }
            b' ' | b'\n' | b'\t' | b'&' | b'\\' => i += 1,
            _ => return Err(ParseError { pos: i, msg: format!("unexpected `{}`", ch as char) }),
        }
    }
    if in_tr {
        return Err(ParseError { pos: b.len(), msg: "unclosed tr(".into() });
    }
    Ok(out)
}
