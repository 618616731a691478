//! Coordinate substitutions and pullback of functions and forms.

use crate::forms::HolForm;
use crate::poly::{same_ring, LaurentPoly, Ring};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChartError {
    #[error("coordinate `{0}` has a negative exponent but its image is not a unit")]
    NotInvertible(String),
    #[error("coordinate ring mismatch")]
    RingMismatch,
    #[error("image count {got} does not match source coordinate count {want}")]
    Arity { got: usize, want: usize },
}

/// A holomorphic map described by the images of the source coordinates
/// as Laurent polynomials in the target coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartMap {
    source: Ring,
    target: Ring,
    images: Vec<LaurentPoly>,
}

impl ChartMap {
    pub fn new(source: &Ring, target: &Ring, images: Vec<LaurentPoly>) -> Result<Self, ChartError> {
        if images.len() != source.nvars() {
            return Err(ChartError::Arity { got: images.len(), want: source.nvars() });
        }
        if images.iter().any(|p| !same_ring(p.ring(), target)) {
            return Err(ChartError::RingMismatch);
        }
        Ok(ChartMap { source: source.clone(), target: target.clone(), images })
    }

    pub fn identity(ring: &Ring) -> Self {
        ChartMap {
            source: ring.clone(),
            target: ring.clone(),
            images: (0..ring.nvars()).map(|i| LaurentPoly::var(ring, i)).collect(),
        }
    }

    pub fn source(&self) -> &Ring {
        &self.source
    }

    pub fn target(&self) -> &Ring {
        &self.target
    }

    pub fn images(&self) -> &[LaurentPoly] {
        &self.images
    }

    pub fn pullback_poly(&self, p: &LaurentPoly) -> Result<LaurentPoly, ChartError> {
        if !same_ring(p.ring(), &self.source) {
            return Err(ChartError::RingMismatch);
        }
        let mut out = LaurentPoly::zero(&self.target);
        for (m, c) in p.terms() {
            let mut t = LaurentPoly::constant(&self.target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let f = self.images[i]
                    .pow(e)
                    .ok_or_else(|| ChartError::NotInvertible(self.source.names()[i].clone()))?;
                t = t.mul(&f);
            }
            out.add_scaled(&t, &crate::scalar::Scalar::ONE);
        }
        Ok(out)
    }

    pub fn pullback(&self, a: &HolForm) -> Result<HolForm, ChartError> {
        if !same_ring(a.ring(), &self.source) {
            return Err(ChartError::RingMismatch);
        }
        let dimg: Vec<HolForm> = self.images.iter().map(|p| HolForm::from_poly(p.clone()).ext_d()).collect();
        let mut out = HolForm::zero(&self.target);
        for (g, p) in a.comps() {
            let mut t = HolForm::from_poly(self.pullback_poly(p)?);
            for i in g.indices() {
                t = t.wedge_unchecked(&dimg[i]);
            }
            out.add_scaled(&t, &crate::scalar::Scalar::ONE);
        }
        Ok(out)
    }

    /// The map whose pullback is `psi.pullback ∘ self.pullback`.
    pub fn then(&self, psi: &ChartMap) -> Result<ChartMap, ChartError> {
        if !same_ring(&self.target, &psi.source) {
            return Err(ChartError::RingMismatch);
        }
        let images = self.images.iter().map(|p| psi.pullback_poly(p)).collect::<Result<Vec<_>, _>>()?;
        Ok(ChartMap { source: self.source.clone(), target: psi.target.clone(), images })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Gens;
    use crate::poly::{CoordRing, Mono};
    use crate::scalar::Scalar;

    #[test]
    fn inversion_chart() {
        let w = CoordRing::polynomial(&["w"]);
        let z = CoordRing::laurent(&["z"]);
        let zinv = LaurentPoly::var(&z, 0).inverse().unwrap();
        let phi = ChartMap::new(&w, &z, vec![zinv]).unwrap();
        let w3 = HolForm::from_poly(LaurentPoly::var(&w, 0).pow(3).unwrap());
        assert_eq!(
            phi.pullback(&w3).unwrap(),
            HolForm::from_poly(LaurentPoly::monomial(&z, Mono::var(1, 0, -3), Scalar::ONE))
        );
        let dw = HolForm::dvar(&w, 0);
        assert_eq!(
            phi.pullback(&dw).unwrap(),
            HolForm::term(LaurentPoly::monomial(&z, Mono::var(1, 0, -2), Scalar::int(-1)), Gens::single(0))
        );
        let id = ChartMap::identity(&w);
        assert_eq!(id.pullback(&dw).unwrap(), dw);
    }

    #[test]
    fn negative_exponent_needs_unit() {
        let a = CoordRing::laurent(&["x"]);
        let b = CoordRing::polynomial(&["t"]);
        let t = LaurentPoly::var(&b, 0);
        let phi = ChartMap::new(&a, &b, vec![t.add(&LaurentPoly::one(&b))]).unwrap();
        let xinv = LaurentPoly::var(&a, 0).inverse().unwrap();
        assert!(matches!(phi.pullback_poly(&xinv), Err(ChartError::NotInvertible(_))));
    }
}
