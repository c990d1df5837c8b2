use num_complex::Complex64;

use super::{Coeff, Exact, PolyError, Polynomial};

/// Ratio of two polynomials in `s`, always held in canonical form.
///
/// Canonical form: when the denominator has a nonzero constant term it is
/// scaled to 1 (`1 + s(...)` style); otherwise the leading denominator
/// coefficient is 1. Common factors are never cancelled implicitly; see
/// [`RationalFunction::reduce`].
#[derive(Clone, PartialEq)]
pub struct RationalFunction<T = f64> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

impl<T: Coeff> std::fmt::Debug for RationalFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?}) / ({:?})", self.num, self.den)
    }
}

impl<T: Coeff> RationalFunction<T> {
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        let norm = if den.coeff(0).is_zero() {
            den.leading().cloned().expect("nonzero denominator")
        } else {
            den.coeff(0)
        };
        // divide rather than scale by the reciprocal, so the normalised
        // coefficient is exactly one in floating point too
        let div = |p: &Polynomial<T>| Polynomial::new(p.coeffs().iter().map(|c| c.clone() / norm.clone()).collect());
        Ok(Self { num: div(&num), den: div(&den) })
    }

    pub fn from_poly(num: Polynomial<T>) -> Self {
        Self::new(num, Polynomial::one()).expect("unit denominator")
    }

    pub fn constant(c: T) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(Polynomial::zero())
    }

    pub fn num(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Product of two rational functions, without cancellation.
    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den).expect("product of nonzero denominators")
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    /// Value at `s = 0` when the denominator constant is nonzero.
    pub fn dc_value(&self) -> Option<T> {
        if self.den.coeff(0).is_zero() {
            None
        } else {
            Some(self.num.coeff(0) / self.den.coeff(0))
        }
    }

    pub fn to_f64(&self) -> RationalFunction<f64> {
        RationalFunction::new(self.num.to_f64(), self.den.to_f64()).expect("nonzero denominator")
    }
}

impl RationalFunction<Exact> {
    /// Cancels every common factor of numerator and denominator. Exact
    /// arithmetic makes the cancellation decision unambiguous.
    pub fn reduce(&self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        let g = self.num.gcd(&self.den);
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let (num, _) = self.num.div_rem(&g);
        let (den, _) = self.den.div_rem(&g);
        Self::new(num, den).expect("nonzero reduced denominator")
    }
}

impl RationalFunction<f64> {
    /// `num(s)/den(s)` by Horner evaluation.
    pub fn eval(&self, s: Complex64) -> Result<Complex64, PolyError> {
        let d = self.den.eval(s);
        let scale = self.den.abs_eval(s);
        if d.norm() <= 4.0 * f64::EPSILON * scale {
            return Err(PolyError::PoleEvaluation);
        }
        Ok(self.num.eval(s) / d)
    }

    pub fn to_exact(&self) -> RationalFunction<Exact> {
        RationalFunction::new(self.num.to_exact(), self.den.to_exact()).expect("nonzero denominator")
    }
}

/// Closes a feedback loop: `a / (1 + a·β)` by exact polynomial arithmetic.
pub fn rational_close<T: Coeff>(
    a: &RationalFunction<T>,
    beta: &RationalFunction<T>,
) -> Result<RationalFunction<T>, PolyError> {
    let num = &a.num * &beta.den;
    let den = &(&a.den * &beta.den) + &(&a.num * &beta.num);
    if den.is_zero() {
        return Err(PolyError::DegenerateFeedback);
    }
    RationalFunction::new(num, den)
}
