use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::CongruenceError;
use crate::exact::{
    bernoulli, bernoulli_mod, bernoulli_poly, bernoulli_poly_mod, euler, euler_mod, euler_poly, euler_poly_mod,
    fermat_quotient, harmonic, kronecker_symbol, ModPK, PrimeCtx, Rational,
};
use crate::expr::{pow_exponent, CAtom, CongruenceRHS};

fn index(off: i64, p: u64) -> Result<u64, CongruenceError> {
    let n = p as i64 + off;
    u64::try_from(n).map_err(|_| CongruenceError::Atom(format!("negative index p{off:+} at p = {p}")))
}

fn rpow(r: &Rational, n: i64) -> Result<Rational, CongruenceError> {
    if n < 0 && r.is_zero() {
        return Err(CongruenceError::Atom("zero to a negative power".into()));
    }
    let mut acc = Rational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= r;
    }
    Ok(if n < 0 { acc.recip() } else { acc })
}

fn pow_exp(a: i64, b: i64, d: i64, p: u64) -> Result<i64, CongruenceError> {
    pow_exponent(a, b, d, p).ok_or_else(|| CongruenceError::Atom(format!("exponent ({a}p{b:+})/{d} not integral at p = {p}")))
}

/// Exact rational value of an atom at `p`.
pub fn atom_exact(a: &CAtom, p: u64) -> Result<Rational, CongruenceError> {
    let pi = p as i64;
    Ok(match a {
        CAtom::Legendre(x) => Rational::from_integer(kronecker_symbol(*x, pi).into()),
        CAtom::KronP(n) => Rational::from_integer(kronecker_symbol(pi, *n).into()),
        CAtom::Fermat(x) => {
            if (x % BigInt::from(p)).is_zero() {
                return Err(CongruenceError::Atom(format!("p = {p} divides {x} in q({x})")));
            }
            Rational::new(x.pow(p as u32 - 1) - BigInt::one(), BigInt::from(p))
        }
        CAtom::Bern(o) => bernoulli(index(*o, p)?),
        CAtom::Euler(o) => euler(index(*o, p)?),
        CAtom::BernPoly(o, x) => bernoulli_poly(index(*o, p)?, x),
        CAtom::EulerPoly(o, x) => euler_poly(index(*o, p)?, x),
        CAtom::Harm(o, m) => harmonic(index(*o, p)?, *m),
        CAtom::PowP { base, a, b, d } => rpow(base, pow_exp(*a, *b, *d, p)?)?,
    })
}

/// Atom reduced modulo `p^e` through the modular routines.
pub fn atom_mod(a: &CAtom, p: u64, e: u32) -> Result<ModPK, CongruenceError> {
    let ctx = PrimeCtx::new(p, e);
    let idx = |o: i64| p as i64 + o;
    let bad = |err: crate::exact::IndexError| CongruenceError::Atom(err.to_string());
    Ok(match a {
        CAtom::Fermat(x) => fermat_quotient(x, p, e)
            .ok_or_else(|| CongruenceError::Atom(format!("p = {p} divides {x} in q({x})")))?,
        CAtom::Bern(o) => bernoulli_mod(idx(*o), &ctx).map_err(bad)?,
        CAtom::Euler(o) => euler_mod(idx(*o), &ctx).map_err(bad)?,
        CAtom::BernPoly(o, x) => bernoulli_poly_mod(idx(*o), x, &ctx).map_err(bad)?,
        CAtom::EulerPoly(o, x) => euler_poly_mod(idx(*o), x, &ctx).map_err(bad)?,
        CAtom::PowP { base, a, b, d } => {
            let n = pow_exp(*a, *b, *d, p)?;
            ModPK::from_rational(base, p, e).pow(n).map_err(|x| CongruenceError::Atom(x.to_string()))?
        }
        other => ModPK::from_rational(&atom_exact(other, p)?, p, e),
    })
}

/// Exact rational value of a right-hand side at `p`.
pub fn eval_congruence_rhs_exact(rhs: &CongruenceRHS, p: u64) -> Result<Rational, CongruenceError> {
    let pr = Rational::from_integer(p.into());
    let mut total = Rational::zero();
    for m in &rhs.terms {
        let mut v = &m.coef * rpow(&pr, m.p_pow)?;
        for (a, n) in &m.atoms {
            v *= rpow(&atom_exact(a, p)?, *n as i64)?;
        }
        total += v;
    }
    Ok(total)
}

/// Right-hand side modulo `p^e`. A monomial carrying `p^j` needs its atoms
/// only to `e - j` digits, which relative precision provides.
pub fn eval_congruence_rhs(rhs: &CongruenceRHS, p: u64, e: u32) -> Result<ModPK, CongruenceError> {
    let mut total = ModPK::zero(p, e);
    for m in &rhs.terms {
        let mut v = ModPK::from_rational(&m.coef, p, e).shift(m.p_pow);
        for (a, n) in &m.atoms {
            let x = atom_mod(a, p, e)?;
            v = v.mul(&x.pow(*n as i64).map_err(|x| CongruenceError::Atom(x.to_string()))?);
        }
        total = total.add(&v);
    }
    Ok(total)
}
