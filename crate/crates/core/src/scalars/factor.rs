//! Factorization of residual polynomials over a residue tower.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::field::{Field, ResidueBase};
use super::tower::{TElem, TowerField};
use crate::error::{Error, Result};
use crate::poly::{Poly, PolyOps};

/// Default bound on the degree of factors certified over ℚ.
pub const RATIONAL_DEGREE_BOUND: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Factorization<E> {
    pub unit: E,
    /// Monic irreducible factors with multiplicities, sorted by degree then coefficients' order of discovery.
    pub factors: Vec<(Poly<E>, usize)>,
}

type TPoly<B> = Poly<TElem<<B as Field>::Elem>>;

/// Factors `f ≠ 0` into monic irreducibles over `k`. Randomized splitting draws from `rng`.
pub fn factor_residual<B: ResidueBase, R: Rng + ?Sized>(
    k: &TowerField<B>,
    f: &TPoly<B>,
    rng: &mut R,
    rational_bound: usize,
) -> Result<Factorization<TElem<B::Elem>>> {
    let unit = f.lead().cloned().ok_or(Error::ZeroPolynomial)?;
    let monic = k.pmake_monic(f);
    let mut factors = Vec::new();
    if k.characteristic() == 0 {
        for (g, m) in squarefree_char0(k, &monic) {
            for h in split_rational(k, &g, rational_bound)? {
                factors.push((h, m));
            }
        }
    } else {
        for (g, m) in squarefree_finite(k, &monic) {
            for (h, d) in distinct_degree(k, &g) {
                for piece in equal_degree(k, &h, d, rng) {
                    factors.push((piece, m));
                }
            }
        }
    }
    factors.sort_by_key(|(g, _)| g.deg());
    Ok(Factorization { unit, factors })
}

pub fn recombine<B: ResidueBase>(k: &TowerField<B>, fac: &Factorization<TElem<B::Elem>>) -> TPoly<B> {
    fac.factors
        .iter()
        .fold(k.pconst(fac.unit.clone()), |acc, (g, m)| k.pmul(&acc, &k.ppow(g, *m)))
}

fn squarefree_char0<B: ResidueBase>(k: &TowerField<B>, f: &TPoly<B>) -> Vec<(TPoly<B>, usize)> {
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let d = k.pderiv(f);
    let a = k.pgcd(f, &d);
    let mut b = k.pdivrem(f, &a).unwrap().0;
    let c = k.pdivrem(&d, &a).unwrap().0;
    let mut dd = k.psub(&c, &k.pderiv(&b));
    let mut i = 1;
    while b.deg() > 0 {
        let g = k.pgcd(&b, &dd);
        b = k.pdivrem(&b, &g).unwrap().0;
        let c = k.pdivrem(&dd, &g).unwrap().0;
        dd = k.psub(&c, &k.pderiv(&b));
        if g.deg() > 0 {
            out.push((g, i));
        }
        i += 1;
    }
    out
}

fn squarefree_finite<B: ResidueBase>(k: &TowerField<B>, f: &TPoly<B>) -> Vec<(TPoly<B>, usize)> {
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let p = k.characteristic() as usize;
    let mut c = k.pgcd(f, &k.pderiv(f));
    let mut w = k.pdivrem(f, &c).unwrap().0;
    let mut i = 1;
    while w.deg() > 0 {
        let y = k.pgcd(&w, &c);
        let fac = k.pdivrem(&w, &y).unwrap().0;
        if fac.deg() > 0 {
            out.push((fac, i));
        }
        w = y;
        c = k.pdivrem(&c, &w).unwrap().0;
        i += 1;
    }
    if c.deg() > 0 {
        // c is a p-th power: c(x) = Σ a_j x^{jp}.
        let root: Vec<_> = c.coeffs().iter().step_by(p).map(|a| k.pth_root(a)).collect();
        for (g, m) in squarefree_finite(k, &k.poly(root)) {
            out.push((g, m * p));
        }
    }
    out
}

fn distinct_degree<B: ResidueBase>(k: &TowerField<B>, f: &TPoly<B>) -> Vec<(TPoly<B>, usize)> {
    let q = k.size().expect("finite tower");
    let x = k.px();
    let mut rest = f.clone();
    let mut h = x.clone();
    let mut out = Vec::new();
    let mut i = 1;
    while rest.deg() >= 2 * i {
        h = k.ppowmod(&h, &q, &rest);
        let g = k.pgcd(&rest, &k.psub(&h, &x));
        if g.deg() > 0 {
            rest = k.pdivrem(&rest, &g).unwrap().0;
            h = k.prem(&h, &rest).unwrap();
            out.push((g, i));
        }
        i += 1;
    }
    if rest.deg() > 0 {
        let d = rest.deg();
        out.push((rest, d));
    }
    out
}

fn equal_degree<B: ResidueBase, R: Rng + ?Sized>(k: &TowerField<B>, f: &TPoly<B>, d: usize, rng: &mut R) -> Vec<TPoly<B>> {
    let n = f.deg();
    if n <= d {
        return vec![f.clone()];
    }
    let q = k.size().expect("finite tower");
    let p = k.characteristic();
    loop {
        let a = k.poly((0..n).map(|_| k.random(rng)).collect());
        if a.deg() == 0 {
            continue;
        }
        let b = if p == 2 {
            // Trace map a + a² + … + a^(2^(m·d − 1)) where q = 2^m.
            let m = (q.bits() - 1) as usize;
            let mut t = k.prem(&a, f).unwrap();
            let mut acc = t.clone();
            for _ in 1..m * d {
                t = k.pmulmod(&t, &t, f);
                acc = k.padd(&acc, &t);
            }
            acc
        } else {
            let e = (q.pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
            k.psub(&k.ppowmod(&a, &e, f), &k.pone())
        };
        let g = k.pgcd(f, &b);
        if g.deg() > 0 && g.deg() < n {
            let h = k.pdivrem(f, &g).unwrap().0;
            let mut out = equal_degree(k, &g, d, rng);
            out.extend(equal_degree(k, &h, d, rng));
            return out;
        }
    }
}

/// Splits a monic squarefree polynomial over a characteristic-0 tower.
fn split_rational<B: ResidueBase>(k: &TowerField<B>, f: &TPoly<B>, bound: usize) -> Result<Vec<TPoly<B>>> {
    if f.deg() <= 1 {
        return Ok(vec![f.clone()]);
    }
    if k.depth() > 0 {
        return Err(Error::UnsupportedResidueField { degree: f.deg(), bound: 1 });
    }
    let base = k.base();
    let coeffs: Vec<BigRational> = f
        .coeffs()
        .iter()
        .map(|c| match c {
            TElem::Base(x) => base.canonical_rational(x),
            TElem::Ext(_) => unreachable!("depth-0 tower"),
        })
        .collect();
    let to_tower = |v: &[BigRational]| -> TPoly<B> {
        k.poly(v.iter().map(|c| TElem::Base(base.from_rational(c).unwrap())).collect())
    };
    let mut out = Vec::new();
    let mut rest = coeffs;
    for r in rational_roots(&rest) {
        out.push(to_tower(&[-r.clone(), BigRational::one()]));
        rest = deflate(&rest, &r);
    }
    match rest.len() - 1 {
        0 => {}
        1..=3 => out.push(to_tower(&rest)),
        n if n > bound => return Err(Error::UnsupportedResidueField { degree: n, bound }),
        4 => match quartic_split(&rest) {
            Some((g, h)) => {
                out.push(to_tower(&g));
                out.push(to_tower(&h));
            }
            None => out.push(to_tower(&rest)),
        },
        n => return Err(Error::UnsupportedResidueField { degree: n, bound }),
    }
    Ok(out)
}

fn deflate(f: &[BigRational], r: &BigRational) -> Vec<BigRational> {
    let n = f.len() - 1;
    let mut q = vec![BigRational::zero(); n];
    let mut acc = BigRational::zero();
    for i in (1..=n).rev() {
        acc = &acc * r + &f[i];
        q[i - 1] = acc.clone();
    }
    q
}

/// Integer polynomial proportional to `f`.
fn integral(f: &[BigRational]) -> Vec<BigInt> {
    let l = f.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let v: Vec<BigInt> = f.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    v.into_iter().map(|c| c / &g).collect()
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            small.push(d.clone());
            let e = &n / &d;
            if e != d {
                large.push(e);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn eval(f: &[BigRational], x: &BigRational) -> BigRational {
    f.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Distinct rational roots, ascending.
pub(crate) fn rational_roots(f: &[BigRational]) -> Vec<BigRational> {
    let mut roots = Vec::new();
    let z = integral(f);
    let lead_zeros = z.iter().position(|c| !c.is_zero()).unwrap_or(0);
    if lead_zeros > 0 {
        roots.push(BigRational::zero());
    }
    let z = &z[lead_zeros..];
    if z.len() <= 1 {
        return roots;
    }
    let (a0, an) = (&z[0], z.last().unwrap());
    let trimmed: Vec<BigRational> = z.iter().map(|c| BigRational::from_integer(c.clone())).collect();
    for d in divisors(a0) {
        for e in divisors(an) {
            for s in [1, -1] {
                let r = BigRational::new(&d * s, e.clone());
                if eval(&trimmed, &r).is_zero() && !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// A factorization of a monic quartic without rational roots into two monic quadratics.
fn quartic_split(f: &[BigRational]) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let den = f.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    // g(y) = D⁴ f(y/D) is monic with integer coefficients.
    let g: Vec<BigInt> = (0..5)
        .map(|i| (&f[i] * BigRational::from_integer(num_traits::pow(den.clone(), 4 - i))).to_integer())
        .collect();
    let (g0, g1, g2, g3) = (&g[0], &g[1], &g[2], &g[3]);
    for c in divisors(g0) {
        for c in [c.clone(), -c] {
            let c2 = g0 / &c;
            // b + b' = g3, b·b' = g2 − c − c'
            let s = g2 - &c - &c2;
            let disc = g3 * g3 - BigInt::from(4) * &s;
            if disc.is_negative() {
                continue;
            }
            let r = disc.sqrt();
            if &r * &r != disc || (g3 + &r).is_odd() {
                continue;
            }
            let b = (g3 + &r) / 2;
            let b2 = g3 - &b;
            if &b * &c2 + &b2 * &c == *g1 {
                let d = BigRational::from_integer(den.clone());
                let back = |b: &BigInt, c: &BigInt| {
                    vec![BigRational::from_integer(c.clone()) / (&d * &d), BigRational::from_integer(b.clone()) / &d, BigRational::one()]
                };
                return Some((back(&b, &c), back(&b2, &c2)));
            }
        }
    }
    None
}

/// Irreducibility certificate: exhaustive roots for degree ≤ 3 over small finite towers,
/// Rabin's test otherwise; over ℚ, rational roots and quadratic splits up to `bound`.
pub fn is_irreducible<B: ResidueBase>(k: &TowerField<B>, f: &TPoly<B>, bound: usize) -> Result<bool> {
    let n = f.degree().ok_or(Error::ZeroPolynomial)?;
    if n == 0 {
        return Ok(false);
    }
    if n == 1 {
        return Ok(true);
    }
    if k.characteristic() == 0 {
        let fac = factor_residual(k, f, &mut rand::rngs::mock::StepRng::new(0, 1), bound)?;
        return Ok(fac.factors.len() == 1 && fac.factors[0].1 == 1);
    }
    let f = k.pmake_monic(f);
    if n <= 3 {
        if let Some(elems) = k.elements().filter(|e| e.len() <= 4096) {
            return Ok(elems.iter().all(|a| !k.is_zero(&k.peval(&f, a))));
        }
    }
    let q = k.size().unwrap();
    let x = k.px();
    let frob = |h: &TPoly<B>, times: usize| (0..times).fold(h.clone(), |h, _| k.ppowmod(&h, &q, &f));
    if !k.psub(&frob(&x, n), &x).is_zero() {
        return Ok(false);
    }
    for r in prime_divisors(n) {
        let h = k.psub(&frob(&x, n / r), &x);
        if k.pgcd(&f, &h).deg() > 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{PrimeField, Rationals};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fp(p: u64) -> TowerField<PrimeField> {
        TowerField::new(PrimeField::new(p).unwrap())
    }

    fn tp(k: &TowerField<PrimeField>, v: &[u64]) -> TPoly<PrimeField> {
        k.poly(v.iter().map(|&c| k.from_i64(c as i64)).collect())
    }

    fn roots_of(fac: &Factorization<TElem<u64>>) -> Vec<TElem<u64>> {
        fac.factors.iter().filter(|(g, _)| g.deg() == 1).map(|(g, _)| g.coeffs()[0].clone()).collect()
    }

    #[test]
    fn small_prime_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k3 = fp(3);
        let fac = factor_residual(&k3, &tp(&k3, &[2, 0, 1]), &mut rng, 4).unwrap();
        assert_eq!(fac.factors.len(), 2);
        let fac = factor_residual(&k3, &tp(&k3, &[1, 0, 1]), &mut rng, 4).unwrap();
        assert_eq!(fac.factors, vec![(tp(&k3, &[1, 0, 1]), 1)]);
        let k7 = fp(7);
        let fac = factor_residual(&k7, &tp(&k7, &[5, 0, 1]), &mut rng, 4).unwrap();
        let mut r = roots_of(&fac);
        r.sort_by_key(|c| format!("{c:?}"));
        // y² − 2 = (y − 3)(y − 4): constant terms −3 ≡ 4 and −4 ≡ 3.
        assert_eq!(r, vec![TElem::Base(3), TElem::Base(4)]);
    }

    #[test]
    fn repeated_and_pth_power_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = fp(2);
        // (y+1)^4 (y²+y+1)
        let f = k.pmul(&k.ppow(&tp(&k, &[1, 1]), 4), &tp(&k, &[1, 1, 1]));
        let fac = factor_residual(&k, &f, &mut rng, 4).unwrap();
        assert_eq!(recombine(&k, &fac), f);
        assert!(fac.factors.contains(&(tp(&k, &[1, 1]), 4)));
    }

    #[test]
    fn factoring_over_an_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = fp(2);
        let f4 = k.extend(tp(&k, &[1, 1, 1])).unwrap();
        // y² + y + 1 splits over F₄.
        let f = f4.poly(vec![f4.one(), f4.one(), f4.one()]);
        let fac = factor_residual(&f4, &f, &mut rng, 4).unwrap();
        assert_eq!(fac.factors.len(), 2);
        assert_eq!(recombine(&f4, &fac), f);
    }

    #[test]
    fn rational_factoring() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = TowerField::new(Rationals);
        let q = |v: &[i64]| k.poly(v.iter().map(|&c| k.from_i64(c)).collect());
        // (x − 1/2)(x² + 1)(x² − 3)
        let f = k.pmul(&k.pmul(&k.poly(vec![k.from_base(BigRational::new((-1).into(), 2.into())), k.one()]), &q(&[1, 0, 1])), &q(&[-3, 0, 1]));
        let fac = factor_residual(&k, &f, &mut rng, 4).unwrap();
        assert_eq!(recombine(&k, &fac), f);
        assert_eq!(fac.factors.len(), 3);
        let quintic = q(&[2, 0, 0, 0, 0, 1]);
        assert!(matches!(factor_residual(&k, &quintic, &mut rng, 4), Err(Error::UnsupportedResidueField { .. })));
    }

    #[test]
    fn irreducibility_certificates() {
        let k = fp(3);
        assert!(is_irreducible(&k, &tp(&k, &[1, 0, 1]), 4).unwrap());
        assert!(!is_irreducible(&k, &tp(&k, &[2, 0, 1]), 4).unwrap());
        let k2 = fp(2);
        assert!(is_irreducible(&k2, &tp(&k2, &[1, 1, 0, 0, 1]), 4).unwrap());
        assert!(!is_irreducible(&k2, &tp(&k2, &[1, 0, 1, 0, 1]), 4).unwrap());
    }

    use proptest::prelude::*;
    proptest! {
        #[test]
        fn factors_recombine_and_are_irreducible(v in proptest::collection::vec(0u64..5, 2..9), seed in 0u64..1000) {
            let k = fp(5);
            let f = tp(&k, &v);
            prop_assume!(f.deg() >= 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fac = factor_residual(&k, &f, &mut rng, 4).unwrap();
            prop_assert_eq!(recombine(&k, &fac), f);
            for (g, _) in &fac.factors {
                prop_assert!(is_irreducible(&k, g, 4).unwrap());
            }
        }
    }
}
