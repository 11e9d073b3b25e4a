//! Inputs for the criterion benches.

use keypoly::chain::{KPoly, KeyChain};
use keypoly::fixtures::{alpha_jumps, int_poly};
use keypoly::poly::PolyOps;
use keypoly::scalars::PAdic;

/// The degree-12 chain over ℚ₂ and a probe of degree `deg` built from its
/// key polynomials, so every level has a nontrivial expansion.
pub fn expansion_workload(deg: usize) -> (KeyChain<PAdic>, KPoly<PAdic>) {
    let (k, c) = alpha_jumps();
    let mut h = k.pone();
    let mut i = c.top();
    while h.deg() < deg {
        let q = c.q(i);
        if h.deg() + q.deg() <= deg {
            h = k.pmul(&h, &k.padd(q, &int_poly(&k, &[1, 2])));
        } else if i == 0 {
            h = k.pmul(&h, &int_poly(&k, &[3, 1]));
        } else {
            i -= 1;
        }
    }
    (c, h)
}

#[cfg(test)]
mod tests {
    #[test]
    fn workload_has_requested_degree() {
        for d in [4, 13, 48] {
            assert_eq!(super::expansion_workload(d).1.deg(), d);
        }
    }
}
