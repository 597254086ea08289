//! Seeded random molecules for sampled property checks.

use rand::seq::index::sample;
use rand::Rng;

use crate::molecule::{BasedSpace, Molecule};
use crate::rational::{ratio, Rational};

/// The coefficient alphabet for sampled molecules.
pub fn coefficient_set() -> [Rational; 6] {
    [
        ratio(1, 1),
        ratio(-1, 1),
        ratio(2, 1),
        ratio(-2, 1),
        ratio(1, 2),
        ratio(-1, 2),
    ]
}

const ATTEMPTS: usize = 32;

/// A molecule over the based points (including `*`) with support of size
/// 2..=`max_support`, all coefficients drawn from [`coefficient_set`].
/// Falls back to a dipole when rejection sampling does not close the sum.
pub fn sample_molecule<R: Rng>(rng: &mut R, b: &BasedSpace, max_support: usize) -> Molecule {
    let n = b.point_count();
    if n < 2 {
        return Molecule::zero();
    }
    let coeffs = coefficient_set();
    let top = max_support.clamp(2, n);
    for _ in 0..ATTEMPTS {
        let k = rng.gen_range(2..=top);
        let pts = sample(rng, n, k).into_vec();
        let mut sum = Rational::from_integer(0.into());
        let mut entries = Vec::with_capacity(k);
        for &p in &pts[..k - 1] {
            let c = coeffs[rng.gen_range(0..coeffs.len())].clone();
            sum += &c;
            entries.push((p, c));
        }
        let last = -sum;
        if coeffs.contains(&last) {
            entries.push((pts[k - 1], last));
            return Molecule::from_coeffs(entries).expect("coefficients sum to zero");
        }
    }
    let pts = sample(rng, n, 2).into_vec();
    let c = coeffs[rng.gen_range(0..coeffs.len())].clone();
    Molecule::dipole(pts[0], pts[1], c)
}
