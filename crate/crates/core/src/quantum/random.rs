//! Seeded random states, channels and one-way LOCC maps for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, dagger, inv_sqrt_pd, trace, CMat};
use super::{ChannelChoi, OneWayLocc};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Density matrix `G G† / Tr[G G†]` with `G` a `d × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * dagger(&g);
    let t = trace(&m).re;
    super::linalg::hermitize(&m.unscale(t))
}

pub fn random_state(d: usize, rank: usize, seed: u64) -> CMat {
    random_density(d, rank, &mut rng(seed))
}

/// Kraus operators of an isometry `G (G†G)^{-1/2}` cut into `n` blocks.
pub fn random_kraus<R: Rng + ?Sized>(d_in: usize, d_out: usize, n: usize, rng: &mut R) -> Vec<CMat> {
    let n = n.max(1);
    let g = ginibre(n * d_out, d_in, rng);
    let v = &g * inv_sqrt_pd(&(dagger(&g) * &g)).expect("Ginibre matrix has full column rank");
    (0..n).map(|k| v.rows(k * d_out, d_out).into_owned()).collect()
}

pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut R) -> ChannelChoi {
    ChannelChoi::from_kraus(&random_kraus(d_in, d_out, n_kraus, rng)).expect("isometry gives a channel")
}

/// Random unitary from the polar part of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    random_kraus(d, d, 1, rng).pop().expect("one block")
}

/// Instrument on `A` with `outcomes` branches, each with `kraus_per_outcome`
/// Kraus operators, followed by a random channel on `B` per outcome.
pub fn random_one_way_locc<R: Rng + ?Sized>(
    da: usize,
    db: usize,
    outcomes: usize,
    kraus_per_outcome: usize,
    rng: &mut R,
) -> OneWayLocc {
    let all = random_kraus(da, da, outcomes * kraus_per_outcome, rng);
    let instrument = all.chunks(kraus_per_outcome).map(|ch| ch.to_vec()).collect();
    let decoders = (0..outcomes).map(|_| random_kraus(db, db, kraus_per_outcome, rng)).collect();
    OneWayLocc { instrument, decoders }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::linalg::{identity, max_abs, min_eigenvalue};

    #[test]
    fn random_objects_are_valid() {
        let mut r = rng(1);
        let rho = random_density(4, 2, &mut r);
        assert!((trace(&rho).re - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&rho) > -1e-12);
        let ks = random_kraus(2, 3, 3, &mut r);
        let sum = ks.iter().fold(CMat::zeros(2, 2), |acc, k| acc + dagger(k) * k);
        assert!(max_abs(&(sum - identity(2))) < 1e-12);
        let u = random_unitary(3, &mut r);
        assert!(max_abs(&(dagger(&u) * &u - identity(3))) < 1e-12);
    }

    #[test]
    fn seeded_reproducibility() {
        assert_eq!(random_state(4, 4, 9), random_state(4, 4, 9));
        assert_ne!(random_state(4, 4, 9), random_state(4, 4, 10));
    }
}
