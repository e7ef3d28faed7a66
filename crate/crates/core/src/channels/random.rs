//! Seeded random generators for channels, instruments, states and POVMs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::types::{choi_from_kraus, Channel, ChannelExtension, Instrument, KrausSet, StinespringIsometry};
use crate::error::{Error, Result};
use crate::linalg::{from_nalgebra, to_nalgebra, Operator, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Operator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary from the phase-corrected QR of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let qr = to_nalgebra(&ginibre(d, d, rng)).qr();
    let (q, r) = (qr.q(), qr.r());
    let q = from_nalgebra(&q);
    let phases: Vec<C64> = (0..d)
        .map(|i| {
            let v = r[(i, i)];
            if v.norm() > 0.0 {
                v / v.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    q.matmul(&Operator::diag(&phases))
}

/// First `d_in` columns of a Haar unitary on `d_out`.
pub fn random_isometry<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Result<Operator> {
    if d_out < d_in {
        return Err(Error::dims(format!("no isometry from dimension {d_in} into {d_out}")));
    }
    let u = haar_unitary(d_out, rng);
    Ok(Operator::from_fn(d_out, d_in, |r, c| u[(r, c)]))
}

/// Mixed state from the Hilbert–Schmidt ensemble.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = ginibre(d, d, rng);
    let rho = g.matmul(&g.adjoint());
    let tr = rho.trace().re;
    rho.scale(1.0 / tr).hermitian_part()
}

/// Haar-random unit vector as a `d × 1` column.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = ginibre(d, 1, rng);
    g.scale(1.0 / g.frobenius_norm())
}

/// `count` Kraus operators cut from a random isometry `C → K ⊗ out`.
pub fn random_kraus<R: Rng + ?Sized>(d_in: usize, d_out: usize, count: usize, rng: &mut R) -> Result<KrausSet> {
    let v = random_isometry(d_in, count * d_out, rng)?;
    let ops = (0..count).map(|k| Operator::from_fn(d_out, d_in, |o, c| v[(k * d_out + o, c)])).collect();
    KrausSet::new(ops)
}

pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, kraus: usize, rng: &mut R) -> Result<Channel> {
    let kraus = kraus.max(d_in.div_ceil(d_out));
    choi_from_kraus(&random_kraus(d_in, d_out, kraus, rng)?)
}

/// Instrument with `members` subchannels, each carrying the fewest Kraus
/// operators that still make the total an isometric cut.
pub fn random_instrument<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    members: usize,
    rng: &mut R,
) -> Result<Instrument> {
    let per = d_in.div_ceil(members * d_out).max(1);
    let k = random_kraus(d_in, d_out, members * per, rng)?;
    let groups: Vec<Vec<Operator>> = k.operators().chunks(per).map(|c| c.to_vec()).collect();
    Instrument::from_kraus_groups(&groups)
}

/// POVM `M_a = V_a† V_a` from the blocks of a random isometry `C → K ⊗ C`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, outcomes: usize, rng: &mut R) -> Result<Vec<Operator>> {
    let v = random_isometry(d, outcomes * d, rng)?;
    Ok((0..outcomes)
        .map(|a| {
            let block = Operator::from_fn(d, d, |r, c| v[(a * d + r, c)]);
            block.adjoint().matmul(&block).hermitian_part()
        })
        .collect())
}

/// Isometric extension from a Haar-random isometry `C → A ⊗ B`.
pub fn random_extension(d_c: usize, d_a: usize, d_b: usize, seed: u64) -> Result<ChannelExtension> {
    let mut rng = seeded_rng(seed);
    let v = random_isometry(d_c, d_a * d_b, &mut rng)?;
    Ok(StinespringIsometry::new(v, d_a, d_b)?.extension())
}
