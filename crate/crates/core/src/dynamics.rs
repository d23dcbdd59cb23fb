//! Position-update kernels and the movement dispatcher.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{clip, Whale};

/// Linearly decayed coefficient `a = 2 - 2t / max_iter`.
pub fn decay_a(t: usize, max_iter: usize) -> Result<f64> {
    if max_iter == 0 {
        return Err(Error::arg("max_iter must be positive"));
    }
    if t > max_iter {
        return Err(Error::arg("iteration index exceeds max_iter"));
    }
    Ok(2.0 - t as f64 * 2.0 / max_iter as f64)
}

fn same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::arg(alloc::format!(
            "{what}: length mismatch ({a} vs {b})"
        )))
    }
}

/// Logarithmic spiral toward the prey:
/// `x' = |prey - x| * e^(b l) * cos(2 pi l) + prey`, per dimension, clipped.
pub fn spiral_move(x: &[f64], prey: &[f64], b: f64, l: &[f64]) -> Result<Vec<f64>> {
    same_len(x.len(), prey.len(), "spiral_move position/prey")?;
    same_len(x.len(), l.len(), "spiral_move position/l")?;
    Ok(x
        .iter()
        .zip(prey)
        .zip(l)
        .map(|((&xj, &pj), &lj)| {
            let d = libm::fabs(pj - xj);
            clip(d * libm::exp(b * lj) * libm::cos(2.0 * PI * lj) + pj)
        })
        .collect())
}

/// Shrinking encircle toward `target`:
/// `D = |C * target - x|`, `x' = target - A * D`, per dimension, clipped.
///
/// With `target` the prey this is the exploitation move; with a random
/// population member it is the exploration move.
pub fn encircle_move(x: &[f64], target: &[f64], coef_a: f64, c: &[f64]) -> Result<Vec<f64>> {
    same_len(x.len(), target.len(), "encircle_move position/target")?;
    same_len(x.len(), c.len(), "encircle_move position/C")?;
    Ok(x
        .iter()
        .zip(target)
        .zip(c)
        .map(|((&xj, &tj), &cj)| {
            let d = libm::fabs(cj * tj - xj);
            clip(tj - coef_a * d)
        })
        .collect())
}

/// Random coefficients for one whale in one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsParams {
    /// Decayed scalar `a` for this iteration.
    pub a: f64,
    /// `A = 2 a u - a`, one scalar per whale.
    pub coef_a: f64,
    /// `C = 2 u`, per dimension.
    pub c: Vec<f64>,
    /// Spiral parameter, uniform in `[-1, 1]` per dimension.
    pub l: Vec<f64>,
    pub b: f64,
    /// Movement selector from the chaos stream.
    pub p: f64,
}

impl DynamicsParams {
    pub fn draw<R: Rng + ?Sized>(a: f64, b: f64, p: f64, dim: usize, rng: &mut R) -> Self {
        let u: f64 = rng.random();
        let coef_a = 2.0 * a * u - a;
        let c = (0..dim).map(|_| 2.0 * rng.random::<f64>()).collect();
        let l = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        DynamicsParams {
            a,
            coef_a,
            c,
            l,
            b,
            p,
        }
    }
}

/// Which branch a whale took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movement {
    /// Encircle the prey (`p < 0.5`, `|A| < 1`).
    Exploit,
    /// Encircle the population member at this index (`p < 0.5`, `|A| >= 1`).
    Explore(usize),
    /// Spiral toward the prey (`p >= 0.5`).
    Spiral,
}

/// Moves one whale and returns the rebinarized, repaired, unscored result.
pub fn dispatch_move<R: Rng + ?Sized>(
    whale: &Whale,
    prey: &Whale,
    population: &[Whale],
    params: &DynamicsParams,
    rng: &mut R,
) -> Result<(Whale, Movement)> {
    if population.is_empty() {
        return Err(Error::arg("dispatch_move needs a non-empty population"));
    }
    let (position, movement) = if params.p < 0.5 {
        if libm::fabs(params.coef_a) < 1.0 {
            (
                encircle_move(whale.position(), prey.position(), params.coef_a, &params.c)?,
                Movement::Exploit,
            )
        } else {
            let r = rng.random_range(0..population.len());
            (
                encircle_move(
                    whale.position(),
                    population[r].position(),
                    params.coef_a,
                    &params.c,
                )?,
                Movement::Explore(r),
            )
        }
    } else {
        (
            spiral_move(whale.position(), prey.position(), params.b, &params.l)?,
            Movement::Spiral,
        )
    };
    Ok((Whale::new(position, rng)?, movement))
}
