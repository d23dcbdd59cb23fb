//! Chaotic maps that generate the movement selector `p`.
//!
//! Four one-dimensional maps on `[0, 1]` (circular, logistic, piecewise
//! linear, tent) plus a uniform-random source used for the plain whale
//! optimizer ablation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ChaosKind {
    Circular,
    Logistic,
    Piecewise,
    Tent,
    UniformRandom,
}

impl ChaosKind {
    pub const CHAOTIC: [ChaosKind; 4] = [
        ChaosKind::Circular,
        ChaosKind::Logistic,
        ChaosKind::Piecewise,
        ChaosKind::Tent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChaosKind::Circular => "circular",
            ChaosKind::Logistic => "logistic",
            ChaosKind::Piecewise => "piecewise",
            ChaosKind::Tent => "tent",
            ChaosKind::UniformRandom => "uniform-random",
        }
    }
}

impl fmt::Display for ChaosKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChaosKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(ChaosKind::Circular),
            "logistic" => Ok(ChaosKind::Logistic),
            "piecewise" => Ok(ChaosKind::Piecewise),
            "tent" => Ok(ChaosKind::Tent),
            "uniform-random" | "uniform" | "random" => Ok(ChaosKind::UniformRandom),
            other => Err(Error::arg(format!(
                "unknown chaos map '{other}' (expected circular, logistic, piecewise, tent or uniform-random)"
            ))),
        }
    }
}

/// Map parameters. Defaults are the usual fully chaotic settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChaosParams {
    pub circular_a: f64,
    pub circular_b: f64,
    pub logistic_a: f64,
    pub piecewise_a: f64,
}

impl Default for ChaosParams {
    fn default() -> Self {
        ChaosParams {
            circular_a: 0.5,
            circular_b: 0.2,
            logistic_a: 4.0,
            piecewise_a: 0.4,
        }
    }
}

impl ChaosParams {
    pub fn validate(&self) -> core::result::Result<(), String> {
        if !(self.logistic_a > 0.0 && self.logistic_a <= 4.0) {
            return Err(format!(
                "logistic a must lie in (0, 4], got {}",
                self.logistic_a
            ));
        }
        if !(self.piecewise_a > 0.0 && self.piecewise_a < 0.5) {
            return Err(format!(
                "piecewise a must lie in (0, 0.5), got {}",
                self.piecewise_a
            ));
        }
        if !(self.circular_a.is_finite() && self.circular_b.is_finite()) {
            return Err(String::from("circular map parameters must be finite"));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidState(format!("chaos value {p} outside [0, 1]")))
    }
}

/// One step of a deterministic map. `UniformRandom` has no deterministic
/// step and is rejected here; use [`ChaosState`] for it.
pub fn step(kind: ChaosKind, params: &ChaosParams, p: f64) -> Result<f64> {
    check_p(p)?;
    let next = match kind {
        ChaosKind::Circular => {
            let raw = p + params.circular_b
                - (params.circular_a / (2.0 * PI)) * libm::sin(2.0 * PI * p);
            let mut wrapped = raw % 1.0;
            if wrapped < 0.0 {
                wrapped += 1.0;
            }
            // a tiny negative remainder can round up to exactly 1.0
            if wrapped >= 1.0 {
                0.0
            } else {
                wrapped
            }
        }
        ChaosKind::Logistic => params.logistic_a * p * (1.0 - p),
        ChaosKind::Piecewise => {
            let a = params.piecewise_a;
            if p < a {
                p / a
            } else if p < 0.5 {
                (p - a) / (0.5 - a)
            } else if p < 1.0 - a {
                (1.0 - a - p) / (0.5 - a)
            } else {
                (1.0 - p) / a
            }
        }
        ChaosKind::Tent => {
            if p < 0.7 {
                p / 0.7
            } else {
                10.0 * (1.0 - p) / 3.0
            }
        }
        ChaosKind::UniformRandom => {
            return Err(Error::arg(
                "uniform-random has no deterministic step; use ChaosState",
            ))
        }
    };
    Ok(next.clamp(0.0, 1.0))
}

/// Current value of a chaos stream together with the map that advances it.
#[derive(Debug, Clone)]
pub struct ChaosState {
    kind: ChaosKind,
    params: ChaosParams,
    p: f64,
    rng: Option<ChaCha8Rng>,
}

impl ChaosState {
    /// `seed` only matters for `UniformRandom`; the chaotic maps ignore it.
    pub fn new(kind: ChaosKind, params: ChaosParams, initial_p: f64, seed: u64) -> Result<Self> {
        check_p(initial_p)?;
        let rng = (kind == ChaosKind::UniformRandom).then(|| substream(seed, 0, 0, Purpose::Chaos));
        Ok(ChaosState {
            kind,
            params,
            p: initial_p,
            rng,
        })
    }

    pub fn kind(&self) -> ChaosKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Advances the stream and returns the new `p`.
    pub fn advance(&mut self) -> Result<f64> {
        check_p(self.p)?;
        self.p = match &mut self.rng {
            Some(rng) => rng.random::<f64>(),
            None => step(self.kind, &self.params, self.p)?,
        };
        Ok(self.p)
    }

    /// The next `steps` values of the stream.
    pub fn orbit(&mut self, steps: usize) -> Result<Vec<f64>> {
        if steps == 0 {
            return Err(Error::arg("orbit needs at least one step"));
        }
        (0..steps).map(|_| self.advance()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(kind: ChaosKind, p: f64) -> ChaosState {
        ChaosState::new(kind, ChaosParams::default(), p, 42).unwrap()
    }

    #[test]
    fn tent_first_branch() {
        let p = state(ChaosKind::Tent, 0.3).advance().unwrap();
        assert!((p - 0.3 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn tent_second_branch_applies_at_and_above_point_seven() {
        let p = step(ChaosKind::Tent, &ChaosParams::default(), 0.85).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let p = step(ChaosKind::Tent, &ChaosParams::default(), 0.7).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_values() {
        assert!((state(ChaosKind::Logistic, 0.3).advance().unwrap() - 0.84).abs() < 1e-12);
        assert_eq!(state(ChaosKind::Logistic, 0.0).advance().unwrap(), 0.0);
    }

    #[test]
    fn circular_value() {
        let p = state(ChaosKind::Circular, 0.3).advance().unwrap();
        let hand = 0.5 - (0.5 / (2.0 * PI)) * (0.6 * PI).sin();
        assert!((p - hand).abs() < 1e-12);
        assert!((p - 0.4243).abs() < 1e-4);
    }

    #[test]
    fn piecewise_branches() {
        let pr = ChaosParams::default();
        assert!((step(ChaosKind::Piecewise, &pr, 0.2).unwrap() - 0.5).abs() < 1e-12);
        assert!((step(ChaosKind::Piecewise, &pr, 0.45).unwrap() - 0.5).abs() < 1e-12);
        assert!((step(ChaosKind::Piecewise, &pr, 0.55).unwrap() - 0.5).abs() < 1e-12);
        assert!((step(ChaosKind::Piecewise, &pr, 0.8).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(step(ChaosKind::Piecewise, &pr, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn tent_orbit() {
        let orbit = state(ChaosKind::Tent, 0.3).orbit(3).unwrap();
        let expect = [0.428571, 0.612245, 0.874636];
        for (got, want) in orbit.iter().zip(expect) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn logistic_fixed_point_orbit() {
        let orbit = state(ChaosKind::Logistic, 0.0).orbit(50).unwrap();
        assert!(orbit.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn uniform_stream_is_seeded() {
        let a = state(ChaosKind::UniformRandom, 0.3).orbit(1000).unwrap();
        let b = state(ChaosKind::UniformRandom, 0.3).orbit(1000).unwrap();
        assert_eq!(a, b);
        let c = ChaosState::new(ChaosKind::UniformRandom, ChaosParams::default(), 0.3, 43)
            .unwrap()
            .orbit(1000)
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn out_of_range_state_rejected() {
        assert!(matches!(
            ChaosState::new(ChaosKind::Tent, ChaosParams::default(), 1.5, 0),
            Err(Error::InvalidState(_))
        ));
        assert!(step(ChaosKind::Logistic, &ChaosParams::default(), -0.1).is_err());
        assert!(step(ChaosKind::Logistic, &ChaosParams::default(), f64::NAN).is_err());
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(state(ChaosKind::Tent, 0.3).orbit(0).is_err());
    }

    #[test]
    fn chaotic_maps_balance_the_two_movements() {
        for kind in ChaosKind::CHAOTIC {
            let orbit = state(kind, 0.3).orbit(10_000).unwrap();
            let low = orbit.iter().filter(|&&p| p < 0.5).count();
            let high = orbit.len() - low;
            assert!(low >= 1_000, "{kind}: only {low} values below 0.5");
            assert!(high >= 1_000, "{kind}: only {high} values at/above 0.5");
        }
    }

    #[test]
    fn chaotic_maps_ignore_seed() {
        for kind in ChaosKind::CHAOTIC {
            let a = ChaosState::new(kind, ChaosParams::default(), 0.3, 1).unwrap().orbit(100).unwrap();
            let b = ChaosState::new(kind, ChaosParams::default(), 0.3, 2).unwrap().orbit(100).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in ChaosKind::CHAOTIC.into_iter().chain([ChaosKind::UniformRandom]) {
            assert_eq!(kind.as_str().parse::<ChaosKind>().unwrap(), kind);
        }
        assert!("lorenz".parse::<ChaosKind>().is_err());
    }

    proptest! {
        #[test]
        fn every_map_stays_in_unit_interval(p in 0.0f64..=1.0, kind_ix in 0usize..4) {
            let kind = ChaosKind::CHAOTIC[kind_ix];
            let mut s = ChaosState::new(kind, ChaosParams::default(), p, 0).unwrap();
            for v in s.orbit(200).unwrap() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
