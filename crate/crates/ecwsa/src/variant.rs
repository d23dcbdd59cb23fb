//! Named algorithm variants and how command-line overrides combine with them.

use std::fmt;
use std::str::FromStr;

use ecwsa_core::{ChaosKind, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Circular map.
    Ecwsa1,
    /// Logistic map.
    Ecwsa2,
    /// Piecewise map.
    Ecwsa3,
    /// Tent map.
    Ecwsa4,
    /// Plain whale optimizer: uniform random `p`, no death, no local search.
    WoaBaseline,
    /// Everything comes from flags.
    Custom,
}

impl Variant {
    pub const ECWSA: [Variant; 4] = [Variant::Ecwsa1, Variant::Ecwsa2, Variant::Ecwsa3, Variant::Ecwsa4];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ecwsa1 => "ecwsa-1",
            Variant::Ecwsa2 => "ecwsa-2",
            Variant::Ecwsa3 => "ecwsa-3",
            Variant::Ecwsa4 => "ecwsa-4",
            Variant::WoaBaseline => "woa-baseline",
            Variant::Custom => "custom",
        }
    }

    /// The configuration a variant starts from before overrides.
    pub fn base_config(self) -> RunConfig {
        let mut cfg = RunConfig::default();
        match self {
            Variant::Ecwsa1 | Variant::Custom => cfg.chaos_map = ChaosKind::Circular,
            Variant::Ecwsa2 => cfg.chaos_map = ChaosKind::Logistic,
            Variant::Ecwsa3 => cfg.chaos_map = ChaosKind::Piecewise,
            Variant::Ecwsa4 => cfg.chaos_map = ChaosKind::Tent,
            Variant::WoaBaseline => {
                cfg.chaos_map = ChaosKind::UniformRandom;
                cfg.death = 0.0;
                cfg.local_search_enabled = false;
            }
        }
        cfg
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = match s.to_ascii_lowercase().as_str() {
            "ecwsa-1" | "ecwsa1" => Variant::Ecwsa1,
            "ecwsa-2" | "ecwsa2" => Variant::Ecwsa2,
            "ecwsa-3" | "ecwsa3" => Variant::Ecwsa3,
            "ecwsa-4" | "ecwsa4" => Variant::Ecwsa4,
            "woa-baseline" | "woa" => Variant::WoaBaseline,
            "custom" => Variant::Custom,
            other => {
                return Err(format!(
                    "unknown variant '{other}' (expected ecwsa-1..ecwsa-4, woa-baseline or custom)"
                ))
            }
        };
        Ok(v)
    }
}

/// Optional per-field overrides, one per tuning flag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub population: Option<usize>,
    pub iterations: Option<usize>,
    pub death: Option<f64>,
    pub base: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub knn_k: Option<usize>,
    pub folds: Option<usize>,
    pub mi_bins: Option<usize>,
    pub seed: Option<u64>,
    pub no_local_search: bool,
    pub chaos: Option<ChaosKind>,
    pub chaos_init: Option<f64>,
}

/// Applies overrides to a variant and validates the result. Flags that
/// would contradict what the variant stands for are reported alongside any
/// range violations.
pub fn resolve(variant: Variant, o: &Overrides) -> Result<RunConfig, Vec<String>> {
    let mut problems = Vec::new();
    let fixed_by_variant = !matches!(variant, Variant::Custom);
    if fixed_by_variant && o.chaos.is_some() {
        problems.push(format!("--chaos is fixed by variant {variant}; use --variant custom"));
    }
    if fixed_by_variant && o.no_local_search {
        problems.push(format!(
            "--no-local-search is fixed by variant {variant}; use --variant custom"
        ));
    }
    if variant == Variant::WoaBaseline && o.death.is_some() {
        problems.push("--death is fixed to 0 by variant woa-baseline".into());
    }

    let mut cfg = variant.base_config();
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                cfg.$field = v;
            }
        };
    }
    set!(initial_population, o.population);
    set!(max_iterations, o.iterations);
    set!(base, o.base);
    set!(alpha, o.alpha);
    set!(beta, o.beta);
    set!(knn_k, o.knn_k);
    set!(cv_folds, o.folds);
    set!(mi_bins, o.mi_bins);
    set!(seed, o.seed);
    set!(chaos_initial_p, o.chaos_init);
    if variant != Variant::WoaBaseline {
        set!(death, o.death);
    }
    if !fixed_by_variant {
        set!(chaos_map, o.chaos);
        cfg.local_search_enabled = !o.no_local_search;
    }
    if let Err(mut v) = cfg.validate() {
        problems.append(&mut v);
    }
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(problems)
    }
}
